"""Preisach operator on the triangle with vertices (-a,-a), (a,a), (-a,a).

A configuration is stored as its memory curve: the alternating list of
surviving input extrema (``corners``) plus the current input (``anchor``),
all read relative to the virgin state.  The virgin anti-diagonal survives on
``[-a, -|first extremum|]`` and needs no explicit storage.

Geometry is exact.  Along the horizontal axis ``rho1`` the boundary of the
+1 region is a piecewise-linear height profile with slopes in {-1, 0, 1}, so
every area or moment reduces to an integral of a piecewise polynomial.
Every routine uses only ``+ - * /`` so ``fractions.Fraction`` inputs give
exact rational outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .relay import PiecewiseMonotoneSignal, Threshold


class OutOfTriangle(ValueError):
    pass


class TriangleMismatch(ValueError):
    pass


def exact(v):
    """Promote integers to ``Fraction`` so that arithmetic stays exact."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return Fraction(int(v))
    return v


@dataclass(frozen=True)
class Triangle:
    a: float

    def __post_init__(self):
        object.__setattr__(self, "a", exact(self.a))
        if not self.a > 0:
            raise ValueError("triangle half-width must be positive")

    @property
    def area(self):
        return 2 * self.a * self.a

    def contains(self, rho: Threshold) -> bool:
        a = self.a
        return -a <= rho.rho1 and rho.rho2 <= a


def _sign(x) -> int:
    return int(x > 0) - int(x < 0)


def _check_sequence(a, corners, anchor):
    if not -a <= anchor <= a:
        raise OutOfTriangle(f"anchor {anchor} outside [-{a}, {a}]")
    if not corners:
        return
    # exact differences: float and Fraction entries may be mixed
    items = [Fraction(x) for x in list(corners) + [anchor]]
    prev, prev_diff = -items[0], None
    for v in items:
        if not -a <= v <= a:
            raise OutOfTriangle(f"corner {v} outside [-{a}, {a}]")
        diff = v - prev
        if diff == 0:
            raise ValueError(f"degenerate memory sequence {items}")
        if prev_diff is not None:
            if _sign(diff) == _sign(prev_diff) or abs(diff) >= abs(prev_diff):
                raise ValueError(f"memory sequence {items} is not alternating and nested")
        prev, prev_diff = v, diff


@dataclass(frozen=True)
class MemoryCurve:
    """Staircase boundary between the +1 (lower left) and -1 regions."""

    triangle: Triangle
    anchor: float
    corners: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "anchor", exact(self.anchor))
        object.__setattr__(self, "corners", tuple(exact(c) for c in self.corners))
        _check_sequence(self.triangle.a, self.corners, self.anchor)

    @property
    def first_is_max(self) -> bool:
        if self.corners:
            return self.corners[0] > 0
        return self.anchor > 0

    @property
    def tail_end(self):
        """Right end of the surviving virgin anti-diagonal."""
        first = self.corners[0] if self.corners else self.anchor
        return max(-abs(first), -self.triangle.a)

    def profile(self):
        return _profile(self)

    def is_virgin(self) -> bool:
        return not self.corners and self.anchor == 0


# --------------------------------------------------------------------------
# piecewise-linear boundary profile
# --------------------------------------------------------------------------
# A piece is (x0, x1, slope, c): height(x) = slope * x + c on [x0, x1].


def _profile(curve: MemoryCurve):
    a = curve.triangle.a
    corners, anchor = curve.corners, curve.anchor
    items = corners + (anchor,)
    p = curve.tail_end
    pieces = []
    if p > -a:
        pieces.append((-a, p, -1, 0))
    x = p
    first_max = corners[0] > 0 if corners else None
    for i, v in enumerate(items):
        if i < len(corners):
            is_max = first_max if i % 2 == 0 else not first_max
        elif corners:
            is_max = not (first_max if (len(corners) - 1) % 2 == 0 else not first_max)
        else:
            is_max = anchor > 0 if anchor != 0 else None
        if is_max is None:
            continue
        if is_max:
            end = items[i + 1] if i + 1 < len(items) else v
            if end > x:
                pieces.append((x, end, 0, v))
            x = end
        else:
            x = v
    if anchor < a:
        pieces.append((anchor, a, 1, 0))
    return pieces


def _val(piece, x):
    return piece[2] * x + piece[3]


def _paired(prof1, prof2):
    """Yield ``(xa, xb, f1(xa), f1(xb), f2(xa), f2(xb))`` on the common refinement."""
    xs = sorted({q[0] for q in prof1} | {q[1] for q in prof1} | {q[0] for q in prof2} | {q[1] for q in prof2})
    i = j = 0
    for xa, xb in zip(xs, xs[1:]):
        while prof1[i][1] <= xa:
            i += 1
        while prof2[j][1] <= xa:
            j += 1
        p, q = prof1[i], prof2[j]
        yield xa, xb, _val(p, xa), _val(p, xb), _val(q, xa), _val(q, xb)


def _abs_linear_integral(d0, d1, length):
    if (d0 >= 0 and d1 >= 0) or (d0 <= 0 and d1 <= 0):
        return (abs(d0) + abs(d1)) * length / 2
    return (d0 * d0 + d1 * d1) * length / (2 * (abs(d0) + abs(d1)))


def positive_area(curve: MemoryCurve):
    """Lebesgue measure of the +1 region."""
    total = 0
    for x0, x1, s, c in _profile(curve):
        total += (s - 1) * (x1 * x1 - x0 * x0) / 2 + c * (x1 - x0)
    return total


def output_w(curve: MemoryCurve):
    return 2 * positive_area(curve) - curve.triangle.area


def distance(c1: MemoryCurve, c2: MemoryCurve):
    """L1 distance of the two sign fields, twice the symmetric-difference area."""
    if c1.triangle != c2.triangle:
        raise TriangleMismatch(f"{c1.triangle} vs {c2.triangle}")
    if c1 == c2:
        return 0 * c1.anchor
    total = 0
    for xa, xb, f0, f1, g0, g1 in _paired(_profile(c1), _profile(c2)):
        total += _abs_linear_integral(f0 - g0, f1 - g1, xb - xa)
    return 2 * total


def relay_state_at(curve: MemoryCurve, rho: Threshold) -> int:
    """Sign of the relay ``rho``; points on the staircase count as +1."""
    if not curve.triangle.contains(rho):
        raise OutOfTriangle(f"{rho} not in {curve.triangle}")
    x = rho.rho1
    heights = [_val(p, x) for p in _profile(curve) if p[0] <= x <= p[1]]
    return 1 if rho.rho2 <= max(heights) else -1


# --------------------------------------------------------------------------
# flip regions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FlipRegion:
    """Polygon swept by one monotone move; +1 means relays turned on."""

    polygon: tuple
    direction: int

    @property
    def empty(self) -> bool:
        return len(self.polygon) < 3

    def _sums(self):
        pts = self.polygon
        area = mx = my = 0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            cross = x0 * y1 - x1 * y0
            area += cross
            mx += (x0 + x1) * cross
            my += (y0 + y1) * cross
        return area / 2, mx / 6, my / 6

    def area(self):
        if self.empty:
            return 0
        return abs(self._sums()[0])

    def first_moments(self):
        """``(integral of rho1, integral of rho2)`` over the region."""
        if self.empty:
            return 0, 0
        area, mx, my = self._sums()
        if area < 0:
            mx, my = -mx, -my
        return mx, my

    def psi(self):
        """Relay dissipation carried by the region: ``int 2 rho2`` for +1, ``-int 2 rho1`` for -1."""
        mx, my = self.first_moments()
        return 2 * my if self.direction > 0 else -2 * mx

    def dw(self):
        """Change of the output caused by the flip."""
        return 2 * self.direction * self.area()


def _chain(prof, xl, xr):
    pts = []
    for x0, x1, s, c in prof:
        if x1 <= xl or x0 >= xr:
            continue
        lo, hi = max(x0, xl), min(x1, xr)
        for pt in ((lo, s * lo + c), (hi, s * hi + c)):
            if not pts or pts[-1] != pt:
                pts.append(pt)
    return pts


def flip_region(old: MemoryCurve, new: MemoryCurve, direction: int) -> FlipRegion:
    """Region between two curves, one of which dominates the other."""
    po, pn = _profile(old), _profile(new)
    xl = xr = None
    for xa, xb, f0, f1, g0, g1 in _paired(po, pn):
        if f0 != g0 or f1 != g1:
            xl = xa if xl is None else xl
            xr = xb
    if xl is None:
        return FlipRegion((), direction)
    upper, lower = (pn, po) if direction > 0 else (po, pn)
    poly = _chain(upper, xl, xr) + _chain(lower, xl, xr)[::-1]
    return FlipRegion(tuple(poly), direction)


# --------------------------------------------------------------------------
# operator
# --------------------------------------------------------------------------


def virgin(triangle: Triangle) -> MemoryCurve:
    return MemoryCurve(triangle, 0 * triangle.a, ())


def _wipe(corners: list, v, d):
    while corners:
        if len(corners) >= 2:
            if (d > 0 and v >= corners[-2]) or (d < 0 and v <= corners[-2]):
                del corners[-2:]
                continue
            break
        c = corners[0]
        if (d > 0 and v >= -c) or (d < 0 and v <= -c):
            corners.pop()
            continue
        break


def apply_monotone(curve: MemoryCurve, v):
    """Move the input monotonically from ``curve.anchor`` to ``v``."""
    a = curve.triangle.a
    if not -a <= v <= a:
        raise OutOfTriangle(f"input {v} outside [-{a}, {a}]")
    u = curve.anchor
    if v == u:
        return curve, FlipRegion((), 1)
    d = _sign(v - u)
    corners = list(curve.corners)
    prev = corners[-1] if corners else 0 * u
    if u != prev and _sign(u - prev) != d:
        corners.append(u)
    _wipe(corners, v, d)
    new = MemoryCurve(curve.triangle, v, tuple(corners))
    return new, flip_region(curve, new, d)


@dataclass(frozen=True)
class ConfigEventLog:
    moves: tuple = ()

    def __iter__(self):
        return iter(self.moves)

    def __len__(self):
        return len(self.moves)


def apply_signal(curve: MemoryCurve, sig: PiecewiseMonotoneSignal):
    """Fold monotone moves of ``sig`` over ``curve``.

    A first sample different from the anchor is a jump at time 0.  Each log
    entry carries the start time of its move.
    """
    moves = []
    if sig.values[0] != curve.anchor:
        curve, region = apply_monotone(curve, sig.values[0])
        moves.append((sig.times[0], region))
    for t0, _t1, _v0, v1 in sig.moves():
        curve, region = apply_monotone(curve, v1)
        if not region.empty:
            moves.append((t0, region))
    return curve, ConfigEventLog(tuple(moves))


def curve_from_values(triangle: Triangle, values: Sequence) -> MemoryCurve:
    """Curve produced from the virgin state by moving through ``values`` in turn."""
    curve = virgin(triangle)
    for v in values:
        curve, _ = apply_monotone(curve, v)
    return curve


def psi_integral(log: ConfigEventLog, interval=None):
    """Integral over the triangle of the relay dissipation for moves in ``[t0, t1)``."""
    total = 0
    for t, region in log:
        if interval is not None and not (interval[0] <= t < interval[1]):
            continue
        total += region.psi()
    return total


# --------------------------------------------------------------------------
# reduced memory sequences
# --------------------------------------------------------------------------


def _last_index(vals, target, start):
    idx = start
    for i in range(start, len(vals)):
        if vals[i] == target:
            idx = i
    return idx


def rms(sig: PiecewiseMonotoneSignal) -> list:
    """Alternating extrema not erased by later larger excursions.

    Extrema of a piecewise-monotone signal sit at samples, so the recursion
    runs on the sample values.  A leading entry equal to the initial value is
    dropped because it carries no memory; a constant signal gives ``[c]``.
    """
    vals = list(sig.values)
    last = len(vals) - 1
    top, bot = max(vals), min(vals)
    if top == bot:
        return [vals[-1]]
    t_top = _last_index(vals, top, 0)
    t_bot = _last_index(vals, bot, 0)
    idx = min(t_top, t_bot)
    take_max = idx == t_top
    out = [vals[idx]]
    while idx < last:
        take_max = not take_max
        tail = vals[idx:]
        target = max(tail) if take_max else min(tail)
        idx = _last_index(vals, target, idx)
        out.append(target)
    if len(out) > 1 and out[0] == vals[0]:
        out = out[1:]
    return out


def rms_to_lipschitz(seq: Sequence, T, u_start) -> PiecewiseMonotoneSignal:
    """Piecewise-linear signal on ``[0, T]`` through ``seq`` with one common slope."""
    pts = [u_start] + list(seq)
    total = sum(abs(b - a) for a, b in zip(pts, pts[1:]))
    if total == 0:
        return PiecewiseMonotoneSignal((0, T), (u_start, u_start))
    times, values, acc = [0], [u_start], 0
    for a, b in zip(pts, pts[1:]):
        if b == a:
            continue
        acc += abs(b - a)
        times.append(T * acc / total)
        values.append(b)
    return PiecewiseMonotoneSignal(tuple(times), tuple(values))


# --------------------------------------------------------------------------
# dyadic lattice
# --------------------------------------------------------------------------


def grid_floor(v, n: int) -> Fraction:
    return Fraction(math.floor(Fraction(v) * 2**n), 2**n)


def grid_ceil(v, n: int) -> Fraction:
    return Fraction(math.ceil(Fraction(v) * 2**n), 2**n)


def on_grid(v, n: int) -> bool:
    return (Fraction(v) * 2**n).denominator == 1


def on_lattice(curve: MemoryCurve, n: int) -> bool:
    return all(on_grid(v, n) for v in curve.corners + (curve.anchor,))


def quantize(curve: MemoryCurve, n: int) -> MemoryCurve:
    """Snap maxima down and minima up to ``k 2^-n`` and rebuild from the virgin state.

    The anchor is snapped like the extremum type it would become next.  The
    rebuild erases any extrema whose order broke under rounding.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    corners, anchor = curve.corners, curve.anchor
    snapped = []
    for i, v in enumerate(corners):
        is_max = (corners[0] > 0) == (i % 2 == 0)
        snapped.append(grid_floor(v, n) if is_max else grid_ceil(v, n))
    if corners:
        anchor_is_max = not ((corners[0] > 0) == ((len(corners) - 1) % 2 == 0))
    else:
        anchor_is_max = anchor > 0
    snapped.append(grid_floor(anchor, n) if anchor_is_max else grid_ceil(anchor, n))
    return curve_from_values(curve.triangle, snapped)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def format_number(v) -> str:
    """Exact decimal text for dyadic rationals (every float is one)."""
    f = Fraction(v)
    den = f.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        return f"{f.numerator}/{den}"
    if k == 0:
        return str(f.numerator)
    digits = abs(f.numerator) * 5**k
    s = str(digits).rjust(k + 1, "0")
    s = (s[:-k] + "." + s[-k:]).rstrip("0").rstrip(".")
    return ("-" if f < 0 else "") + s


def parse_number(text: str):
    """Dyadic values come back as exact ``Fraction``; anything else as ``float``."""
    text = text.strip()
    f = Fraction(text) if "/" in text else Fraction(Decimal(text))
    den = f.denominator
    if den & (den - 1) == 0:
        return f
    return float(text) if "/" not in text else f


def serialize(curve: MemoryCurve) -> str:
    corners = ", ".join(format_number(c) for c in curve.corners)
    flag = "true" if curve.first_is_max else "false"
    return f"{format_number(curve.triangle.a)}; {flag}; {corners}; {format_number(curve.anchor)}"


def deserialize(text: str) -> MemoryCurve:
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 4:
        raise ValueError(f"expected 'a; first-is-max; corners; anchor', got {text!r}")
    a = parse_number(parts[0])
    flag = parts[1].lower()
    if flag not in ("true", "false"):
        raise ValueError(f"first-is-max must be true/false, got {parts[1]!r}")
    corners = tuple(parse_number(c) for c in parts[2].split(",") if c.strip())
    curve = MemoryCurve(Triangle(a), parse_number(parts[3]), corners)
    if (corners or curve.anchor != 0) and curve.first_is_max != (flag == "true"):
        raise ValueError(f"first-is-max flag contradicts corners in {text!r}")
    return curve
