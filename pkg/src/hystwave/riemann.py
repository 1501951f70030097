"""Exact Riemann solver for ``u_t + w_t + u_x = 0`` with Preisach output ``w``.

Moving the input monotonically from the right state flips a strip of relays
per unit of input.  With ``W(u)`` the strip length, ``w'(u) = 2 W(u)`` and the
equation becomes ``g(u) u_t + u_x = 0`` with slowness ``g = 1 + 2 W``.  On
every branch ``W`` is affine in ``u`` so ``g(u) = c0 + c1 u`` and the fan is
explicit: constant plateaus where ``g`` jumps, rarefactions
``u = (t/x - c0) / c1`` in between.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .preisach import MemoryCurve, apply_monotone, output_w


class IncompatibleData(ValueError):
    pass


class NoJump(ValueError):
    pass


class DegenerateFront(ValueError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class RiemannData:
    u_left: float
    u_right: float
    curve_left: MemoryCurve
    curve_right: MemoryCurve

    def __post_init__(self):
        for side, u, c in (("left", self.u_left, self.curve_left), ("right", self.u_right, self.curve_right)):
            if c.anchor != u:
                raise IncompatibleData(incompatibility_message(side, u, c))
        if self.curve_left.triangle != self.curve_right.triangle:
            raise IncompatibleData("left and right curves live on different triangles")


def incompatibility_message(side: str, u, curve: MemoryCurve) -> str:
    if u > curve.anchor:
        return (
            f"{side} state: u={u} exceeds the curve anchor {curve.anchor}; relays with "
            f"{curve.anchor} < rho2 <= {u} are -1, violating (z-1)(u-rho2) >= 0"
        )
    return (
        f"{side} state: u={u} is below the curve anchor {curve.anchor}; relays with "
        f"{u} <= rho1 < {curve.anchor} are +1, violating (z+1)(u-rho1) >= 0"
    )


@dataclass(frozen=True)
class Branch:
    """Input range ``[lo, hi]`` with slowness ``g(u) = c0 + c1 u``.

    ``kind`` is ``"strip"`` (strip pinned at ``pivot``) or ``"diagonal"``
    (strip bounded by the virgin anti-diagonal).
    """

    lo: float
    hi: float
    kind: str
    pivot: float | None
    c0: float
    c1: float

    def g(self, u):
        return self.c0 + self.c1 * u

    def u_at(self, slowness_inverse):
        """Input whose characteristic has ``x/t = slowness_inverse``."""
        return (Fraction(1) / slowness_inverse - self.c0) / self.c1


@dataclass(frozen=True)
class Breakpoints:
    increasing: bool  # fan raises the input from u_right (u_left > u_right)
    maxima: tuple
    minima: tuple
    base: str  # "vertical" (m_1 = u_r) or "horizontal" (M_0 = u_r)
    diagonal: bool
    branches: tuple  # ordered from u_right outward


def _left_edge(profile, y, anchor):
    """Leftmost ``rho1`` of the -1 relays at height ``y > anchor``, and whether it lies on the tail."""
    for x0, x1, s, c in profile:
        if x0 >= anchor:
            break
        if s == -1:
            if -y < x1:
                return max(-y, x0), -y >= x0
        elif c < y:
            return x0, False
    return anchor, False


def _column_piece(profile, x):
    for piece in profile:
        if piece[0] <= x < piece[1]:
            return piece
    raise OutOfRange(f"no profile piece at {x}")


def breakpoints(u_r, curve_right: MemoryCurve, u_l) -> Breakpoints:
    if curve_right.anchor != u_r:
        raise IncompatibleData(incompatibility_message("right", u_r, curve_right))
    prof = curve_right.profile()
    if u_l == u_r:
        return Breakpoints(u_l > u_r, (), (), "vertical", False, ())
    branches = []
    if u_l > u_r:
        cuts = {c for x0, x1, s, c in prof if s == 0 and x0 < u_r and u_r < c < u_l}
        cuts |= {-x1 for x0, x1, s, c in prof if s == -1 and u_r < -x1 < u_l}
        ys = [u_r] + sorted(cuts) + [u_l]
        for lo, hi in zip(ys, ys[1:]):
            mid = (lo + hi) / 2
            edge, on_tail = _left_edge(prof, mid, u_r)
            if on_tail:
                branches.append(Branch(lo, hi, "diagonal", None, 1, 4))
            else:
                branches.append(Branch(lo, hi, "strip", edge, 1 - 2 * edge, 2))
        maxima = tuple(ys[1:-1])
        minima = tuple(b.pivot for b in branches if b.kind == "strip")
        base = "vertical" if branches[0].kind == "strip" and branches[0].pivot == u_r else "horizontal"
    else:
        cuts = {x for x0, x1, s, c in prof for x in (x0, x1) if x1 <= u_r and u_l < x < u_r}
        xs = [u_r] + sorted(cuts, reverse=True) + [u_l]
        for hi, lo in zip(xs, xs[1:]):
            x0, x1, s, c = _column_piece(prof, (lo + hi) / 2)
            if s == -1:
                branches.append(Branch(lo, hi, "diagonal", None, 1, -4))
            else:
                branches.append(Branch(lo, hi, "strip", c, 1 + 2 * c, -2))
        minima = tuple(xs[1:-1])
        maxima = tuple(b.pivot for b in branches if b.kind == "strip")
        base = "horizontal" if branches[0].kind == "strip" and branches[0].pivot == u_r else "vertical"
    diagonal = any(b.kind == "diagonal" for b in branches)
    return Breakpoints(u_l > u_r, maxima, minima, base, diagonal, tuple(branches))


def flux_slowness(u, bp: Breakpoints):
    """``g(u) >= 1``; the characteristic speed is ``1/g``."""
    for br in bp.branches:
        if br.lo <= u <= br.hi:
            return br.g(u)
    raise OutOfRange(f"u={u} outside the fan range")


@dataclass(frozen=True)
class FanPiece:
    xi_lo: float  # x/t at the left edge
    xi_hi: float  # x/t at the right edge (inf for the last piece)
    kind: str  # "constant" or "rarefaction"
    u: float | None = None
    branch: Branch | None = None

    def u_at(self, xi):
        return self.u if self.kind == "constant" else self.branch.u_at(xi)


@dataclass(frozen=True)
class RiemannFan:
    data: RiemannData
    breakpoints: Breakpoints
    pieces: tuple
    z_star: MemoryCurve  # curve just right of x = 0
    stationary_jump: bool

    @property
    def curve_right(self):
        return self.data.curve_right


def solve_riemann(data: RiemannData) -> RiemannFan:
    u_l, u_r = data.u_left, data.u_right
    bp = breakpoints(u_r, data.curve_right, u_l)
    z_star, _ = apply_monotone(data.curve_right, u_l)
    stationary = z_star != data.curve_left
    inf = float("inf")
    if u_l == u_r:
        return RiemannFan(data, bp, (FanPiece(0, inf, "constant", u=u_r),), z_star, stationary)
    up = u_l > u_r
    pieces = []
    outward = list(reversed(bp.branches))
    first = outward[0]
    xi = Fraction(1) / first.g(u_l)
    pieces.append(FanPiece(0, xi, "constant", u=u_l))
    for k, br in enumerate(outward):
        near = br.lo if up else br.hi
        xi_end = Fraction(1) / br.g(near)
        assert br.g(near) >= 1, "slowness below 1: data not compatible"
        if xi_end > xi:
            pieces.append(FanPiece(xi, xi_end, "rarefaction", branch=br))
        xi = xi_end
        if k + 1 < len(outward):
            xi_next = Fraction(1) / outward[k + 1].g(near)
            if xi_next > xi:
                pieces.append(FanPiece(xi, xi_next, "constant", u=near))
            xi = xi_next
    pieces.append(FanPiece(xi, inf, "constant", u=u_r))
    return RiemannFan(data, bp, tuple(pieces), z_star, stationary)


def rh_speed(u_minus, w_minus, u_plus, w_plus):
    """Front speed ``du / (du + dw)`` from the extended Rankine-Hugoniot condition."""
    du = u_minus - u_plus
    dw = w_minus - w_plus
    if du == 0 and dw == 0:
        raise NoJump("no jump in u or w")
    if du + dw == 0:
        raise DegenerateFront(f"du + dw = 0 with du = {du}")
    if isinstance(du, (int, Fraction)) and isinstance(dw, (int, Fraction)):
        return Fraction(du) / (du + dw)
    return du / (du + dw)


def evaluate_fan(fan: RiemannFan, xi, curve_right: MemoryCurve | None = None):
    """State ``(u, curve)`` at ``x/t = xi``; non-positive ``xi`` gives the left state."""
    if xi <= 0:
        return fan.data.u_left, fan.data.curve_left
    base = fan.curve_right if curve_right is None else curve_right
    for piece in fan.pieces:
        if piece.xi_lo <= xi <= piece.xi_hi:
            u = piece.u_at(xi)
            return u, apply_monotone(base, u)[0]
    raise OutOfRange(f"x/t = {xi} not covered by the fan")


def sample_fan(fan: RiemannFan, xis):
    """Rows ``(x/t, u, w)``."""
    rows = []
    for xi in xis:
        u, curve = evaluate_fan(fan, xi)
        rows.append((xi, u, output_w(curve)))
    return rows
