"""Checks on computed solutions: variation, mass, energy, entropy, L1 distance."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from scipy.integrate import quad

from .preisach import MemoryCurve, Triangle, apply_monotone, distance, output_w, virgin
from .riemann import RiemannFan, evaluate_fan
from .wavefront import U_SHOCK, Cell, PiecewiseState, Trajectory, snapshot


class UnboundedSupport(ValueError):
    pass


# --------------------------------------------------------------------------
# variation and mass
# --------------------------------------------------------------------------


def total_variation_u(state: PiecewiseState):
    return sum((abs(b.u - a.u) for a, b in zip(state.cells, state.cells[1:])), Fraction(0))


def total_variation_z(state: PiecewiseState):
    return sum((distance(a.curve, b.curve) for a, b in zip(state.cells, state.cells[1:])), Fraction(0))


def mass(state: PiecewiseState):
    """``integral (u + w) dx``; the unbounded outer cells must carry zero density."""
    for side, c in (("left", state.cells[0]), ("right", state.cells[-1])):
        if c.u + c.w != 0:
            raise UnboundedSupport(f"{side} tail has u + w = {c.u + c.w}")
    return sum(
        ((x1 - x0) * (c.u + c.w) for x0, x1, c in state.intervals() if x0 != -math.inf and x1 != math.inf),
        Fraction(0),
    )


def _window_integral(state: PiecewiseState, f, lo, hi):
    total = Fraction(0)
    for x0, x1, c in state.intervals():
        a, b = max(x0, lo), min(x1, hi)
        if b > a:
            total += (b - a) * f(c)
    return total


def l1_components(s1: PiecewiseState, s2: PiecewiseState):
    """``(integral |u1 - u2| dx, integral d(z1, z2) dx)`` over the common refinement."""
    for end in (0, -1):
        a, b = s1.cells[end], s2.cells[end]
        if a.u != b.u or a.curve != b.curve:
            return math.inf, math.inf
    xs = sorted({f.position for f in s1.fronts} | {f.position for f in s2.fronts})
    p1, p2 = _positions(s1), _positions(s2)
    du = dz = Fraction(0)
    for x0, x1 in zip(xs, xs[1:]):
        mid = (x0 + x1) / 2
        a, b = s1.cells[bisect_right(p1, mid)], s2.cells[bisect_right(p2, mid)]
        du += (x1 - x0) * abs(a.u - b.u)
        dz += (x1 - x0) * distance(a.curve, b.curve)
    return du, dz


def l1_distance(s1: PiecewiseState, s2: PiecewiseState):
    """``integral |u1 - u2| + d(z1, z2) dx``."""
    du, dz = l1_components(s1, s2)
    return du + dz


def _positions(state: PiecewiseState) -> list:
    """Front positions in cell order; cell ``bisect_right(positions, x)`` holds ``x``."""
    return [f.position for f in sorted(state.fronts, key=lambda f: f.left_cell)]


# --------------------------------------------------------------------------
# energy
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyReport:
    kinetic_delta: Fraction  # 1/2 integral (u^2 - u0^2) dx
    psi_total: Fraction  # dissipation integrated over x and the relays
    flux: Fraction  # t (u_R^2 - u_L^2) / 2, zero for zero tails
    lhs: Fraction


def _energy(traj: Trajectory, t, reverse: bool) -> EnergyReport:
    t = Fraction(t)
    start, end = traj.initial, snapshot(traj, t)
    if reverse:
        start, end = end, start
    xs = [f.position for f in start.fronts] + [f.position for f in end.fronts]
    kinetic = Fraction(0)
    if xs:
        lo, hi = min(xs), max(xs)
        sq = lambda c: c.u * c.u / 2  # noqa: E731
        kinetic = _window_integral(end, sq, lo, hi) - _window_integral(start, sq, lo, hi)
    psi = Fraction(0)
    for seg in traj.segments:
        if seg.kind != U_SHOCK or seg.t_birth >= t:
            continue
        stop = t if seg.t_death is None else min(seg.t_death, t)
        swept = abs(seg.speed) * (stop - seg.t_birth)
        psi += swept * (seg.reverse_psi if reverse else seg.psi)
    u_l, u_r = traj.initial.cells[0].u, traj.initial.cells[-1].u
    flux = t * (u_r * u_r - u_l * u_l) / 2
    return EnergyReport(kinetic, psi, flux, kinetic + psi + flux)


def energy_inequality(traj: Trajectory, t) -> EnergyReport:
    """Left side of the energy inequality on ``(0, t)``; non-positive for admissible solutions."""
    return _energy(traj, t, reverse=False)


def time_reversed_energy(traj: Trajectory, t) -> EnergyReport:
    """Same functional for the trajectory run backwards from ``t`` to 0.

    Every front sweeps in the opposite direction, so each relay flip is
    undone; the result must be positive (negative control).
    """
    return _energy(traj, t, reverse=True)


def _branch_curvature(seg) -> Fraction:
    """``|w''| / 2`` on the branch spanned by a grid shock, from a midpoint sample."""
    u0, u1 = seg.left.u, seg.right.u
    mid = apply_monotone(seg.right.curve, (u0 + u1) / 2)[0]
    second = 4 * (output_w(seg.left.curve) + output_w(seg.right.curve) - 2 * output_w(mid)) / (u1 - u0) ** 2
    return abs(second) / 2


def shock_energy_production(traj: Trajectory, t):
    """Energy produced by the split-rarefaction shocks on ``(0, t)``.

    A grid shock of size ``h`` on a branch where ``w`` has curvature ``2 k``
    produces ``speed * k * h^3 / 6`` per unit time.
    """
    t = Fraction(t)
    total = Fraction(0)
    for seg in traj.segments:
        if seg.kind != U_SHOCK or seg.t_birth >= t:
            continue
        stop = t if seg.t_death is None else min(seg.t_death, t)
        jump = abs(seg.left.u - seg.right.u)
        total += (stop - seg.t_birth) * seg.speed * _branch_curvature(seg) * jump**3 / 6
    return total


def energy_production_bound(traj: Trajectory, t):
    """``Var(u0) * t * 4^-n / 3``: at most ``Var/h`` shocks, each producing ``<= h^3/3``."""
    h = traj.params.h
    return total_variation_u(traj.initial) * Fraction(t) * h * h / 3


# --------------------------------------------------------------------------
# entropy
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyProbe:
    k: Fraction
    k_hat: MemoryCurve

    def __post_init__(self):
        if self.k_hat.anchor != self.k:
            raise ValueError(f"probe curve anchor {self.k_hat.anchor} differs from k = {self.k}")

    def eta(self, u, curve):
        return abs(u - self.k) + distance(curve, self.k_hat)

    def q(self, u):
        return abs(u - self.k)


def probe_family(triangle: Triangle, ks: Sequence, curves: Sequence = ()) -> list:
    """Saturated-up, saturated-down and virgin-shifted probes at each ``k``.

    Each extra curve in ``curves`` contributes a probe with its own anchor as ``k``.
    """
    a = triangle.a
    v = virgin(triangle)
    out = []
    for k in ks:
        out.append(EntropyProbe(k, apply_monotone(apply_monotone(v, a)[0], k)[0]))
        out.append(EntropyProbe(k, apply_monotone(apply_monotone(v, -a)[0], k)[0]))
        out.append(EntropyProbe(k, apply_monotone(v, k)[0]))
    for c in curves:
        out.append(EntropyProbe(c.anchor, c))
    return out


def front_residual(left: Cell, right: Cell, speed, probe: EntropyProbe):
    """``(d_eta) speed - d_q`` across one front, jumps taken right minus left; >= 0 is admissible."""
    d_eta = probe.eta(right.u, right.curve) - probe.eta(left.u, left.curve)
    d_q = probe.q(right.u) - probe.q(left.u)
    return d_eta * speed - d_q


def _overlap(seg, t0, t1):
    stop = t1 if seg.t_death is None else min(seg.t_death, t1)
    return max(Fraction(0), stop - max(seg.t_birth, t0))


def entropy_residual(traj: Trajectory, probe: EntropyProbe, t_range=None):
    """Smallest per-front residual among fronts alive during ``t_range``."""
    t0, t1 = t_range if t_range is not None else (0, traj.params.T_end)
    vals = [
        front_residual(s.left, s.right, s.speed, probe) for s in traj.segments if _overlap(s, t0, t1) > 0
    ]
    return min(vals) if vals else Fraction(0)


def entropy_aggregate(traj: Trajectory, probe: EntropyProbe, t_range=None):
    """Per-front residuals weighted by each front's lifetime inside ``t_range``."""
    t0, t1 = t_range if t_range is not None else (0, traj.params.T_end)
    return sum(
        (front_residual(s.left, s.right, s.speed, probe) * _overlap(s, t0, t1) for s in traj.segments),
        Fraction(0),
    )


def fan_entropy(fan: RiemannFan, probe: EntropyProbe) -> float:
    """Entropy dissipation rate of an exact fan (>= 0 for entropy solutions).

    By self-similarity it equals ``-integral_0^inf (eta(xi) - eta_R) dxi - (q_R - q_L)``.
    """
    d = fan.data
    eta_r = float(probe.eta(d.u_right, d.curve_right))
    flux = float(probe.q(d.u_right) - probe.q(d.u_left))
    pieces = [p for p in fan.pieces if p.xi_hi != math.inf]
    total = 0.0
    for p in pieces:
        lo, hi = float(p.xi_lo), float(p.xi_hi)
        if p.kind == "constant":
            total += (hi - lo) * (float(probe.eta(p.u, apply_monotone(d.curve_right, p.u)[0])) - eta_r)
            continue
        br = p.branch

        def integrand(xi, br=br):
            u = (1.0 / xi - float(br.c0)) / float(br.c1)
            u = min(max(u, float(br.lo)), float(br.hi))
            return float(probe.eta(u, apply_monotone(d.curve_right, u)[0])) - eta_r

        points = []
        g_k = float(br.c0 + br.c1 * probe.k)
        if g_k > 0 and lo < 1.0 / g_k < hi:
            points.append(1.0 / g_k)
        val, _ = quad(integrand, lo, hi, points=points or None, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return -total - flux


def fan_variation(fan: RiemannFan, t, samples_per_piece: int = 8):
    """``(Var u, Var z)`` of the fan at time ``t`` from states sampled along ``x``.

    Samples include both sides of ``x = 0`` and every piece boundary, plus
    interior points of each rarefaction.
    """
    t = Fraction(t)
    d = fan.data
    states = [(d.u_left, d.curve_left), (d.u_left, fan.z_star)]
    for p in fan.pieces:
        xs = [p.xi_lo]
        if p.kind == "rarefaction":
            xs += [p.xi_lo + (p.xi_hi - p.xi_lo) * Fraction(j, samples_per_piece) for j in range(1, samples_per_piece)]
        for xi in xs:
            if xi > 0:
                x = xi * t
                states.append(evaluate_fan(fan, x / t))
    states.append((d.u_right, d.curve_right))
    tv_u = sum((abs(b[0] - a[0]) for a, b in zip(states, states[1:])), Fraction(0))
    tv_z = sum((distance(a[1], b[1]) for a, b in zip(states, states[1:])), Fraction(0))
    return tv_u, tv_z
