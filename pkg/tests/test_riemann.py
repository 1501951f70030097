import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import UNIT, rand_curve
from hystwave.preisach import apply_monotone, curve_from_values, distance, output_w, virgin
from hystwave.riemann import (
    DegenerateFront,
    IncompatibleData,
    NoJump,
    OutOfRange,
    RiemannData,
    breakpoints,
    evaluate_fan,
    flux_slowness,
    rh_speed,
    solve_riemann,
)

V = virgin(UNIT)
HALF = apply_monotone(V, F(1, 2))[0]


def virgin_fan():
    return solve_riemann(RiemannData(F(1, 2), F(0), HALF, V))


def test_virgin_breakpoints_single_diagonal_branch():
    bp = breakpoints(0, V, F(1, 2))
    assert bp.maxima == () and bp.diagonal
    assert flux_slowness(F(1, 4), bp) == 2


def test_staircase_breakpoints():
    # maxima 0.8 > 0.5 > 0.2 above the anchor, minima -0.6 < -0.3 < -0.1 between them
    c = curve_from_values(UNIT, [F(4, 5), F(-3, 5), F(1, 2), F(-3, 10), F(1, 5), F(-1, 10)])
    bp = breakpoints(c.anchor, c, F(3, 5))
    assert bp.maxima == (F(1, 5), F(1, 2))
    assert bp.minima == (F(-1, 10), F(-3, 10), F(-3, 5))
    assert bp.base == "vertical" and not bp.diagonal
    assert flux_slowness(F(-1, 10), bp) == 1
    assert flux_slowness(F(2, 5), bp) == 1 + 2 * (F(2, 5) + F(3, 10))
    with pytest.raises(OutOfRange):
        flux_slowness(F(7, 10), bp)


def test_trivial_breakpoints():
    assert breakpoints(F(1, 2), HALF, F(1, 2)).branches == ()


def test_breakpoints_reject_mismatched_anchor():
    with pytest.raises(IncompatibleData):
        breakpoints(F(1, 4), HALF, F(1, 2))


def test_virgin_fan_pieces():
    fan = virgin_fan()
    (c0, rare, c1) = fan.pieces
    assert (c0.kind, c0.xi_lo, c0.xi_hi, c0.u) == ("constant", 0, F(1, 3), F(1, 2))
    assert (rare.kind, rare.xi_lo, rare.xi_hi) == ("rarefaction", F(1, 3), 1)
    assert (c1.kind, c1.xi_lo, c1.u) == ("constant", 1, 0)
    assert not fan.stationary_jump
    for xi in (F(2, 5), F(1, 2), F(3, 4), F(9, 10)):
        u, curve = evaluate_fan(fan, xi)
        assert u == (1 / xi - 1) / 4
        assert output_w(curve) == 2 * u * u


def test_virgin_fan_midpoint():
    u, curve = evaluate_fan(virgin_fan(), F(1, 2))
    assert u == F(1, 4) and output_w(curve) == F(1, 8)


def test_virgin_fan_matches_characteristics_from_finite_differences():
    # independent construction: speed 1 / (1 + dw/du) with dw/du by central differences
    fan = virgin_fan()
    eps = 1e-6
    for u in np.linspace(0.02, 0.48, 12):
        dw = (float(output_w(apply_monotone(V, u + eps)[0])) - float(output_w(apply_monotone(V, u - eps)[0]))) / (2 * eps)
        xi = 1 / (1 + dw)
        got, _ = evaluate_fan(fan, F(xi))
        assert float(got) == pytest.approx(u, abs=1e-6)


def test_far_field_and_boundary_continuity():
    fan = virgin_fan()
    u, c = evaluate_fan(fan, F(1000))
    assert u == 0 and c == V
    for p, q in zip(fan.pieces, fan.pieces[1:]):
        assert p.u_at(p.xi_hi) == q.u_at(q.xi_lo)


def test_equal_states_give_constant_fan():
    fan = solve_riemann(RiemannData(F(1, 2), F(1, 2), HALF, HALF))
    assert len(fan.pieces) == 1 and not fan.stationary_jump


def test_equal_inputs_different_curves_give_stationary_jump():
    other = curve_from_values(UNIT, [F(9, 10), F(1, 2)])
    fan = solve_riemann(RiemannData(F(1, 2), F(1, 2), other, HALF))
    assert fan.stationary_jump and len(fan.pieces) == 1
    assert rh_speed(F(1, 2), output_w(other), F(1, 2), output_w(HALF)) == 0


def test_incompatible_data_message_names_inequality():
    with pytest.raises(IncompatibleData, match="rho2"):
        RiemannData(F(3, 5), F(0), HALF, V)


def test_rh_speed_examples():
    assert rh_speed(1, 2, 0, 0) == F(1, 3)
    assert rh_speed(0, 1, 0, -1) == 0
    with pytest.raises(NoJump):
        rh_speed(0, 1, 0, 1)
    with pytest.raises(DegenerateFront):
        rh_speed(1, 0, 0, 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(-20, 20), st.integers(0, 10**6), st.integers(2, 8))
def test_grid_shock_speed_equals_branch_characteristic(j, seed, n):
    # strip branch pinned at m: the w-jump of one grid step is 2 (u_mid - m) h
    rng = random.Random(seed)
    m = F(rng.randint(-50, 0), 100)
    h = F(1, 2**n)
    u0 = m + abs(j) * h
    u1 = u0 + h
    dw = 2 * ((u0 + u1) / 2 - m) * h
    assert rh_speed(u1, dw, u0, 0) == 1 / (1 + 2 * ((u0 + u1) / 2 - m))


def _random_data(rng):
    cl, cr = rand_curve(rng), rand_curve(rng)
    return RiemannData(cl.anchor, cr.anchor, cl, cr)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_fan_is_monotone_self_similar_and_conserves_variation(seed):
    rng = random.Random(seed)
    d = _random_data(rng)
    fan = solve_riemann(d)
    xis = sorted({F(rng.randint(1, 2000), 1000) for _ in range(40)})
    us = [evaluate_fan(fan, xi)[0] for xi in xis]
    diffs = [b - a for a, b in zip(us, us[1:])]
    assert all(x <= 0 for x in diffs) or all(x >= 0 for x in diffs)
    lo, hi = sorted((d.u_left, d.u_right))
    assert all(lo <= u <= hi for u in us)
    bounds = [p.xi_lo for p in fan.pieces]
    assert all(b > a for a, b in zip(bounds, bounds[1:]))
    lam = F(rng.randint(1, 50), 7)
    x, t = F(rng.randint(1, 100), 37), F(rng.randint(1, 100), 41)
    assert evaluate_fan(fan, (lam * x) / (lam * t)) == evaluate_fan(fan, x / t)
    # the curve field is a monotone path from the post-jump curve to the right curve
    path = [fan.z_star] + [evaluate_fan(fan, xi)[1] for xi in xis + [F(10**6)]]
    assert sum(distance(a, b) for a, b in zip(path, path[1:])) == distance(fan.z_star, d.curve_right)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_adjacent_constant_states_move_with_neighbouring_characteristic(seed):
    rng = random.Random(seed)
    fan = solve_riemann(_random_data(rng))
    for p in fan.pieces:
        if p.kind == "rarefaction":
            for xi in (p.xi_lo, p.xi_hi):
                u = p.u_at(xi)
                assert 1 / p.branch.g(u) == xi
                assert p.branch.g(u) >= 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_random_fans_match_characteristics_from_finite_differences(seed):
    rng = random.Random(seed)
    d = _random_data(rng)
    if d.u_left == d.u_right:
        return
    fan = solve_riemann(d)
    cuts = [float(x) for b in fan.breakpoints.branches for x in (b.lo, b.hi)]
    lo, hi = sorted((float(d.u_left), float(d.u_right)))
    eps = 1e-7
    for u in np.linspace(lo, hi, 9)[1:-1]:
        if min(abs(u - c) for c in cuts) < 1e-4:
            continue
        w = lambda v: float(output_w(apply_monotone(d.curve_right, v)[0]))  # noqa: E731
        slope = (w(u + eps) - w(u - eps)) / (2 * eps)
        got, _ = evaluate_fan(fan, F(1 / (1 + abs(slope))))
        assert float(got) == pytest.approx(u, abs=1e-5)
