"""Wave-front tracking on the dyadic grid of spacing ``2^-n``.

Initial data are rounded to the grid, every Riemann fan is replaced by a
staircase of ``2^-n`` shocks, and collisions are processed in time order by
solving the local Riemann problem between the outer states.  Values, positions
and speeds are exact ``Fraction`` objects so that coincident collisions are
detected without tolerances.
"""
from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .preisach import (
    FlipRegion,
    MemoryCurve,
    Triangle,
    apply_monotone,
    grid_ceil,
    grid_floor,
    output_w,
    quantize,
    virgin,
)
from .riemann import IncompatibleData, RiemannFan, RiemannData, incompatibility_message, rh_speed

DEFAULT_EVENT_CAP = 200_000
U_SHOCK = "u_shock"
Z_STATIONARY = "z_stationary"


class EventOverflow(RuntimeError):
    pass


class InternalInvariantViolation(RuntimeError):
    pass


class OutOfRange(ValueError):
    pass


def event_cap() -> int:
    return int(os.environ.get("HYSTWAVE_EVENT_CAP", DEFAULT_EVENT_CAP))


@dataclass(frozen=True)
class GridParams:
    n: int
    a: Fraction
    T_end: Fraction

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("grid level n must be >= 0")
        if not self.T_end > 0:
            raise ValueError("T_end must be positive")

    @property
    def h(self) -> Fraction:
        return Fraction(1, 2**self.n)


@dataclass(frozen=True)
class Cell:
    u: Fraction
    curve: MemoryCurve

    @property
    def w(self):
        return output_w(self.curve)


@dataclass(frozen=True)
class InitialData:
    """Piecewise-constant data: ``len(breaks) + 1`` cells, the outer two unbounded."""

    breaks: tuple
    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(self.breaks))
        object.__setattr__(self, "cells", tuple(self.cells))
        if len(self.cells) != len(self.breaks) + 1:
            raise ValueError("need exactly one more cell than breakpoints")
        if any(b <= a for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        for i, c in enumerate(self.cells):
            if c.curve.anchor != c.u:
                raise IncompatibleData(incompatibility_message(f"cell {i}", c.u, c.curve))


@dataclass(frozen=True)
class Front:
    position: Fraction
    speed: Fraction
    left_cell: int
    right_cell: int
    kind: str
    id: int = -1


@dataclass(frozen=True)
class PiecewiseState:
    cells: tuple
    fronts: tuple
    time: Fraction

    def intervals(self):
        """Yield ``(x_left, x_right, cell)``; the outer cells extend to infinity."""
        xs = [-math.inf] + [f.position for f in self.fronts] + [math.inf]
        for i, c in enumerate(self.cells):
            yield xs[i], xs[i + 1], c


@dataclass
class FrontSegment:
    """One front over its lifetime ``[t_birth, t_death)``."""

    id: int
    kind: str
    t_birth: Fraction
    x_birth: Fraction
    speed: Fraction
    left: Cell
    right: Cell
    t_death: Fraction | None = None
    psi: Fraction = Fraction(0)  # dissipation per unit length swept (right state -> left state)
    reverse_psi: Fraction = Fraction(0)  # same for the reversed flip

    def position(self, t):
        return self.x_birth + self.speed * (t - self.t_birth)

    def alive(self, t) -> bool:
        return self.t_birth <= t and (self.t_death is None or t < self.t_death)


@dataclass(frozen=True)
class Event:
    time: Fraction
    position: Fraction
    kind: str  # "u-u", "u-z", ...
    fronts_in: int
    fronts_out: int
    u_shocks_after: int


@dataclass
class Trajectory:
    params: GridParams
    initial: PiecewiseState
    segments: list = field(default_factory=list)
    events: list = field(default_factory=list)
    checkpoints: dict = field(default_factory=dict)


def _round_nearest(v, h):
    q = Fraction(v) / h
    lo = math.floor(q)
    frac = q - lo
    return (lo + (1 if frac > Fraction(1, 2) else 0)) * h


def _variation(values):
    return sum(abs(b - a) for a, b in zip(values, values[1:]))


def round_values(values: Sequence, n: int) -> list:
    """Round to multiples of ``2^-n`` without increasing total variation.

    Nearest rounding (ties toward -inf) is used when it keeps the variation;
    otherwise each value goes to its floor or ceiling, choosing the
    combination of least variation and, among those, least rounding error.
    """
    h = Fraction(1, 2**n)
    vals = [Fraction(v) for v in values]
    near = [_round_nearest(v, h) for v in vals]
    if _variation(near) <= _variation(vals):
        return near
    options = [sorted({grid_floor(v, n), grid_ceil(v, n)}) for v in vals]
    # cost = (variation, rounding error); back-pointers per choice
    best = [((Fraction(0), abs(o - vals[0])), None) for o in options[0]]
    table = [best]
    for i in range(1, len(vals)):
        row = []
        for o in options[i]:
            cands = [
                ((c[0] + abs(o - p), c[1] + abs(o - vals[i])), j)
                for j, ((c, _), p) in enumerate(zip(table[-1], options[i - 1]))
            ]
            row.append(min(cands))
        table.append(row)
    j = min(range(len(table[-1])), key=lambda k: table[-1][k][0])
    out = []
    for i in range(len(vals) - 1, -1, -1):
        out.append(options[i][j])
        j = table[i][j][1]
    return out[::-1]


def discretize_initial(data: InitialData, n: int) -> PiecewiseState:
    """Round the data to the level-``n`` grid and curve lattice, then set up the initial fronts."""
    us = round_values([c.u for c in data.cells], n)
    cells = []
    for u, c in zip(us, data.cells):
        curve, _ = apply_monotone(quantize(c.curve, n), u)
        cells.append(Cell(u, curve))
    return _initial_state(data.breaks, cells, n)


def _initial_state(breaks, cells, n):
    out_cells = [cells[0]]
    fronts = []
    next_id = itertools.count()
    for x, right in zip(breaks, cells[1:]):
        left = out_cells[-1]
        if left == right:
            continue
        for kind, speed, lc, rc in _split_states(left, right, n):
            idx = len(out_cells) - 1
            out_cells.append(rc)
            fronts.append(Front(Fraction(x), speed, idx, idx + 1, kind, next(next_id)))
    return PiecewiseState(tuple(out_cells), tuple(fronts), Fraction(0))


def _split_states(left: Cell, right: Cell, n: int):
    """Shock staircase ``[(kind, speed, left_cell, right_cell), ...]`` ordered left to right."""
    h = Fraction(1, 2**n)
    out = []
    z_star, _ = apply_monotone(right.curve, left.u)
    cur = Cell(left.u, z_star)
    if z_star != left.curve:
        out.append((Z_STATIONARY, Fraction(0), left, cur))
    step = h if right.u > left.u else -h
    steps = abs(right.u - left.u) / h
    if steps.denominator != 1:
        raise InternalInvariantViolation(f"jump {left.u} -> {right.u} is not one step of the level-{n} grid")
    for j in range(1, int(steps) + 1):
        u = left.u + j * step
        nxt = Cell(u, apply_monotone(right.curve, u)[0]) if u != right.u else right
        speed = rh_speed(cur.u, output_w(cur.curve), nxt.u, output_w(nxt.curve))
        out.append((U_SHOCK, speed, cur, nxt))
        cur = nxt
    speeds = [s for k, s, _, _ in out]
    if any(b <= a for a, b in zip(speeds, speeds[1:])):
        raise InternalInvariantViolation(f"fan split speeds not strictly increasing: {speeds}")
    return out


def split_fan(fan: RiemannFan, n: int) -> list:
    """Fronts (at ``x = 0``) replacing ``fan`` on the grid of level ``n``."""
    d = fan.data
    left, right = Cell(d.u_left, d.curve_left), Cell(d.u_right, d.curve_right)
    return [
        Front(Fraction(0), s, i, i + 1, kind, i)
        for i, (kind, s, _, _) in enumerate(_split_states(left, right, n))
    ]


def _collision_time(fa: FrontSegment, fb: FrontSegment):
    """Time at which ``fa`` (left) catches ``fb`` (right), or None."""
    if fa.speed <= fb.speed:
        return None
    t_ref = max(fa.t_birth, fb.t_birth)
    gap = fb.position(t_ref) - fa.position(t_ref)
    return t_ref + gap / (fa.speed - fb.speed)


def next_event(state: PiecewiseState, T_end=None):
    """Earliest crossing of adjacent fronts: ``(time, position, [front indices])`` or None."""
    best = None
    fr = state.fronts
    for i in range(len(fr) - 1):
        a, b = fr[i], fr[i + 1]
        if a.speed <= b.speed:
            continue
        t = state.time + (b.position - a.position) / (a.speed - b.speed)
        if T_end is not None and t > T_end:
            continue
        x = a.position + a.speed * (t - state.time)
        key = (t, x)
        if best is None or key < best[0]:
            best = (key, [i, i + 1])
        elif key == best[0] and i == best[1][-1]:
            best[1].append(i + 1)
    if best is None:
        return None
    (t, x), idx = best
    return t, x, idx


class _Node:
    __slots__ = ("seg", "prev", "next", "alive")

    def __init__(self, seg):
        self.seg, self.prev, self.next, self.alive = seg, None, None, True


def evolve(state0: PiecewiseState, params: GridParams, checkpoint_times: Sequence = ()) -> Trajectory:
    """Track all fronts of ``state0`` up to ``params.T_end``."""
    T_end = Fraction(params.T_end)
    traj = Trajectory(params, state0)
    ids = itertools.count()
    heap = []
    seq = itertools.count()

    def new_segment(kind, t, x, speed, left, right):
        seg = FrontSegment(next(ids), kind, t, x, speed, left, right)
        if kind == U_SHOCK:
            moved, region = apply_monotone(right.curve, left.u)
            if moved != left.curve:
                raise InternalInvariantViolation("shock left curve is not the monotone update of its right curve")
            seg.psi = region.psi()
            seg.reverse_psi = FlipRegion(region.polygon, -region.direction).psi()
        traj.segments.append(seg)
        return _Node(seg)

    def schedule(node):
        if node is None or node.next is None:
            return
        t = _collision_time(node.seg, node.next.seg)
        if t is None or t > T_end:
            return
        heapq.heappush(heap, (t, node.seg.position(t), next(seq), node, node.next))

    # build the initial linked list
    head = None
    prev = None
    for f in state0.fronts:
        node = new_segment(
            f.kind, Fraction(0), f.position, f.speed, state0.cells[f.left_cell], state0.cells[f.right_cell]
        )
        node.prev = prev
        if prev is None:
            head = node
        else:
            prev.next = node
        prev = node
    node = head
    while node is not None:
        schedule(node)
        node = node.next

    u_count = sum(1 for f in state0.fronts if f.kind == U_SHOCK)
    cap = event_cap()
    n = params.n
    while heap:
        t, x, _, na, nb = heapq.heappop(heap)
        if not (na.alive and nb.alive and na.next is nb):
            continue
        if len(traj.events) >= cap:
            raise EventOverflow(f"more than {cap} interactions; raise HYSTWAVE_EVENT_CAP if this is expected")
        first, last = na, nb
        while first.prev is not None and first.prev.seg.position(t) == x:
            first = first.prev
        while last.next is not None and last.next.seg.position(t) == x:
            last = last.next
        group = []
        node = first
        while True:
            group.append(node)
            if node is last:
                break
            node = node.next
        left, right = first.seg.left, last.seg.right
        out = _split_states(left, right, n) if left != right else []
        u_in = sum(1 for g in group if g.seg.kind == U_SHOCK)
        u_out = sum(1 for k, *_ in out if k == U_SHOCK)
        if u_out > u_in:
            raise InternalInvariantViolation(f"interaction at t={t}, x={x} creates u-shocks ({u_in} -> {u_out})")
        for g in group:
            g.alive = False
            g.seg.t_death = t
        before, after = first.prev, last.next
        prev = before
        new_nodes = []
        for kind, speed, lc, rc in out:
            node = new_segment(kind, t, x, speed, lc, rc)
            node.prev = prev
            if prev is not None:
                prev.next = node
            prev = node
            new_nodes.append(node)
        if prev is not None:
            prev.next = after
        if after is not None:
            after.prev = prev
        u_count += u_out - u_in
        kinds = "-".join(sorted({"u" if g.seg.kind == U_SHOCK else "z" for g in group}, reverse=True))
        traj.events.append(Event(t, x, kinds, len(group), len(out), u_count))
        schedule(before)
        for node in new_nodes:
            schedule(node)
    for tc in checkpoint_times:
        traj.checkpoints[Fraction(tc)] = snapshot(traj, tc)
    return traj


def snapshot(traj: Trajectory, t) -> PiecewiseState:
    """Right-continuous state at time ``t``."""
    t = Fraction(t)
    if t < 0 or t > traj.params.T_end:
        raise OutOfRange(f"t={t} outside [0, {traj.params.T_end}]")
    alive = [s for s in traj.segments if s.alive(t)]
    alive.sort(key=lambda s: (s.position(t), s.speed))
    if not alive:
        return PiecewiseState((traj.initial.cells[0],), (), t)
    cells = [alive[0].left]
    fronts = []
    for i, s in enumerate(alive):
        if s.left != cells[-1]:
            raise InternalInvariantViolation(f"inconsistent front states at t={t}")
        cells.append(s.right)
        fronts.append(Front(s.position(t), s.speed, i, i + 1, s.kind, s.id))
    return PiecewiseState(tuple(cells), tuple(fronts), t)


def constant_state(u, curve: MemoryCurve) -> PiecewiseState:
    return PiecewiseState((Cell(Fraction(u), curve),), (), Fraction(0))


def riemann_initial(fan_data: RiemannData, x0=0) -> InitialData:
    return InitialData(
        (Fraction(x0),),
        (Cell(Fraction(fan_data.u_left), fan_data.curve_left), Cell(Fraction(fan_data.u_right), fan_data.curve_right)),
    )


def zero_tails(triangle: Triangle, breaks, u_values, curves=None) -> InitialData:
    """Data with ``(0, virgin)`` outside ``[breaks[0], breaks[-1]]``.

    ``u_values`` has one entry per bounded piece; ``curves`` defaults to the
    virgin curve moved to each value.
    """
    v = virgin(triangle)
    if curves is None:
        curves = [apply_monotone(v, Fraction(u))[0] for u in u_values]
    cells = [Cell(Fraction(0), v)]
    cells += [Cell(Fraction(u), c) for u, c in zip(u_values, curves)]
    cells.append(Cell(Fraction(0), v))
    return InitialData(tuple(Fraction(b) for b in breaks), tuple(cells))
