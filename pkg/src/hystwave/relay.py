"""Two-threshold delayed relay and its dissipation functional.

A relay with thresholds ``rho1 < rho2`` outputs +1 or -1.  It switches up
when the input rises past ``rho2`` and down when it falls past ``rho1``;
in between it keeps its previous value.  Inputs are finite sample lists,
read either as continuous piecewise-linear signals or as right-continuous
piecewise-constant signals whose jumps are filled monotonically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np


class IncompatibleInitialState(ValueError):
    """The initial input value and relay sign violate the hysteresis region."""


class SwitchPolicy(str, Enum):
    """What happens when the input touches a threshold without crossing it."""

    NEVER_AT_TOUCH = "never-at-touch"
    ALWAYS_AT_TOUCH = "always-at-touch"


@dataclass(frozen=True)
class Threshold:
    rho1: float
    rho2: float

    def __post_init__(self):
        if not self.rho1 < self.rho2:
            raise ValueError(f"need rho1 < rho2, got ({self.rho1}, {self.rho2})")


@dataclass(frozen=True)
class PiecewiseMonotoneSignal:
    """Samples ``(t_i, v_i)`` with ``t_0 = 0``.

    ``mode="linear"`` interpolates linearly between samples; ``mode="constant"``
    holds ``v_i`` on ``[t_i, t_{i+1})`` and jumps at ``t_{i+1}``.
    """

    times: tuple
    values: tuple
    mode: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(self.times))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError("times and values must be non-empty and of equal length")
        if self.times[0] != 0:
            raise ValueError("first sample time must be 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("sample times must be strictly increasing")
        if self.mode not in ("linear", "constant"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def from_values(cls, values: Sequence, mode: str = "linear", dt=1):
        return cls(tuple(i * dt for i in range(len(values))), tuple(values), mode)

    @property
    def T(self):
        return self.times[-1]

    def value(self, t):
        """Right-continuous value at time ``t``."""
        times = self.times
        if t <= times[0]:
            return self.values[0]
        if t >= times[-1]:
            return self.values[-1]
        i = int(np.searchsorted(np.asarray(times, dtype=float), float(t), side="right")) - 1
        if self.mode == "constant" or t == times[i]:
            return self.values[i]
        t0, t1 = times[i], times[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def moves(self):
        """Yield ``(t_start, t_end, v_start, v_end)`` monotone pieces.

        Jumps of a piecewise-constant signal are zero-duration moves.
        """
        ts, vs = self.times, self.values
        for i in range(len(ts) - 1):
            if self.mode == "linear":
                yield ts[i], ts[i + 1], vs[i], vs[i + 1]
            else:
                yield ts[i + 1], ts[i + 1], vs[i], vs[i + 1]

    def reparametrize(self, new_times: Sequence):
        return PiecewiseMonotoneSignal(tuple(new_times), self.values, self.mode)

    def split(self, index: int):
        """Split at sample ``index``; the tail is shifted to start at time 0."""
        t_split = self.times[index]
        head = PiecewiseMonotoneSignal(self.times[: index + 1], self.values[: index + 1], self.mode)
        tail = PiecewiseMonotoneSignal(
            tuple(t - t_split for t in self.times[index:]), self.values[index:], self.mode
        )
        return head, tail


@dataclass(frozen=True)
class RelayEvent:
    time: float
    direction: int  # +1 up, -1 down
    value: float = field(default=None, compare=False)  # input right after the switch


def check_confinement(u, z: int, rho: Threshold) -> bool:
    return (z - 1) * (u - rho.rho2) >= 0 and (z + 1) * (u - rho.rho1) >= 0


def _crossing_time(t0, t1, v0, v1, level):
    if t1 == t0 or v1 == v0:
        return t0
    return t0 + (level - v0) * (t1 - t0) / (v1 - v0)


def relay_evolve(
    sig: PiecewiseMonotoneSignal,
    rho: Threshold,
    z0: int,
    policy: SwitchPolicy = SwitchPolicy.NEVER_AT_TOUCH,
):
    """Run one relay along ``sig``; return the final sign and the switch events."""
    if z0 not in (-1, 1):
        raise ValueError("relay sign must be -1 or +1")
    u_start = sig.values[0]
    if not check_confinement(u_start, z0, rho):
        raise IncompatibleInitialState(
            f"(u={u_start}, z={z0}) lies outside the closed region for thresholds {rho}"
        )
    touch = policy == SwitchPolicy.ALWAYS_AT_TOUCH
    z = z0
    events = []
    if touch:
        if z == -1 and u_start >= rho.rho2:
            z = 1
            events.append(RelayEvent(sig.times[0], 1, u_start))
        elif z == 1 and u_start <= rho.rho1:
            z = -1
            events.append(RelayEvent(sig.times[0], -1, u_start))
    for t0, t1, v0, v1 in sig.moves():
        if z == -1:
            hit = v1 >= rho.rho2 if touch else v1 > rho.rho2
            if hit:
                t = _crossing_time(t0, t1, v0, v1, rho.rho2)
                u_at = rho.rho2 if t1 != t0 else v1
                z = 1
                events.append(RelayEvent(t, 1, u_at))
        else:
            hit = v1 <= rho.rho1 if touch else v1 < rho.rho1
            if hit:
                t = _crossing_time(t0, t1, v0, v1, rho.rho1)
                u_at = rho.rho1 if t1 != t0 else v1
                z = -1
                events.append(RelayEvent(t, -1, u_at))
    return z, events


def relay_evolve_many(sig: PiecewiseMonotoneSignal, rho1, rho2, z0, record=None):
    """Vectorised :func:`relay_evolve` (never-at-touch) over arrays of thresholds.

    ``record(t, up_mask, down_mask)`` is called after each move that switches
    at least one relay.  Returns the final sign array.
    """
    z = np.array(z0, dtype=np.int8, copy=True)
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    u_start = float(sig.values[0])
    bad = ((z == -1) & (u_start > rho2)) | ((z == 1) & (u_start < rho1))
    if np.any(bad):
        raise IncompatibleInitialState(f"{int(bad.sum())} relays incompatible with u(0)={u_start}")
    for t0, _t1, _v0, v1 in sig.moves():
        v1 = float(v1)
        up = (z == -1) & (v1 > rho2)
        down = (z == 1) & (v1 < rho1)
        if up.any() or down.any():
            z[up] = 1
            z[down] = -1
            if record is not None:
                record(t0, up, down)
    return z


def psi_rho(events: Sequence[RelayEvent], rho: Threshold, interval=None) -> float:
    """Dissipation of one relay: ``sum 2*rho2`` over up-switches minus ``sum 2*rho1`` over down-switches.

    Events are counted on the half-open interval ``[t0, t1)``; ``None`` counts all.
    """
    total = 0
    for ev in events:
        if interval is not None and not (interval[0] <= ev.time < interval[1]):
            continue
        total += 2 * rho.rho2 if ev.direction > 0 else -2 * rho.rho1
    return total


def switching_work(events: Sequence[RelayEvent], interval=None) -> float:
    """``sum 2*u(t_event)*direction``, the left side of the dissipation inequality."""
    total = 0
    for ev in events:
        if interval is not None and not (interval[0] <= ev.time < interval[1]):
            continue
        total += 2 * ev.value * ev.direction
    return total
