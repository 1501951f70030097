"""Brute-force Preisach backend: a dense grid of independently switched relays.

Used only to validate the exact staircase geometry; it costs O(N^2) per move.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .preisach import Triangle
from .relay import PiecewiseMonotoneSignal, relay_evolve_many


@dataclass
class RelayBank:
    triangle: Triangle
    N: int
    rho1: np.ndarray  # cell centres of active cells
    rho2: np.ndarray
    signs: np.ndarray

    @property
    def cell_area(self) -> float:
        return (2 * float(self.triangle.a) / self.N) ** 2


@dataclass
class BankLog:
    """Per-move dissipation sums, ``[(time, psi_contribution), ...]``."""

    moves: list = field(default_factory=list)


def bank_init(triangle: Triangle, N: int, generating_signal: PiecewiseMonotoneSignal | None = None):
    if N < 2:
        raise ValueError("a relay bank needs N >= 2 cells per side")
    a = float(triangle.a)
    h = 2 * a / N
    centres = -a + h * (np.arange(N) + 0.5)
    r1, r2 = np.meshgrid(centres, centres, indexing="ij")
    active = r1 < r2
    rho1, rho2 = r1[active], r2[active]
    signs = np.where(rho2 > -rho1, -1, 1).astype(np.int8)
    bank = RelayBank(triangle, N, rho1, rho2, signs)
    if generating_signal is not None:
        bank, _ = bank_evolve(bank, generating_signal)
    return bank


def bank_evolve(bank: RelayBank, sig: PiecewiseMonotoneSignal):
    """Evolve every relay along ``sig``; returns the new bank and its dissipation log."""
    log = BankLog()
    area = bank.cell_area

    def record(t, up, down):
        psi = 2.0 * bank.rho2[up].sum() - 2.0 * bank.rho1[down].sum()
        log.moves.append((t, psi * area))

    signs = relay_evolve_many(sig, bank.rho1, bank.rho2, bank.signs, record=record)
    return RelayBank(bank.triangle, bank.N, bank.rho1, bank.rho2, signs), log


def bank_w(bank: RelayBank) -> float:
    return float(bank.signs.sum(dtype=np.int64)) * bank.cell_area


def bank_psi(log: BankLog, interval=None) -> float:
    total = 0.0
    for t, psi in log.moves:
        if interval is None or interval[0] <= t < interval[1]:
            total += psi
    return total


def bank_signs_at(bank: RelayBank, rho1, rho2) -> int:
    """Sign of the cell whose centre is nearest ``(rho1, rho2)``."""
    k = int(np.argmin((bank.rho1 - rho1) ** 2 + (bank.rho2 - rho2) ** 2))
    return int(bank.signs[k])
