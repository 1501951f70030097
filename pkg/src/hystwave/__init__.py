"""Preisach hysteresis in a scalar conservation law: exact operators, Riemann fans and wave-front tracking."""
from .preisach import MemoryCurve, Triangle, apply_monotone, apply_signal, curve_from_values, distance, output_w, virgin
from .relay import PiecewiseMonotoneSignal, Threshold, relay_evolve
from .riemann import RiemannData, evaluate_fan, rh_speed, solve_riemann
from .wavefront import GridParams, InitialData, discretize_initial, evolve, snapshot, zero_tails

__all__ = [
    "GridParams",
    "InitialData",
    "MemoryCurve",
    "PiecewiseMonotoneSignal",
    "RiemannData",
    "Threshold",
    "Triangle",
    "apply_monotone",
    "apply_signal",
    "curve_from_values",
    "discretize_initial",
    "distance",
    "evaluate_fan",
    "evolve",
    "output_w",
    "relay_evolve",
    "rh_speed",
    "snapshot",
    "solve_riemann",
    "virgin",
    "zero_tails",
]
