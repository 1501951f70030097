"""Exact Riemann fan for u = 1/2 (after a rise from the virgin state) meeting the virgin state at u = 0.

Prints the pieces of the fan, then a few samples of u and w along x / t.
"""
from fractions import Fraction

from hystwave import RiemannData, Triangle, apply_monotone, evaluate_fan, output_w, solve_riemann, virgin

unit = Triangle(1)
v = virgin(unit)
left = apply_monotone(v, Fraction(1, 2))[0]
fan = solve_riemann(RiemannData(Fraction(1, 2), Fraction(0), left, v))

print("pieces (x/t range, kind):")
for p in fan.pieces:
    print(f"  [{float(p.xi_lo):.4f}, {float(p.xi_hi):.4f})  {p.kind}")

# On the virgin branch w = 2u^2, so characteristics travel at 1 / (1 + 4u).
print("\n  x/t       u        w       1/(1+4u)")
for xi in (Fraction(1, 4), Fraction(2, 5), Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(6, 5)):
    u, curve = evaluate_fan(fan, xi)
    print(f"  {float(xi):.3f}   {float(u):.4f}   {float(output_w(curve)):.4f}   {float(1 / (1 + 4 * u)):.4f}")
