"""Front tracking for a bump carrying memory, watched through its conserved and dissipated quantities.

``configs/bump.cfg`` runs a three-piece variant through the command-line tool.
"""
from fractions import Fraction

from hystwave import GridParams, Triangle, curve_from_values, discretize_initial, evolve, zero_tails
from hystwave.analysis import energy_inequality, energy_production_bound, mass, total_variation_u, total_variation_z

unit = Triangle(1)
c1 = curve_from_values(unit, [0, Fraction(3, 5), Fraction(-2, 5), Fraction(3, 10)])
c2 = curve_from_values(unit, [0, Fraction(-7, 10), Fraction(1, 5), Fraction(-3, 5)])
data = zero_tails(unit, [-1, 0, 1], [c1.anchor, c2.anchor], [c1, c2])

times = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4)]
for n in (3, 5):
    traj = evolve(discretize_initial(data, n), GridParams(n, Fraction(1), Fraction(4)), times)
    print(f"grid level {n}: {len(traj.segments)} fronts, {len(traj.events)} interactions")
    print("   t     TV(u)    TV(z)    mass     energy lhs   grid bound")
    for t in times:
        s = traj.checkpoints[t]
        e = energy_inequality(traj, t).lhs if t else 0
        b = energy_production_bound(traj, t)
        print(f"  {float(t):4.1f}  {float(total_variation_u(s)):.4f}  {float(total_variation_z(s)):.4f}  "
              f"{float(mass(s)):.4f}  {float(e):.3e}   {float(b):.3e}")
    print()
