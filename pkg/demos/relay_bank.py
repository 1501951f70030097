"""Dense relay bank against the exact staircase geometry on a random signal.

The bank error in the output should shrink roughly like 1/N.
"""
import random

from hystwave import Triangle
from hystwave.cli import backend_errors, random_signal

unit = Triangle(1)
rng = random.Random(7)
signals = [random_signal(rng, 1.0) for _ in range(10)]
print("    N   max |dw|    max |dpsi|   8/N")
for N in (125, 250, 500, 1000):
    errs = backend_errors(signals, unit, N)
    print(f"  {N:4d}  {max(e[0] for e in errs):.5f}   {max(e[1] for e in errs):.5f}    {8 / N:.5f}")
