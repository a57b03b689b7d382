"""Level lines of the disk Robin function and how long a vortex takes to go around them.

A single vortex of strength K in the unit disk follows a level line of
h(z) = -log(1 - |z|^2) / (2 pi). The lines are circles, and the period has
the closed form 2 pi^2 exp(-2 pi c) / |K|, so the traced values can be read
against it directly. Small levels approach the harmonic-oscillator period
set by the Hessian of h at the center.

    python demos/level_lines.py
"""

import numpy as np

from vortexorbits import VortexConfig, make_unit_disk
from vortexorbits.levelset import hessian_period_limit, period_function, trace_level


def main():
    disk = make_unit_disk()
    pair = VortexConfig(0.5, 0.5)

    levels = np.array([0.02, 0.05, 0.1, 0.2, 0.4, 0.8])
    pf = period_function(disk, pair, levels)
    exact = 2 * np.pi**2 * np.exp(-2 * np.pi * levels)
    print("   c      radius     T traced       T closed form   rel. err")
    for c, orbit, T, Tx in zip(levels, pf.orbits, pf.T, exact):
        print(f"{c:5.2f}  {orbit.radii[0]:9.6f}  {T:13.9f}  {Tx:13.9f}   {abs(T / Tx - 1):.1e}")
    print(f"period function is {pf.direction}")

    limit = hessian_period_limit(disk, pair, [0.0, 0.0])
    for c in (1e-2, 1e-3, 1e-4):
        T = trace_level(disk, pair, c, n_samples=16).period
        print(f"T({c:g}) / small-orbit limit = {T / limit:.6f}")

    # strengths rescale time only
    fast = trace_level(disk, VortexConfig(2.0, 1.0), 0.1, n_samples=16)
    print(f"K = 3 at c = 0.1: T = {fast.period:.6f}  (K = 1 value / 3 = {exact[2] / 3:.6f})")


if __name__ == "__main__":
    main()
