"""Sampling the twist inequalities around a tight vortex pair riding a level line.

The pair's center of vorticity stays near the level line C_c while the
separation vector spins fast. Over one level period T(c) the center makes
less than one turn on the inner boundary level and more than one on the
outer (the period decreases with c), and the separation makes more than nu
turns at the small radius a1 and fewer at b1. The certificate records all
four sampled margins.

    python demos/twist_certificate.py            # equal strengths
    python demos/twist_certificate.py 1.5 -0.5   # opposite signs
"""

import argparse

from vortexorbits import VortexConfig, make_unit_disk
from vortexorbits.twist import build_annulus, certify_twist, verify_twist


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("kappa", nargs="*", type=float, default=[0.5, 0.5])
    args = parser.parse_args()
    if len(args.kappa) != 2:
        parser.error("give two strengths or none")

    disk = make_unit_disk()
    pair = VortexConfig(*args.kappa)
    annulus = build_annulus(disk, pair, 0.1, 0.09, 0.11)
    print(f"level periods: T(0.09) = {annulus.inner.period:.4f}, T(0.1) = {annulus.T:.4f}, "
          f"T(0.11) = {annulus.outer.period:.4f}  ({annulus.direction})")

    cert = certify_twist(disk, pair, 0.1, 0.09, 0.11, annulus=annulus)
    print(f"a1 = {cert.a1:.5f}, b1 = {cert.b1:.5f}, nu = {cert.nu}")
    print(f"rot1 on |w1| = a1: {cert.rot1_inner[0]:.3f} .. {cert.rot1_inner[1]:.3f}")
    print(f"rot1 on |w1| = b1: {cert.rot1_outer[0]:.3f} .. {cert.rot1_outer[1]:.3f}")
    print(f"rot2 with center on C_0.09: {cert.rot2_c1[0]:.4f} .. {cert.rot2_c1[1]:.4f}")
    print(f"rot2 with center on C_0.11: {cert.rot2_d1[0]:.4f} .. {cert.rot2_d1[1]:.4f}")
    for name, margin in cert.margins.items():
        print(f"  margin {name:12s} {margin:+.4f}")
    print("positive" if cert.positive else "not positive")

    finer = verify_twist(disk, cert, cert.grids.doubled(), annulus=annulus)
    print(f"on doubled grids the smallest margin is {finer.min_margin:+.4f}")


if __name__ == "__main__":
    main()
