"""Rayleigh quotient of rescaled forms on the Heisenberg half-space; Q(R) R is constant."""
import argparse

import numpy as np

from weakzq import domain as dom
from weakzq import forms as F


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    u1 = F.random_test_form(np.random.default_rng(args.seed), 2, 1)
    rows = F.scaling_demo(dom.heisenberg(2), u1, args.radii, quad=F.QuadSpec(16))
    print(f"{'R':>6} {'Q(R)':>12} {'Q(R) R':>12}")
    for r in rows:
        print(f"{r.R:6.1f} {r.quotient:12.6e} {r.quotient * r.R:12.6e}")


if __name__ == "__main__":
    main()
