"""Residual of the weighted energy identity under grid refinement."""
import argparse

import numpy as np

from weakzq import forms as F


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--forms", type=int, default=5)
    ap.add_argument("--weight", choices=["gauss", "model"], default="gauss")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    ts = [-3.0, 0.0, 1.0, 5.0]
    levels = (8, 16, 32)
    print("form      t  " + "  ".join(f"res@{N:<3d}" for N in levels) + "   ratio")
    for i in range(args.forms):
        f = F.random_test_form(rng, 2, 1)
        for r in F.mkh_check(f, ts, args.weight, levels=levels):
            res = "  ".join(f"{x:8.1e}" for x in r.residuals)
            print(f"{i:4d} {r.t:6.1f}  {res}  {r.ratio:6.1f}")


if __name__ == "__main__":
    main()
