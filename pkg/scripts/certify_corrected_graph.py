"""Certify the corrected graph domain in C^3 with the patched field, q = 2.

Prints the aggregate report and the worst points per condition.
"""
import argparse
import time

import numpy as np

from weakzq import certify as C
from weakzq import domain as dom
from weakzq import upsilon as U


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ymax", type=float, default=70.0)
    ap.add_argument("--ny", type=int, default=57)
    ap.add_argument("--json", help="write the full report here")
    args = ap.parse_args()

    spec = dom.prop52()
    params = U.default_patch_params()
    print(f"patch parameters {params}")
    window = [(-8, 8), (-args.ymax, args.ymax), (-8, 8), (-8, 8), (0, 0), (0, 0)]
    t0 = time.perf_counter()
    sample = dom.boundary_sample(spec, window, [9, args.ny, 7, 7, 1, 1])
    rep = C.check_weak_zq(spec, U.upsilon_patched(spec, params), 2, sample)
    print(f"{len(sample)} points in {time.perf_counter() - t0:.1f} s")
    for k, v in rep.aggregate().items():
        print(f"  {k}: {v}")
    for name in ("c_i", "c_ii", "c_iii"):
        worst = min(rep.points, key=lambda r: getattr(r, name))
        z = np.array([complex(a, b) for a, b in worst.z])
        print(f"  worst {name} = {getattr(worst, name):.3e} at x={z[0].real:.2f} y={z[0].imag:.2f} |z2|={abs(z[1]):.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(rep.to_json())


if __name__ == "__main__":
    main()
