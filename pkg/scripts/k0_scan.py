"""Distance of the patched field's spectrum to 1 along the flat set {x = 0, z2 = 0}.

At y = 0 exactly one eigenvalue equals 1. Away from it the gap to 1
decays like y^-8 and is already below 1e-6 for |y| >= 10.
"""
import argparse

import numpy as np

from weakzq import certify as C
from weakzq import domain as dom
from weakzq import hermitian as H
from weakzq import upsilon as U


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ymax", type=float, default=15.0)
    ap.add_argument("--num", type=int, default=16)
    args = ap.parse_args()

    spec = dom.prop52()
    field = U.upsilon_patched(spec, U.default_patch_params())
    ys = np.concatenate([[0.0], np.linspace(args.ymax / args.num, args.ymax, args.num)])
    print(f"{'y':>8} {'gap to 1':>12} {'3y^2/D^2':>12} {'levi norm':>10}")
    for y in ys:
        z = np.array([1j * y, 0, 0])
        z[2] = 1j * spec.rho_at(z)
        w = H.eigvalsh(field(z))
        _, _, D = U.graph_partials(spec, z)
        bp = dom.frame_at(spec, z)
        print(f"{y:8.2f} {np.min(np.abs(w - 1)):12.3e} {3 * y**2 / D**2:12.3e} {np.abs(bp.levi).max():10.1e}")
    rep = C.check_k0_negative_result(spec, field, ys)
    print(rep.to_dict())


if __name__ == "__main__":
    main()
