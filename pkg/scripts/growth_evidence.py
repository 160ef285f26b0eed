"""Derivative growth along the boundary: corrected vs. uncorrected graph, dehomogenized quadric."""
import argparse
import json

from weakzq import certify as C
from weakzq import domain as dom


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--counts", type=int, default=5)
    args = ap.parse_args()
    cases = [
        ("corrected graph", dom.prop52(), (2, 3), 64.0),
        ("uncorrected graph", dom.prop52(corrected=False), (2, 3), 4.0),
        ("dehomogenized quadric", C.dehomogenized_domain(C.homogeneous_quadric(2, 1)), (2, 3), 125.0),
    ]
    for name, spec, orders, L0 in cases:
        g = C.uniform_cm_evidence(spec, orders, L0=L0, counts_per_axis=args.counts)
        print(f"== {name}")
        print(json.dumps(g.to_dict(), indent=1, default=float))


if __name__ == "__main__":
    main()
