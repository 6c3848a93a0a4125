"""Exact point-mass partial sums for the binomial kernel k(x, y) = C(x + y, x).

Every point-mass diverges: the partial sums are sums of squared binomials.
"""
import argparse

from pointmass import ScanPolicy, build_config, filtration_scan, make_kernel
from pointmass.oracles import oracle_binomial_delta_norm_sq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=20)
    ap.add_argument("--points", type=int, default=4, help="report x = 0..points-1")
    args = ap.parse_args()

    cfg = build_config(range(args.max_n + 1))
    res = filtration_scan(make_kernel("binomial"), cfg, range(args.points),
                          ScanPolicy(max_n=args.max_n + 1))
    for x in range(args.points):
        tr = res.traces[x]
        sums = [int(z) for _, z in tr.steps]
        exact = all(z == oracle_binomial_delta_norm_sq(x, n - 1) for n, z in tr.steps)
        print(f"x={x}: verdict {tr.verdict.kind}, matches closed form {exact}")
        print("   ", " ".join(str(s) for s in sums[:8]), "..." if len(sums) > 8 else "")


if __name__ == "__main__":
    main()
