"""Point-mass norms for the min kernel on a sparse sequence x_i = i^p.

With gaps growing like i^(p-1) the norms decay to zero for p > 1.
"""
import argparse

import numpy as np

from pointmass import ScanPolicy, build_config, filtration_scan, make_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--power", type=float, default=2.0)
    ap.add_argument("--count", type=int, default=60)
    args = ap.parse_args()

    x = np.arange(1, args.count + 1, dtype=float) ** args.power
    cfg = build_config(x, True)
    targets = list(cfg.points[: args.count - 6 : 5])
    res = filtration_scan(make_kernel("min"), cfg, targets, ScanPolicy(max_n=len(x)))
    for p in targets:
        tr = res.traces[p]
        print(f"x={p:>10.1f}  norm^2 {float(tr.last):.6f}  {tr.verdict.kind}")


if __name__ == "__main__":
    main()
