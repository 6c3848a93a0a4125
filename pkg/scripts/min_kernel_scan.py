"""Point-mass norms for k(x, y) = min(x, y) on random increasing points.

Prints the scanned norm next to the closed form 1/(x_i - x_{i-1}) + 1/(x_{i+1} - x_i).
"""
import argparse

import numpy as np

from pointmass import ScanPolicy, build_config, filtration_scan, make_kernel
from pointmass.checks import random_increasing
from pointmass.oracles import oracle_min_delta_norm_sq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    x = random_increasing(np.random.default_rng(args.seed), args.n, min_gap=0.05)
    cfg = build_config(x, True)
    res = filtration_scan(make_kernel("min"), cfg, list(cfg.points), ScanPolicy(max_n=len(x)))
    print(f"{'i':>3} {'x_i':>9} {'scan':>14} {'closed form':>14} verdict")
    for i, p in enumerate(cfg.points[:-1]):
        tr = res.traces[p]
        ref, _ = oracle_min_delta_norm_sq(x, i)
        print(f"{i:>3} {p:>9.4f} {float(tr.last):>14.8f} {ref:>14.8f} {tr.verdict.kind}")


if __name__ == "__main__":
    main()
