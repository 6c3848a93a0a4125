"""Frame lower bounds for sample subsets and truncated sinc reconstruction."""
import argparse

import numpy as np

from pointmass import build_config, frame_lower_bound, make_kernel, shannon_reconstruct


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cfg = build_config(np.arange(1, args.n + 1), True)
    k = make_kernel("min")
    print("frame lower bound for min kernel on 1..n")
    for size in (1, args.n // 2, args.n - 1, args.n):
        S = sorted(rng.choice(args.n, size=size, replace=False))
        print(f"  |S|={size:>3}: eps = {frame_lower_bound(k, cfg, S):.3e}")

    xs = np.linspace(-5, 5, 7) + 0.25

    def f(t):
        return np.sinc(t / 2) ** 2

    print("\nsinc reconstruction of sinc(t/2)^2")
    for N in (10, 50, 200):
        res = shannon_reconstruct(f, N, xs)
        err = float(np.max(np.abs(res.values - f(xs))))
        print(f"  N={N:>4}: max err {err:.2e}, tail estimate {float(res.tail_bound.max()):.2e}")


if __name__ == "__main__":
    main()
