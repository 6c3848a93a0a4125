"""Spectral moments on random electrical networks.

Compares the Gram-based moments of the energy kernel with the local
conductance formulas, vertex by vertex.
"""
import argparse

import numpy as np

from pointmass.checks import random_connected_graph
from pointmass.moments import network_mu_A_moments
from pointmass.network import network_moments


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = random_connected_graph(np.random.default_rng(args.seed), args.vertices)
    print(f"base vertex {g.base}")
    print(f"{'v':>4} {'c(v)':>10} {'m2 local':>12} {'m2 Gram':>12} {'cov':>10} bound")
    worst = 0.0
    for v in g.vertices:
        if v == g.base:
            continue
        local = network_moments(g, v)
        gram = network_mu_A_moments(g, v)
        worst = max(worst, abs(local.m2 - gram.m2) / local.m2, abs(local.m1 - gram.m1) / local.m1)
        print(f"{v:>4} {local.m1:>10.4f} {local.m2:>12.4f} {gram.m2:>12.4f} "
              f"{local.covariance:>10.4f} {local.bound_ok}")
    print(f"max relative disagreement {worst:.2e}")


if __name__ == "__main__":
    main()
