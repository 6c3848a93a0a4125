"""Engine-versus-closed-form checks, one per formula family.

Each check returns a :class:`CheckResult` holding the worst error seen and
the tolerance it is held to. ``perturb`` scales every engine-side value by
``1 + perturb`` (absolute checks are shifted by it instead) before
comparing; it exists so the suite can be shown to fail when it should.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import ScanPolicy, filtration_scan, minor_ratio
from .config import build_config, assemble_gram
from .gram import factorize, inverse
from .kernels import make_kernel
from .moments import moment_identity_check
from .network import (
    delta_inner_energy,
    energy_inner,
    energy_kernel,
    green_identity_residual,
    load_network,
    path_graph,
)
from .oracles import (
    binomial_gram,
    oracle_binomial_delta_norm_sq,
    oracle_binomial_gram_inverse,
    oracle_bridge_det,
    oracle_bridge_delta_norm_sq,
    oracle_min_delta_norm_sq,
    oracle_min_det,
    pascal_delta_identity,
    pascal_inverse,
    pascal_lower,
)
from .sampling import shannon_reconstruct


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_err: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_err) and self.max_err <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<16} max_err={self.max_err:.3e} tol={self.tol:.0e} {self.detail}"

    def to_dict(self) -> dict:
        return {"formula": self.name, "max_err": self.max_err, "tol": self.tol,
                "passed": self.passed, "detail": self.detail}


def _rel(engine, oracle, perturb=0.0) -> float:
    e = np.asarray(engine, dtype=float) * (1.0 + perturb)
    o = np.asarray(oracle, dtype=float)
    if e.size == 0:
        return 0.0
    return float(np.max(np.abs(e - o) / np.maximum(np.abs(o), 1.0)))


def _exact_err(engine, oracle, perturb=0.0) -> float:
    """Integer comparison; a perturbation is added as a whole unit."""
    diff = max((abs(int(a) - int(b)) for a, b in zip(np.ravel(engine), np.ravel(oracle))), default=0)
    return float(diff) + (1.0 if perturb else 0.0)


def random_increasing(rng, n, lo=0.0, hi=None, min_gap=1e-3):
    gaps = min_gap + rng.exponential(1.0, size=n)
    x = lo + np.cumsum(gaps)
    if hi is not None:
        x = lo + (hi - lo) * x / (x[-1] + gaps[0])
    return x


def random_connected_graph(rng, n, extra=None):
    """Random spanning tree on ``0..n-1`` plus ``extra`` chords, conductances in (0.1, 5)."""
    perm = rng.permutation(n)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((int(perm[i]), int(perm[j]), float(rng.uniform(0.1, 5.0))))
    extra = n // 2 if extra is None else extra
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(u), int(v), float(rng.uniform(0.1, 5.0))))
    return load_network(edges, int(perm[0]))


def check_min_logdet(perturb=0.0, seed=0, sets=10, max_size=200) -> CheckResult:
    rng = np.random.default_rng(seed)
    k = make_kernel("min")
    err = 0.0
    for _ in range(sets):
        x = random_increasing(rng, int(rng.integers(1, max_size + 1)))
        fact = factorize(assemble_gram(k, build_config(x, True)))
        err = max(err, _rel([fact.log_det], [oracle_min_det(x)], perturb))
    return CheckResult("min-logdet", err, 1e-9, f"{sets} random sets")


def check_min_norm(perturb=0.0, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    k = make_kernel("min")
    x = random_increasing(rng, 40, min_gap=0.05)
    cfg = build_config(x, True)
    res = filtration_scan(k, cfg, list(cfg.points), ScanPolicy(max_n=len(x)))
    eng, ora = [], []
    for i, p in enumerate(cfg.points):
        trace = res.traces[p]
        # plateau value one step past the point, then the Cramer minor ratio
        n = min(i + 2, len(x))
        eng.append(float(trace.steps[n - i - 1][1]))
        ora.append(oracle_min_delta_norm_sq(x[:n], i)[0])
        if i < 10:
            eng.append(minor_ratio(k, cfg, p, n))
            ora.append(ora[-1])
    return CheckResult("min-norm", _rel(eng, ora, perturb), 1e-9, "scan plateau and minor ratio")


def check_bridge(perturb=0.0, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    k = make_kernel("bridge")
    eng, ora = [], []
    for _ in range(10):
        x = random_increasing(rng, int(rng.integers(1, 60)), hi=1.0, min_gap=0.05)
        cfg = build_config(x, True)
        eng.append(factorize(assemble_gram(k, cfg)).log_det)
        ora.append(oracle_bridge_det(x))
        res = filtration_scan(k, cfg, list(cfg.points), ScanPolicy(max_n=max(len(x), 5)))
        for i, p in enumerate(cfg.points):
            eng.append(float(res.traces[p].last))
            ora.append(oracle_bridge_delta_norm_sq(x, i))
    return CheckResult("bridge", _rel(eng, ora, perturb), 1e-9, "log-det and point-mass norms")


def check_pascal_inverse(perturb=0.0, n=25) -> CheckResult:
    prod = pascal_lower(n) @ pascal_inverse(n)
    ident = np.eye(n + 1, dtype=int)
    sums = [[pascal_delta_identity(m, q) for q in range(n + 1)] for m in range(n + 1)]
    err = max(_exact_err(prod, ident), _exact_err(np.array(sums), ident, perturb))
    return CheckResult("pascal-inverse", err, 0.0, f"exact integers, n={n}")


def check_pascal_factor(perturb=0.0, n=25) -> CheckResult:
    """The engine's exact factor of the binomial Gram has Pascal and signed-Pascal factors."""
    k = make_kernel("binomial")
    fact = factorize(assemble_gram(k, build_config(range(n + 1))))
    err = max(_exact_err(fact.L, pascal_lower(n)), _exact_err(fact.L_inv, pascal_inverse(n), perturb))
    return CheckResult("pascal-factor", err, 0.0, f"exact integers, n={n}")


def check_binomial_inverse(perturb=0.0, n=25) -> CheckResult:
    k = make_kernel("binomial")
    gram = assemble_gram(k, build_config(range(n + 1)))
    fact = factorize(gram)
    err = max(
        _exact_err(gram.entries, binomial_gram(n)),
        _exact_err(fact.pivots, np.ones(n + 1, dtype=int)),
        _exact_err(inverse(fact), oracle_binomial_gram_inverse(n), perturb),
    )
    return CheckResult("binomial-inverse", err, 0.0, f"K = L L^T with unit pivots, n={n}")


def check_binomial_sums(perturb=0.0, max_n=30) -> CheckResult:
    k = make_kernel("binomial")
    cfg = build_config(range(max_n + 1))
    res = filtration_scan(k, cfg, range(6), ScanPolicy(max_n=max_n + 1, divergence_cap=math.inf))
    eng, ora = [], []
    for x in range(6):
        for n, z in res.traces[x].steps:
            eng.append(z)
            ora.append(oracle_binomial_delta_norm_sq(x, n - 1))
    err = _exact_err(eng, ora, perturb)
    return CheckResult("binomial-sums", err, 0.0, f"exact partial sums to n={max_n}")


def check_energy_delta(perturb=0.0, seed=0, graphs=5, max_vertices=60) -> CheckResult:
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(graphs):
        g = random_connected_graph(rng, int(rng.integers(3, max_vertices + 1)))
        verts = g.vertices
        eng = [energy_inner(g, g.indicator(x), g.indicator(y)) for x in verts for y in verts]
        ora = [delta_inner_energy(g, x, y) for x in verts for y in verts]
        err = max(err, _rel(eng, ora, perturb))
        # the same inner products as the inverse of the energy kernel's Gram
        kern, cfg = energy_kernel(g)
        D = inverse(factorize(assemble_gram(kern, cfg)))
        ora = [[delta_inner_energy(g, x, y) for y in cfg.points] for x in cfg.points]
        err = max(err, _rel(D, ora, perturb))
    return CheckResult("energy-delta", err, 1e-9, f"{graphs} random graphs")


def check_green(perturb=0.0, seed=0, graphs=5, max_vertices=60) -> CheckResult:
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(graphs):
        g = random_connected_graph(rng, int(rng.integers(3, max_vertices + 1)))
        err = max(err, green_identity_residual(g))
    return CheckResult("green", err + perturb, 1e-9, "max |Lap k_x - delta_x|")


def check_moment_identity(perturb=0.0) -> CheckResult:
    """Both moment sides against the closed-form point-mass norm."""
    xm = np.arange(1, 41)
    xb = np.arange(1, 40) / 40
    cases = [
        (make_kernel("min"), build_config(xm, True), {1: 2.0, 5: 2.0, 20: 2.0}),
        (make_kernel("bridge"), build_config(xb, True),
         {x: oracle_bridge_delta_norm_sq(xb, i) for i, x in [(9, xb[9]), (19, xb[19])]}),
        (make_kernel("sinc"), build_config(np.arange(-15, 16)), {0: 1.0, 3: 1.0}),
    ]
    kern, cfg = energy_kernel(path_graph(30))
    cases.append((kern, cfg, {3: 2.0, 10: 2.0}))
    eng, ora, failed = [], [], 0
    for k, cfg, expected in cases:
        for x, value in expected.items():
            lhs, rhs, ok = moment_identity_check(k, cfg, x, ScanPolicy(max_n=len(cfg)))
            eng += [lhs, rhs]
            ora += [value, value]
            failed += not ok
    err = _rel(eng, ora, perturb) if not failed else math.inf
    return CheckResult("moment-identity", err, 1e-8, "min, bridge, sinc, path energy")


def check_shannon(perturb=0.0, N=200) -> CheckResult:
    xs = np.linspace(-9.7, 9.7, 50) + 0.013
    res = shannon_reconstruct(np.sinc, N, xs)
    err = float(np.max(np.abs(res.values + perturb - np.sinc(xs))))
    return CheckResult("shannon", err, 1e-6, f"N={N}, tail bound {float(res.tail_bound.max()):.1e}")


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "min-logdet": check_min_logdet,
    "min-norm": check_min_norm,
    "bridge": check_bridge,
    "pascal-inverse": check_pascal_inverse,
    "pascal-factor": check_pascal_factor,
    "binomial-inverse": check_binomial_inverse,
    "binomial-sums": check_binomial_sums,
    "energy-delta": check_energy_delta,
    "green": check_green,
    "moment-identity": check_moment_identity,
    "shannon": check_shannon,
}


def run_checks(only=None, perturb: float = 0.0, seed: int = 0) -> list[CheckResult]:
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown formula(s): {', '.join(unknown)}")
    out = []
    for name in names:
        fn = CHECKS[name]
        kwargs = {"perturb": perturb}
        if "seed" in fn.__code__.co_varnames:
            kwargs["seed"] = seed
        out.append(fn(**kwargs))
    return out
