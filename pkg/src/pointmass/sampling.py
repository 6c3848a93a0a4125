"""Point-mass sample sets, frame bounds and kernel interpolation.

``f`` in the finite model ``span{k_x : x in F_n}`` is stored either by its
kernel-expansion coefficients ``c`` (``f = sum c_y k_y``) or by its pairings
with point-masses, ``<δ_s, f> = (K^{-1} f|_F)(s)``. For ``s`` in the support
of the expansion the pairing is just ``c_s``, which is what makes the
reconstruction ``f = sum_s <δ_s, f> k_s`` exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import cholesky

from .analysis import ScanPolicy, filtration_scan
from .config import Kernel, PointConfiguration, assemble_gram
from .errors import NormDivergent, SubsetMembershipUnverified
from .gram import factorize, solve


@dataclass(frozen=True)
class SampleSet:
    indices: tuple

    def __post_init__(self):
        if not self.indices:
            raise ValueError("a sample set cannot be empty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("repeated sample index")

    @classmethod
    def of(cls, config: PointConfiguration, indices: Sequence[int]) -> "SampleSet":
        idx = tuple(int(i) for i in indices)
        for i in idx:
            if not 0 <= i < len(config):
                raise IndexError(f"sample index {i} outside configuration of size {len(config)}")
        return cls(idx)


@dataclass(frozen=True)
class KernelExpansion:
    """``f = sum_s coefficients[s] * k(., points[s])``."""

    kernel: Kernel
    points: tuple
    coefficients: dict  # configuration index -> coefficient
    norm_sq: float | None = None

    def __call__(self, x) -> float:
        return float(self.evaluate([x])[0])

    def evaluate(self, xs) -> np.ndarray:
        idx = sorted(self.coefficients)
        if not idx:
            return np.zeros(len(xs))
        support = [self.points[i] for i in idx]
        c = np.array([self.coefficients[i] for i in idx], dtype=float)
        return np.array([self.kernel.column(support, x) @ c for x in xs])

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.name,
            "coefficients": [{"index": i, "point": self.points[i], "value": float(v)}
                             for i, v in sorted(self.coefficients.items())],
            "norm_sq": self.norm_sq,
        }


def frame_lower_bound(kernel: Kernel, config: PointConfiguration, S: SampleSet | Sequence[int],
                      n: int | None = None) -> float:
    """Largest ``eps`` with ``sum_{s in S} |f(s)|^2 >= eps ||f||^2`` on ``span{k_x : x in F_n}``.

    With ``K = C C^T`` and ``f = sum c_y k_y`` the ratio is
    ``|C_S^T v|^2 / |v|^2`` for ``v = C^T c``, so ``eps`` is the squared
    smallest singular value of the rows of ``C`` indexed by ``S``. It is 0
    whenever ``|S| < n``.
    """
    idx = S.indices if isinstance(S, SampleSet) else tuple(S)
    n = len(config) if n is None else n
    if any(not 0 <= i < n for i in idx):
        raise ValueError(f"sample indices must lie in F_{n}")
    if len(set(idx)) < n:
        return 0.0
    K = np.asarray(assemble_gram(kernel, config, n).entries, dtype=float)
    C = cholesky(K, lower=True)
    sv = np.linalg.svd(C[list(idx), :], compute_uv=False)
    return float(sv[-1] ** 2)


def pairings_from_values(kernel: Kernel, config: PointConfiguration, values) -> np.ndarray:
    """``<δ_s, f>`` for every ``s`` in ``config`` given ``f`` on ``config``."""
    fact = factorize(assemble_gram(kernel, config))
    return solve(fact, np.asarray(values, dtype=float))


def pairings_from_expansion(kernel: Kernel, config: PointConfiguration, coeffs) -> np.ndarray:
    """Pairings of ``f = sum c_y k_y``, routed through the values ``f|_F = K c``."""
    gram = assemble_gram(kernel, config)
    K = np.asarray(gram.entries, dtype=float)
    return solve(factorize(gram), K @ np.asarray(coeffs, dtype=float))


def interpolate(kernel: Kernel, config: PointConfiguration, S: SampleSet | Sequence[int],
                delta_pairings: Mapping[int, float] | Sequence[float],
                policy: ScanPolicy | None = None, cap: float = 1e12) -> KernelExpansion:
    """Reconstruct ``f = sum_{s in S} <δ_s, f> k_s``.

    ``delta_pairings`` maps sample index to ``<δ_s, f>`` (a sequence is read
    in the order of ``S``). With a ``policy`` every sampled point-mass is
    scanned first and a Diverging one raises SubsetMembershipUnverified.
    The squared norm is the double sum ``sum_s sum_t p_s p_t k(s, t)``;
    NormDivergent is raised past ``cap``.
    """
    idx = S.indices if isinstance(S, SampleSet) else tuple(S)
    if isinstance(delta_pairings, Mapping):
        p = {int(i): float(delta_pairings[i]) for i in idx}
    else:
        vals = list(delta_pairings)
        if len(vals) != len(idx):
            raise ValueError("need one pairing per sample index")
        p = {i: float(v) for i, v in zip(idx, vals)}
    if policy is not None:
        res = filtration_scan(kernel, config, [config[i] for i in idx], policy)
        bad = [i for i in idx if res.traces[config[i]].verdict.diverging]
        if bad:
            raise SubsetMembershipUnverified(bad)
    sub = config.subset(idx)
    K = np.asarray(assemble_gram(kernel, sub).entries, dtype=float) if idx else np.zeros((0, 0))
    v = np.array([p[i] for i in idx])
    norm_sq = float(v @ K @ v)
    if not math.isfinite(norm_sq) or norm_sq > cap:
        raise NormDivergent(f"interpolant norm^2 {norm_sq:.3e} exceeds cap {cap:.1e}")
    return KernelExpansion(kernel, config.points, p, norm_sq)


def restriction_isometry_check(kernel: Kernel, full_config: PointConfiguration,
                               S: SampleSet | Sequence[int], trials: int = 100,
                               seed: int = 0) -> float:
    """Max relative gap between ``||sum xi_s k_s||`` in the restricted and full spaces.

    The restricted Gram is assembled from the sub-configuration on its own;
    the full-space norm uses the ``S x S`` block of the full Gram.
    """
    idx = list(S.indices if isinstance(S, SampleSet) else S)
    full = np.asarray(assemble_gram(kernel, full_config).entries, dtype=float)
    block = full[np.ix_(idx, idx)]
    restricted = np.asarray(assemble_gram(kernel, full_config.subset(idx)).entries, dtype=float)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        xi = rng.standard_normal(len(idx))
        a = math.sqrt(max(xi @ restricted @ xi, 0.0))
        b = math.sqrt(max(xi @ block @ xi, 0.0))
        worst = max(worst, abs(a - b) / max(b, 1e-300))
    return worst


@dataclass(frozen=True)
class ShannonResult:
    values: np.ndarray
    tail_bound: np.ndarray  # truncation-error estimate per x, from tails cut at tail_factor*N
    tail_l2: float  # l2 norm of the samples outside the window


def shannon_reconstruct(f: Callable[[np.ndarray], np.ndarray], N: int, xs,
                        tail_factor: int = 50) -> ShannonResult:
    """``sum_{|n| <= N} sinc(x - n) f(n)`` with a truncation-error estimate.

    The neglected terms are at most ``||f(n)||_{|n|>N} * ||sinc(x - n)||_{|n|>N}``.
    Both tails are summed only out to ``tail_factor * N``, so the reported
    bound is an estimate rather than a guarantee.
    """
    from .kernels import make_kernel

    k = make_kernel("sinc")
    n = np.arange(-N, N + 1)
    fn = np.asarray(f(n.astype(float)), dtype=float)
    xs = np.asarray(xs, dtype=float)
    vals = np.array([k.column(n.astype(float), x) @ fn for x in xs])
    far = np.concatenate([np.arange(-tail_factor * N, -N), np.arange(N + 1, tail_factor * N + 1)])
    far = far.astype(float)
    tail_f = float(np.linalg.norm(f(far)))
    tail_k = np.array([np.linalg.norm(k.column(far, x)) for x in xs])
    return ShannonResult(vals, tail_f * tail_k, tail_f)
