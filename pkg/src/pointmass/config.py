"""Point configurations, kernels and Gram assembly.

A :class:`PointConfiguration` fixes the filtration order: ``F_n`` is the set of
the first ``n`` points. Kernels are symmetric real functions on pairs of
points; Gram matrices are assembled over prefixes of a configuration.

Duplicate detection uses exact equality. Points that are distinct but closer
than roundoff are accepted and will show up later as a tiny pivot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import DuplicatePoint, NotIncreasing

DEFAULT_EPS_PD = 1e-12


@dataclass(frozen=True)
class PointConfiguration:
    points: tuple
    ordered: bool = False
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def index(self, point) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise KeyError(f"{point!r} is not in the configuration") from None

    def prefix(self, n: int) -> "PointConfiguration":
        return PointConfiguration(self.points[:n], self.ordered)

    def subset(self, indices: Iterable[int]) -> "PointConfiguration":
        return PointConfiguration(tuple(self.points[i] for i in indices), False)

    @property
    def is_scalar(self) -> bool:
        return all(isinstance(p, (int, float, np.integer, np.floating)) for p in self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


def _normalize(p):
    if isinstance(p, np.integer):
        return int(p)
    if isinstance(p, np.floating):
        return float(p)
    return p


def build_config(points: Sequence, ordered: bool = False) -> PointConfiguration:
    """Validate ``points`` and wrap them in a configuration.

    Raises DuplicatePoint on exact repeats, and NotIncreasing when ``ordered``
    is set and the sequence is not strictly increasing.
    """
    pts = tuple(_normalize(p) for p in points)
    if not pts:
        raise ValueError("a configuration needs at least one point")
    seen = {}
    for i, p in enumerate(pts):
        if p in seen:
            raise DuplicatePoint(p, seen[p], i)
        seen[p] = i
    if ordered:
        for i in range(1, len(pts)):
            if not pts[i] > pts[i - 1]:
                raise NotIncreasing(i)
    return PointConfiguration(pts, ordered)


def _canonical(x, y):
    try:
        return (x, y) if x <= y else (y, x)
    except TypeError:
        return (x, y) if repr(x) <= repr(y) else (y, x)


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel ``k(x, y)``.

    ``vectorized(points, y)`` is an optional fast path returning the column
    ``k(points[i], y)`` as an array. ``exact`` marks integer-valued kernels whose
    Grams are factored in rational arithmetic. ``domain`` is called with the
    configuration before assembly and raises DomainViolation on bad input.
    """

    name: str
    func: Callable[[Any, Any], Any]
    vectorized: Callable[[Sequence, Any], np.ndarray] | None = None
    strict: bool | None = None
    exact: bool = False
    domain: Callable[[PointConfiguration], None] | None = None

    def __call__(self, x, y):
        a, b = _canonical(x, y)
        return self.func(a, b)

    def check_domain(self, config: PointConfiguration) -> None:
        if self.domain is not None:
            self.domain(config)

    def column(self, points: Sequence, y) -> np.ndarray:
        """Values ``k(p, y)`` for every ``p`` in ``points``."""
        if self.exact:
            return np.array([Fraction(self(p, y)) for p in points] or [], dtype=object)
        if self.vectorized is not None and len(points):
            return np.asarray(self.vectorized(points, y), dtype=float)
        return np.array([self(p, y) for p in points], dtype=float)


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    points: tuple
    exact: bool = False

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def assemble_gram(kernel: Kernel, config: PointConfiguration, n: int | None = None) -> GramMatrix:
    """Assemble ``K_{F_n}``; exact symmetry is enforced by mirroring."""
    if n is None:
        n = len(config)
    if n > len(config):
        raise ValueError(f"n={n} exceeds configuration size {len(config)}")
    kernel.check_domain(config)
    pts = config.points[:n]
    dtype = object if kernel.exact else float
    K = np.zeros((n, n), dtype=dtype)
    if kernel.exact:
        K[...] = Fraction(0)
    for j in range(n):
        col = kernel.column(pts[: j + 1], pts[j])
        K[: j + 1, j] = col
        K[j, : j + 1] = col
    return GramMatrix(K, pts, kernel.exact)


def gram_from_matrix(matrix, points=None) -> GramMatrix:
    K = np.array(matrix, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("Gram matrix must be square")
    if not np.array_equal(K, K.T):
        raise ValueError("Gram matrix is not symmetric")
    pts = tuple(range(K.shape[0])) if points is None else tuple(points)
    return GramMatrix(K, pts)


@dataclass(frozen=True)
class PDVerdict:
    status: str  # "StrictlyPositive" | "Degenerate" | "Indefinite"
    rank: int | None = None
    index: int | None = None
    pivots: tuple = ()

    @property
    def strictly_positive(self) -> bool:
        return self.status == "StrictlyPositive"


def validate_pd(gram, eps_pd: float = DEFAULT_EPS_PD) -> PDVerdict:
    """Classify a symmetric matrix by its LDL^T pivots (no pivoting).

    A pivot within ``eps_pd * maxdiag`` of zero makes the matrix Degenerate
    unless the rest of its column is nonzero, which no PSD matrix allows;
    that case, and any clearly negative pivot, is Indefinite. ``index`` is
    1-based.
    """
    entries = gram.entries if isinstance(gram, GramMatrix) else np.asarray(gram)
    exact = entries.dtype == object
    A = entries.copy() if exact else np.array(entries, dtype=float)
    n = A.shape[0]
    if n == 0:
        return PDVerdict("StrictlyPositive", rank=0)
    maxdiag = max(abs(A[i, i]) for i in range(n))
    tol = 0 if exact else eps_pd * float(maxdiag)
    rank = 0
    pivots = []
    degenerate = False
    for k in range(n):
        p = A[k, k]
        pivots.append(p)
        if p < -tol:
            return PDVerdict("Indefinite", index=k + 1, pivots=tuple(pivots))
        if p <= tol:
            rest = A[k + 1 :, k]
            if len(rest) and max(abs(v) for v in rest) > max(tol, math.sqrt(tol * float(maxdiag))):
                return PDVerdict("Indefinite", index=k + 1, pivots=tuple(pivots))
            degenerate = True
            continue
        rank += 1
        col = A[k + 1 :, k]
        A[k + 1 :, k + 1 :] -= np.outer(col, col) / p
    if degenerate:
        return PDVerdict("Degenerate", rank=rank, pivots=tuple(pivots))
    return PDVerdict("StrictlyPositive", rank=n, pivots=tuple(pivots))
