"""Closed-form values for the built-in kernels.

These never touch the factorization engine; they are the independent side
of every engine-versus-formula comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import IntegerOverflow
from .kernels import binomial, pascal_row

INT64_MAX = np.iinfo(np.int64).max
# largest n with every C(n, k) <= INT64_MAX
PASCAL_INT64_MAX_N = 66


def _check_increasing(points, lo, hi):
    x = np.asarray(points, dtype=float)
    if x.size == 0 or np.any(x <= lo) or np.any(x >= hi) or np.any(np.diff(x) <= 0):
        raise ValueError(f"points must be strictly increasing in ({lo}, {hi})")
    return x


def oracle_min_det(points) -> float:
    """log det of ``(min(x_i, x_j))``: log x_1 + sum log(x_{i+1} - x_i)."""
    x = _check_increasing(points, 0.0, math.inf)
    return float(np.sum(np.log(np.diff(x, prepend=0.0))))


def oracle_min_delta_norm_sq(points, i: int) -> tuple[float, bool]:
    """Squared norm of the point-mass at ``points[i]`` for the min kernel.

    Uses a virtual point ``x_0 = 0`` below the first point. For the last
    point of the window the value is ``1 / (x_i - x_{i-1})`` (what the finite
    window sees), and the second element of the result is True to flag it.
    """
    x = _check_increasing(points, 0.0, math.inf)
    prev = x[i - 1] if i > 0 else 0.0
    if i == len(x) - 1:
        return 1.0 / (x[i] - prev), True
    nxt = x[i + 1]
    return (nxt - prev) / ((x[i] - prev) * (nxt - x[i])), False


def oracle_bridge_det(points) -> float:
    """log det for the bridge kernel: log(x_1 (x_2 - x_1) ... (1 - x_n))."""
    x = _check_increasing(points, 0.0, 1.0)
    gaps = np.diff(np.concatenate(([0.0], x, [1.0])))
    return float(np.sum(np.log(gaps)))


def oracle_bridge_delta_norm_sq(points, i: int) -> float:
    """Bridge point-mass norm with virtual end points 0 and 1.

    With both neighbours present this is the interior formula; the virtual
    end points make it exact for every point of a finite window.
    """
    x = _check_increasing(points, 0.0, 1.0)
    prev = x[i - 1] if i > 0 else 0.0
    nxt = x[i + 1] if i + 1 < len(x) else 1.0
    return float((nxt - prev) / ((x[i] - prev) * (nxt - x[i])))


def _int_matrix(rows, dtype):
    if dtype is object:
        return np.array(rows, dtype=object)
    if any(abs(v) > INT64_MAX for r in rows for v in r):
        raise IntegerOverflow(f"Pascal entries exceed int64 beyond n={PASCAL_INT64_MAX_N}")
    return np.array(rows, dtype=np.int64)


def pascal_lower(n: int, dtype=object) -> np.ndarray:
    """``(n+1) x (n+1)`` lower-triangular Pascal matrix, ``L[x, y] = C(x, y)``.

    The default object dtype holds Python ints and never overflows; with
    ``dtype=np.int64`` an IntegerOverflow is raised for n > 66.
    """
    rows = [[binomial(x, y) for y in range(n + 1)] for x in range(n + 1)]
    return _int_matrix(rows, dtype)


def pascal_inverse(n: int, dtype=object) -> np.ndarray:
    """Inverse of :func:`pascal_lower`: entries ``(-1)^(x-y) C(x, y)``."""
    rows = [[(-1) ** (x - y) * binomial(x, y) if y <= x else 0 for y in range(n + 1)]
            for x in range(n + 1)]
    return _int_matrix(rows, dtype)


def pascal_delta_identity(m: int, n: int) -> int:
    """``sum_{j=m}^{n} (-1)^(m+j) C(n, j) C(j, m)``; equals 1 if m == n else 0."""
    return sum((-1) ** (m + j) * binomial(n, j) * binomial(j, m) for j in range(m, n + 1))


def binomial_gram(n: int) -> np.ndarray:
    """Exact Gram of the binomial kernel on ``{0, ..., n}`` as ``L L^T``."""
    L = pascal_lower(n)
    return L @ L.T


def oracle_binomial_gram_inverse(n: int) -> np.ndarray:
    """Exact ``K_n^{-1} = (L^T)^{-1} L^{-1}`` over ``{0, ..., n}``."""
    if n > 30:
        raise IntegerOverflow("binomial Gram inverse oracle is limited to n <= 30")
    Li = pascal_inverse(n)
    return Li.T @ Li


def oracle_binomial_delta_norm_sq(x: int, n: int) -> int:
    """``sum_{k=x}^{n} C(k, x)^2``: the projected point-mass norm on ``{0..n}``."""
    return sum(pascal_row(k)[x] ** 2 for k in range(x, n + 1))


def psi(t):
    """``sin t / t`` with the removable singularity filled in."""
    t = np.asarray(t, dtype=float)
    safe = np.where(t == 0, 1.0, t)
    return np.where(t == 0, 1.0, np.sin(safe) / safe)


def psi_product(t, factors: int = 60):
    """Truncated infinite product ``prod_{n>=1} cos(t / 2^n)``."""
    t = np.asarray(t, dtype=float)
    out = np.ones_like(t)
    for n in range(1, factors + 1):
        out = out * np.cos(t / 2.0**n)
    return out


def psi_prime(t):
    """``(t cos t - sin t) / t^2``; Taylor series near 0 where that cancels."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-3
    ts = np.where(small, 1.0, t)
    direct = (ts * np.cos(ts) - np.sin(ts)) / ts**2
    series = -t / 3.0 + t**3 / 30.0
    return np.where(small, series, direct)


@dataclass(frozen=True)
class SincGapReport:
    head: float  # integral of psi'^2 over [0, T]
    tail: float  # integral over [T, 2T]
    zero_residual: float  # max |psi(n pi)| for n pi <= T
    product_residual: float  # max |prod cos(t/2^n) - sin t / t| on the grid

    @property
    def tail_ratio(self) -> float:
        return self.tail / self.head


def _simpson(a, b, h):
    m = max(2, int(math.ceil((b - a) / h)))
    m += m % 2
    t = np.linspace(a, b, m + 1)
    return float(simpson(psi_prime(t) ** 2, x=t))


def sinc_gap_check(T: float, h: float = 1e-2) -> SincGapReport:
    """Quadrature of ``|psi'|^2`` on ``[0, T]`` and ``[T, 2T]`` plus zero checks."""
    if T <= 0 or h <= 0:
        raise ValueError("T and h must be positive")
    head = _simpson(0.0, T, h)
    tail = _simpson(T, 2 * T, h)
    k = np.arange(1, int(math.floor(T / math.pi)) + 1)
    zeros = float(np.max(np.abs(psi(k * np.pi)))) if k.size else 0.0
    grid = np.linspace(0.0, T, 2001)
    prod = float(np.max(np.abs(psi_product(grid) - psi(grid))))
    return SincGapReport(head, tail, zeros, prod)
