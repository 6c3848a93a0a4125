"""LDL^T factorizations of Gram matrices, grown one point at a time.

``K = L D L^T`` with ``L`` unit lower triangular and pivots ``d``. Alongside
``L`` the factorization keeps ``M = L^{-1}`` so that a bordering step needs
only matrix-vector products:

    w = M b,   l = w / d,   s = corner - w . l,   new row of M = [-l^T M, 1]

``s`` is the Schur complement of the old Gram in the bordered one, which is
the new pivot. Rows are written into a shared, preallocated buffer; rows
below ``n`` never change, so older factorizations stay valid. Extending a
factorization that has already been extended copies the buffer first.

Exact (rational) factorizations use object arrays of ``Fraction`` and the
same code path.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.linalg import solve_triangular

from .config import DEFAULT_EPS_PD, GramMatrix
from .errors import NotPositiveDefinite


class _Buffer:
    __slots__ = ("L", "M", "d", "filled", "exact")

    def __init__(self, capacity, exact, dtype):
        self.exact = exact
        self.L = np.zeros((capacity, capacity), dtype=dtype)
        self.M = np.zeros((capacity, capacity), dtype=dtype)
        self.d = np.zeros(capacity, dtype=dtype)
        if exact:
            for a in (self.L, self.M, self.d):
                a[...] = Fraction(0)
        self.filled = 0

    @property
    def capacity(self):
        return self.d.shape[0]

    def copy(self, n, capacity):
        new = _Buffer(capacity, self.exact, self.d.dtype)
        new.L[:n, :n] = self.L[:n, :n]
        new.M[:n, :n] = self.M[:n, :n]
        new.d[:n] = self.d[:n]
        new.filled = n
        return new


class GramFactorization:
    """Immutable view of an ``n``-point LDL^T factorization."""

    __slots__ = ("_buf", "n", "maxdiag", "log_det", "exact", "source")

    def __init__(self, buf, n, maxdiag, log_det, source=None):
        self._buf = buf
        self.n = n
        self.maxdiag = maxdiag
        self.log_det = log_det
        self.exact = buf.exact
        self.source = source

    @classmethod
    def empty(cls, exact=False, capacity=16):
        return cls(_Buffer(capacity, exact, object if exact else float), 0, 0.0, 0.0)

    @property
    def L(self) -> np.ndarray:
        return self._buf.L[: self.n, : self.n]

    @property
    def L_inv(self) -> np.ndarray:
        return self._buf.M[: self.n, : self.n]

    @property
    def pivots(self) -> np.ndarray:
        return self._buf.d[: self.n]

    def reconstruct(self) -> np.ndarray:
        L, d = self.L, self.pivots
        return (L * d) @ L.T

    def __repr__(self):
        return f"GramFactorization(n={self.n}, log_det={self.log_det:.6g}, exact={self.exact})"


def border_extend(fact: GramFactorization, new_column, corner, eps_pd: float = DEFAULT_EPS_PD,
                  return_solution: bool = False):
    """Factorization of ``[[K, b], [b^T, corner]]`` from that of ``K``.

    With ``return_solution`` the triple ``(factorization, u, s)`` is
    returned, where ``u = K^{-1} b`` and ``s`` is the new pivot; filtration
    scans use them to update rows of the inverse.
    """
    n = fact.n
    exact = fact.exact
    b = np.asarray(new_column, dtype=object if exact else float)
    if b.shape != (n,):
        raise ValueError(f"new column has length {b.shape[0] if b.ndim else 0}, expected {n}")
    if exact:
        corner = Fraction(corner)
        b = np.array([Fraction(v) for v in b], dtype=object) if n else b
    else:
        corner = float(corner)
    maxdiag = max(fact.maxdiag, abs(corner))

    buf = fact._buf
    if buf.filled != n or n >= buf.capacity:
        capacity = max(2 * buf.capacity, n + 1) if n >= buf.capacity else buf.capacity
        buf = buf.copy(n, capacity)

    if n:
        M = buf.M[:n, :n]
        w = M @ b
        l = w / buf.d[:n]
        s = corner - w @ l
    else:
        l = np.zeros(0, dtype=b.dtype)
        s = corner
    # rational pivots carry no roundoff, so the relative floor does not apply
    floor = 0 if exact else eps_pd * maxdiag
    if not s > floor:
        raise NotPositiveDefinite(n + 1, s)

    # l^T M is both K^{-1} b and minus the new row of M
    u = l @ buf.M[:n, :n] if n else l
    buf.L[n, :n] = l
    buf.L[n, n] = 1
    buf.M[n, :n] = -u
    buf.M[n, n] = 1
    buf.d[n] = s
    buf.filled = n + 1

    new = GramFactorization(buf, n + 1, maxdiag, fact.log_det + math.log(s))
    if return_solution:
        return new, u, s
    return new


def factorize(gram, eps_pd: float = DEFAULT_EPS_PD) -> GramFactorization:
    """LDL^T of a symmetric Gram matrix, one bordering step per row."""
    K = gram.entries if isinstance(gram, GramMatrix) else np.asarray(gram)
    exact = K.dtype == object
    n = K.shape[0]
    # Tolerance is relative to the largest diagonal of the whole matrix.
    maxdiag = max((abs(K[i, i]) for i in range(n)), default=0.0)
    fact = GramFactorization(_Buffer(max(n, 1), exact, object if exact else float), 0, maxdiag, 0.0)
    for j in range(n):
        fact = border_extend(fact, K[:j, j], K[j, j], eps_pd)
    return GramFactorization(fact._buf, n, fact.maxdiag, fact.log_det,
                             gram if isinstance(gram, GramMatrix) else None)


def log_det(fact: GramFactorization) -> float:
    return fact.log_det


def solve(fact: GramFactorization, rhs) -> np.ndarray:
    """Return ``v`` with ``K v = rhs``."""
    n = fact.n
    if fact.exact:
        r = np.array([Fraction(v) for v in np.asarray(rhs, dtype=object).ravel()], dtype=object)
        if r.shape != (n,):
            raise ValueError(f"rhs has length {r.shape[0]}, expected {n}")
        return fact.L_inv.T @ ((fact.L_inv @ r) / fact.pivots)
    r = np.asarray(rhs, dtype=float)
    if r.shape[0] != n:
        raise ValueError(f"rhs has length {r.shape[0]}, expected {n}")
    if n == 0:
        return r.copy()
    L = np.ascontiguousarray(fact.L)
    w = solve_triangular(L, r, lower=True, unit_diagonal=True)
    d = fact.pivots
    w = w / (d if w.ndim == 1 else d[:, None])
    return solve_triangular(L, w, lower=True, trans="T", unit_diagonal=True)


def inverse_entry(fact: GramFactorization, i: int, j: int):
    """``(K^{-1})_{ij}`` (0-based indices)."""
    if not (0 <= i < fact.n and 0 <= j < fact.n):
        raise IndexError(f"({i}, {j}) outside a {fact.n}x{fact.n} factorization")
    e = np.zeros(fact.n, dtype=object if fact.exact else float)
    if fact.exact:
        e[:] = Fraction(0)
    e[j] = 1
    return solve(fact, e)[i]


def inverse(fact: GramFactorization) -> np.ndarray:
    if fact.exact:
        Minv = fact.L_inv
        return Minv.T @ (Minv / fact.pivots[:, None])
    return solve(fact, np.eye(fact.n))
