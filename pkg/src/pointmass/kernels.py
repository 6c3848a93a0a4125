"""Built-in kernels and the JSON kernel-spec loader.

=========  ==========================================  ========================
id         k(x, y)                                     domain
=========  ==========================================  ========================
min        min(x, y)       (Brownian motion)           (0, inf), increasing
bridge     min(x, y) - x y (Brownian bridge)           (0, 1), increasing
binomial   sum_n C(x, n) C(y, n)                       nonnegative integers
sinc       sin(pi (x - y)) / (pi (x - y))              any reals
matrix     M[x, y] for a user-supplied symmetric M     indices into M
=========  ==========================================  ========================
"""

from __future__ import annotations

import enum
import json
import os

import numpy as np

from .config import Kernel, PointConfiguration, build_config
from .errors import DomainViolation


class BuiltinKernelId(str, enum.Enum):
    MIN = "min"
    BRIDGE = "bridge"
    BINOMIAL = "binomial"
    SINC = "sinc"
    MATRIX = "matrix"


def _require_increasing(config, lo, hi, name):
    pts = config.points
    for i, p in enumerate(pts):
        if not isinstance(p, (int, float)) or not lo < p < hi:
            raise DomainViolation(f"{name} kernel needs points in ({lo}, {hi}); got {p!r} at {i}")
        if i and not p > pts[i - 1]:
            raise DomainViolation(f"{name} kernel needs strictly increasing points (position {i})")


def _min_domain(config):
    _require_increasing(config, 0.0, float("inf"), "min")


def _bridge_domain(config):
    _require_increasing(config, 0.0, 1.0, "bridge")


def _binomial_domain(config):
    for i, p in enumerate(config.points):
        if isinstance(p, bool) or not isinstance(p, (int, float)) or p < 0 or int(p) != p:
            raise DomainViolation(f"binomial kernel needs nonnegative integers; got {p!r} at {i}")


def _sinc_domain(config):
    for i, p in enumerate(config.points):
        if not isinstance(p, (int, float)):
            raise DomainViolation(f"sinc kernel needs real points; got {p!r} at {i}")


_PASCAL = [(1,)]


def pascal_row(x: int) -> tuple:
    """Row ``x`` of Pascal's triangle, by the additive recurrence."""
    while len(_PASCAL) <= x:
        prev = _PASCAL[-1]
        _PASCAL.append((1,) + tuple(a + b for a, b in zip(prev, prev[1:])) + (1,))
    return _PASCAL[x]


def binomial(x: int, n: int) -> int:
    if n < 0 or n > x:
        return 0
    return pascal_row(x)[n]


def _binomial_k(x, y):
    x, y = int(x), int(y)
    rx, ry = pascal_row(x), pascal_row(y)
    return sum(rx[n] * ry[n] for n in range(min(x, y) + 1))


def _sinc(d):
    d = np.asarray(d, dtype=float)
    out = np.sinc(d)
    # exact zeros at nonzero integer offsets, so integer Grams are exactly I
    return np.where((d != 0) & (d == np.round(d)), 0.0, out)


def _sinc_k(x, y):
    return float(_sinc(float(x) - float(y)))


def _min_col(points, y):
    return np.minimum(np.asarray(points, dtype=float), float(y))


def _bridge_col(points, y):
    p = np.asarray(points, dtype=float)
    y = float(y)
    return np.minimum(p, y) - p * y


def _sinc_col(points, y):
    return _sinc(np.asarray(points, dtype=float) - float(y))


def matrix_kernel(matrix, name: str = "matrix") -> Kernel:
    """Kernel on indices ``0..m-1`` backed by a symmetric matrix."""
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("kernel matrix must be square")
    if not np.array_equal(M, M.T):
        raise ValueError("kernel matrix is not symmetric")
    m = M.shape[0]

    def domain(config):
        for i, p in enumerate(config.points):
            if not isinstance(p, int) or not 0 <= p < m:
                raise DomainViolation(f"matrix kernel needs indices in [0, {m}); got {p!r} at {i}")

    def col(points, y):
        return M[np.asarray(points, dtype=int), int(y)]

    return Kernel(name, lambda x, y: float(M[int(x), int(y)]), col, None, False, domain)


def make_kernel(kid, matrix=None) -> Kernel:
    kid = BuiltinKernelId(kid)
    if kid is BuiltinKernelId.MIN:
        return Kernel("min", lambda x, y: float(min(x, y)), _min_col, True, False, _min_domain)
    if kid is BuiltinKernelId.BRIDGE:
        return Kernel("bridge", lambda x, y: float(min(x, y) - x * y), _bridge_col, True, False,
                      _bridge_domain)
    if kid is BuiltinKernelId.BINOMIAL:
        return Kernel("binomial", _binomial_k, None, True, True, _binomial_domain)
    if kid is BuiltinKernelId.SINC:
        return Kernel("sinc", _sinc_k, _sinc_col, True, False, _sinc_domain)
    if matrix is None:
        raise ValueError("matrix kernel needs a matrix")
    return matrix_kernel(matrix)


def load_kernel_spec(spec) -> tuple[Kernel, PointConfiguration | None]:
    """Build a kernel (and its points, if given) from a JSON kernel spec.

    ``spec`` is a dict, a JSON string or a path to a JSON file with keys
    ``kernel``, ``points``, ``ordered`` and, for ``"matrix"``, ``matrix``.
    """
    if isinstance(spec, (str, os.PathLike)):
        text = str(spec)
        if not text.lstrip().startswith("{"):
            with open(spec) as fh:
                text = fh.read()
        spec = json.loads(text)
    if "kernel" not in spec:
        raise ValueError("kernel spec needs a 'kernel' field")
    kernel = make_kernel(spec["kernel"], spec.get("matrix"))
    points = spec.get("points")
    if points is None and spec["kernel"] == "matrix":
        points = list(range(len(spec["matrix"])))
    config = None
    if points is not None:
        config = build_config(points, bool(spec.get("ordered", False)))
        kernel.check_domain(config)
    return kernel, config
