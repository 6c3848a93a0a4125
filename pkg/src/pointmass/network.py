"""Energy spaces of weighted graphs.

Finite connected networks only; an infinite network is studied through
finite truncations. Vertex functions are numpy arrays in ``graph.vertices``
order (mappings vertex -> value are accepted as input too).

Dipoles and the energy kernel come from the grounded Laplacian, the Laplacian
with the base point's row and column deleted. It is positive definite on a
connected graph and is factored once per graph by Cholesky.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from .config import Kernel, PointConfiguration
from .errors import Disconnected, DomainViolation, NonpositiveConductance, SelfLoop


@dataclass(frozen=True)
class NetworkGraph:
    vertices: tuple
    edges: tuple  # ((u, v, c), ...) with each undirected edge once
    base: object

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def neighbors(self) -> dict:
        nb = {v: {} for v in self.vertices}
        for u, v, c in self.edges:
            nb[u][v] = c
            nb[v][u] = c
        return nb

    def degree(self, x) -> float:
        """``c(x)``, the total conductance at ``x``."""
        return float(sum(self.neighbors[x].values()))

    def conductance(self, x, y) -> float:
        return float(self.neighbors[x].get(y, 0.0))

    @cached_property
    def edge_arrays(self) -> tuple:
        """Endpoint indices and conductances as parallel arrays."""
        idx = self.index
        i = np.array([idx[u] for u, _, _ in self.edges], dtype=int)
        j = np.array([idx[v] for _, v, _ in self.edges], dtype=int)
        return i, j, np.array([c for _, _, c in self.edges], dtype=float)

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        n = len(self.vertices)
        idx = self.index
        rows, cols, vals = [], [], []
        for u, v, c in self.edges:
            i, j = idx[u], idx[v]
            rows += [i, j, i, j]
            cols += [j, i, i, j]
            vals += [-c, -c, c, c]
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    @cached_property
    def grounded(self) -> tuple:
        """Non-base vertex labels and the Cholesky factor of the grounded Laplacian."""
        keep = [i for i, v in enumerate(self.vertices) if v != self.base]
        Lg = self.laplacian[keep][:, keep].toarray()
        return tuple(self.vertices[i] for i in keep), np.asarray(keep), cho_factor(Lg, lower=True)

    @cached_property
    def green(self) -> np.ndarray:
        """Inverse of the grounded Laplacian, indexed like ``grounded[0]``."""
        labels, _, cf = self.grounded
        return cho_solve(cf, np.eye(len(labels)))

    def as_array(self, f) -> np.ndarray:
        if isinstance(f, Mapping):
            return np.array([f[v] for v in self.vertices], dtype=float)
        f = np.asarray(f, dtype=float)
        if f.shape != (len(self.vertices),):
            raise ValueError(f"vertex function needs {len(self.vertices)} values")
        return f

    def indicator(self, x) -> np.ndarray:
        e = np.zeros(len(self.vertices))
        e[self.index[x]] = 1.0
        return e


def load_network(edges: Iterable, base) -> NetworkGraph:
    """Validate ``(u, v, c)`` triples into a connected network.

    Repeated edges between the same pair are parallel conductors and their
    conductances add.
    """
    merged = {}
    order = {}
    for e in edges:
        u, v, c = e
        c = float(c)
        if u == v:
            raise SelfLoop(f"self-loop at {u!r}")
        if not c > 0:
            raise NonpositiveConductance(f"conductance {c} on edge ({u!r}, {v!r})")
        for w in (u, v):
            order.setdefault(w, len(order))
        key = (u, v) if order[u] <= order[v] else (v, u)
        merged[key] = merged.get(key, 0.0) + c
    if not order:
        raise ValueError("empty edge list")
    if base not in order:
        raise ValueError(f"base point {base!r} is not a vertex")
    vertices = tuple(sorted(order, key=order.get))
    g = NetworkGraph(vertices, tuple((u, v, c) for (u, v), c in merged.items()), base)
    _check_connected(g)
    return g


def _check_connected(g):
    seen = {g.base}
    todo = deque([g.base])
    while todo:
        x = todo.popleft()
        for y in g.neighbors[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    if len(seen) != len(g.vertices):
        missing = [v for v in g.vertices if v not in seen]
        raise Disconnected(f"{len(missing)} vertices unreachable from base, e.g. {missing[0]!r}")


def _label(tok):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_edge_list(text: str) -> list:
    """Lines ``u v c``; ``#`` starts a comment. Integer-looking labels become ints."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u v c', got {line!r}")
        try:
            c = float(parts[2])
        except ValueError:
            raise ValueError(f"line {lineno}: bad conductance {parts[2]!r}") from None
        edges.append((_label(parts[0]), _label(parts[1]), c))
    return edges


def read_edge_list(path, base) -> NetworkGraph:
    with open(path) as fh:
        return load_network(parse_edge_list(fh.read()), base)


def laplacian_apply(graph: NetworkGraph, f) -> np.ndarray:
    """``(Δf)(x) = sum_{y~x} c_xy (f(x) - f(y))``."""
    return graph.laplacian @ graph.as_array(f)


def energy_inner(graph: NetworkGraph, f, g) -> float:
    """``1/2 sum_x sum_y c_xy (f(x) - f(y)) (g(x) - g(y))``, one term per edge."""
    f, g = graph.as_array(f), graph.as_array(g)
    i, j, c = graph.edge_arrays
    return float(np.sum(c * (f[i] - f[j]) * (g[i] - g[j])))


def dipole(graph: NetworkGraph, x, y) -> np.ndarray:
    """Solution of ``Δv = δ_x - δ_y`` with ``v(base) = 0``."""
    if x == y:
        raise ValueError("dipole needs two distinct vertices")
    labels, keep, cf = graph.grounded
    rhs = (graph.indicator(x) - graph.indicator(y))[keep]
    v = np.zeros(len(graph.vertices))
    v[keep] = cho_solve(cf, rhs)
    return v


def delta_inner_energy(graph: NetworkGraph, x, y) -> float:
    """Closed form of ``<δ_x, δ_y>_E``: c(x) on the diagonal, -c_xy for neighbours, else 0."""
    if x == y:
        return graph.degree(x)
    return -graph.conductance(x, y)


def energy_kernel(graph: NetworkGraph) -> tuple[Kernel, PointConfiguration]:
    """Kernel ``k(x, y) = <v_x, v_y>_E`` on the non-base vertices.

    ``v_x`` is the dipole from ``x`` to the base point. The kernel is the
    Green's function of the grounded Laplacian. Returns the kernel and the
    configuration of non-base vertices in graph order.
    """
    labels, _, _ = graph.grounded
    G = graph.green
    G = 0.5 * (G + G.T)
    pos = {v: i for i, v in enumerate(labels)}

    def col(points, y):
        return G[[pos[p] for p in points], pos[y]]

    def domain(config):
        for p in config.points:
            if p not in pos:
                raise DomainViolation(f"{p!r} is not a non-base vertex of the network")

    k = Kernel("energy", lambda a, b: float(G[pos[a], pos[b]]), col, True, False, domain)
    return k, PointConfiguration(labels, False)


def green_identity_residual(graph: NetworkGraph) -> float:
    """``max |(Δ k_x)(y) - δ_xy|`` over non-base ``x, y``."""
    labels, keep, _ = graph.grounded
    n = len(graph.vertices)
    K = np.zeros((n, len(labels)))
    K[keep, :] = graph.green
    R = (graph.laplacian @ K)[keep, :]
    return float(np.max(np.abs(R - np.eye(len(labels)))))


@dataclass(frozen=True)
class NetworkMoments:
    vertex: object
    degree: float
    m1: float
    m2: float
    covariance: float
    bound_ok: bool


def network_moments(graph: NetworkGraph, x) -> NetworkMoments:
    """First two moments and covariance of the spectral measure at ``x``.

    ``m1 = c(x)``, ``m2 = c(x)^2 + sum c_xy^2``, ``cov = sum c_xy^2`` and the
    bound ``cov <= c(x)^2``. The base point is excluded.
    """
    if x == graph.base:
        raise ValueError("moments are not reported at the base point")
    cx = graph.degree(x)
    sq = float(sum(c * c for c in graph.neighbors[x].values()))
    return NetworkMoments(x, cx, cx, cx * cx + sq, sq, sq <= cx * cx)


def path_graph(n: int, c: float = 1.0) -> NetworkGraph:
    """Path ``0 - 1 - ... - n`` with constant conductance, based at 0."""
    return load_network([(i, i + 1, c) for i in range(n)], 0)


def star_graph(k: int, c: float = 1.0) -> NetworkGraph:
    """Center 0 joined to leaves 1..k, based at leaf 1."""
    return load_network([(0, i, c) for i in range(1, k + 1)], 1)
