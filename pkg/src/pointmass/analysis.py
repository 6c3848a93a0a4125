"""Point-mass norms as limits along a filtration.

For a finite set ``F`` containing ``x``, the projection of the point-mass
``delta_x`` onto ``span{k_y : y in F}`` has coefficients ``K_F^{-1} delta_x``
and squared norm ``zeta_F(x) = (K_F^{-1})_{xx}``. Along ``F_1 ⊂ F_2 ⊂ ...``
these values are nondecreasing, and ``delta_x`` has finite norm exactly when
they stay bounded. A scan can only collect evidence for that, so every result
carries a three-valued :class:`Verdict`.

Scans grow one LDL^T factorization by bordering. Adding a point with Gram
column ``b`` and pivot ``s`` updates each tracked row ``r`` of the inverse by

    r <- [r + u * (u_x / s), -u_x / s],    u = K^{-1} b,

so ``zeta`` increases by ``u_x**2 / s`` and never decreases.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULT_EPS_PD, Kernel, PointConfiguration, assemble_gram
from .errors import NotPositiveDefinite, SubsetMembershipUnverified
from .gram import GramFactorization, _Buffer, border_extend, factorize, solve

CERTIFIED = "CertifiedBounded"
DIVERGING = "Diverging"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ScanPolicy:
    max_n: int = 1000
    window: int = 5
    rel_tol: float = 1e-9
    divergence_cap: float = 1e12
    slope_tol: float = 1e-3
    eps: float = 1e-300
    eps_pd: float = DEFAULT_EPS_PD
    audit_every: int = 64

    def __post_init__(self):
        if not self.max_n >= self.window >= 2:
            raise ValueError("need max_n >= window >= 2")
        if not self.rel_tol > 0 or not self.divergence_cap > 0:
            raise ValueError("rel_tol and divergence_cap must be positive")


@dataclass(frozen=True)
class Verdict:
    kind: str
    value: float | None = None  # limit for CertifiedBounded, log-slope for Diverging
    note: str = ""

    @property
    def certified(self) -> bool:
        return self.kind == CERTIFIED

    @property
    def diverging(self) -> bool:
        return self.kind == DIVERGING

    def __str__(self):
        return self.kind


def plateau_verdict(values: Sequence, policy: ScanPolicy, scale: float | None = None) -> Verdict:
    """Classify a sequence of partial values.

    CertifiedBounded when the change over the last ``window`` steps is below
    ``rel_tol`` relative to ``max(|last|, scale)``; Diverging when the last
    value passes ``divergence_cap`` or the last ``window + 1`` values rise at
    every step and the least-squares slope of their ``log`` exceeds ``slope_tol``.
    """
    vals = [float(v) for v in values]
    if not vals:
        return Verdict(INCONCLUSIVE, note="empty trace")
    last = vals[-1]
    if abs(last) > policy.divergence_cap:
        return Verdict(DIVERGING, math.inf, note="cap exceeded")
    w = policy.window
    if len(vals) <= w:
        return Verdict(INCONCLUSIVE, note=f"only {len(vals)} steps, window {w}")
    denom = max(abs(last), scale or 0.0, policy.eps)
    if abs(last - vals[-1 - w]) / denom < policy.rel_tol:
        return Verdict(CERTIFIED, last)
    tail = np.asarray(vals[-1 - w :])
    # growth must be sustained: a single jump followed by a flat run is not divergence
    rising = np.all(np.diff(tail) > policy.rel_tol * np.abs(tail[1:]))
    if rising and np.all(tail > 0):
        slope = float(np.polyfit(np.arange(w + 1), np.log(tail), 1)[0])
        if slope > policy.slope_tol:
            return Verdict(DIVERGING, slope, note="positive log-slope")
    return Verdict(INCONCLUSIVE, note="no plateau")


@dataclass
class FiltrationTrace:
    """``zeta_n(x)`` for ``n`` from ``index(x) + 1`` on."""

    target: object
    index: int
    steps: list = field(default_factory=list)  # (n, zeta_n)
    verdict: Verdict = Verdict(INCONCLUSIVE)
    policy: ScanPolicy = field(default_factory=ScanPolicy)
    audits: list = field(default_factory=list)  # (n, |log_det drift|)
    breakdown: int | None = None

    @property
    def values(self) -> list:
        return [v for _, v in self.steps]

    @property
    def last(self):
        return self.steps[-1][1] if self.steps else None

    def verdicts_so_far(self) -> list:
        vals = self.values
        return [plateau_verdict(vals[: i + 1], self.policy).kind for i in range(len(vals))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "zeta", "verdict_so_far"])
        for (n, z), v in zip(self.steps, self.verdicts_so_far()):
            w.writerow([n, repr(float(z)), v])
        return buf.getvalue()

    def to_dict(self) -> dict:
        est = self.estimate
        return {
            "point": _jsonable(self.target),
            "verdict": self.verdict.kind,
            "estimate": None if est is None or math.isinf(est) else est,
            "steps": [[n, float(z)] for n, z in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @property
    def estimate(self) -> float | None:
        if self.verdict.diverging:
            return math.inf
        return None if self.last is None else float(self.last)


def _jsonable(p):
    return p if isinstance(p, (int, float, str)) else str(p)


@dataclass
class _Tracked:
    index: int
    row: np.ndarray | None = None
    zeta: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    pairs: dict = field(default_factory=dict)  # other index -> [(n, entry)]


@dataclass
class ScanResult:
    traces: dict  # target point -> FiltrationTrace
    rows: dict  # target point -> final row of K_n^{-1}
    l2: dict  # target point -> [(n, sum_y entry^2)]
    pairs: dict  # (x, y) -> [(n, entry)]
    n: int
    factorization: GramFactorization
    breakdown: int | None = None


def filtration_scan(kernel: Kernel, config: PointConfiguration, targets: Iterable,
                    policy: ScanPolicy = ScanPolicy(), pairs: Iterable = ()) -> ScanResult:
    """One bordering pass over ``config`` tracking rows of ``K_n^{-1}``.

    ``targets`` are points of ``config``; ``pairs`` are ``(x, y)`` point
    pairs whose inverse entries are recorded at every step (``x`` is added
    to the targets). Stops early once every target exceeds the divergence
    cap, or when a pivot breaks down.
    """
    kernel.check_domain(config)
    targets = list(dict.fromkeys(targets))
    pairs = [tuple(p) for p in pairs]
    for x, _ in pairs:
        if x not in targets:
            targets.append(x)
    tracked = {x: _Tracked(config.index(x)) for x in targets}
    for x, y in pairs:
        tracked[x].pairs[config.index(y)] = []

    N = min(policy.max_n, len(config))
    exact = kernel.exact
    pts = config.points
    fact = GramFactorization(_Buffer(max(N, 1), exact, object if exact else float), 0, 0.0, 0.0)
    gram = None if exact or not policy.audit_every else np.zeros((N, N))
    audits = []
    breakdown = None
    for n in range(N):
        col = kernel.column(pts[: n + 1], pts[n])
        try:
            fact, u, s = border_extend(fact, col[:n], col[n], policy.eps_pd, return_solution=True)
        except NotPositiveDefinite:
            breakdown = n + 1
            break
        if gram is not None:
            gram[: n + 1, n] = col
            gram[n, : n + 1] = col
            if (n + 1) % policy.audit_every == 0:
                audits.append((n + 1, _audit(gram[: n + 1, : n + 1], fact.log_det)))
        all_over = True
        for t in tracked.values():
            p = t.index
            if p > n:
                all_over = False
                continue
            if t.row is None:
                t.row = np.zeros(N, dtype=object if exact else float)
                if exact:
                    t.row[:] = Fraction(0)
            r = t.row
            if p == n:
                r[:n] = -u / s
                r[n] = 1 / s
            else:
                up = u[p]
                r[:n] += u * (up / s)
                r[n] = -up / s
            z = r[p]
            t.zeta.append((n + 1, z))
            t.l2.append((n + 1, r[: n + 1] @ r[: n + 1]))
            for q, tr in t.pairs.items():
                if q <= n:
                    tr.append((n + 1, r[q]))
            if not float(z) > policy.divergence_cap:
                all_over = False
        if all_over and tracked:
            break

    traces = {}
    for x, t in tracked.items():
        tr = FiltrationTrace(x, t.index, list(t.zeta), policy=policy, audits=audits,
                             breakdown=breakdown)
        tr.verdict = plateau_verdict(tr.values, policy)
        if breakdown is not None and not tr.verdict.diverging:
            tr.verdict = Verdict(INCONCLUSIVE, note=f"pivot breakdown at n={breakdown}")
        traces[x] = tr
    return ScanResult(
        traces=traces,
        rows={x: (None if t.row is None else t.row[: fact.n].copy()) for x, t in tracked.items()},
        l2={x: t.l2 for x, t in tracked.items()},
        pairs={(x, pts[q]): tr for x, t in tracked.items() for q, tr in t.pairs.items()},
        n=fact.n,
        factorization=fact,
        breakdown=breakdown,
    )


def _audit(K, bordered_log_det):
    try:
        C = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        return math.nan
    fresh = 2.0 * float(np.sum(np.log(np.diag(C))))
    return abs(fresh - bordered_log_det) / max(1.0, abs(fresh))


def _unit(n, i, exact):
    e = np.zeros(n, dtype=object if exact else float)
    if exact:
        e[:] = Fraction(0)
    e[i] = 1
    return e


def projection_coeffs(fact: GramFactorization, x_index: int) -> np.ndarray:
    """Coefficients ``K_F^{-1} delta_x`` of the projected point-mass."""
    if not 0 <= x_index < fact.n:
        raise IndexError(x_index)
    return solve(fact, _unit(fact.n, x_index, fact.exact))


def pf_delta_norm_sq(fact: GramFactorization, x_index: int):
    """``(K_F^{-1} delta_x)(x)``, the squared norm of the projected point-mass."""
    return projection_coeffs(fact, x_index)[x_index]


def membership_scan(kernel: Kernel, config: PointConfiguration, x,
                    policy: ScanPolicy = ScanPolicy()) -> FiltrationTrace:
    return filtration_scan(kernel, config, [x], policy).traces[x]


def membership_scans(kernel: Kernel, config: PointConfiguration, xs: Iterable,
                     policy: ScanPolicy = ScanPolicy()) -> list:
    res = filtration_scan(kernel, config, xs, policy)
    return list(res.traces.values())


def delta_norm_sq(kernel: Kernel, config: PointConfiguration, x,
                  policy: ScanPolicy = ScanPolicy()) -> tuple[float, Verdict]:
    """Estimate of the squared point-mass norm.

    Diverging gives ``inf``. Inconclusive still returns the last ``zeta``,
    which is a lower bound; check the verdict before trusting it as a limit.
    """
    tr = membership_scan(kernel, config, x, policy)
    return tr.estimate, tr.verdict


def minor_ratio(kernel: Kernel, config: PointConfiguration, x, n: int,
                eps_pd: float = DEFAULT_EPS_PD) -> float:
    """``det K'_F / det K_F`` with row and column ``x`` removed, in log space."""
    i = config.index(x)
    if i >= n:
        raise ValueError(f"{x!r} is not among the first {n} points")
    gram = assemble_gram(kernel, config, n)
    keep = [j for j in range(n) if j != i]
    K = gram.entries
    full = factorize(gram, eps_pd)
    minor = factorize(K[np.ix_(keep, keep)], eps_pd)
    return math.exp(minor.log_det - full.log_det)


def induced_kernel_entry(kernel: Kernel, config: PointConfiguration, x, y,
                         policy: ScanPolicy = ScanPolicy()) -> tuple[float, Verdict]:
    """Estimate of ``<delta_x, delta_y>`` as the limit of ``(K_n^{-1})_{xy}``.

    The plateau test on off-diagonal entries is taken relative to
    ``sqrt(zeta_n(x) zeta_n(y))``, the Cauchy-Schwarz bound on the entry, so
    that entries converging to zero can still be certified.
    """
    if x == y:
        return delta_norm_sq(kernel, config, x, policy)
    res = filtration_scan(kernel, config, [x, y], policy, pairs=[(x, y)])
    trace = res.pairs[(x, y)]
    if not trace:
        return math.nan, Verdict(INCONCLUSIVE, note="pair never entered the filtration")
    zx = res.traces[x].last
    zy = res.traces[y].last
    for tr in (res.traces[x], res.traces[y]):
        if tr.verdict.diverging:
            return math.nan, Verdict(DIVERGING, tr.verdict.value, note="diagonal diverges")
    vals = [float(v) for _, v in trace]
    scale = math.sqrt(abs(float(zx) * float(zy)))
    v = plateau_verdict([abs(t) for t in vals], policy, scale=scale)
    if v.certified:
        return vals[-1], Verdict(CERTIFIED, vals[-1])
    # with both diagonals bounded the entry is bounded too, so growth in it
    # is not evidence of divergence
    return vals[-1], Verdict(INCONCLUSIVE, note="entry has not settled")


def l2_row_test(kernel: Kernel, config: PointConfiguration, x,
                policy: ScanPolicy = ScanPolicy()) -> tuple[list, Verdict]:
    """Partial sums of ``sum_y |(K_n^{-1})_{xy}|^2`` along the filtration."""
    res = filtration_scan(kernel, config, [x], policy)
    sums = [float(s) for _, s in res.l2[x]]
    zv = res.traces[x].verdict
    v = plateau_verdict(sums, policy)
    if v.certified and not zv.certified:
        v = Verdict(INCONCLUSIVE, note="row converged but diagonal did not")
    return sums, v


def del_projection(fact: GramFactorization, f_coeffs, subset: Sequence[int],
                   verdicts: Mapping[int, Verdict] | None = None) -> tuple[np.ndarray, float]:
    """Project ``f = sum_y c_y k_y`` onto ``span{delta_s : s in subset}``.

    In the finite model ``<delta_s, delta_t> = (K^{-1})_{st}`` and
    ``<delta_s, f> = c_s``, so the projection coefficients solve
    ``(K^{-1})_{SS} a = c_S``. Returns ``a`` and ``||f - proj||^2``.
    """
    subset = list(subset)
    if verdicts:
        bad = [s for s in subset if s in verdicts and verdicts[s].diverging]
        if bad:
            raise SubsetMembershipUnverified(bad)
    c = np.asarray(f_coeffs, dtype=float)
    if c.shape != (fact.n,):
        raise ValueError(f"expected {fact.n} coefficients")
    if not subset:
        return np.zeros(0), float(c @ fact.reconstruct() @ c)
    D = np.column_stack([solve(fact, _unit(fact.n, s, False))[subset] for s in subset])
    D = 0.5 * (D + D.T)
    a = np.linalg.solve(D, c[subset])
    K = fact.reconstruct() if fact.source is None else np.asarray(fact.source.entries, dtype=float)
    norm_f = float(c @ K @ c)
    return a, max(norm_f - float(a @ c[subset]), 0.0)


def hf_constant_bound(fact: GramFactorization, f_values) -> float:
    """Lower bound for the smallest ``C`` with ``|sum xi f|^2 <= C xi^T K xi``.

    Over ``xi`` supported on ``F`` the supremum of the ratio is exactly
    ``f_F^T K_F^{-1} f_F``; larger ``F`` can only raise it.
    """
    f = np.asarray(f_values, dtype=float)
    return float(f @ solve(fact, f))
