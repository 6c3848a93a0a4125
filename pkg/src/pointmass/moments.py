"""Low-order moments of the spectral measures at a point.

Both measures are handled only through their Gram-matrix expressions:

* measure A (from the operator on l^2): ``m0 = 1``, ``m1 = ||δ_x||^2``,
  ``m2 = sum_y <δ_x, δ_y>^2``, covariance ``m2 - m1^2``;
* measure B (from the operator on the RKHS): ``m0 = k(x, x)``, ``m1 = 1``,
  ``m2 = ||δ_x||^2``.

So the first moment of A and the second moment of B must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analysis import (
    CERTIFIED,
    DIVERGING,
    INCONCLUSIVE,
    ScanPolicy,
    Verdict,
    filtration_scan,
    plateau_verdict,
)
from .config import Kernel, PointConfiguration
from .network import NetworkGraph, energy_kernel


@dataclass(frozen=True)
class MomentReport:
    m0: float
    m1: float
    m2: float
    covariance: float
    verdicts: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(v.kind == CERTIFIED for v in self.verdicts.values())

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None or (isinstance(v, float) and math.isinf(v)) else v

        return {
            "m0": num(self.m0),
            "m1": num(self.m1),
            "m2": num(self.m2),
            "covariance": num(self.covariance),
            "verdicts": {k: v.kind for k, v in self.verdicts.items()},
        }


def _scan(kernel, config, x, policy):
    res = filtration_scan(kernel, config, [x], policy)
    tr = res.traces[x]
    sums = [float(s) for _, s in res.l2[x]]
    l2v = plateau_verdict(sums, policy)
    if tr.verdict.diverging:
        l2v = Verdict(DIVERGING, note="diagonal diverges")
    elif l2v.certified and not tr.verdict.certified:
        l2v = Verdict(INCONCLUSIVE, note="row converged but diagonal did not")
    return tr, sums, l2v


def _mu_a(norm, row_sq, vd, vr):
    m1 = math.inf if vd.diverging else norm
    m2 = math.inf if vr.diverging or vd.diverging else row_sq
    cov = m2 - m1 * m1 if math.isfinite(m1) and math.isfinite(m2) else math.nan
    return MomentReport(1.0, m1, m2, cov, {"m1": vd, "m2": vr})


def mu_A_moments(kernel: Kernel, config: PointConfiguration, x,
                 policy: ScanPolicy = ScanPolicy()) -> MomentReport:
    tr, sums, l2v = _scan(kernel, config, x, policy)
    norm = float(tr.last) if tr.steps else math.nan
    return _mu_a(norm, sums[-1] if sums else math.nan, tr.verdict, l2v)


def mu_B_moments(kernel: Kernel, config: PointConfiguration, x,
                 policy: ScanPolicy = ScanPolicy()) -> MomentReport:
    tr = filtration_scan(kernel, config, [x], policy).traces[x]
    m2 = math.inf if tr.verdict.diverging else float(tr.last)
    kxx = float(kernel(x, x))
    # B's covariance about its mean (m1 / m0), unnormalised
    cov = m2 - 1.0 / kxx if math.isfinite(m2) else math.nan
    return MomentReport(kxx, 1.0, m2, cov, {"m2": tr.verdict})


def moment_identity_check(kernel: Kernel, config: PointConfiguration, x,
                          policy: ScanPolicy = ScanPolicy(), rtol: float = 1e-8):
    """Compare A's first moment with B's second moment; both equal ``||δ_x||^2``.

    Returns ``(lhs, rhs, passed)``; ``passed`` also needs a certified scan.
    """
    a = mu_A_moments(kernel, config, x, policy)
    b = mu_B_moments(kernel, config, x, policy)
    lhs, rhs = a.m1, b.m2
    ok = (a.verdicts["m1"].certified and b.verdicts["m2"].certified
          and math.isfinite(lhs) and abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs)))
    return lhs, rhs, bool(ok)


def network_mu_A_moments(graph: NetworkGraph, x, policy: ScanPolicy | None = None) -> MomentReport:
    """Measure-A moments at ``x`` from the energy kernel's Gram data.

    The energy kernel lives on the non-base vertices, so the filtration never
    sees ``<δ_x, δ_o>`` for the base point ``o``. On a finite network the
    point-masses sum to the constant function, which is zero in the energy
    space, so that entry is minus the sum of the row over the other vertices
    and is added back to ``m2``.
    """
    if x == graph.base:
        raise ValueError("moments are not reported at the base point")
    kernel, config = energy_kernel(graph)
    if policy is None:
        max_n = max(len(config), 2)
        policy = ScanPolicy(max_n=max_n, window=min(5, max_n))
    res = filtration_scan(kernel, config, [x], policy)
    tr = res.traces[x]
    row = res.rows[x]
    sums = [float(s) for _, s in res.l2[x]]
    l2v = plateau_verdict(sums, policy)
    base_term = float(-row.sum())
    m2 = float(row @ row) + base_term**2
    if l2v.certified:
        l2v = Verdict(CERTIFIED, m2) if tr.verdict.certified else Verdict(
            INCONCLUSIVE, note="row converged but diagonal did not")
    # the scan exhausted a finite vertex set; its last values are exact
    exhausted = res.n == len(config)
    vd = tr.verdict if tr.verdict.certified or not exhausted else Verdict(CERTIFIED, float(tr.last),
                                                                          note="finite network")
    vr = l2v if l2v.certified or not exhausted else Verdict(CERTIFIED, m2, note="finite network")
    return _mu_a(float(tr.last), m2, vd, vr)
