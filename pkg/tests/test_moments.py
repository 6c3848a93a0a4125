import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointmass.analysis import CERTIFIED, DIVERGING, ScanPolicy
from pointmass.checks import random_connected_graph
from pointmass.config import build_config
from pointmass.kernels import make_kernel
from pointmass.moments import (
    moment_identity_check,
    mu_A_moments,
    mu_B_moments,
    network_mu_A_moments,
)
from pointmass.network import energy_kernel, network_moments, path_graph

from strategies import increasing_points

MIN = make_kernel("min")
INTS = build_config(range(1, 51), True)
SINC = make_kernel("sinc")
SINC_INTS = build_config(range(-20, 21))


def test_mu_a_path_interior():
    k, cfg = energy_kernel(path_graph(40))
    r = mu_A_moments(k, cfg, 10, ScanPolicy(max_n=len(cfg)))
    assert r.certified
    assert (r.m0, r.m1, r.m2, r.covariance) == pytest.approx((1, 2, 6, 2), rel=1e-9)


def test_mu_a_sinc():
    r = mu_A_moments(SINC, SINC_INTS, 3)
    assert (r.m0, r.m1, r.m2, r.covariance) == (1, 1, 1, 0)


def test_mu_a_binomial_diverges():
    r = mu_A_moments(make_kernel("binomial"), build_config(range(31)), 2, ScanPolicy(max_n=30))
    assert r.verdicts["m1"].kind == DIVERGING and math.isinf(r.m1)
    assert r.to_dict()["m1"] is None


def test_mu_b_examples():
    r = mu_B_moments(MIN, INTS, 1)
    assert (r.m0, r.m1, r.m2) == pytest.approx((1, 1, 2))
    r = mu_B_moments(SINC, SINC_INTS, 0)
    assert (r.m0, r.m1, r.m2) == (1, 1, 1)
    r = mu_B_moments(make_kernel("bridge"), build_config([0.25, 0.5, 0.75], True), 0.5,
                     ScanPolicy(max_n=3, window=2))
    assert (r.m0, r.m1, r.m2) == pytest.approx((0.25, 1, 8))


def test_identity_examples():
    lhs, rhs, ok = moment_identity_check(MIN, INTS, 1)
    assert ok and lhs == rhs == pytest.approx(2.0)
    k, cfg = energy_kernel(path_graph(30))
    lhs, rhs, ok = moment_identity_check(k, cfg, 7, ScanPolicy(max_n=len(cfg)))
    assert ok and lhs == pytest.approx(2.0)
    lhs, rhs, ok = moment_identity_check(SINC, SINC_INTS, 0)
    assert ok and lhs == rhs == 1.0


def test_identity_not_passed_without_certificate():
    _, _, ok = moment_identity_check(make_kernel("binomial"), build_config(range(31)), 1,
                                     ScanPolicy(max_n=30))
    assert not ok


@pytest.mark.parametrize("x", [1, 5, 12, 19])
def test_network_scan_matches_closed_form_on_path(x):
    g = path_graph(20)
    r = network_mu_A_moments(g, x)
    m = network_moments(g, x)
    assert r.certified
    assert (r.m1, r.m2, r.covariance) == pytest.approx((m.m1, m.m2, m.covariance), rel=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_network_specialization(seed, n):
    g = random_connected_graph(np.random.default_rng(seed), n)
    for x in g.vertices:
        if x == g.base:
            continue
        r = network_mu_A_moments(g, x)
        m = network_moments(g, x)
        assert r.m0 == 1
        assert r.m1 == pytest.approx(m.m1, rel=1e-8)
        assert r.m2 == pytest.approx(m.m2, rel=1e-8)
        assert r.covariance == pytest.approx(m.covariance, rel=1e-8, abs=1e-8 * m.m1**2)


@given(increasing_points(min_size=8, max_size=40, min_gap=0.05), st.data())
def test_min_moments_properties(pts, data):
    cfg = build_config(pts, True)
    x = data.draw(st.sampled_from(pts[:-6]))
    a = mu_A_moments(MIN, cfg, x, ScanPolicy(max_n=len(pts)))
    assert a.m0 == 1
    if a.certified:
        assert a.covariance >= -1e-9
        assert a.m2 >= a.m1**2 - 1e-9
        b = mu_B_moments(MIN, cfg, x, ScanPolicy(max_n=len(pts)))
        assert b.m2 == pytest.approx(a.m1, rel=1e-8)
        assert b.covariance >= -1e-9


@given(st.sets(st.integers(-500, 500), min_size=6, max_size=30), st.data())
def test_identity_holds_on_sinc(xs, data):
    cfg = build_config(sorted(xs))
    x = data.draw(st.sampled_from(cfg.points))
    _, _, ok = moment_identity_check(SINC, cfg, x, ScanPolicy(max_n=len(cfg)))
    assert ok == (len(cfg) - cfg.index(x) > 5)
