import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointmass.analysis import (
    CERTIFIED,
    DIVERGING,
    INCONCLUSIVE,
    ScanPolicy,
    del_projection,
    delta_norm_sq,
    filtration_scan,
    hf_constant_bound,
    induced_kernel_entry,
    l2_row_test,
    membership_scan,
    minor_ratio,
    pf_delta_norm_sq,
    plateau_verdict,
    projection_coeffs,
)
from pointmass.config import assemble_gram, build_config
from pointmass.errors import SubsetMembershipUnverified
from pointmass.gram import factorize
from pointmass.kernels import make_kernel, matrix_kernel
from pointmass.analysis import Verdict

from strategies import increasing_points, spd_matrices

MIN = make_kernel("min")
INTS = build_config(range(1, 51), True)


def _fact(pts):
    return factorize(assemble_gram(MIN, build_config(pts, True)))


# projections of single point-masses

def test_projection_coeffs_first_point():
    np.testing.assert_allclose(projection_coeffs(_fact([1, 2, 3]), 0), [2, -1, 0], atol=1e-12)


def test_projection_coeff_interior():
    c = projection_coeffs(_fact([1, 2, 3, 4]), 2)
    assert c[2] == pytest.approx((4 - 2) / ((3 - 2) * (4 - 3)))


def test_projection_scalar():
    assert projection_coeffs(factorize(np.array([[4.0]])), 0)[0] == pytest.approx(0.25)


@pytest.mark.parametrize("pts,i,expected", [([1, 2], 0, 2.0), ([1], 0, 1.0), ([1, 2, 3], 1, 2.0)])
def test_pf_delta_norm_sq(pts, i, expected):
    assert pf_delta_norm_sq(_fact(pts), i) == pytest.approx(expected)


# membership scans

def test_scan_min_first_point_plateaus_at_two():
    tr = membership_scan(MIN, INTS, 1)
    assert tr.verdict.kind == CERTIFIED
    assert tr.estimate == pytest.approx(2.0, rel=1e-12)
    assert tr.values[0] == pytest.approx(1.0)
    assert all(v == pytest.approx(2.0, rel=1e-12) for v in tr.values[1:])


def test_scan_binomial_diverges():
    cfg = build_config(range(21))
    tr = membership_scan(make_kernel("binomial"), cfg, 1, ScanPolicy(max_n=20))
    assert tr.verdict.kind == DIVERGING
    # x = 1 enters at the second point; sums of C(k, 1)^2 for k = 1..4
    assert tr.values[:4] == [1, 5, 14, 30]
    assert all(isinstance(v, Fraction) for v in tr.values)


def test_scan_sinc_integers():
    tr = membership_scan(make_kernel("sinc"), build_config(range(-10, 11)), 0)
    assert tr.verdict.kind == CERTIFIED and tr.estimate == 1.0


def test_scan_stops_at_cap():
    # zeta_n(3) is a sum of C(k, 3)^2 and passes 1e6 well before n = 40
    cfg = build_config(range(40))
    tr = membership_scan(make_kernel("binomial"), cfg, 3, ScanPolicy(max_n=40, divergence_cap=1e6))
    assert tr.verdict.kind == DIVERGING
    assert tr.values[-1] > 1e6 and tr.values[-2] <= 1e6
    assert len(tr.values) < 37


def test_trace_exports():
    tr = membership_scan(MIN, build_config(range(1, 10), True), 2, ScanPolicy(max_n=9))
    lines = tr.to_csv().splitlines()
    assert lines[0] == "n,zeta,verdict_so_far"
    assert lines[1].startswith("2,")
    assert lines[-1].endswith(CERTIFIED)
    d = json.loads(tr.to_json())
    assert set(d) == {"point", "verdict", "estimate", "steps"}
    assert d["point"] == 2 and d["estimate"] == pytest.approx(2.0)


# delta_norm_sq

def test_sparse_point():
    pts = [i * (i - 1) // 2 for i in range(2, 40)]
    est, v = delta_norm_sq(MIN, build_config(pts, True), 3)
    assert v.certified and est == pytest.approx(5 / 6, rel=1e-12)


def test_bridge_window_value():
    pts = [0.25, 0.5, 0.75]
    K = assemble_gram(make_kernel("bridge"), build_config(pts, True)).entries
    oracle = np.linalg.inv(K)[1, 1]  # brute-force 3x3 inversion
    assert oracle == pytest.approx(8.0)
    est, v = delta_norm_sq(make_kernel("bridge"), build_config(pts, True), 0.5,
                           ScanPolicy(max_n=3, window=2))
    # too few steps to certify; the last value is still the exact finite-window norm
    assert v.kind == INCONCLUSIVE
    assert est == pytest.approx(oracle, rel=1e-12)


def test_window_edge_value():
    est, v = delta_norm_sq(MIN, build_config([1, 2], True), 2, ScanPolicy(max_n=2, window=2))
    assert est == pytest.approx(1.0) and v.kind == INCONCLUSIVE


# minor ratio

def test_minor_ratio_min():
    assert minor_ratio(MIN, build_config([1, 2, 3], True), 1, 3) == pytest.approx(2.0)


def test_minor_ratio_single():
    assert minor_ratio(MIN, build_config([4.0], True), 4.0, 1) == pytest.approx(0.25)


def test_minor_ratio_binomial():
    assert minor_ratio(make_kernel("binomial"), build_config(range(4)), 1, 4) == pytest.approx(14.0)


# induced kernel entries and rows

def test_induced_neighbours():
    est, v = induced_kernel_entry(MIN, INTS, 1, 2)
    assert v.certified and est == pytest.approx(-1.0, rel=1e-12)
    est, v = induced_kernel_entry(MIN, INTS, 1, 3)
    assert v.certified and est == pytest.approx(0.0, abs=1e-12)


def test_induced_diagonal_matches_norm():
    a = induced_kernel_entry(MIN, INTS, 5, 5)
    b = delta_norm_sq(MIN, INTS, 5)
    assert a[0] == b[0] and a[1].kind == b[1].kind


def test_l2_row_min():
    sums, v = l2_row_test(MIN, INTS, 2)
    assert v.certified and sums[-1] == pytest.approx(6.0, rel=1e-12)
    # oracle: the row of a large dense inverse
    D = np.linalg.inv(assemble_gram(MIN, INTS).entries)
    assert float(D[1] @ D[1]) == pytest.approx(6.0, rel=1e-9)


def test_l2_row_sinc():
    sums, v = l2_row_test(make_kernel("sinc"), build_config(range(-8, 9)), 0)
    assert v.certified and sums[-1] == 1.0


def test_l2_row_single_point():
    sums, v = l2_row_test(MIN, build_config([2.0], True), 2.0, ScanPolicy(max_n=2, window=2))
    assert sums == [pytest.approx(0.25)]
    assert v.kind == INCONCLUSIVE


# DEL projection

def test_del_projection_full_subset():
    f = _fact([1, 2, 3])
    _, res = del_projection(f, [0.3, -1.0, 2.0], [0, 1, 2])
    assert res == pytest.approx(0.0, abs=1e-12)


def test_del_projection_idempotent():
    f = _fact([1, 2, 3])
    c = projection_coeffs(f, 1)  # delta at the middle point as a kernel expansion
    a, res = del_projection(f, c, [1])
    assert a == pytest.approx([1.0]) and res == pytest.approx(0.0, abs=1e-12)


def test_del_projection_k1_on_delta1():
    # oracle: <delta_1, k_1> = 1, ||delta_1||^2 = 2, so the coefficient is 1/2
    a, res = del_projection(_fact([1, 2, 3]), [1.0, 0, 0], [0])
    assert a == pytest.approx([0.5]) and res == pytest.approx(0.5)


def test_del_projection_refuses_diverging():
    with pytest.raises(SubsetMembershipUnverified):
        del_projection(_fact([1, 2, 3]), [1.0, 0, 0], [0], {0: Verdict(DIVERGING)})


def test_hf_bound_is_attained_by_solution():
    f = _fact([1, 2, 3])
    vals = np.array([1.0, 3.0, 2.0])
    xi = np.linalg.solve(f.reconstruct(), vals)
    K = f.reconstruct()
    ratio = (xi @ vals) ** 2 / (xi @ K @ xi)
    assert hf_constant_bound(f, vals) == pytest.approx(ratio)


# plateau rule

def test_plateau_needs_full_window():
    p = ScanPolicy(window=3)
    assert plateau_verdict([2, 2, 2], p).kind == INCONCLUSIVE
    assert plateau_verdict([2, 2, 2, 2], p).kind == CERTIFIED
    assert plateau_verdict([1, 10, 100, 1000], p).kind == DIVERGING


# properties

def _random_strict_kernel(draw):
    M = draw(spd_matrices(min_n=2, max_n=14, cond=1e5))
    return matrix_kernel(M), build_config(range(len(M)))


@given(st.data())
def test_monotone_along_filtration(data):
    k, cfg = _random_strict_kernel(data.draw)
    x = data.draw(st.sampled_from(cfg.points))
    vals = [float(v) for v in membership_scan(k, cfg, x, ScanPolicy(max_n=len(cfg), window=2)).values]
    assert all(b >= a * (1 - 1e-9) for a, b in zip(vals, vals[1:]))


@given(increasing_points(max_size=40, min_gap=0.05), st.data())
def test_monotone_min(pts, data):
    x = data.draw(st.sampled_from(pts))
    policy = ScanPolicy(max_n=max(len(pts), 2), window=2)
    vals = membership_scan(MIN, build_config(pts, True), x, policy).values
    assert all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


@given(st.data())
def test_cramer_consistency(data):
    k, cfg = _random_strict_kernel(data.draw)
    n = data.draw(st.integers(1, len(cfg)))
    i = data.draw(st.integers(0, n - 1))
    f = factorize(assemble_gram(k, cfg, n))
    assert minor_ratio(k, cfg, cfg[i], n) == pytest.approx(pf_delta_norm_sq(f, i), rel=1e-8)


@given(increasing_points(min_size=2, max_size=200, min_gap=0.05), st.data())
def test_cramer_consistency_min(pts, data):
    i = data.draw(st.integers(0, len(pts) - 1))
    cfg = build_config(pts, True)
    f = factorize(assemble_gram(MIN, cfg))
    assert minor_ratio(MIN, cfg, pts[i], len(pts)) == pytest.approx(pf_delta_norm_sq(f, i), rel=1e-8)


@given(st.data())
def test_induced_symmetry(data):
    k, cfg = _random_strict_kernel(data.draw)
    x, y = data.draw(st.lists(st.sampled_from(cfg.points), min_size=2, max_size=2, unique=True))
    p = ScanPolicy(max_n=len(cfg), window=2)
    a, va = induced_kernel_entry(k, cfg, x, y, p)
    b, vb = induced_kernel_entry(k, cfg, y, x, p)
    assert va.kind == vb.kind
    if va.diverging:
        assert math.isnan(a) and math.isnan(b)
    else:
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(st.data())
def test_reproducing(data):
    k, cfg = _random_strict_kernel(data.draw)
    f = factorize(assemble_gram(k, cfg))
    K = assemble_gram(k, cfg).entries
    i = data.draw(st.integers(0, len(cfg) - 1))
    e = np.zeros(len(cfg))
    e[i] = 1
    np.testing.assert_allclose(K @ projection_coeffs(f, i), e, atol=1e-9)


@given(increasing_points(min_size=3, max_size=60, min_gap=0.05), st.data())
def test_min_locality(pts, data):
    f = _fact(pts)
    i = data.draw(st.integers(0, len(pts) - 1))
    c = projection_coeffs(f, i)
    far = [j for j in range(len(pts)) if abs(j - i) > 1]
    scale = max(1.0, np.abs(c).max())
    assert np.all(np.abs(c[far]) <= 1e-9 * scale)


@given(st.data())
def test_scan_matches_dense_inverse(data):
    k, cfg = _random_strict_kernel(data.draw)
    x = data.draw(st.sampled_from(cfg.points))
    res = filtration_scan(k, cfg, [x], ScanPolicy(max_n=len(cfg), window=2))
    D = np.linalg.inv(assemble_gram(k, cfg).entries)
    i = cfg.index(x)
    np.testing.assert_allclose(res.rows[x], D[i], rtol=1e-7, atol=1e-7 * np.abs(D[i]).max())


@given(st.lists(st.floats(0.5, 2.0), min_size=6, max_size=30))
def test_certified_means_flat_window(increments):
    vals = list(np.cumsum(increments))
    vals += [vals[-1]] * 6
    p = ScanPolicy(window=5)
    v = plateau_verdict(vals, p)
    assert v.kind == CERTIFIED
    assert (vals[-1] - vals[-6]) / vals[-1] < p.rel_tol
