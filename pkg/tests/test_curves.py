import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from rvfilter.certify import NOT_DETERMINING, find_zero
from rvfilter.curves import (
    curves_csv,
    curves_svg,
    fold_pairs,
    residual,
    solve_failure_point,
    trace_curves,
)

PI_LN2 = math.pi / math.log(2)


def modulus(psi1, psi2, theta):
    return abs(sum(x * cmath.exp(1j * theta * math.log(x)) for x in (psi1, psi2, 1.0)))


def boundary_root(p, q):
    """psi2 in (0, 1) with psi2^(p/q) + psi2 = 1."""
    return brentq(lambda y: y ** (p / q) + y - 1.0, 1e-12, 1 - 1e-12, xtol=1e-15)


Y_STAR = boundary_root(3, 1)


@pytest.fixture(scope="module")
def traced():
    return trace_curves((0.0, 100.0), 0.01, 8)


def test_cubic_root_oracle():
    assert Y_STAR == pytest.approx(0.6823278038280193, abs=1e-13)
    assert Y_STAR**3 + Y_STAR == pytest.approx(1.0, abs=1e-15)


def test_solve_contains_half_half():
    pts = solve_failure_point(PI_LN2)
    assert any(abs(p.psi1 - 0.5) < 1e-6 and abs(p.psi2 - 0.5) < 1e-6 for p in pts)


def test_solve_contains_cubic_point():
    theta = math.pi / abs(math.log(Y_STAR))
    pts = solve_failure_point(theta)
    assert any(abs(p.psi1 - Y_STAR**3) < 1e-6 and abs(p.psi2 - Y_STAR) < 1e-6 for p in pts)
    assert any(abs(p.psi2 - Y_STAR**3) < 1e-6 and abs(p.psi1 - Y_STAR) < 1e-6 for p in pts)


@pytest.mark.parametrize("theta", [2.0, PI_LN2, 7.5, 13.0, 40.0])
def test_solved_points_have_small_residual(theta):
    for p in solve_failure_point(theta):
        assert modulus(p.psi1, p.psi2, p.theta) <= 1e-9
        assert 0 < p.psi1 < 1 and 0 < p.psi2 < 1
        assert p.psi1 + p.psi2 >= 1 - 1e-9


def test_solve_below_first_fold_is_empty():
    # the smallest fold sits at theta = pi / ln 2 on (0.5, 0.5)
    assert solve_failure_point(3.0) == []


def test_solve_rejects_nonpositive_theta():
    with pytest.raises(ValueError):
        solve_failure_point(0.0)


def test_branch_filter():
    pts = solve_failure_point(10.0)
    labels = {p.branch[:2] for p in pts}
    some = next(iter(labels))
    assert all(p.branch[:2] == some for p in solve_failure_point(10.0, branches=[some]))


def test_trace_shape(traced):
    assert len(traced) >= 3
    assert {c.fold for c in traced} <= set(fold_pairs(8))


def test_trace_residuals_and_region(traced):
    for c in traced:
        for p in c.points:
            assert p.residual <= 1e-9
            assert 0 < p.psi1 < 1 and 0 < p.psi2 < 1
            assert p.psi1 + p.psi2 >= 1 - 1e-9


def test_trace_contains_anchor_points(traced):
    pts = np.concatenate([c.array() for c in traced])
    for a, b in [(0.5, 0.5), (Y_STAR**3, Y_STAR)]:
        d = np.hypot(pts[:, 0] - a, pts[:, 1] - b)
        assert d.min() <= 1e-6


def test_trace_is_symmetric(traced):
    by_fold = {c.fold: c.array() for c in traced}
    for (p, q), arr in by_fold.items():
        mirror = by_fold[(q, p)]
        for row in arr[:: max(1, len(arr) // 25)]:
            d = np.hypot(mirror[:, 0] - row[1], mirror[:, 1] - row[0])
            assert d.min() <= 0.02


def test_traced_points_are_not_determining(traced):
    rng = np.random.default_rng(7)
    pts = np.concatenate([c.array() for c in traced])
    for psi1, psi2, theta in pts[rng.choice(len(pts), 40, replace=False)]:
        v = find_zero([psi1, psi2, 1.0], 1.0, theta_min=max(theta - 0.05, 0.0), theta_max=theta + 0.05)
        assert v.kind == NOT_DETERMINING
        assert abs(v.theta0 - theta) <= 1e-6


@settings(max_examples=500)
@given(st.floats(0.001, 0.999), st.floats(0.0, 0.999))
def test_below_diagonal_never_fails(psi1, frac):
    psi2 = frac * (1 - psi1)
    if psi2 <= 0:
        return
    assert find_zero([psi1, psi2, 1.0], 1.0).kind != NOT_DETERMINING


@settings(max_examples=30)
@given(st.floats(0.05, 0.95), st.floats(0.0, 0.95))
def test_below_diagonal_scan_without_fast_path(psi1, frac):
    psi2 = max(frac * (1 - psi1), 1e-3)
    v = find_zero([psi1, psi2, 1.0], 1.0, theta_max=40.0, use_fast_path=False)
    assert v.kind != NOT_DETERMINING


@pytest.mark.parametrize("p,q", [(1, 1), (3, 1), (1, 3), (5, 3), (7, 1), (3, 5)])
def test_odd_boundary_points_fail(p, q):
    psi2 = boundary_root(p, q)
    psi1 = psi2 ** (p / q)
    v = find_zero([psi1, psi2, 1.0], 1.0)
    assert v.kind == NOT_DETERMINING
    assert modulus(psi1, psi2, v.theta0) <= 1e-9


def test_csv_and_svg(traced):
    text = curves_csv(traced[:2])
    rows = text.strip().splitlines()
    assert rows[0] == "branch,theta,psi1,psi2,residual"
    assert len(rows) == 1 + sum(len(c.points) for c in traced[:2])
    svg = curves_svg(traced[:2])
    assert svg.startswith("<svg") and svg.count("<polyline") == 2


def test_residual_helper_is_symmetric():
    assert residual(0.3, 0.9, 5.0) == pytest.approx(residual(0.9, 0.3, 5.0), abs=1e-15)


def test_trace_rejects_bad_step():
    with pytest.raises(ValueError):
        trace_curves(step=0.0)
