import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spdmeans import DimMismatch, DomainError, K, K_half, big_R, dist, kantorovich, rel_sup
from spdmeans.means import geo_mean
from spdmeans.thompson import equal
from conftest import spd, thompson

A1, B1 = np.diag([2.0, 1.0 / 3.0]), np.diag([4.0, 0.5])
C2, D2 = np.array([[2.0, 1.0], [1.0, 1.0]]), np.diag([1.0, 2.0])


def test_rel_sup_examples():
    assert rel_sup(A1, A1) == pytest.approx(1.0, abs=1e-15)
    assert rel_sup(B1, A1) == pytest.approx(2.0, abs=1e-14)
    assert rel_sup(D2, C2) == pytest.approx((5 + math.sqrt(17)) / 2, abs=1e-13)


def test_big_R_examples():
    assert big_R(A1, B1) ** 2 == pytest.approx(4.0, abs=1e-12)
    assert big_R(C2, D2) ** 2 == pytest.approx(((5 + math.sqrt(17)) / 2) ** 2, abs=1e-10)
    assert big_R(A1, A1) == pytest.approx(1.0, abs=1e-15)


def test_dist_examples():
    assert dist(A1, A1) == pytest.approx(0.0, abs=1e-15)
    assert dist(A1, B1) == pytest.approx(math.log(2.0), abs=1e-14)
    assert dist(C2, 2 * C2) == pytest.approx(math.log(2.0), abs=1e-14)


def test_dimension_mismatch():
    with pytest.raises(DimMismatch):
        big_R(np.eye(2), np.eye(3))


@given(spd(dim=3), spd(dim=3))
def test_dist_matches_generalized_eigenproblem(A, B):
    assert dist(A, B) == pytest.approx(thompson(A, B), abs=1e-9)


@given(spd(dim=3), spd(dim=3), spd(dim=3))
def test_triangle_inequality(A, B, C):
    assert big_R(A, C) <= big_R(A, B) * big_R(B, C) * (1 + 1e-12)


@given(spd(dim=4), spd(dim=4), st.floats(0.01, 100.0))
def test_R_properties(A, B, c):
    R = big_R(A, B)
    assert R >= 1 - 1e-15
    assert equal(A, A) and (equal(A, B) == (math.log(R) <= 1e-10))
    # norm bound, operator norm
    assert np.linalg.norm(A - B, 2) <= (R - 1) * np.linalg.norm(A, 2) * (1 + 1e-10) + 1e-14
    assert big_R(c * A, c * B) == pytest.approx(R, rel=1e-10)


@given(spd(dim=3), spd(dim=3), spd(dim=3), spd(dim=3), st.floats(0.01, 0.99))
def test_geodesic_contractivity(A1_, A2_, B1_, B2_, nu):
    lhs = dist(geo_mean(A1_, A2_, nu), geo_mean(B1_, B2_, nu))
    rhs = (1 - nu) * dist(A1_, B1_) + nu * dist(A2_, B2_)
    assert lhs <= rhs + 1e-10


# ---------------------------------------------------------------------------
# Kantorovich constants


def test_K_examples():
    assert K(4.0, 0.5) == pytest.approx(2 * math.sqrt(2) / 3, rel=1e-15)
    assert K(4.0, 2.0) == pytest.approx(25 / 16, rel=1e-15)
    assert kantorovich(4.0) == K(4.0, 2.0)
    for nu in (-1.0, 0.0, 0.3, 1.0, 2.0, 7.0):
        assert K(1.0, nu) == 1.0
    assert K_half(1.0) == 1.0
    assert K_half(4.0) == pytest.approx(2 * math.sqrt(2) / 3, rel=1e-15)
    assert K_half(4.0) >= K_half(48.0)


@given(st.floats(1.0, 1e4))
def test_K_half_matches_R_form(R):
    assert K_half(R * R) == pytest.approx(2 * math.sqrt(R) / (1 + R), rel=1e-13)


def test_K_domain():
    with pytest.raises(DomainError):
        K(0.5, 0.5)
    with pytest.raises(DomainError):
        K_half(float("nan"))


def test_K_vectorized():
    h = np.array([1.0, 2.0, 10.0])
    out = K(h, 0.3)
    np.testing.assert_allclose(out, [K(float(x), 0.3) for x in h])


def test_K_general_formula_matches_special_forms():
    # nudge nu off the special values: the general branch must agree with them
    for h in (1.5, 4.0, 100.0):
        assert K(h, 0.5 + 1e-7) == pytest.approx(K_half(h), rel=1e-6)
        assert K(h, 2.0 + 1e-7) == pytest.approx((1 + h) ** 2 / (4 * h), rel=1e-6)
        assert K(h, -1.0) == pytest.approx((1 + h) ** 2 / (4 * h), rel=1e-12)


@pytest.mark.parametrize("h", [1.5, 2.0, 10.0, 100.0])
def test_K_symmetry_bounds_and_minimum(h):
    nus = np.linspace(-1.0, 2.0, 61)
    vals = K(h, nus)
    np.testing.assert_allclose(vals, K(h, 1 - nus), rtol=1e-9)
    inside = (nus > 0) & (nus <= 1)
    assert np.all((vals[inside] > 0) & (vals[inside] <= 1 + 1e-15))
    assert np.all(K_half(h) <= vals * (1 + 1e-12))


@pytest.mark.parametrize("h", [1.5, 2.0, 10.0, 100.0])
def test_K_monotone_in_nu(h):
    nus = np.linspace(-1.0, 2.0, 301)
    vals = K(h, nus)
    step = np.diff(vals)
    left = nus[1:] <= 0.5
    assert np.all(step[left] <= 1e-13)
    assert np.all(step[~left & (nus[:-1] >= 0.5)] >= -1e-13)


@pytest.mark.parametrize("nu", [-0.5, 0.25, 0.5, 0.75, 2.0])
def test_K_continuity_at_one(nu):
    assert abs(K(1 + 1e-3, nu) - 1) < 1e-5
    assert abs(K(1 + 1e-6, nu) - 1) < 1e-10
