import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpcop.copula import (CopulaModel, build_copula, copula_eval, copula_eval_decreasing,
                          locate_cell, mcopula_eval, mcopula_eval_decreasing, support_polyline)
from mpcop.core import MapModel
from mpcop.errors import DimensionError, DomainError
from mpcop.measure import build_measure
from oracles import empirical_copula_grid, rank_transform

unit = st.floats(min_value=0.0, max_value=1.0)


def test_grounded_exactly(small_copula):
    g = np.linspace(0, 1, 41)
    assert np.all(copula_eval(small_copula, 0.0, g) == 0.0)
    assert np.all(copula_eval(small_copula, g, 0.0) == 0.0)


def test_margins(small_copula):
    g = np.linspace(0, 1, 101)
    assert np.max(np.abs(copula_eval(small_copula, g, 1.0) - g)) <= 0.01
    assert np.max(np.abs(copula_eval(small_copula, 1.0, g) - g)) <= 0.01
    assert copula_eval(small_copula, 1.0, 1.0) == 1.0


@given(unit, unit, unit, unit)
@settings(max_examples=200, deadline=None)
def test_two_increasing(u1, u2, v1, v2):
    cm = _cm()
    u1, u2 = sorted((u1, u2))
    v1, v2 = sorted((v1, v2))
    vol = cm(u2, v2) - cm(u2, v1) - cm(u1, v2) + cm(u1, v1)
    assert vol >= -1e-9


_cache = {}


def _cm():
    if "cm" not in _cache:
        _cache["cm"] = build_copula(0.4, 1, n=100_000, m=2_000)
    return _cache["cm"]


def test_frechet_bounds(small_copula_h2):
    g = np.linspace(0, 1, 51)
    u, v = np.meshgrid(g, g, indexing="ij")
    c = copula_eval(small_copula_h2, u, v)
    assert np.all(c <= np.minimum(u, v) + 0.01)
    assert np.all(c >= np.maximum(u + v - 1, 0) - 0.01)


def test_scalar_in_scalar_out(small_copula):
    assert isinstance(copula_eval(small_copula, 0.3, 0.6), float)
    assert copula_eval(small_copula, np.full((2, 3), 0.5), 0.5).shape == (2, 3)


def test_domain_checks(small_copula):
    with pytest.raises(DomainError):
        copula_eval(small_copula, 1.2, 0.5)
    with pytest.raises(DomainError):
        copula_eval(small_copula, 0.5, -0.1)


@pytest.mark.parametrize("s,h", [(0.1, 1), (0.4, 2)])
def test_matches_empirical_copula_of_orbit_pairs(s, h):
    n = 200_000
    cm = build_copula(s, h, n=n, m=5_000)
    # independent orbit from another start for the oracle
    from oracles import brute_orbit

    pts = brute_orbit(s, 0.7071, n + h)
    u = rank_transform(pts, pts[:-h])
    v = rank_transform(pts, pts[h:])
    g = np.linspace(0, 1, 21)
    ref = empirical_copula_grid([u, v], [g, g])
    uu, vv = np.meshgrid(g, g, indexing="ij")
    assert np.max(np.abs(cm(uu, vv) - ref)) <= 0.02


def test_decreasing_identities(small_copula):
    g = np.linspace(0, 1, 21)
    assert copula_eval_decreasing(small_copula, 1.0, 1.0) == pytest.approx(1.0)
    np.testing.assert_allclose(copula_eval_decreasing(small_copula, g, 1.0), g, atol=0.01)
    # raw values may dip below zero by O(1/n)
    np.testing.assert_allclose(copula_eval_decreasing(small_copula, 0.0, g), 0.0, atol=1e-4)
    u, v = 0.3, 0.65
    expect = u + v - 1 + copula_eval(small_copula, 1 - u, 1 - v)
    assert copula_eval_decreasing(small_copula, u, v) == pytest.approx(expect)


def test_direction_dispatch(small_copula):
    dec = CopulaModel(model=small_copula.model, mu=small_copula.mu, h=1, m=small_copula.m,
                      direction="decreasing", _tables=small_copula._tables)
    assert dec(0.2, 0.7) == copula_eval_decreasing(small_copula, 0.2, 0.7)
    with pytest.raises(DomainError):
        CopulaModel(model=small_copula.model, mu=small_copula.mu, h=1, m=10, direction="up")


def test_mismatched_measure_rejected():
    mu = build_measure(MapModel(0.3), 0.2, 5_000)
    with pytest.raises(DomainError):
        CopulaModel(model=MapModel(0.4), mu=mu, h=1, m=100)


def test_locate_cell():
    b = np.array([0.0, 0.3, 0.7, 1.0])
    np.testing.assert_array_equal(locate_cell(b, [0.0, 0.3, 0.5, 0.99, 1.0]), [0, 1, 1, 2, 2])


def test_support_polyline_tiles_unit_interval(small_copula_h2):
    cm = small_copula_h2
    for direction in ("increasing", "decreasing"):
        poly = support_polyline(cm.model, cm.nodes, cm.mu, direction)
        seg = poly.segments
        assert len(poly) == 4
        assert seg[0, 0] == 0.0 and seg[-1, 2] == 1.0
        np.testing.assert_array_equal(seg[1:, 0], seg[:-1, 2])
        np.testing.assert_array_equal(seg[:, 1], 0.0)
        np.testing.assert_array_equal(seg[:, 3], 1.0)


def test_support_breakpoint_is_cdf_of_a(small_copula):
    poly = support_polyline(small_copula.model, small_copula.nodes, small_copula.mu)
    assert poly.segments[0, 2] == pytest.approx(small_copula.mu.cdf(small_copula.model.a))


def test_vertical_distance(small_copula):
    poly = support_polyline(small_copula.model, small_copula.nodes, small_copula.mu)
    x0, _, x1, _ = poly.segments[0]
    mid = 0.5 * (x0 + x1)
    assert poly.vertical_distance(mid, 0.5) == pytest.approx(0.0, abs=1e-12)
    assert poly.vertical_distance(mid, 0.9) == pytest.approx(0.4, abs=1e-12)


def test_multivariate_reduces_to_bivariate(small_copula):
    g = np.linspace(0, 1, 11)
    u, v = np.meshgrid(g, g, indexing="ij")
    np.testing.assert_allclose(mcopula_eval(small_copula, [u, v], [0, 1]),
                               copula_eval(small_copula, u, v), atol=1e-15)
    np.testing.assert_allclose(mcopula_eval(small_copula, [u, v], [5, 7]),
                               copula_eval(small_copula, u, v, h=2), atol=1e-15)


def test_multivariate_unit_coordinate_drops_out(small_copula):
    u, v = 0.35, 0.8
    assert mcopula_eval(small_copula, [u, 1.0, v], [0, 1, 2]) == pytest.approx(
        copula_eval(small_copula, u, v, h=2), abs=0.01)
    assert mcopula_eval(small_copula, [u, v, 1.0], [0, 1, 2]) == pytest.approx(
        copula_eval(small_copula, u, v, h=1), abs=0.01)


def test_multivariate_decreasing_matches_bivariate(small_copula):
    g = np.linspace(0, 1, 9)
    u, v = np.meshgrid(g, g, indexing="ij")
    np.testing.assert_allclose(mcopula_eval_decreasing(small_copula, [u, v], [0, 1]),
                               copula_eval_decreasing(small_copula, u, v), atol=1e-12)
    assert mcopula_eval_decreasing(small_copula, [1.0, 1.0, 1.0], [0, 1, 2]) == pytest.approx(1.0)


def test_lag_validation(small_copula):
    with pytest.raises(DomainError):
        mcopula_eval(small_copula, [0.5, 0.5], [1, 1])
    with pytest.raises(DomainError):
        mcopula_eval(small_copula, [0.5, 0.5], [0, 1, 2])
    with pytest.raises(DimensionError):
        mcopula_eval(small_copula, [0.5, 0.5], [0, 25])
    with pytest.raises(DimensionError):
        mcopula_eval_decreasing(small_copula, [0.5] * 7, list(range(7)))
