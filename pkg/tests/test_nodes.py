import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpcop.core import MapModel
from mpcop.errors import DimensionError, DomainError, ResolutionError
from mpcop.nodes import branch_inverse_eval, detect_discontinuities, node_endpoints
from oracles import bisect_root, forward

# frozen from oracles.bisect_root on the branch equations, s = 0.5
A1 = 0.5698402909980529
A21 = 0.35675457794514526
A23 = 0.8230932136923768


def test_lag_one_endpoint_is_a():
    t = node_endpoints(MapModel(0.5), 1, 10_000)
    assert t.n_branches == 2
    assert t.endpoints[1] == pytest.approx(A1, abs=1e-12)
    assert t.endpoints[0] == 0.0 and t.endpoints[-1] == 1.0


def test_lag_two_endpoints():
    t = node_endpoints(MapModel(0.5), 2, 10_000)
    np.testing.assert_allclose(t.endpoints, [0.0, A21, A1, A23, 1.0], atol=1e-12)


@pytest.mark.parametrize("h", [1, 2, 3, 4, 6])
@pytest.mark.parametrize("s", [0.1, 0.4, 0.8])
def test_endpoint_count_and_order(s, h):
    t = node_endpoints(MapModel(s), h, 20_000)
    assert len(t.endpoints) == 2**h + 1
    assert np.all(np.diff(t.endpoints) > 0)


@pytest.mark.parametrize("s,h", [(0.2, 3), (0.6, 4)])
def test_endpoints_are_jumps_of_the_iterate(s, h):
    t = node_endpoints(MapModel(s), h, 20_000)
    inner = t.endpoints[1:-1]
    eps = 1e-9
    # T^h drops from near 1 to near 0 across every inner endpoint
    assert np.all(forward(s, inner - eps, h) > 0.99)
    assert np.all(forward(s, inner + eps, h) < 0.01)


def test_interpolated_estimate_is_close():
    t = node_endpoints(MapModel(0.4), 3, 10_000)
    assert np.max(np.abs(t.interp_endpoints - t.endpoints)) < 1e-4


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=60, deadline=None)
def test_branch_inverse_roundtrip(y):
    t = _table()
    for br in t.branches:
        x = branch_inverse_eval(br, y)
        assert br.lo <= x <= br.hi
        if 1e-3 < y < 1 - 1e-3:
            assert forward(0.3, x, 2) == pytest.approx(y, abs=1e-5)


_cache = {}


def _table():
    if "t" not in _cache:
        _cache["t"] = node_endpoints(MapModel(0.3), 2, 20_000)
    return _cache["t"]


def test_branch_inverse_vs_bisection():
    s = 0.3
    t = _table()
    for br in t.branches:
        for y in (0.1, 0.5, 0.9):
            ref = bisect_root(lambda x: forward(s, x, 2) - y, br.lo + 1e-12, br.hi - 1e-12, 1e-14)
            assert br(y) == pytest.approx(ref, abs=1e-6)


def test_inverse_matrix_shape():
    t = _table()
    assert t.inverse_matrix(np.zeros((3, 5))).shape == (4, 3, 5)


def test_branch_inverse_eval_domain():
    with pytest.raises(DomainError):
        branch_inverse_eval(_table().branches[0], 1.5)


def test_lag_limits():
    with pytest.raises(DomainError):
        node_endpoints(MapModel(0.3), 0, 100)
    with pytest.raises(DimensionError):
        node_endpoints(MapModel(0.3), 21, 100)


def test_coarse_grid_is_reported():
    with pytest.raises(ResolutionError):
        node_endpoints(MapModel(0.3), 8, 300)


def test_detect_discontinuities():
    g = np.linspace(0, 1, 1001)
    d = detect_discontinuities(MapModel(0.5), 1, g)
    assert len(d) == 1 and g[d[0]] <= A1 <= g[d[0] + 1]
    with pytest.raises(DomainError):
        detect_discontinuities(MapModel(0.5), 1, np.linspace(0.1, 1, 10))
    with pytest.raises(ResolutionError):
        detect_discontinuities(MapModel(0.5), 6, np.linspace(0, 1, 40))
