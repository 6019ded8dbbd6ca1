import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpcop.core import MapModel, orbit, solve_a
from mpcop.errors import DomainError, InsufficientDataError, InvalidEstimateError, SingularFitError
from mpcop.estimator import (breakpoint_mismatch, classify_branches, estimate_ls,
                             estimate_minmax, estimate_refined, ls_from_pairs,
                             minmax_from_pairs)
from mpcop.measure import build_measure


def support_path(s, k=25):
    """Pairs on the two lag-1 support lines, second-branch abscissae near a and 1."""
    a = solve_a(s)
    x2 = np.r_[a + 1e-6, np.linspace(a + 0.01, 1 - 0.01, k), 1 - 1e-6]
    y2 = (x2 - a) / (1 - a)
    x1 = np.linspace(0.05, a - 0.05, k)
    y1 = x1 / a
    return np.r_[x1, x2], np.r_[y1, y2]


def test_classify_branches():
    path = orbit(MapModel(0.5), 0.25, 200).points
    part = classify_branches(path)
    assert 0 in part.first
    assert len(part.first) + len(part.second) == 199
    assert np.all(path[part.second + 1] < path[part.second])


def test_classify_wrap_at_s_one():
    part = classify_branches([0.8, 0.44, 0.44 + 0.44**2])
    assert list(part.second) == [0]


def test_second_branch_share_matches_measure():
    s = 0.5
    path = orbit(MapModel(s), math.pi % 1, 200).points
    share = len(classify_branches(path).second) / 199
    mu = build_measure(MapModel(s), math.pi % 1, 1_000_000)
    assert abs(share - (1 - mu.cdf(MapModel(s).a))) <= 0.1


@pytest.mark.parametrize("s", [round(0.1 * i, 1) for i in range(1, 10)])
def test_exact_recovery(s):
    x, y = support_path(s)
    for fn in (minmax_from_pairs, ls_from_pairs):
        rep = fn(x, y)
        assert rep.branch_used == "second"
        assert abs(rep.s_hat - s) < 1e-6
        assert abs(rep.a_hat - solve_a(s)) < 1e-9


def test_first_branch_fallback():
    s = 0.4
    a = solve_a(s)
    x = np.linspace(0.05, a - 0.05, 30)
    rep = minmax_from_pairs(x, x / a)
    assert rep.branch_used == "first-fallback"
    assert rep.a_hat == pytest.approx(a, abs=1e-12)


def test_insufficient_and_singular():
    with pytest.raises(InsufficientDataError):
        minmax_from_pairs([0.2, 0.7], [0.3, 0.1])
    with pytest.raises(SingularFitError):
        ls_from_pairs([0.7, 0.7, 0.2], [0.1, 0.2, 0.3])
    with pytest.raises(SingularFitError):
        minmax_from_pairs([0.7, 0.7, 0.2], [0.1, 0.2, 0.3])


def test_invalid_estimate():
    # second-branch line crossing zero at a negative abscissa
    with pytest.raises(InvalidEstimateError):
        minmax_from_pairs([0.6, 0.9], [0.5, 0.2])


def test_out_of_range_estimate_warns_without_clipping():
    a = 0.45
    x = np.array([0.5, 0.9])
    with pytest.warns(UserWarning):
        rep = minmax_from_pairs(x, (x - a) / (1 - a) - 0.5)
    assert not rep.valid


def test_path_validation():
    with pytest.raises(DomainError):
        estimate_minmax(np.linspace(0.1, 0.9, 10))
    bad = np.r_[orbit(MapModel(0.3), 0.2, 30).points, 1.0]
    with pytest.raises(DomainError, match="row 30"):
        estimate_ls(bad)


@given(st.floats(min_value=0.05, max_value=0.8), st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=40, deadline=None)
def test_minmax_close_on_orbit(s, x0):
    path = orbit(MapModel(s), x0, 400).points
    try:
        rep = estimate_minmax(path)
    except InsufficientDataError:
        return
    if rep.branch_used == "second" and rep.branch_count >= 10:
        # the second branch is convex, so the chord extended left meets zero past a
        assert rep.a_hat >= solve_a(s) - 1e-12


def test_minmax_beats_ls_on_average():
    s = 0.3
    rng = np.random.default_rng(0)
    mm, ls = [], []
    for x0 in rng.uniform(0.01, 0.99, 40):
        p = orbit(MapModel(s), x0, 200).points
        mm.append(estimate_minmax(p).s_hat)
        ls.append(estimate_ls(p).s_hat)
    assert np.mean((np.array(mm) - s) ** 2) <= np.mean((np.array(ls) - s) ** 2)


def test_interior_points_do_not_help():
    s = 0.5
    rng = np.random.default_rng(1)
    full, trimmed = [], []
    for x0 in rng.uniform(0.01, 0.99, 100):
        p = orbit(MapModel(s), x0, 200).points
        x, y = p[:-1], p[1:]
        down = y < x
        x2, y2 = x[down], y[down]
        lo, hi = np.quantile(x2, [0.05, 0.95])
        keep = (x2 >= lo) & (x2 <= hi)
        full.append(abs(minmax_from_pairs(x2, y2).s_hat - s))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            trimmed.append(abs(minmax_from_pairs(x2[keep], y2[keep]).s_hat - s))
    assert np.mean(trimmed) >= np.mean(full)


def test_refined_recovers_s():
    path = orbit(MapModel(0.2), math.sqrt(5) % 1, 200).points
    rep = estimate_refined(path, eps=0.01)
    assert rep.method == "refined"
    assert rep.converged
    assert abs(rep.s_hat - 0.2) <= 0.03


def test_refined_fixed_point_at_truth():
    path = orbit(MapModel(0.3), 0.123, 20_000).points
    rep = estimate_refined(path, eps=0.01, s0=0.3)
    assert rep.iterations == 1


def test_misspecified_start_is_pulled_back():
    path = orbit(MapModel(0.2), math.sqrt(5) % 1, 200).points
    fitted, implied, a_hat = breakpoint_mismatch(path, 0.3, n=200_000)
    assert fitted < implied
    assert abs(a_hat - solve_a(0.2)) < abs(solve_a(0.3) - solve_a(0.2))


def test_refined_bisection():
    path = orbit(MapModel(0.2), math.sqrt(5) % 1, 200).points
    rep = estimate_refined(path, eps=0.01, bisect=True, n=200_000)
    assert abs(rep.s_hat - 0.2) <= 0.03
    assert rep.converged


def test_refined_cap_returns_best_iterate():
    path = orbit(MapModel(0.2), math.sqrt(5) % 1, 200).points
    with pytest.warns(UserWarning, match="did not converge"):
        rep = estimate_refined(path, eps=1e-12, max_iter=2, n=100_000)
    assert not rep.converged
    assert len(rep.history) == 2


def test_refined_rejects_short_path():
    with pytest.raises(DomainError):
        estimate_refined(orbit(MapModel(0.2), 0.3, 40).points)
    with pytest.raises(DomainError):
        estimate_refined(orbit(MapModel(0.2), 0.3, 100).points, eps=0)
