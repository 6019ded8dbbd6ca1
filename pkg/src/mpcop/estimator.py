"""Estimating s from one observed path.

Consecutive pairs (x_i, x_{i+1}) of an MP path lie on two curves: the first
branch (x < a, value increases) and the second branch (x > a, value wraps
and decreases). Extrapolating a straight line through second-branch points
down to zero locates the discontinuity point a, and s follows from
a + a^(1+s) = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core import GOLDEN, MapModel, a_to_s, solve_a
from .errors import (ConvergenceError, DomainError, InsufficientDataError,
                     InvalidEstimateError, SingularFitError)
from .measure import build_measure

Method = Literal["minmax", "ls", "refined"]
MIN_PATH_MINMAX = 20
MIN_PATH_REFINED = 50
REFINE_X0 = float(math.sqrt(5.0) % 1.0)


@dataclass(frozen=True)
class EstimateReport:
    a_hat: float
    s_hat: float
    method: Method
    branch_used: Literal["second", "first-fallback"]
    branch_count: int
    residual: float
    # refined procedure only
    iterations: int = 0
    converged: bool = True
    history: tuple = field(default=(), repr=False)

    @property
    def valid(self) -> bool:
        """True when a_hat lies in the admissible range (1/2, (sqrt5 - 1)/2)."""
        return 0.5 < self.a_hat < GOLDEN


@dataclass(frozen=True)
class BranchPartition:
    """Indices i of the pairs (x_i, x_{i+1}) on each branch."""

    first: np.ndarray
    second: np.ndarray


def _validate_path(path, min_len: int = 3) -> np.ndarray:
    x = np.asarray(path, dtype=np.float64)
    if x.ndim != 1:
        raise DomainError("path must be one-dimensional")
    if len(x) < min_len:
        raise DomainError(f"path needs at least {min_len} points, got {len(x)}")
    bad = ~((x > 0.0) & (x < 1.0))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"path value {x[i]!r} at row {i} is outside (0, 1)")
    return x


def classify_branches(path) -> BranchPartition:
    """Pair i goes to the second branch iff x_{i+1} < x_i."""
    x = _validate_path(path)
    down = x[1:] < x[:-1]
    return BranchPartition(first=np.flatnonzero(~down), second=np.flatnonzero(down))


def _finish(a_hat, method, branch_used, count, residual, **extra) -> EstimateReport:
    if not (0.0 < a_hat < 1.0) or not math.isfinite(a_hat):
        raise InvalidEstimateError(f"estimated a = {a_hat!r} is outside (0, 1)")
    report = EstimateReport(a_hat=float(a_hat), s_hat=a_to_s(a_hat), method=method,
                            branch_used=branch_used, branch_count=int(count),
                            residual=float(residual), **extra)
    if not report.valid:
        warnings.warn(f"a_hat={a_hat:.6f} lies outside (1/2, (sqrt5-1)/2)", stacklevel=3)
    return report


def _rms(x, y, slope, intercept) -> float:
    return float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))


def _split_pairs(x, y):
    down = y < x
    return (x[~down], y[~down]), (x[down], y[down])


def _minmax_line(x, y):
    """Zero (or level-1 crossing on fallback) of the min-max line, unvalidated."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    (x1, y1), (x2, y2) = _split_pairs(x, y)
    if len(x2) >= 2:
        bx, by, target, used = x2, y2, 0.0, "second"
    elif len(x1) >= 2:
        bx, by, target, used = x1, y1, 1.0, "first-fallback"
    else:
        raise InsufficientDataError("neither branch holds two pairs")
    i0, i1 = int(np.argmin(bx)), int(np.argmax(bx))
    if bx[i1] == bx[i0]:
        raise SingularFitError("extreme branch abscissae coincide")
    slope = (by[i1] - by[i0]) / (bx[i1] - bx[i0])
    intercept = by[i0] - slope * bx[i0]
    return (target - intercept) / slope, used, len(bx), _rms(bx, by, slope, intercept)


def minmax_from_pairs(x, y) -> EstimateReport:
    """Min-max estimate from explicit pairs (x_i, y_i), y_i the successor of x_i.

    The line through the second-branch pairs with the smallest and largest
    x crosses zero at a_hat. With fewer than two second-branch pairs the
    extreme first-branch pairs are used instead and a_hat is where their
    line reaches 1.
    """
    a_hat, used, count, resid = _minmax_line(x, y)
    return _finish(a_hat, "minmax", used, count, resid)


def ls_from_pairs(x, y) -> EstimateReport:
    """Least-squares line through the second-branch pairs; a_hat is its zero."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    (x1, y1), (x2, y2) = _split_pairs(x, y)
    if len(x2) >= 2:
        bx, by, target, used = x2, y2, 0.0, "second"
    elif len(x1) >= 2:
        bx, by, target, used = x1, y1, 1.0, "first-fallback"
    else:
        raise InsufficientDataError("neither branch holds two pairs")
    if np.all(bx == bx[0]):
        raise SingularFitError("all branch abscissae coincide")
    xm, ym = bx.mean(), by.mean()
    slope = np.sum((bx - xm) * (by - ym)) / np.sum((bx - xm) ** 2)
    intercept = ym - slope * xm
    a_hat = (target - intercept) / slope
    return _finish(a_hat, "ls", used, len(bx), _rms(bx, by, slope, intercept))


def estimate_minmax(path) -> EstimateReport:
    x = _validate_path(path, MIN_PATH_MINMAX)
    return minmax_from_pairs(x[:-1], x[1:])


def estimate_ls(path) -> EstimateReport:
    x = _validate_path(path)
    return ls_from_pairs(x[:-1], x[1:])


def breakpoint_mismatch(path, s0: float, n: int = 1_000_000, x0: float = REFINE_X0):
    """Fitted breakpoint of the F_n-transformed pairs versus the one implied by s0.

    Returns ``(fitted, implied, a_hat)``: the zero of the min-max line in
    F_n(.; s0) coordinates, F_n(a(s0); s0), and F_n^{-1}(fitted; s0).
    """
    x = _validate_path(path)
    model = MapModel(s0)
    mu = build_measure(model, x0, n)
    y = np.asarray(mu.cdf(x))
    fitted = float(_minmax_line(y[:-1], y[1:])[0])
    implied = float(mu.cdf(model.a))
    return fitted, implied, float(mu.quantile(min(max(fitted, 0.0), 1.0)))


def estimate_refined(path, eps: float = 0.01, s0: float | None = None,
                     n: int = 1_000_000, x0: float = REFINE_X0, max_iter: int = 25,
                     bisect: bool = False) -> EstimateReport:
    """Refine s by matching the support breakpoint in F_n coordinates.

    Starting from ``s0`` (default: the plain min-max estimate), each step
    builds F_n for the current guess from an orbit of length ``n``,
    transforms the path, re-fits the second-branch line and maps its zero
    back through F_n^{-1} to get a new s. Iteration stops once successive
    values differ by less than ``eps``. With ``bisect=True`` the sign of the
    breakpoint mismatch drives a bisection on s instead.

    If the cap is hit a warning is issued and the iterate with the smallest
    step is returned with ``converged=False``.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    x = _validate_path(path, MIN_PATH_REFINED)
    count = int(np.count_nonzero(x[1:] < x[:-1]))
    if s0 is None:
        s0 = estimate_minmax(x).s_hat
    s0 = min(max(s0, 1e-3), 0.999)

    if bisect:
        return _refine_bisect(x, eps, n, x0, max_iter, count)

    history = []
    best = None
    for it in range(1, max_iter + 1):
        fitted, implied, a_hat = breakpoint_mismatch(x, s0, n, x0)
        s_new = a_to_s(a_hat) if 0.0 < a_hat < 1.0 else float("nan")
        if not math.isfinite(s_new):
            raise InvalidEstimateError(f"refinement produced a = {a_hat!r}")
        step = abs(s_new - s0)
        history.append((s0, s_new, fitted, implied))
        if best is None or step < best[0]:
            best = (step, a_hat, it)
        if step < eps:
            return _finish(a_hat, "refined", "second", count, step, iterations=it,
                           converged=True, history=tuple(history))
        s0 = min(max(s_new, 1e-3), 0.999)
    warnings.warn(f"refinement did not converge in {max_iter} iterations", stacklevel=2)
    step, a_hat, it = best
    return _finish(a_hat, "refined", "second", count, step, iterations=max_iter,
                   converged=False, history=tuple(history))


def _refine_bisect(x, eps, n, x0, max_iter, count) -> EstimateReport:
    lo, hi = 0.01, 0.99
    history = []

    def sign_at(s):
        fitted, implied, _ = breakpoint_mismatch(x, s, n, x0)
        history.append((s, fitted, implied))
        return fitted - implied

    g_lo, g_hi = sign_at(lo), sign_at(hi)
    if g_lo < 0 or g_hi > 0:
        raise ConvergenceError("breakpoint mismatch does not change sign on [0.01, 0.99]")
    it = 0
    while hi - lo >= eps and it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        if sign_at(mid) > 0:
            lo = mid
        else:
            hi = mid
    s_hat = 0.5 * (lo + hi)
    converged = hi - lo < eps
    if not converged:
        warnings.warn(f"bisection did not reach width {eps} in {max_iter} steps", stacklevel=3)
    return _finish(solve_a(s_hat), "refined", "second", count, hi - lo, iterations=it,
                   converged=converged, history=tuple(history))
