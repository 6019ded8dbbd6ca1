"""Orbit-average approximation of the invariant measure and its CDF.

The empirical measure puts mass 1/n on every orbit point. Its distribution
function is made continuous and strictly increasing by linear interpolation
between consecutive jump points of the grid {0, x_(1), ..., x_(n), 1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import MapModel, orbit
from .errors import DegenerateOrbitError, DomainError

MIN_RECOMMENDED_N = 1000
MIN_DISTINCT = 10


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Sorted orbit with interval-mass, CDF and quantile queries.

    ``values`` are the distinct orbit points in ascending order and
    ``cum_counts[k]`` the number of orbit points <= ``values[k]``; repeated
    floating-point values therefore carry integer weights.
    """

    values: np.ndarray
    cum_counts: np.ndarray
    n: int
    s: float
    x0: float
    burnin: int = 0
    small_sample: bool = False

    @property
    def jump_grid(self) -> np.ndarray:
        return np.concatenate(([0.0], self.values, [1.0]))

    @property
    def jump_cdf(self) -> np.ndarray:
        return np.concatenate(([0.0], self.cum_counts / self.n, [1.0]))

    def count(self, lo, hi):
        """Number of orbit points in the closed interval [lo, hi] (vectorised)."""
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        c = _cum_le(self, hi) - _cum_lt(self, lo)
        return np.where(hi >= lo, c, 0)

    def mass(self, lo, hi):
        return self.count(lo, hi) / self.n

    def cdf(self, x):
        return cdf(self, x)

    def quantile(self, u):
        return quantile(self, u)


def _cum_le(mu: EmpiricalMeasure, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(mu.values, x, side="right")
    return np.where(idx > 0, mu.cum_counts[np.maximum(idx - 1, 0)], 0)


def _cum_lt(mu: EmpiricalMeasure, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(mu.values, x, side="left")
    return np.where(idx > 0, mu.cum_counts[np.maximum(idx - 1, 0)], 0)


def measure_from_points(points, s: float = float("nan"), x0: float = float("nan"),
                        burnin: int = 0) -> EmpiricalMeasure:
    """Build the empirical measure of an arbitrary sample in (0, 1)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 1 or len(pts) == 0:
        raise DomainError("points must be a non-empty 1-d sequence")
    if np.any(~((pts >= 0.0) & (pts <= 1.0))):
        raise DomainError("points must lie in [0, 1]")
    if np.any((pts == 0.0) | (pts == 1.0)):
        raise DegenerateOrbitError("orbit reached an absorbing endpoint 0 or 1")
    values, counts = np.unique(pts, return_counts=True)
    if len(values) < MIN_DISTINCT:
        raise DegenerateOrbitError(
            f"orbit has only {len(values)} distinct points (need {MIN_DISTINCT})"
        )
    n = len(pts)
    small = n < MIN_RECOMMENDED_N
    if small:
        warnings.warn(f"n={n} is below {MIN_RECOMMENDED_N}; the measure is crude",
                      stacklevel=3)
    values.flags.writeable = False
    cum = np.cumsum(counts)
    cum.flags.writeable = False
    return EmpiricalMeasure(values=values, cum_counts=cum, n=n, s=s, x0=x0,
                            burnin=burnin, small_sample=small)


def build_measure(model: MapModel, x0: float, n: int, burnin: int = 0) -> EmpiricalMeasure:
    """Empirical measure of n orbit points of T_s started at ``x0``.

    ``burnin`` extra leading iterates are discarded first (0 by default).
    """
    if burnin < 0:
        raise DomainError("burnin must be >= 0")
    pts = orbit(model, x0, int(n) + burnin).points[burnin:]
    return measure_from_points(pts, s=model.s, x0=x0, burnin=burnin)


def _check_unit(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def measure_interval(mu: EmpiricalMeasure, lo: float, hi: float) -> float:
    """Fraction of orbit points in the closed interval [lo, hi]."""
    if not (0.0 <= lo <= hi <= 1.0):
        raise DomainError(f"need 0 <= lo <= hi <= 1, got [{lo!r}, {hi!r}]")
    return float(mu.mass(lo, hi))


def cdf(mu: EmpiricalMeasure, x):
    """Piecewise-linear interpolated CDF F_n; scalar in, scalar out."""
    arr = _check_unit(x, "x")
    out = np.interp(arr, mu.jump_grid, mu.jump_cdf)
    return float(out) if out.ndim == 0 else out


def quantile(mu: EmpiricalMeasure, u):
    """Inverse of :func:`cdf`.

    F_n is flat on [x_(n), 1] (both ends carry value 1); the inverse is
    taken on the strictly increasing part and u = 1 is sent to 1.
    """
    arr = _check_unit(u, "u")
    grid = mu.jump_grid[:-1]
    vals = mu.jump_cdf[:-1]
    out = np.interp(arr, vals, grid)
    out = np.where(arr >= 1.0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def preimage_mass(mu: EmpiricalMeasure, model: MapModel, lo: float, hi: float,
                  m: int = 100_000, table=None) -> float:
    """mu_n(T_s^{-1}[lo, hi]) using the lag-1 branch inverses.

    ``table`` may be a precomputed lag-1 NodeTable for the same s.
    """
    from .nodes import node_endpoints

    if not (0.0 <= lo <= hi <= 1.0):
        raise DomainError(f"need 0 <= lo <= hi <= 1, got [{lo!r}, {hi!r}]")
    if table is None:
        table = node_endpoints(model, 1, m)
    elif table.h != 1 or table.s != model.s:
        raise DomainError("preimage needs a lag-1 node table for the same s")
    total = 0
    for br in table.branches:
        total += int(mu.count(br(lo), br(hi)))
    return total / mu.n
