"""Nodes of T_s^h and interpolated inverses of its 2^h increasing branches.

T_s^h is continuous and increasing on each node [a_{h,k}, a_{h,k+1}). The
endpoints are located from a grid: a cell [x_i, x_{i+1}] brackets a
discontinuity when T_s^h(x_i) > T_s^h(x_{i+1}). Inside such a cell the
continuous function T*(x) = y + y^(1+s), y = T_s^(j-1)(x), crosses 1, where j
is the first iterate that jumps in the cell. The crossing is first estimated
by linear interpolation and then polished by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MapModel, iterate_map
from .errors import DimensionError, DomainError, ResolutionError

MAX_LAG = 20
BISECTION_STEPS = 40


@dataclass(frozen=True)
class BranchInverse:
    """Piecewise-linear inverse of T_s^h on its k-th node.

    ``y_knots`` rises from 0 to 1 and ``x_knots`` from a_{h,k} to a_{h,k+1}.
    """

    h: int
    k: int
    x_knots: np.ndarray
    y_knots: np.ndarray

    @property
    def lo(self) -> float:
        return float(self.x_knots[0])

    @property
    def hi(self) -> float:
        return float(self.x_knots[-1])

    def __call__(self, y):
        return np.interp(y, self.y_knots, self.x_knots)


@dataclass(frozen=True)
class NodeTable:
    """Approximate node endpoints of T_s^h plus the branch inverses."""

    h: int
    m: int
    s: float
    endpoints: np.ndarray
    branches: tuple = field(repr=False)
    # first-order estimates straight from the grid interpolation
    interp_endpoints: np.ndarray = field(repr=False, default=None)

    @property
    def n_branches(self) -> int:
        return len(self.endpoints) - 1

    def inverse_matrix(self, y) -> np.ndarray:
        """Evaluate every branch inverse at ``y``; shape (2^h,) + y.shape."""
        y = np.asarray(y, dtype=np.float64)
        return np.stack([br(y) for br in self.branches])


def _check_lag(h: int) -> int:
    h = int(h)
    if h < 1:
        raise DomainError(f"lag h must be >= 1, got {h}")
    if h > MAX_LAG:
        raise DimensionError(f"lag h={h} exceeds the storage cap {MAX_LAG}")
    return h


def _first_jump_levels(s: float, grid: np.ndarray, h: int):
    """Return T^h on the grid and, per cell, the first level that decreases (0 if none)."""
    y = grid.copy()
    level = np.zeros(len(grid) - 1, dtype=np.int64)
    for j in range(1, h + 1):
        y = iterate_map(s, y, 1)
        jumped = (y[:-1] > y[1:]) & (level == 0)
        level[jumped] = j
    return y, level


def detect_discontinuities(model: MapModel, h: int, grid) -> np.ndarray:
    """Indices i with T_s^h(grid[i]) > T_s^h(grid[i+1]).

    Raises ResolutionError unless exactly 2^h - 1 cells are found.
    """
    h = _check_lag(h)
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or len(g) < 2 or g[0] != 0.0 or g[-1] != 1.0:
        raise DomainError("grid must be 1-d and span [0, 1] with both endpoints")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")
    if len(g) < 2**h:
        raise ResolutionError(f"grid of {len(g)} points cannot resolve 2^{h} nodes")
    th = iterate_map(model.s, g, h)
    d = np.flatnonzero(th[:-1] > th[1:])
    if len(d) != 2**h - 1:
        raise ResolutionError(
            f"found {len(d)} discontinuities of T^{h}, expected {2**h - 1}; refine the grid"
        )
    return d


def _tstar(s: float, x: np.ndarray, level: np.ndarray) -> np.ndarray:
    """T*(x) = y + y^(1+s) with y = T^(level-1)(x), per element."""
    y = np.array(x, dtype=np.float64, copy=True)
    p = 1.0 + s
    for step in range(1, int(level.max())):
        active = step < level
        z = y + np.power(y, p)
        z = np.where(z >= 1.0, z - 1.0, z)
        y = np.where(active, z, y)
    return y + np.power(y, p)


def _locate_endpoints(s: float, lo: np.ndarray, hi: np.ndarray, level: np.ndarray):
    """Interpolated then bisected roots of T* = 1 inside the cells [lo, hi]."""
    f_lo = _tstar(s, lo, level)
    f_hi = _tstar(s, hi, level)
    first = lo + (hi - lo) / (f_hi - f_lo) * (1.0 - f_lo)
    first = np.clip(first, lo, hi)
    # the interpolated point splits the bracket before plain bisection starts
    f_mid = _tstar(s, first, level)
    left = f_mid < 1.0
    lo = np.where(left, first, lo)
    hi = np.where(left, hi, first)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = _tstar(s, mid, level) < 1.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return first, 0.5 * (lo + hi)


def node_endpoints(model: MapModel, h: int, m: int, refine: bool = True) -> NodeTable:
    """Approximate the 2^h + 1 node endpoints of T_s^h and its branch inverses.

    A uniform grid of ``m`` points on [0, 1] locates the discontinuities.
    With ``refine`` each bracketing cell receives m / 2^h extra knots so the
    inverses stay accurate next to the endpoints.
    """
    h = _check_lag(h)
    m = int(m)
    if m < 2**h:
        raise ResolutionError(f"m={m} must be at least 2^h={2**h}")
    s = model.s
    grid = np.linspace(0.0, 1.0, m)
    th, level = _first_jump_levels(s, grid, h)
    d = np.flatnonzero(th[:-1] > th[1:])
    if len(d) != 2**h - 1:
        raise ResolutionError(
            f"found {len(d)} discontinuities of T^{h}, expected {2**h - 1}; increase m"
        )
    if np.any(level[d] == 0):  # pragma: no cover - cannot happen for a decreasing cell
        raise ResolutionError("bracketing cell without a detected jump level")
    interp, inner = _locate_endpoints(s, grid[d], grid[d + 1], level[d])
    endpoints = np.concatenate(([0.0], inner, [1.0]))
    interp = np.concatenate(([0.0], interp, [1.0]))
    if np.any(np.diff(endpoints) <= 0):
        raise ResolutionError("node endpoints are not strictly increasing; increase m")

    knots_x = grid[1:-1]
    knots_y = th[1:-1]
    if refine:
        per_cell = max(2, m // 2**h)
        extra = np.linspace(grid[d], grid[d + 1], per_cell + 2)[1:-1].ravel()
        knots_x = np.concatenate((knots_x, extra))
        knots_y = np.concatenate((knots_y, iterate_map(s, extra, h)))
        order = np.argsort(knots_x, kind="stable")
        knots_x, knots_y = knots_x[order], knots_y[order]

    branches = []
    for k in range(2**h):
        a_lo, a_hi = endpoints[k], endpoints[k + 1]
        i0 = np.searchsorted(knots_x, a_lo, side="right")
        i1 = np.searchsorted(knots_x, a_hi, side="left")
        xs, ys = knots_x[i0:i1], knots_y[i0:i1]
        keep = (ys > 0.0) & (ys < 1.0)
        xs, ys = xs[keep], ys[keep]
        if len(ys) > 1:
            # drop knots that sit on the wrong side of a rounded endpoint
            prev = np.concatenate(([-np.inf], np.maximum.accumulate(ys)[:-1]))
            mono = ys > prev
            xs, ys = xs[mono], ys[mono]
        x_knots = np.concatenate(([a_lo], xs, [a_hi]))
        y_knots = np.concatenate(([0.0], ys, [1.0]))
        x_knots.flags.writeable = False
        y_knots.flags.writeable = False
        branches.append(BranchInverse(h=h, k=k, x_knots=x_knots, y_knots=y_knots))
    endpoints.flags.writeable = False
    return NodeTable(h=h, m=m, s=s, endpoints=endpoints, branches=tuple(branches),
                     interp_endpoints=interp)


def branch_inverse_eval(inv: BranchInverse, y: float) -> float:
    """Evaluate the k-th approximate branch inverse at y in [0, 1]."""
    if not (0.0 <= y <= 1.0):
        raise DomainError(f"y must lie in [0, 1], got {y!r}")
    return float(inv(y))
