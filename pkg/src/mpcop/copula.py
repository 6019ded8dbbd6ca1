"""Approximate MP copulas built from an orbit measure and node tables.

For an increasing observation function the lag-h copula is

    C(u, v) = sum_{k < n0} mu[a_k, T_k(F^-1(v))] + mu[a_n0, min(F^-1(u), T_k(F^-1(v)))]

with n0 the cell of u among F(a_0) < ... < F(a_{2^h}). Every mass is an
integer orbit count, so groundedness and 2-increasingness hold exactly up to
the final division by n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .core import MapModel
from .errors import DimensionError, DomainError
from .measure import EmpiricalMeasure, build_measure
from .nodes import MAX_LAG, NodeTable, node_endpoints

Direction = Literal["increasing", "decreasing"]
MAX_DECREASING_DIM = 6
DEFAULT_X0 = float(np.pi % 1.0)


@dataclass(frozen=True)
class CopulaModel:
    """Shared orbit measure plus node tables for every lag in use.

    ``h`` is the lag of the bivariate copula; node tables for further lags
    are built on demand on the same grid size ``m`` and cached.
    """

    model: MapModel
    mu: EmpiricalMeasure
    h: int
    m: int
    direction: Direction = "increasing"
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.direction not in ("increasing", "decreasing"):
            raise DomainError(f"unknown direction {self.direction!r}")
        if not np.isnan(self.mu.s) and self.mu.s != self.model.s:
            raise DomainError("measure and map were built for different s")
        for t in self._tables.values():
            if isinstance(t, NodeTable) and t.s != self.model.s:
                raise DomainError("node table built for a different s")

    @property
    def s(self) -> float:
        return self.model.s

    @property
    def nodes(self) -> NodeTable:
        return self.nodes_for(self.h)

    def nodes_for(self, h: int) -> NodeTable:
        table = self._tables.get(h)
        if table is None:
            table = node_endpoints(self.model, h, self.m)
            self._tables[h] = table
        return table

    def cell_bounds(self, h: int | None = None) -> np.ndarray:
        """F_n at the node endpoints of T^h: 0 = F(a_0) < ... < F(a_{2^h}) = 1."""
        h = self.h if h is None else h
        key = ("F", h)
        out = self._tables.get(key)
        if out is None:
            out = np.asarray(self.mu.cdf(self.nodes_for(h).endpoints))
            self._tables[key] = out
        return out

    def __call__(self, u, v):
        if self.direction == "increasing":
            return copula_eval(self, u, v)
        return copula_eval_decreasing(self, u, v)


def build_copula(s: float, h: int, n: int = 1_000_000, m: int = 10_000,
                 x0: float = DEFAULT_X0, direction: Direction = "increasing",
                 extra_lags: Sequence[int] = (), mu: EmpiricalMeasure | None = None,
                 ) -> CopulaModel:
    """Assemble a CopulaModel from scratch (orbit, measure, node tables)."""
    model = MapModel(s)
    if mu is None:
        mu = build_measure(model, x0, n)
    cm = CopulaModel(model=model, mu=mu, h=int(h), m=int(m), direction=direction)
    for lag in (h, *extra_lags):
        cm.nodes_for(int(lag))
    return cm


def _unit(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def locate_cell(bounds: np.ndarray, u) -> np.ndarray:
    """Index k with u in [bounds[k], bounds[k+1]); u = 1 goes to the last cell."""
    k = np.searchsorted(bounds, u, side="right") - 1
    return np.clip(k, 0, len(bounds) - 2)


def _copula_counts(cm: CopulaModel, u: np.ndarray, v: np.ndarray, h: int) -> np.ndarray:
    mu = cm.mu
    table = cm.nodes_for(h)
    a = table.endpoints
    xu = np.asarray(mu.quantile(u))
    y = table.inverse_matrix(mu.quantile(v))             # (K, ...) branch preimages
    lower = a[:-1].reshape((-1,) + (1,) * u.ndim)
    per_cell = mu.count(lower, y)
    prefix = np.cumsum(per_cell, axis=0) - per_cell      # exclusive prefix sums
    n0 = locate_cell(cm.cell_bounds(h), u)
    pick = n0[None, ...]
    head = np.take_along_axis(prefix, pick, axis=0)[0]
    y_n0 = np.take_along_axis(y, pick, axis=0)[0]
    tail = mu.count(a[n0], np.minimum(xu, y_n0))
    return head + tail


def copula_eval(cm: CopulaModel, u, v, h: int | None = None):
    """Approximate lag-h copula for an increasing observation function.

    Vectorised over broadcastable ``u`` and ``v``; returns a float for
    scalar input.
    """
    u, v = np.broadcast_arrays(_unit(u, "u"), _unit(v, "v"))
    h = cm.h if h is None else int(h)
    out = _copula_counts(cm, u, v, h) / cm.mu.n
    return float(out) if out.ndim == 0 else out


def copula_eval_decreasing(cm: CopulaModel, u, v, h: int | None = None):
    """Copula for a decreasing observation function: u + v - 1 + C(1-u, 1-v).

    The raw value is returned; it can dip below 0 by O(1/n).
    """
    u, v = np.broadcast_arrays(_unit(u, "u"), _unit(v, "v"))
    out = u + v - 1.0 + copula_eval(cm, 1.0 - u, 1.0 - v, h)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SupportPolyline:
    """The 2^h straight segments joining the ends of the support branches.

    ``segments[k] = (x0, y0, x1, y1)``, sorted by ``x0``; the x-ranges tile
    [0, 1]. The copula mass itself sits on the curves v = F(T^h(F^-1(u))),
    which share these end points but bend in between.
    """

    segments: np.ndarray
    direction: Direction
    h: int

    def __len__(self) -> int:
        return len(self.segments)

    def vertical_distance(self, u, v) -> np.ndarray:
        """Distance from (u, v) to the nearest segment whose x-range covers u."""
        u = np.asarray(u, dtype=np.float64)[..., None]
        v = np.asarray(v, dtype=np.float64)[..., None]
        x0, y0, x1, y1 = self.segments.T
        covers = (u >= x0) & (u <= x1)
        t = np.where(x1 > x0, (u - x0) / np.where(x1 > x0, x1 - x0, 1.0), 0.0)
        line = y0 + t * (y1 - y0)
        d = np.where(covers, np.abs(v - line), np.inf)
        return d.min(axis=-1)


def support_polyline(model: MapModel, nodes: NodeTable, mu: EmpiricalMeasure,
                     direction: Direction = "increasing") -> SupportPolyline:
    """Straight-line support segments of the lag-h copula.

    Increasing: segment k joins (F(a_k), 0) and (F(a_{k+1}), 1).
    Decreasing: the point reflection (u, v) -> (1-u, 1-v) of those segments,
    i.e. the support of u + v - 1 + C(1-u, 1-v).
    """
    if nodes.s != model.s:
        raise DomainError("node table and map were built for different s")
    f = np.asarray(mu.cdf(nodes.endpoints))
    lo, hi = f[:-1], f[1:]
    zeros, ones = np.zeros_like(lo), np.ones_like(lo)
    if direction == "increasing":
        seg = np.column_stack((lo, zeros, hi, ones))
    elif direction == "decreasing":
        seg = np.column_stack((1.0 - hi, zeros, 1.0 - lo, ones))[::-1]
    else:
        raise DomainError(f"unknown direction {direction!r}")
    seg = np.ascontiguousarray(seg)
    seg.flags.writeable = False
    return SupportPolyline(segments=seg, direction=direction, h=nodes.h)


def _check_lags(lags: Sequence[int], dim: int) -> list[int]:
    lags = [int(t) for t in lags]
    if len(lags) != dim:
        raise DomainError(f"need {dim} lags, got {len(lags)}")
    if any(b <= a for a, b in zip(lags, lags[1:])):
        raise DomainError(f"lags must be strictly increasing, got {lags}")
    if lags[-1] - lags[0] > MAX_LAG:
        raise DimensionError(f"largest relative lag exceeds the cap {MAX_LAG}")
    return lags


def _mcopula_counts(cm: CopulaModel, us: list[np.ndarray], rel: list[int]) -> np.ndarray:
    """Orbit counts behind the n-dimensional copula; rel[i] = t_i - t_1, rel[0] = 0."""
    mu = cm.mu
    hn = rel[-1]
    top = cm.nodes_for(hn)
    a_n = top.endpoints
    K = len(a_n) - 1
    shape = us[0].shape
    b = np.empty((K,) + shape)
    b[...] = np.inf
    for ui, hi in zip(us[1:], rel[1:]):
        table = cm.nodes_for(hi)
        pre = table.inverse_matrix(mu.quantile(ui))     # (J, ...)
        a_i = table.endpoints[:-1].reshape((-1,) + (1,) * len(shape))
        for k in range(K):
            ok = (pre > a_n[k]) & (a_i < a_n[k + 1])
            cand = np.where(ok, pre, np.inf).min(axis=0)
            c = np.where(np.isinf(cand), a_n[k], cand)   # empty branch set -> a_k
            b[k] = np.minimum(b[k], c)
    lower = a_n[:-1].reshape((-1,) + (1,) * len(shape))
    per_cell = mu.count(lower, b)
    prefix = np.cumsum(per_cell, axis=0) - per_cell
    n0 = locate_cell(cm.cell_bounds(hn), us[0])
    pick = n0[None, ...]
    head = np.take_along_axis(prefix, pick, axis=0)[0]
    b_n0 = np.take_along_axis(b, pick, axis=0)[0]
    tail = mu.count(a_n[n0], np.minimum(np.asarray(mu.quantile(us[0])), b_n0))
    return head + tail


def mcopula_eval(cm: CopulaModel, u: Sequence, lags: Sequence[int]):
    """Copula of (X_{t_1}, ..., X_{t_n}) for an increasing observation function.

    ``u`` holds one coordinate (scalar or array) per time index; all
    coordinates are broadcast together.
    """
    if len(u) < 2:
        raise DomainError("the multivariate copula needs at least two coordinates")
    lags = _check_lags(lags, len(u))
    us = list(np.broadcast_arrays(*[_unit(x, "u") for x in u]))
    rel = [t - lags[0] for t in lags]
    out = _mcopula_counts(cm, us, rel) / cm.mu.n
    return float(out) if out.ndim == 0 else out


def mcopula_eval_decreasing(cm: CopulaModel, u: Sequence, lags: Sequence[int]):
    """Copula of (X_{t_0}, ..., X_{t_n}) for a decreasing observation function.

    Inclusion-exclusion over sub-vectors:
    C(u) = sum_S (-1)^|S| C_S(1 - u_S), C_empty = 1, C_{i}(w) = w,
    where C_S is the increasing-case copula of the sub-vector with lags t_S.
    """
    dim = len(u)
    if dim > MAX_DECREASING_DIM:
        raise DimensionError(
            f"dimension {dim} exceeds the inclusion-exclusion cap {MAX_DECREASING_DIM}"
        )
    if dim < 2:
        raise DomainError("the multivariate copula needs at least two coordinates")
    lags = _check_lags(lags, dim)
    us = list(np.broadcast_arrays(*[_unit(x, "u") for x in u]))
    w = [1.0 - x for x in us]
    total = np.ones(us[0].shape)
    for i in range(dim):
        total = total - w[i]
    for r in range(2, dim + 1):
        sign = -1.0 if r % 2 else 1.0
        for idx in itertools.combinations(range(dim), r):
            sub_u = [w[i] for i in idx]
            rel = [lags[i] - lags[idx[0]] for i in idx]
            total = total + sign * _mcopula_counts(cm, sub_u, rel) / cm.mu.n
    return float(total) if total.ndim == 0 else total
