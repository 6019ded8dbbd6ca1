"""The Manneville-Pomeau map T_s(x) = x + x^(1+s) mod 1 and its orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional accelerator
    njit = None

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Bisection bracket for a + a^(1+s) = 1 when 0 < s <= 1.
_A_LO, _A_HI = 0.5, 0.6181


def solve_a(s: float, tol: float = 1e-14) -> float:
    """Return the discontinuity point a of T_s, the root of a + a^(1+s) = 1.

    Bisection on [0.5, 0.6181]; the objective is increasing in a, so the
    bracket is safe for every 0 < s <= 1.
    """
    if not (0.0 < s <= 1.0):
        raise DomainError(f"s must lie in (0, 1], got {s!r}")
    p = 1.0 + s
    lo, hi = _A_LO, _A_HI
    f_lo = lo + lo**p - 1.0
    f_hi = hi + hi**p - 1.0
    if f_lo > 0.0 or f_hi < 0.0:
        raise ConvergenceError(f"root of a + a^(1+s) = 1 not bracketed for s={s!r}")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid + mid**p - 1.0 < 0.0:
            lo = mid
        else:
            hi = mid
    else:  # pragma: no cover
        raise ConvergenceError("bisection did not reach the requested width")
    return 0.5 * (lo + hi)


def a_to_s(a: float) -> float:
    """Invert the relation a + a^(1+s) = 1: s = log(1 - a) / log(a) - 1."""
    if not (0.0 < a < 1.0):
        raise DomainError(f"a must lie in (0, 1), got {a!r}")
    return math.log1p(-a) / math.log(a) - 1.0


@dataclass(frozen=True)
class MapModel:
    """Parameter s of the MP map together with its cached discontinuity point.

    ``s = 1`` is accepted so the golden-ratio boundary case can be exercised,
    although the invariant measure is only finite for s < 1.
    """

    s: float
    a: float = field(init=False)

    def __post_init__(self) -> None:
        s = float(self.s)
        if not (0.0 < s <= 1.0):
            raise DomainError(f"s must lie in (0, 1), got {self.s!r}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "a", solve_a(s))

    def __call__(self, x: float) -> float:
        return apply_map(self, x)


def apply_map(model: MapModel, x: float) -> float:
    """Evaluate T_s(x) for a single x in [0, 1)."""
    if not (0.0 <= x < 1.0):
        raise DomainError(f"x must lie in [0, 1), got {x!r}")
    y = x + x ** (1.0 + model.s)
    # a single subtraction, never floor(): keeps full precision near a(s)
    if y >= 1.0:
        y -= 1.0
    return y


def iterate_map(s: float, x: np.ndarray, h: int = 1) -> np.ndarray:
    """Apply T_s h times to an array of points in [0, 1].

    The right endpoint 1 is mapped to 1 (the left limit of every branch),
    which is what node and branch-inverse construction on a closed grid need.
    """
    y = np.array(x, dtype=np.float64, copy=True)
    p = 1.0 + s
    for _ in range(h):
        y = y + np.power(y, p)
        np.subtract(y, 1.0, out=y, where=y >= 1.0)
    return y


def _orbit_python(s: float, x0: float, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    p = 1.0 + s
    x = x0
    for k in range(n):
        out[k] = x
        x = x + x**p
        if x >= 1.0:
            x -= 1.0
    return out


if njit is not None:
    _orbit_kernel = njit(cache=True)(_orbit_python)
else:  # pragma: no cover
    _orbit_kernel = _orbit_python


@dataclass(frozen=True)
class Orbit:
    """The first n points x0, T(x0), ..., T^(n-1)(x0) of an orbit."""

    points: np.ndarray
    s: float
    x0: float

    def __len__(self) -> int:
        return len(self.points)


def orbit(model: MapModel, x0: float, n: int) -> Orbit:
    """Iterate T_s from ``x0`` and return the first ``n`` points.

    Both 0 and 1 are rejected: they are absorbing for the floating-point
    map and would place all mass on a single atom.
    """
    if not (0.0 < x0 < 1.0):
        raise DomainError(f"x0 must lie in (0, 1), got {x0!r}")
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    try:
        pts = _orbit_kernel(model.s, float(x0), n)
    except MemoryError as exc:  # pragma: no cover
        raise MemoryError(f"cannot allocate an orbit of length {n}") from exc
    pts.flags.writeable = False
    return Orbit(points=pts, s=model.s, x0=float(x0))
