"""Manneville-Pomeau maps, their invariant measures and the copulas of the
associated processes, with sampling and estimation of the map parameter."""

from .copula import (CopulaModel, SupportPolyline, build_copula, copula_eval,
                     copula_eval_decreasing, mcopula_eval, mcopula_eval_decreasing,
                     support_polyline)
from .core import MapModel, Orbit, a_to_s, apply_map, iterate_map, orbit, solve_a
from .errors import (ConvergenceError, DegenerateOrbitError, DimensionError, DomainError,
                     InsufficientDataError, InvalidEstimateError, MPError, ResolutionError,
                     SingularFitError)
from .estimator import (EstimateReport, classify_branches, estimate_ls, estimate_minmax,
                        estimate_refined)
from .measure import (EmpiricalMeasure, build_measure, cdf, measure_interval, preimage_mass,
                      quantile)
from .nodes import BranchInverse, NodeTable, branch_inverse_eval, detect_discontinuities, node_endpoints
from .sampler import SampleBatch, sample_pairs, sample_pairs_parallel

__version__ = "0.1.0"
