"""Hull-based confidence sets from disjoint random splits.

The basic recipe: cut the data into ``B`` disjoint splits, compute an
estimate on each, report the hull of the estimates. ``B`` is chosen from
the estimator's median bias so the hull misses the target with
probability at most ``alpha``.
"""

from .adaptive import DeltaEstimate, adaptive_hulc, default_subsample_size, estimate_delta
from .core import (
    ConfidenceBox,
    SplitAssignment,
    hulc_interval,
    hulc_interval_fixed_b,
    split_estimates,
    split_indices,
)
from .errors import (
    DeltaClipError,
    DomainError,
    EstimationError,
    HulcError,
    InfeasibleSplitError,
    InfiniteSplitsError,
)
from .estimators import (
    ESTIMATOR_NAMES,
    Dataset,
    EstimatorSpec,
    get_estimator,
    isotonic_at_point,
    isotonic_fit_at,
    monotone_map,
    monotone_transform,
)
from .kernels import BACKEND, pava
from .rng import Streams
from .splitmath import (
    SplitBudget,
    UnimodalBudget,
    miscoverage_p,
    randomize_b,
    randomize_unimodal_b,
    rect_union_bound,
    solve_budget,
    solve_unimodal_budget,
    stability_radius,
    unimodal_q,
    wendel_miscoverage,
)
from .unimodal import unimodal_hulc

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfidenceBox", "Dataset", "DeltaClipError", "DeltaEstimate", "DomainError",
    "ESTIMATOR_NAMES", "EstimationError", "EstimatorSpec", "HulcError", "InfeasibleSplitError",
    "InfiniteSplitsError", "SplitAssignment", "SplitBudget", "Streams", "UnimodalBudget",
    "adaptive_hulc", "default_subsample_size", "estimate_delta", "get_estimator",
    "hulc_interval", "hulc_interval_fixed_b", "isotonic_at_point", "isotonic_fit_at",
    "miscoverage_p", "monotone_map", "monotone_transform", "pava", "randomize_b",
    "randomize_unimodal_b", "rect_union_bound", "solve_budget", "solve_unimodal_budget",
    "split_estimates", "split_indices", "stability_radius", "unimodal_hulc", "unimodal_q",
    "wendel_miscoverage",
]
