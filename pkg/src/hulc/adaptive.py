"""Adaptive HulC: estimate the median bias by subsampling, then split.

The bias estimate compares subsample estimates with the full-data
estimate through the indicator ``est_sub <= est_full``; any convergence
rate scaling cancels inside the indicator, so none is asked for.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import _box, _inflate, grouped_hull
from .errors import DeltaClipError, DomainError, EstimationError
from .rng import as_streams
from .splitmath import randomize_b, solve_budget

__all__ = ["DeltaEstimate", "default_subsample_size", "estimate_delta", "adaptive_hulc"]


@dataclass(frozen=True, eq=False)
class DeltaEstimate:
    """Subsampling estimate of the median bias, one entry per coordinate."""

    delta_hat: np.ndarray
    l_n_zero: np.ndarray
    b: int
    k: int
    seed: int


def default_subsample_size(n):
    """``floor(n ** (2/3))``."""
    b = math.floor(n ** (2.0 / 3.0))
    # guard against 8000 ** (2/3) = 399.99999...
    while (b + 1) ** 3 <= n * n:
        b += 1
    while b ** 3 > n * n:
        b -= 1
    return b


def estimate_delta(data, est, b=None, k=1000, rng=None):
    """Fraction of subsample estimates at or below the full-data estimate.

    Draws ``k`` subsamples of size ``b`` without replacement
    (independently of each other) and returns ``|L - 1/2|`` per
    coordinate, ``L`` being that fraction.
    """
    streams = as_streams(rng)
    n = len(data)
    if b is None:
        b = default_subsample_size(n)
    b, k = int(b), int(k)
    if not (est.min_split_size <= b < n):
        raise DomainError(f"subsample size must satisfy {est.min_split_size} <= b < n={n}, got {b}")
    if k < 1:
        raise DomainError(f"need at least one subsample, got {k}")

    full_rng = streams.generator("estimator", "full") if est.needs_randomness else None
    full = est(data, full_rng)
    sub_gen = streams.generator("subsampling")
    index_sets = [np.sort(sub_gen.choice(n, size=b, replace=False)) for _ in range(k)]
    below = np.zeros(est.dim)
    for j, idx in enumerate(index_sets):
        erng = streams.generator("estimator", "sub", j) if est.needs_randomness else None
        try:
            below += est(data.take(idx), erng) <= full
        except EstimationError as exc:
            raise EstimationError(f"subsample {j}: {exc}", index=j) from exc
    l_n = below / k
    return DeltaEstimate(np.abs(l_n - 0.5), l_n, b, k, streams.seed)


def adaptive_hulc(data, est, alpha=0.05, b=None, k=1000, delta_cap=0.45,
                  rng=None, delta_cap_strict=False, inflate=False):
    """Hull with the median bias replaced by its subsampling estimate.

    Estimates above ``delta_cap`` are clipped to it with a warning (or
    raise :class:`DeltaClipError` when ``delta_cap_strict``). For ``d > 1``
    each coordinate gets its own budget at level ``alpha / d``; a single
    uniform draw randomizes all of them and coordinates landing on the
    same split count share a split plan.
    """
    if not (0.0 < delta_cap < 0.5):
        raise DomainError(f"delta_cap must lie in (0, 1/2), got {delta_cap}")
    streams = as_streams(rng)
    dest = estimate_delta(data, est, b=b, k=k, rng=streams)
    clipped = dest.delta_hat > delta_cap
    if np.any(clipped):
        msg = (f"estimated median bias {dest.delta_hat.max():.3f} exceeds cap {delta_cap}; "
               "clipping. If the estimator is unimodal at the target, consider the unimodal method.")
        if delta_cap_strict:
            raise DeltaClipError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    deltas = np.minimum(dest.delta_hat, delta_cap)
    level = alpha / est.dim
    u = streams.uniform("budget-draw")
    budgets = [solve_budget(level, float(dl)) for dl in deltas]
    b_stars = [randomize_b(bud, u) for bud in budgets]
    lo, hi, m = grouped_hull(data, est, b_stars, streams)
    c = None
    if inflate:
        lo, hi, c = _inflate(est, lo, hi, m)
    delta_used = float(deltas[0]) if est.dim == 1 else float(deltas.max())
    return _box(
        lo, hi, method="adaptive", alpha=alpha, delta=delta_used, b_star=max(b_stars),
        seed=streams.seed, inflation=c,
        provenance={
            "u": u, "delta_hat": dest.delta_hat.tolist(), "l_n_zero": dest.l_n_zero.tolist(),
            "clipped": bool(np.any(clipped)), "delta_cap": delta_cap,
            "subsample_size": dest.b, "subsamples": dest.k,
            "b_stars": b_stars, "b_solved": [bud.b_solved for bud in budgets],
            "level": level, "min_split": m, "stream_path": list(streams.path),
        },
    )
