"""Unimodal HulC: a stretched hull that survives median bias 1/2.

The caller asserts that the estimator's law is (asymptotically) unimodal
at the target; nothing here tests that.
"""

from __future__ import annotations

from .core import _box, grouped_hull, resolve_delta
from .errors import DomainError
from .rng import as_streams
from .splitmath import randomize_unimodal_b, solve_unimodal_budget

__all__ = ["unimodal_hulc"]


def unimodal_hulc(data, est, alpha=0.05, t=0.5, delta=0.5, rng=None):
    """``[min - t * range, max + t * range]`` over a randomized number of splits.

    The split count is ``b_solved`` with probability ``eta`` and
    ``b_solved - 1`` otherwise (the reverse of the plain hull's
    convention). ``delta=None`` takes the estimator's recommendation.
    For ``d > 1`` the budget is solved at ``alpha / d`` and splits are
    shared across coordinates.
    """
    if t < 0:
        raise DomainError(f"stretch t must be >= 0, got {t}")
    streams = as_streams(rng)
    delta = resolve_delta(est, delta)
    budget = solve_unimodal_budget(alpha / est.dim, float(t), delta)
    u = streams.uniform("budget-draw")
    b_star = randomize_unimodal_b(budget, u)
    lo, hi, m = grouped_hull(data, est, [b_star] * est.dim, streams)
    spread = hi - lo
    return _box(
        lo - t * spread, hi + t * spread, method="unimodal", alpha=alpha, delta=delta,
        b_star=b_star, seed=streams.seed,
        provenance={"u": u, "t": t, "b_solved": budget.b_solved, "eta": budget.eta,
                    "level": budget.alpha, "hull_lo": lo.tolist(), "hull_hi": hi.tolist(),
                    "min_split": m, "stream_path": list(streams.path)},
    )
