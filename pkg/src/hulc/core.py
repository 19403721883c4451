"""Hull-based confidence sets from disjoint random splits.

The split plan for ``B*`` splits always comes from the ``split-shuffle``
stream keyed by ``B*``, so two procedures that land on the same ``B*``
under one seed see identical splits and identical per-split estimates.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, EstimationError, InfeasibleSplitError
from .rng import as_streams
from .splitmath import randomize_b, solve_budget

__all__ = [
    "SplitAssignment",
    "ConfidenceBox",
    "split_indices",
    "split_estimates",
    "hulc_interval",
    "hulc_interval_fixed_b",
    "resolve_delta",
]


@dataclass(frozen=True, eq=False)
class SplitAssignment:
    """Balanced partition of ``n`` rows into ``b_star`` cells.

    ``membership[i]`` is the split of row ``i`` (``-1`` if the row was
    dropped to keep split sizes odd).
    """

    b_star: int
    membership: np.ndarray

    def cells(self):
        """Row indices of each split, ascending within a split."""
        order = np.argsort(self.membership, kind="stable")
        counts = np.bincount(self.membership[self.membership >= 0], minlength=self.b_star)
        start = int(np.sum(self.membership < 0))
        out = []
        for c in counts:
            out.append(order[start:start + c])
            start += c
        return out

    def sizes(self):
        return np.bincount(self.membership[self.membership >= 0], minlength=self.b_star)


def split_indices(n, b, rng, min_split_size=1, odd=False):
    """Shuffle rows with ``rng`` and deal them round-robin into ``b`` cells.

    Split sizes differ by at most one. With ``odd=True`` one row is
    dropped from every even-sized cell.
    """
    n, b = int(n), int(b)
    if b < 1:
        raise DomainError(f"need at least one split, got {b}")
    if n < b:
        raise InfeasibleSplitError(f"more splits than rows: B*={b}, n={n}", n=n, b=b, min_split_size=min_split_size)
    if n < b * min_split_size:
        raise InfeasibleSplitError(
            f"n={n} rows cannot fill B*={b} splits of at least {min_split_size} "
            f"(need n >= {b * min_split_size})",
            n=n, b=b, min_split_size=min_split_size,
        )
    perm = rng.permutation(n)
    membership = np.empty(n, dtype=np.intp)
    membership[perm] = np.arange(n) % b
    if odd:
        sizes = np.bincount(membership, minlength=b)
        for j in np.flatnonzero(sizes % 2 == 0):
            # drop the last row dealt to cell j
            last = perm[j + b * (sizes[j] - 1)]
            membership[last] = -1
    return SplitAssignment(b, membership)


@dataclass(frozen=True)
class ConfidenceBox:
    """Per-coordinate closed intervals plus how they were made.

    ``lo`` and ``hi`` are tuples of length ``d``; for ``d == 1`` use
    :attr:`interval`. ``provenance`` carries method-specific records
    (the uniform draw, the solved budget, subsampling details, ...).
    """

    lo: tuple
    hi: tuple
    method: str
    alpha: Optional[float]
    delta: Optional[float]
    b_star: int
    seed: Optional[int]
    inflation: Optional[float] = None
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def d(self):
        return len(self.lo)

    @property
    def interval(self):
        if self.d != 1:
            raise ValueError("interval is only defined for d == 1")
        return self.lo[0], self.hi[0]

    @property
    def width(self):
        return np.subtract(self.hi, self.lo)

    def contains(self, theta):
        theta = np.broadcast_to(np.asarray(theta, dtype=np.float64), (self.d,))
        return bool(np.all((np.asarray(self.lo) <= theta) & (theta <= np.asarray(self.hi))))

    def to_dict(self):
        out = asdict(self)
        out["lo"] = list(self.lo)
        out["hi"] = list(self.hi)
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), default=_json_default, **kwargs)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def resolve_delta(est, delta):
    if delta is None:
        delta = est.recommended_delta
    if delta is None:
        raise DomainError(
            f"median bias of {est.name} is unknown; pass delta or use the adaptive method"
        )
    return float(delta)


def _check_feasible(n, b_star, est):
    if n < b_star * est.min_split_size:
        raise InfeasibleSplitError(
            f"B*={b_star} splits infeasible for n={n} with {est.name} "
            f"(min split size {est.min_split_size})",
            n=n, b=b_star, min_split_size=est.min_split_size,
        )


def split_estimates(data, est, b_star, streams):
    """Estimates on each of ``b_star`` splits, shape ``(b_star, dim)``."""
    _check_feasible(len(data), b_star, est)
    plan = split_indices(
        len(data), b_star, streams.generator("split-shuffle", b_star),
        est.min_split_size, odd=est.odd_split,
    )
    out = np.empty((b_star, est.dim))
    for j, idx in enumerate(plan.cells()):
        erng = streams.generator("estimator", "split", b_star, j) if est.needs_randomness else None
        try:
            out[j] = est(data.take(idx), erng)
        except EstimationError as exc:
            raise EstimationError(f"split {j} of {b_star}: {exc}", index=j) from exc
    return out, plan


def grouped_hull(data, est, b_stars, streams):
    """Per-coordinate hull where coordinate ``k`` uses ``b_stars[k]`` splits.

    Coordinates sharing a split count share one split plan.
    """
    lo = np.empty(est.dim)
    hi = np.empty(est.dim)
    m = math.inf
    for b in sorted(set(int(v) for v in b_stars)):
        ests, plan = split_estimates(data, est, b, streams)
        sel = np.asarray(b_stars) == b
        lo[sel] = ests[:, sel].min(axis=0)
        hi[sel] = ests[:, sel].max(axis=0)
        m = min(m, int(plan.sizes().min()))
    return lo, hi, m


def _inflate(est, lo, hi, m):
    c = est.inflation(m)
    lo, hi = lo - c, hi + c
    if est.support is not None:
        lo = np.clip(lo, *est.support)
        hi = np.clip(hi, *est.support)
    return lo, hi, c


def _box(lo, hi, **kw):
    return ConfidenceBox(tuple(float(v) for v in lo), tuple(float(v) for v in hi), **kw)


def hulc_interval(data, est, alpha=0.05, delta=None, rng=None, inflate=False):
    """Hull of estimates on a randomized number of disjoint splits.

    For ``d > 1`` the budget is solved at level ``alpha / d`` and all
    coordinates share one split plan; the rectangle then has coverage at
    least ``1 - alpha`` by the union bound.

    Parameters
    ----------
    data : Dataset
    est : EstimatorSpec
    alpha : float
        Target miscoverage.
    delta : float, optional
        Bound on the per-split median bias; defaults to the estimator's
        recommendation.
    rng : int or Streams, optional
        Master seed or stream factory.
    inflate : bool
        Widen by the estimator's ``inflation(m)`` (``m`` = smallest split)
        and intersect with its support.
    """
    streams = as_streams(rng)
    delta = resolve_delta(est, delta)
    budget = solve_budget(alpha / est.dim, delta)
    u = streams.uniform("budget-draw")
    b_star = randomize_b(budget, u)
    lo, hi, m = grouped_hull(data, est, [b_star] * est.dim, streams)
    c = None
    if inflate:
        if est.inflation is None:
            raise DomainError(f"{est.name} has no inflation rule")
        lo, hi, c = _inflate(est, lo, hi, m)
    return _box(
        lo, hi, method="hulc", alpha=alpha, delta=delta, b_star=b_star,
        seed=streams.seed, inflation=c,
        provenance={"u": u, "b_solved": budget.b_solved, "tau": budget.tau,
                    "level": budget.alpha, "min_split": m, "stream_path": list(streams.path)},
    )


def hulc_interval_fixed_b(data, est, b, rng=None):
    """Hull of estimates on exactly ``b`` splits (no budget randomization)."""
    streams = as_streams(rng)
    lo, hi, m = grouped_hull(data, est, [int(b)] * est.dim, streams)
    return _box(lo, hi, method="hulc-fixed", alpha=None, delta=None, b_star=int(b),
                seed=streams.seed, provenance={"min_split": m})
