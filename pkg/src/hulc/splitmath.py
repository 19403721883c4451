"""Split calculus: miscoverage of hulls, split-count solvers, stability radii.

All functions here are pure and cheap; the solvers are memoized because
Monte-Carlo loops call them with the same arguments thousands of times.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, InfiniteSplitsError

__all__ = [
    "SplitBudget",
    "UnimodalBudget",
    "miscoverage_p",
    "solve_budget",
    "randomize_b",
    "stability_radius",
    "unimodal_q",
    "solve_unimodal_budget",
    "randomize_unimodal_b",
    "wendel_miscoverage",
    "rect_union_bound",
]

_MAX_SPLITS = 100_000


def _clamp01(x):
    return min(1.0, max(0.0, x))


def _check_b(b):
    if int(b) != b or b < 1:
        raise DomainError(f"split count must be a positive integer, got {b!r}")
    return int(b)


def _check_delta(delta, closed=True):
    if not (0.0 <= delta <= 0.5) or (not closed and delta >= 0.5):
        interval = "[0, 1/2]" if closed else "[0, 1/2)"
        raise DomainError(f"median bias must lie in {interval}, got {delta!r}")


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def miscoverage_p(b, delta):
    """Probability that the hull of ``b`` independent estimates misses.

    ``(1/2 - delta)**b + (1/2 + delta)**b``, the worst case over
    estimators with median bias at most ``delta``.
    """
    b = _check_b(b)
    _check_delta(delta)
    if b == 1 or delta == 0.5:
        return 1.0
    return _clamp01((0.5 - delta) ** b + (0.5 + delta) ** b)


def _p_drop(b, delta):
    # P(b-1; delta) - P(b; delta) without cancellation
    lo, hi = 0.5 - delta, 0.5 + delta
    return lo ** (b - 1) * hi + hi ** (b - 1) * lo


def _smallest_b(f, alpha):
    # smallest b >= 1 with f(b) <= alpha, for f nonincreasing in b
    hi = 1
    while f(hi) > alpha:
        if hi >= _MAX_SPLITS:
            raise InfiniteSplitsError(
                f"more than {_MAX_SPLITS} splits needed to reach alpha={alpha}"
            )
        hi = min(2 * hi, _MAX_SPLITS)
    lo = hi // 2  # f(lo) > alpha, or lo == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) <= alpha:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class SplitBudget:
    """Smallest valid split count and the randomization that makes it exact.

    Attributes
    ----------
    alpha, delta : float
        Target miscoverage and median-bias bound.
    b_solved : int
        Smallest ``B`` with ``miscoverage_p(B, delta) <= alpha``.
    tau : float
        Probability of using ``b_solved - 1`` splits instead.
    p_at_b, p_at_b_minus_1 : float
        Miscoverage at ``b_solved`` and ``b_solved - 1``.
    """

    alpha: float
    delta: float
    b_solved: int
    tau: float
    p_at_b: float
    p_at_b_minus_1: float


@functools.lru_cache(maxsize=4096)
def solve_budget(alpha, delta):
    """Solve for the split budget at level ``alpha`` and bias ``delta``.

    Raises
    ------
    InfiniteSplitsError
        If ``delta >= 1/2``.
    DomainError
        If ``alpha`` is outside (0, 1) or ``delta`` negative.
    """
    alpha = float(alpha)
    delta = float(delta)
    _check_alpha(alpha)
    if delta >= 0.5:
        raise InfiniteSplitsError(
            f"median bias {delta} >= 1/2: infinite splits required "
            "(use the unimodal variant instead)"
        )
    _check_delta(delta, closed=False)

    b = _smallest_b(lambda k: miscoverage_p(k, delta), alpha)
    p_b = miscoverage_p(b, delta)
    p_bm1 = miscoverage_p(b - 1, delta)
    tau = (alpha - p_b) / _p_drop(b, delta)
    tau = min(max(tau, 0.0), math.nextafter(1.0, 0.0))
    return SplitBudget(alpha, delta, b, tau, p_b, p_bm1)


def randomize_b(budget, u):
    """Randomized split count: ``b_solved - 1`` if ``u <= tau`` else ``b_solved``."""
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"u must lie in [0, 1], got {u!r}")
    if budget.tau > 0.0 and u <= budget.tau:
        return budget.b_solved - 1
    return budget.b_solved


def stability_radius(alpha, delta):
    """Perturbation of ``delta`` that provably leaves ``b_solved`` unchanged.

    For ``delta > 0`` this is
    ``(min{(alpha/P(B))**(1/B), (P(B-1)/alpha)**(1/B)} - 1) / 2``; for
    ``delta == 0`` the quadratic form ``2 (alpha/P(B) - 1) / (B (B - 1))``
    is used, capped by the exact root of ``P(B; g) = alpha`` because the
    closed form overshoots when ``B <= 3`` (alpha above roughly 0.44).
    Zero whenever the randomization weight ``tau`` is zero.
    """
    budget = solve_budget(alpha, delta)
    b, p_b, p_bm1 = budget.b_solved, budget.p_at_b, budget.p_at_b_minus_1
    if delta == 0.0:
        radius = 2.0 / (b * (b - 1)) * (alpha / p_b - 1.0)
        if radius > 0.0:
            f = lambda g: miscoverage_p(b, g) - alpha  # noqa: E731
            exact = 0.5 if f(0.5) <= 0 else brentq(f, 0.0, 0.5, xtol=1e-15)
            radius = min(radius, exact)
        return max(radius, 0.0)
    ratio = min((alpha / p_b) ** (1.0 / b), (p_bm1 / alpha) ** (1.0 / b))
    return max(0.5 * (ratio - 1.0), 0.0)


def unimodal_q(b, t, delta):
    """Miscoverage of the stretched hull: ``P(b; delta) * (1 + t)**(1 - b)``."""
    b = _check_b(b)
    if t < 0:
        raise DomainError(f"stretch t must be >= 0, got {t!r}")
    _check_delta(delta)
    return _clamp01(miscoverage_p(b, delta) * (1.0 + t) ** (1 - b))


def _q_any(b, t, delta):
    # Q extended to b = 0 where P(0; delta) = 2
    if b == 0:
        return 2.0 * (1.0 + t)
    return unimodal_q(b, t, delta)


@dataclass(frozen=True)
class UnimodalBudget:
    """Split budget for the stretched (unimodal) hull.

    ``eta`` is the probability of using ``b_solved`` splits; with
    probability ``1 - eta`` the procedure uses ``b_solved - 1``.
    """

    alpha: float
    t: float
    delta: float
    b_solved: int
    eta: float
    q_at_b: float
    q_at_b_minus_1: float


@functools.lru_cache(maxsize=4096)
def solve_unimodal_budget(alpha, t, delta):
    alpha, t, delta = float(alpha), float(t), float(delta)
    _check_alpha(alpha)
    if t < 0:
        raise DomainError(f"stretch t must be >= 0, got {t!r}")
    _check_delta(delta)
    if t == 0.0 and delta == 0.5:
        raise InfiniteSplitsError("t = 0 with median bias 1/2 needs infinite splits")
    b = _smallest_b(lambda k: unimodal_q(k, t, delta), alpha)
    q_b = unimodal_q(b, t, delta)
    q_bm1 = _q_any(b - 1, t, delta)
    eta = (q_bm1 - alpha) / (q_bm1 - q_b)
    eta = min(max(eta, 0.0), 1.0)
    return UnimodalBudget(alpha, t, delta, b, eta, q_b, q_bm1)


def randomize_unimodal_b(budget, u):
    """``b_solved`` if ``u <= eta`` else ``b_solved - 1``.

    The direction is the reverse of :func:`randomize_b`.
    """
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"u must lie in [0, 1], got {u!r}")
    if u <= budget.eta or budget.b_solved == 1:
        return budget.b_solved
    return budget.b_solved - 1


def wendel_miscoverage(b, d):
    """Chance the origin lies outside the convex hull of ``b`` symmetric points.

    ``2**-(b-1) * sum_{k<d} C(b-1, k)`` for points in general position
    whose law is symmetric about the origin in every direction.
    """
    b = _check_b(b)
    d = _check_b(d)
    if b <= d:
        raise DomainError(f"need b >= d + 1, got b={b}, d={d}")
    total = sum(math.comb(b - 1, k) for k in range(d))
    return _clamp01(math.ldexp(total, -(b - 1)))


def rect_union_bound(b, d, delta):
    """Union bound ``d * P(b; delta)`` on rectangular-hull miscoverage, capped at 1."""
    d = _check_b(d)
    return min(1.0, d * miscoverage_p(b, delta))
