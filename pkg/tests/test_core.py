import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from hulc.core import (
    ConfidenceBox,
    hulc_interval,
    hulc_interval_fixed_b,
    split_estimates,
    split_indices,
)
from hulc.errors import DomainError, EstimationError, InfeasibleSplitError
from hulc.estimators import (
    Dataset,
    EstimatorSpec,
    binomial_proportion,
    get_estimator,
    isotonic_at_point,
    mean_estimator,
    median_estimator,
)
from hulc.rng import Streams
from hulc.splitmath import solve_budget


def synthetic(draw, dim=1, delta=0.0):
    """Estimator ignoring the data and returning ``draw(rng)``."""
    return EstimatorSpec("synthetic", dim, lambda data, rng: draw(rng), needs_randomness=True,
                         recommended_delta=delta)


class TestSplitIndices:
    def test_sizes(self):
        rng = np.random.default_rng(0)
        assert_array_equal(split_indices(6, 3, rng).sizes(), [2, 2, 2])
        assert sorted(split_indices(7, 3, rng).sizes()) == [2, 2, 3]

    def test_partition(self):
        plan = split_indices(23, 4, np.random.default_rng(1))
        cells = plan.cells()
        assert_array_equal(np.sort(np.concatenate(cells)), np.arange(23))
        assert max(plan.sizes()) - min(plan.sizes()) <= 1

    def test_odd(self):
        plan = split_indices(24, 5, np.random.default_rng(2), odd=True)
        assert np.all(plan.sizes() % 2 == 1)
        assert (plan.membership == -1).sum() == 24 - plan.sizes().sum()

    def test_infeasible(self):
        with pytest.raises(InfeasibleSplitError, match="more splits than rows"):
            split_indices(5, 6, np.random.default_rng(0))
        with pytest.raises(InfeasibleSplitError) as info:
            split_indices(9, 5, np.random.default_rng(0), min_split_size=2)
        assert info.value.b == 5 and info.value.n == 9


class TestHulc:
    def test_degenerate_data(self):
        box = hulc_interval(Dataset(np.full(50, 3.5)), mean_estimator(), 0.05, rng=1)
        assert box.interval == (3.5, 3.5)

    def test_hull_property(self):
        data = Dataset(np.random.default_rng(4).normal(size=101))
        est = mean_estimator()
        box = hulc_interval(data, est, 0.05, rng=9)
        ests, _ = split_estimates(data, est, box.b_star, Streams(9))
        assert box.interval == (ests.min(), ests.max())
        assert box.provenance["b_solved"] == 6
        assert box.b_star in (5, 6)

    def test_reproducible(self):
        data = Dataset(np.random.default_rng(5).normal(size=80))
        est = median_estimator()
        assert hulc_interval(data, est, 0.1, rng=3) == hulc_interval(data, est, 0.1, rng=3)

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("HULC_SEED", "77")
        data = Dataset(np.arange(40.0))
        box = hulc_interval(data, mean_estimator(), 0.05)
        assert box.seed == 77
        assert box == hulc_interval(data, mean_estimator(), 0.05, rng=77)

    def test_budget_law(self):
        # fraction of runs using b_solved - 1 splits should match tau
        data = Dataset(np.arange(30.0))
        est = mean_estimator()
        bud = solve_budget(0.05, 0.0)
        runs = 10_000
        low = sum(hulc_interval(data, est, 0.05, rng=s).b_star == bud.b_solved - 1 for s in range(runs))
        chi2 = stats.chisquare([low, runs - low], [bud.tau * runs, (1 - bud.tau) * runs])
        assert chi2.pvalue > 0.001

    def test_fixed_b(self):
        data = Dataset(np.arange(10.0))
        box = hulc_interval_fixed_b(data, mean_estimator(), 1, rng=0)
        assert box.interval == (4.5, 4.5)
        est = synthetic(lambda rng: rng.normal())
        lo, hi = hulc_interval_fixed_b(data, est, 2, rng=1).interval
        ests, _ = split_estimates(data, est, 2, Streams(1))
        assert (lo, hi) == (ests.min(), ests.max())

    def test_fixed_b_coin_flip_miscoverage(self):
        est = synthetic(lambda rng: 1.0 if rng.random() < 0.5 else -1.0)
        data = Dataset(np.zeros(5))
        root = Streams(2024)
        reps = 10_000
        miss = sum(not hulc_interval_fixed_b(data, est, 5, rng=root.child(r)).contains(0.0)
                   for r in range(reps))
        assert abs(miss / reps - 0.0625) <= 0.01

    def test_infeasible_carries_b_and_n(self):
        with pytest.raises(InfeasibleSplitError) as info:
            hulc_interval(Dataset(np.arange(5.0)), get_estimator("ols:1"), 0.05, rng=0)
        assert info.value.n == 5 and info.value.b >= 5

    def test_estimation_error_has_index(self):
        def bad(data, rng):
            return np.nan

        est = EstimatorSpec("bad", 1, bad)
        with pytest.raises(EstimationError) as info:
            hulc_interval(Dataset(np.arange(20.0)), est, 0.05, rng=0)
        assert info.value.index == 0

    def test_unknown_delta(self):
        with pytest.raises(DomainError):
            hulc_interval(Dataset(np.arange(20.0)), isotonic_at_point(0.5), 0.05)

    def test_inflation(self):
        data = Dataset(np.zeros(60))
        est = binomial_proportion()
        box = hulc_interval(data, est, 0.05, 0.0, rng=0, inflate=True)
        m = box.provenance["min_split"]
        assert_allclose(box.inflation, np.log(2) / m)
        assert box.interval == (0.0, np.log(2) / m)
        with pytest.raises(DomainError):
            hulc_interval(data, mean_estimator(), 0.05, rng=0, inflate=True)

    def test_multivariate_shared_split(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(size=400)
        data = Dataset.from_columns(x=x, y=x + 0.1 * rng.normal(size=400))
        est = isotonic_at_point([0.25, 0.75])
        box = hulc_interval(data, est, 0.05, 0.0, rng=1)
        assert box.d == 2
        assert box.provenance["b_solved"] == solve_budget(0.025, 0.0).b_solved
        ests, _ = split_estimates(data, est, box.b_star, Streams(1))
        assert_array_equal(box.lo, ests.min(axis=0))
        assert_array_equal(box.hi, ests.max(axis=0))

    def test_json_round_trip(self):
        box = hulc_interval(Dataset(np.arange(30.0)), mean_estimator(), 0.05, rng=2)
        rec = json.loads(box.to_json())
        assert rec["lo"] == list(box.lo) and rec["hi"] == list(box.hi)
        assert rec["b_star"] == box.b_star and rec["seed"] == 2
        again = ConfidenceBox(tuple(rec["lo"]), tuple(rec["hi"]), rec["method"], rec["alpha"],
                              rec["delta"], rec["b_star"], rec["seed"], rec["inflation"])
        assert again == box

    def test_rejects_generator(self):
        with pytest.raises(TypeError):
            hulc_interval(Dataset(np.arange(30.0)), mean_estimator(), 0.05, rng=np.random.default_rng(0))

    def test_coverage_floor_small(self):
        # median-bias-zero estimator: miscoverage within alpha + 3 MC-SE
        root = Streams(31)
        est = mean_estimator()
        reps, miss = 1000, 0
        for r in range(reps):
            s = root.child(r)
            data = Dataset(s.generator("data").exponential(size=60) - 1.0)
            miss += not hulc_interval(data, est, 0.1, 0.1, rng=s.child("m")).contains(0.0)
        assert miss / reps <= 0.1 + 3 * np.sqrt(0.1 / reps)
