"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Seeds are fixed in advance (criterion k uses ``1000 + k``). Run with
``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import contextlib
import csv
import io
import math
import sys
import time
import warnings

import numpy as np
import pytest
from scipy import stats

from hulc import kernels
from hulc.adaptive import estimate_delta
from hulc.cli import main as cli_main
from hulc.core import hulc_interval
from hulc.estimators import (
    Dataset,
    EstimatorSpec,
    empirical_median_bias,
    mean_estimator,
    sample_max,
    uniform_endpoint,
)
from hulc.rng import Streams
from hulc.simlab import MethodSpec, band_coverage, run_coverage
from hulc.splitmath import miscoverage_p, wendel_miscoverage

sys.path.insert(0, __import__("os").path.dirname(__file__))
from oracles import isotonic_bruteforce, origin_outside_hull  # noqa: E402

pytestmark = pytest.mark.acceptance

RESULTS = []


def seed_for(k):
    return 1000 + k


def record(k, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{elapsed:.1f}s < {limit:g}s]"
    RESULTS.append(line)
    print(line)
    assert ok, line


FIG1 = {
    0.00: (4, 5, 6), 0.05: (4, 5, 6), 0.10: (5, 5, 7), 0.15: (5, 6, 7), 0.20: (6, 7, 9),
    0.25: (7, 9, 11), 0.30: (9, 11, 14), 0.35: (12, 15, 19), 0.40: (19, 22, 29),
}


def test_c01_btable_exact():
    t0 = time.perf_counter()
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(["btable", "--format", "csv"])
    rows = list(csv.reader(io.StringIO(buf.getvalue())))[1:]
    got = {round(float(r[0]), 2): tuple(int(v) for v in r[1:]) for r in rows}
    matches = sum(g == w for d in FIG1 for g, w in zip(got.get(d, ()), FIG1[d]))
    record(1, "B-table exactness", code == 0 and matches == 27, f"{matches}/27 entries match",
           time.perf_counter() - t0, 1)


def test_c02_exact_coverage_identity():
    t0 = time.perf_counter()
    # per-split estimate N(c, 1) with P(est <= 0) = 0.3: median bias exactly 0.2
    shift = -stats.norm.ppf(0.3)
    est = EstimatorSpec("synthetic", 1, lambda data, rng: shift + rng.standard_normal(),
                        needs_randomness=True, recommended_delta=0.2)
    data = Dataset(np.zeros(20))
    root = Streams(seed_for(2))
    reps = 50_000
    miss = sum(not hulc_interval(data, est, 0.1, rng=root.child(r)).contains(0.0) for r in range(reps))
    rate = miss / reps
    record(2, "exact-coverage identity", abs(rate - 0.1) <= 0.005,
           f"miscoverage {rate:.4f} (target 0.100 +- 0.005, {reps} reps)", time.perf_counter() - t0, 60)


def test_c03_conservative_floor():
    t0 = time.perf_counter()
    rep = run_coverage("gaussian-mean", "hulc", 600, 2000, 0.05, seed=seed_for(3))
    ok = rep.coverage >= 0.94 and 0.93 <= rep.baseline_coverage <= 0.97 and rep.failures == 0
    record(3, "conservative coverage floor", ok,
           f"HulC {rep.coverage:.4f} (>= 0.94), Wald {rep.baseline_coverage:.4f} (in [0.93, 0.97])",
           time.perf_counter() - t0, 60)


def test_c04_width_ratio():
    t0 = time.perf_counter()
    rep = run_coverage("lm-gamma", "hulc", 1000, 500, 0.05, seed=seed_for(4), params={"gamma": 0.0})
    ok = 1.2 <= rep.width_ratio <= 2.0 and 1.2 <= rep.mean_width_ratio <= 2.0
    record(4, "width ratio", ok,
           f"ratio of means {rep.width_ratio:.3f}, mean of ratios {rep.mean_width_ratio:.3f} (in [1.2, 2.0])",
           time.perf_counter() - t0, 120)


def test_c05_misspecified_regression():
    t0 = time.perf_counter()
    rep = run_coverage("lm-gamma", "hulc", 1000, 500, 0.05, seed=seed_for(5), params={"gamma": 0.5})
    record(5, "misspecified regression", rep.coverage >= 0.92 and rep.failures == 0,
           f"HulC coverage of 4.5567 is {rep.coverage:.4f} (>= 0.92)", time.perf_counter() - t0, 120)


def test_c06_uniform_model():
    t0 = time.perf_counter()
    rep = run_coverage("uniform", "hulc", 500, 2000, 0.05, seed=seed_for(6))
    sampler = lambda m, rng: rng.uniform(0.0, 1.0, m)  # noqa: E731
    mb_split = empirical_median_bias(uniform_endpoint(), sampler, 1.0, 500 // 6, 10_000, seed=seed_for(6))
    mb_full = empirical_median_bias(uniform_endpoint(), sampler, 1.0, 500, 10_000, seed=seed_for(6) + 1)
    ok = rep.coverage >= 0.94 and mb_split <= 0.02 and mb_full <= 0.02
    record(6, "uniform model", ok,
           f"coverage {rep.coverage:.4f} (>= 0.94), median bias {mb_split:.4f} at m=83 and "
           f"{mb_full:.4f} at n=500 (<= 0.02)", time.perf_counter() - t0, 60)


def test_c07_unimodal_max():
    t0 = time.perf_counter()
    rep = run_coverage("uniform", MethodSpec("unimodal", delta=0.5, t=0.5), 500, 2000, 0.05,
                       seed=seed_for(7))
    record(7, "unimodal HulC under median bias 1/2", rep.coverage >= 0.94 and rep.failures == 0,
           f"coverage {rep.coverage:.4f} (>= 0.94)", time.perf_counter() - t0, 60)


def test_c08_adaptive_directionality():
    t0 = time.perf_counter()
    root = Streams(seed_for(8))
    n, k = 2000, 500
    gauss, umax = [], []
    for s in range(50):
        g = root.child(s)
        dg = Dataset(g.generator("gauss").standard_normal(n))
        du = Dataset(g.generator("unif").uniform(size=n))
        gauss.append(estimate_delta(dg, mean_estimator(), k=k, rng=g.child("g")).delta_hat[0])
        umax.append(estimate_delta(du, sample_max(), k=k, rng=g.child("u")).delta_hat[0])
    mg, mu = float(np.mean(gauss)), float(np.mean(umax))
    record(8, "adaptive delta-hat directionality", mg <= 0.1 and mu >= 0.4,
           f"Gaussian mean {mg:.4f} (<= 0.1), uniform max {mu:.4f} (>= 0.4)", time.perf_counter() - t0, 120)


def test_c09_squared_mean():
    t0 = time.perf_counter()
    r0 = run_coverage("sqmean", MethodSpec("hulc", delta=0.183), 2000, 500, 0.05, seed=seed_for(9),
                      params={"mu": 0.0})
    r2 = run_coverage("sqmean", MethodSpec("hulc", delta=0.183), 2000, 500, 0.05, seed=seed_for(9) + 1,
                      params={"mu": 2.0})
    ok = r0.coverage >= 0.93 and r2.coverage >= 0.93 and r0.mean_width < r2.mean_width
    record(9, "squared-mean adaptivity", ok,
           f"coverage {r0.coverage:.4f} / {r2.coverage:.4f} (>= 0.93), mean width "
           f"{r0.mean_width:.4f} < {r2.mean_width:.4f}", time.perf_counter() - t0, 120)


def test_c10_pava_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed_for(10))
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    worst_obj = worst_mean = 0.0
    monotone = True
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        y = rng.normal(size=n) * rng.choice([0.1, 1.0, 10.0])
        w = rng.uniform(0.1, 5.0, n) if rng.random() < 0.5 else np.ones(n)
        _, best = isotonic_bruteforce(y, w)
        for b in backends:
            fit = kernels.pava(y, w, backend=b)
            worst_obj = max(worst_obj, abs(float(np.dot(w, (y - fit) ** 2)) - best))
            worst_mean = max(worst_mean, abs(np.dot(w, fit) - np.dot(w, y)))
            monotone &= bool(np.all(np.diff(fit) >= 0))
    ok = worst_obj <= 1e-9 and worst_mean <= 1e-9 and monotone
    record(10, "PAVA oracle equivalence", ok,
           f"max objective gap {worst_obj:.2e}, max mean drift {worst_mean:.2e}, nondecreasing={monotone} "
           f"({'+'.join(backends)})", time.perf_counter() - t0, 30)


def test_c11_wendel():
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed_for(11))
    reps = 100_000
    worst = 0.0
    for d in (1, 2, 3):
        for b in range(d + 1, 9):
            pts = rng.standard_normal((reps, b, d))
            mc = float(np.mean(origin_outside_hull(pts)))
            worst = max(worst, abs(mc - wendel_miscoverage(b, d)))
    exact = all(wendel_miscoverage(b, 1) == 2.0 ** -(b - 1) == miscoverage_p(b, 0.0) for b in range(2, 40))
    record(11, "Wendel oracle", worst <= 0.02 and exact,
           f"max |MC - formula| {worst:.4f} (<= 0.02), d=1 exact={exact}", time.perf_counter() - t0, 60)


def test_c12_band_demo():
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        frac = band_coverage("fig4", n=1000, runs=100, k=25, alpha=0.05, method="adaptive",
                             seed=seed_for(12))
    record(12, "monotone band demo", frac >= 0.90,
           f"band contains truth at all 25 points in {frac:.2f} of 100 runs (>= 0.90)",
           time.perf_counter() - t0, 600)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    print(f"{12 - failed}/12 criteria passed")
    sys.exit(1 if failed else 0)
