"""Estimator corpus and the :class:`Dataset` container they consume.

An :class:`EstimatorSpec` wraps a procedure mapping a data slice (and an
optional random generator) to a ``dim``-vector, together with the
metadata the split machinery needs: the smallest admissible split, the
recommended median-bias bound, and whether it draws random numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EstimationError
from .kernels import pava

__all__ = [
    "Dataset",
    "EstimatorSpec",
    "MonotoneMap",
    "mean_estimator",
    "median_estimator",
    "binomial_proportion",
    "ols_estimator",
    "uniform_endpoint",
    "sample_max",
    "squared_mean_ustat",
    "isotonic_at_point",
    "isotonic_fit_at",
    "monotone_map",
    "monotone_transform",
    "empirical_median_bias",
    "get_estimator",
    "ESTIMATOR_NAMES",
    "pava",
]


class Dataset:
    """Rows-by-columns numeric table with column roles.

    Parameters
    ----------
    values : array_like, shape (n,) or (n, p)
    columns : sequence of str, optional
        Column names; default ``x`` for a single column, else ``c0, c1, ...``.
    response : str, optional
        Response column for regression estimators.
    covariates : sequence of str, optional
        Covariate columns, in design-matrix order.
    sample : str, optional
        Column holding univariate samples; defaults to the first column.
    """

    __slots__ = ("values", "columns", "response", "covariates", "sample", "_index")

    def __init__(self, values, columns=None, response=None, covariates=None, sample=None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("a dataset needs at least one row")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dataset contains non-finite values")
        if columns is None:
            columns = ["x"] if arr.shape[1] == 1 else [f"c{j}" for j in range(arr.shape[1])]
        columns = list(columns)
        if len(columns) != arr.shape[1]:
            raise ValueError(f"{len(columns)} names for {arr.shape[1]} columns")
        self.values = arr
        self.columns = columns
        self._index = {c: j for j, c in enumerate(columns)}
        for name in [response, sample, *(covariates or ())]:
            if name is not None and name not in self._index:
                raise KeyError(f"unknown column {name!r}")
        self.response = response
        self.covariates = list(covariates) if covariates is not None else None
        self.sample = sample

    @classmethod
    def from_columns(cls, response=None, covariates=None, sample=None, **cols):
        names = list(cols)
        values = np.column_stack([np.asarray(cols[c], dtype=np.float64) for c in names])
        return cls(values, names, response=response, covariates=covariates, sample=sample)

    @classmethod
    def from_csv(cls, path, **roles):
        """Read a CSV with a header row of column names and numeric cells."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                try:
                    rows.append([float(c) for c in row])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not rows:
            raise ValueError(f"{path}: no data rows")
        return cls(np.array(rows), header, **roles)

    def __len__(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"Dataset(n={self.n}, columns={self.columns})"

    def column(self, name):
        return self.values[:, self._index[name]]

    def sample_values(self):
        return self.values[:, self._index[self.sample]] if self.sample else self.values[:, 0]

    def response_name(self):
        if self.response is not None:
            return self.response
        return "y" if "y" in self._index else self.columns[-1]

    def covariate_names(self):
        if self.covariates is not None:
            return list(self.covariates)
        resp = self.response_name()
        return [c for c in self.columns if c != resp]

    def take(self, idx):
        """Rows ``idx`` as a new dataset with the same roles."""
        out = Dataset.__new__(Dataset)
        out.values = self.values[idx]
        out.columns = self.columns
        out._index = self._index
        out.response = self.response
        out.covariates = self.covariates
        out.sample = self.sample
        return out


@dataclass(frozen=True)
class EstimatorSpec:
    """A named estimation procedure plus the metadata the splitter needs.

    ``procedure(data, rng)`` returns ``dim`` finite numbers. ``rng`` is a
    :class:`numpy.random.Generator` when ``needs_randomness`` is true and
    ``None`` otherwise. ``recommended_delta`` is ``None`` when the median
    bias is unknown.
    """

    name: str
    dim: int
    procedure: Callable
    min_split_size: int = 1
    recommended_delta: Optional[float] = 0.0
    needs_randomness: bool = False
    odd_split: bool = False
    inflation: Optional[Callable[[int], float]] = field(default=None, compare=False)
    support: Optional[tuple] = None

    def __call__(self, data, rng=None):
        if len(data) < 1:
            raise EstimationError(f"{self.name}: empty slice")
        out = np.atleast_1d(np.asarray(self.procedure(data, rng), dtype=np.float64))
        if out.shape != (self.dim,):
            raise EstimationError(f"{self.name}: expected {self.dim} outputs, got shape {out.shape}")
        if not np.all(np.isfinite(out)):
            raise EstimationError(f"{self.name}: non-finite estimate {out}")
        return out


def _need(data, m, name):
    if len(data) < m:
        raise EstimationError(f"{name}: needs at least {m} observations, got {len(data)}")


def mean_estimator(column=None):
    """Sample mean of the sample column."""

    def proc(data, rng):
        x = data.column(column) if column else data.sample_values()
        return x.mean()

    return EstimatorSpec("mean", 1, proc)


def median_estimator(randomized=True, column=None):
    """Sample median that stays median unbiased for even sizes.

    For odd sizes the middle order statistic is returned. For even sizes
    a fair coin picks one of the two central order statistics when
    ``randomized``; otherwise the lower one is returned and the splitter
    is asked to keep every split odd.
    """

    def proc(data, rng):
        x = np.sort(data.column(column) if column else data.sample_values())
        n = x.size
        if n % 2:
            return x[n // 2]
        if randomized:
            return x[n // 2 - 1] if rng.random() < 0.5 else x[n // 2]
        return x[n // 2 - 1]

    name = "median" if randomized else "median-lower"
    return EstimatorSpec(name, 1, proc, needs_randomness=randomized, odd_split=not randomized)


def binomial_proportion(column=None):
    """Sample proportion of a 0/1 column.

    Median bias is at most 1/4 once ``p`` is at least ``log(4/3)/m`` away
    from the boundary; ``inflation(m) = log(2)/m`` widens a ``delta = 0``
    hull to cover every ``p`` in [0, 1].
    """

    def proc(data, rng):
        x = data.column(column) if column else data.sample_values()
        if not np.all((x == 0.0) | (x == 1.0)):
            raise EstimationError("binom: values must be 0 or 1")
        return x.mean()

    return EstimatorSpec(
        "binom", 1, proc, recommended_delta=0.25,
        inflation=lambda m: math.log(2.0) / m, support=(0.0, 1.0),
    )


def _independent_columns(X, tol=1e-7):
    # Greedy left-to-right selection of linearly independent columns.
    kept = []
    basis = np.empty((X.shape[0], 0))
    for j in range(X.shape[1]):
        col = X[:, j]
        scale = np.linalg.norm(col)
        if scale == 0.0:
            continue
        v = col - basis @ (basis.T @ col)
        v = v - basis @ (basis.T @ v)
        nv = np.linalg.norm(v)
        if nv > tol * scale:
            kept.append(j)
            basis = np.column_stack([basis, v / nv])
    return kept


def ols_estimator(target_coefficient=1, intercept=True):
    """One coefficient of the least-squares fit of response on covariates.

    ``target_coefficient`` indexes the design matrix columns, intercept
    first when ``intercept`` is true (so 1 is the first covariate).
    Columns that are linearly dependent on earlier ones are dropped, so
    tiny splits still return an estimate for the leading coefficients.
    """
    k = int(target_coefficient)

    def proc(data, rng):
        _need(data, 2, "ols")
        y = data.column(data.response_name())
        cov = data.covariate_names()
        X = np.column_stack([data.column(c) for c in cov]) if cov else np.empty((len(y), 0))
        if intercept:
            X = np.column_stack([np.ones(len(y)), X])
        if not 0 <= k < X.shape[1]:
            raise EstimationError(f"ols: coefficient {k} out of range for {X.shape[1]} columns")
        kept = _independent_columns(X)
        if k not in kept:
            raise EstimationError(f"ols: coefficient {k} is aliased (constant or collinear column)")
        coef, *_ = np.linalg.lstsq(X[:, kept], y, rcond=None)
        return coef[kept.index(k)]

    return EstimatorSpec(f"ols:{k}", 1, proc, min_split_size=2)


def uniform_endpoint():
    """``2 * max - second max``: median unbiased for the U[0, theta] endpoint."""

    def proc(data, rng):
        _need(data, 2, "uniform-endpoint")
        x = data.sample_values()
        top = np.partition(x, x.size - 2)[-2:]
        return 2.0 * top[1] - top[0]

    return EstimatorSpec("uniform-endpoint", 1, proc, min_split_size=2)


def sample_max():
    """Sample maximum; the uniform-model MLE, median bias 1/2."""

    def proc(data, rng):
        return data.sample_values().max()

    return EstimatorSpec("max", 1, proc, recommended_delta=0.5)


def squared_mean_ustat(clamp_nonnegative=False):
    """Unbiased U-statistic for the squared mean, ``sum_{i != k} x_i x_k / (n (n - 1))``."""

    def proc(data, rng):
        _need(data, 2, "sqmean")
        x = data.sample_values()
        n = x.size
        m = x.mean()
        est = n / (n - 1) * m * m - np.mean(x * x) / (n - 1)
        return max(est, 0.0) if clamp_nonnegative else est

    name = "sqmean+" if clamp_nonnegative else "sqmean"
    return EstimatorSpec(name, 1, proc, min_split_size=2, recommended_delta=0.183)


def isotonic_fit_at(x, y, x0):
    """Isotonic LSE of ``y`` on ``x`` evaluated at ``x0`` (left-constant steps).

    Ties in ``x`` keep their input order. Below the smallest design point
    the first fitted value is returned.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    fit = pava(y[order])
    pos = np.searchsorted(xs, np.asarray(x0, dtype=np.float64), side="right") - 1
    return fit[np.maximum(pos, 0)]


def isotonic_at_point(x0, x_column=None, y_column=None):
    """Monotone LSE evaluated at ``x0`` (a point or a sequence of points)."""
    pts = np.atleast_1d(np.asarray(x0, dtype=np.float64))

    def proc(data, rng):
        xc = x_column or (data.covariate_names()[0])
        yc = y_column or data.response_name()
        return isotonic_fit_at(data.column(xc), data.column(yc), pts)

    label = ",".join(f"{p:g}" for p in pts)
    return EstimatorSpec(f"isotonic:{label}", pts.size, proc, recommended_delta=None)


@dataclass(frozen=True)
class MonotoneMap:
    """A nondecreasing real map; ``strict`` when it is strictly increasing."""

    name: str
    fn: Callable
    strict: bool

    def __call__(self, x):
        return self.fn(x)


def _log(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise EstimationError(f"log undefined at {x}")
    return np.log(x)


def monotone_map(spec):
    """Look up a monotone map by identifier.

    Identifiers: ``clamp0``, ``exp``, ``log``, ``affine:a,b`` (``a > 0``),
    ``table:x1:y1;x2:y2;...`` (piecewise linear, constant beyond the ends,
    ``x`` strictly and ``y`` weakly increasing).
    """
    if isinstance(spec, MonotoneMap):
        return spec
    name, _, arg = str(spec).partition(":")
    if name == "clamp0":
        return MonotoneMap("clamp0", lambda x: np.maximum(x, 0.0), False)
    if name == "exp":
        return MonotoneMap("exp", np.exp, True)
    if name == "log":
        return MonotoneMap("log", _log, True)
    if name == "affine":
        a, b = (float(v) for v in arg.split(","))
        if a <= 0:
            raise ValueError("affine map needs a positive slope")
        return MonotoneMap(f"affine:{a:g},{b:g}", lambda x: a * np.asarray(x) + b, True)
    if name == "table":
        pairs = [tuple(float(v) for v in item.split(":")) for item in arg.split(";") if item]
        xs, ys = (np.array(v) for v in zip(*pairs))
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) < 0):
            raise ValueError("table map must have increasing x and nondecreasing y")
        strict = bool(np.all(np.diff(ys) > 0))
        return MonotoneMap(f"table:{arg}", lambda x: np.interp(x, xs, ys), strict)
    raise KeyError(f"unknown monotone map {spec!r}")


def monotone_transform(base, g):
    """Estimator returning ``g(base(slice))``; inherits the base's median bias bound."""
    g = monotone_map(g)

    def proc(data, rng):
        return g(base.procedure(data, rng))

    return replace(base, name=f"{g.name}({base.name})", procedure=proc, inflation=None, support=None)


def empirical_median_bias(spec, sampler, theta0, n, reps, seed=None):
    """Monte-Carlo plug-in of ``(1/2 - min{P(est >= theta0), P(est <= theta0)})_+``.

    ``sampler(n, rng)`` returns a :class:`Dataset` or an array of ``n``
    observations. Only the first coordinate of ``spec`` is used.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rng = np.random.default_rng(seed)
    ge = le = 0
    for _ in range(reps):
        data = sampler(n, rng)
        if not isinstance(data, Dataset):
            data = Dataset(data)
        est = spec(data, rng if spec.needs_randomness else None)[0]
        ge += est >= theta0
        le += est <= theta0
    return max(0.0, 0.5 - min(ge, le) / reps)


def _parse_points(text):
    return [float(v) for v in text.split(",") if v]


_FACTORIES = {
    "mean": lambda arg: mean_estimator(),
    "median": lambda arg: median_estimator(randomized=True),
    "median-lower": lambda arg: median_estimator(randomized=False),
    "binom": lambda arg: binomial_proportion(),
    "ols": lambda arg: ols_estimator(int(arg) if arg else 1),
    "uniform-endpoint": lambda arg: uniform_endpoint(),
    "max": lambda arg: sample_max(),
    "sqmean": lambda arg: squared_mean_ustat(clamp_nonnegative=False),
    "sqmean+": lambda arg: squared_mean_ustat(clamp_nonnegative=True),
    "isotonic": lambda arg: isotonic_at_point(_parse_points(arg)),
}

ESTIMATOR_NAMES = tuple(_FACTORIES)


def get_estimator(name):
    """Build an estimator from a registry name such as ``ols:1`` or ``isotonic:0.5``."""
    if isinstance(name, EstimatorSpec):
        return name
    key, _, arg = str(name).partition(":")
    if key not in _FACTORIES:
        raise KeyError(f"unknown estimator {name!r}; known: {', '.join(ESTIMATOR_NAMES)}")
    if key == "isotonic" and not arg:
        raise KeyError("isotonic needs an evaluation point, e.g. isotonic:0.5")
    return _FACTORIES[key](arg)
