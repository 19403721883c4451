"""``hulc`` command line: budget tables, intervals from CSV, simulations, bands."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import simlab
from .adaptive import adaptive_hulc
from .core import hulc_interval
from .errors import DomainError, EstimationError, HulcError, InfeasibleSplitError
from .estimators import ESTIMATOR_NAMES, Dataset, get_estimator
from .rng import resolve_seed
from .splitmath import solve_budget
from .unimodal import unimodal_hulc

DEFAULT_ALPHAS = (0.15, 0.1, 0.05)
DEFAULT_DELTAS = tuple(round(0.05 * i, 2) for i in range(9))


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _subsample_size(text):
    if text == "auto":
        return None
    try:
        b = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--subsample-size must be 'auto' or an integer") from None
    if b < 1:
        raise argparse.ArgumentTypeError("--subsample-size must be positive")
    return b


def _fail(kind, message, code=1, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def _seed(args):
    drawn = args.seed is None
    seed = resolve_seed(args.seed)
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def btable_rows(alphas, deltas):
    """``(delta, [B or 'INF' per alpha])`` rows."""
    rows = []
    for d in deltas:
        cells = []
        for a in alphas:
            try:
                cells.append(solve_budget(a, d).b_solved)
            except DomainError:
                cells.append("INF")
        rows.append((d, cells))
    return rows


def cmd_btable(args):
    alphas = args.alpha or list(DEFAULT_ALPHAS)
    deltas = args.delta or list(DEFAULT_DELTAS)
    bad = [a for a in alphas if not 0.0 < a < 1.0]
    if bad:
        return _fail("domain", f"alpha must lie in (0, 1), got {bad[0]}", code=2)
    rows = btable_rows(alphas, deltas)
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["delta", *(f"alpha={a:g}" for a in alphas)])
        for d, cells in rows:
            w.writerow([f"{d:g}", *cells])
    else:
        print("delta  " + "".join(f"{f'a={a:g}':>9}" for a in alphas))
        for d, cells in rows:
            print(f"{d:<6g} " + "".join(f"{c!s:>9}" for c in cells))
    return 0


def _load(args):
    roles = {}
    if args.column:
        roles["sample"] = args.column
    if args.response:
        roles["response"] = args.response
    if args.covariates:
        roles["covariates"] = [c for c in args.covariates.split(",") if c]
    return Dataset.from_csv(args.input, **roles)


def cmd_ci(args):
    seed = _seed(args)
    try:
        data = _load(args)
    except (OSError, ValueError, KeyError) as exc:
        return _fail("input", str(exc), path=args.input)
    try:
        est = get_estimator(args.estimator)
    except KeyError as exc:
        return _fail("estimator", exc.args[0], code=2)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            if args.method == "hulc":
                box = hulc_interval(data, est, args.alpha, args.delta, seed, inflate=args.inflate)
            elif args.method == "adaptive":
                box = adaptive_hulc(data, est, args.alpha, args.subsample_size, args.subsamples,
                                    args.delta_cap, seed, inflate=args.inflate)
            else:
                delta = 0.5 if args.delta is None else args.delta
                box = unimodal_hulc(data, est, args.alpha, args.t, delta, seed)
    except InfeasibleSplitError as exc:
        return _fail("infeasible", str(exc), b_star=exc.b, n=exc.n)
    except EstimationError as exc:
        return _fail("estimation", str(exc), index=exc.index)
    except (HulcError, ValueError) as exc:
        return _fail("domain", str(exc))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rec = {"method": box.method, "estimator": est.name, "alpha": box.alpha, "delta": box.delta,
           "b_star": box.b_star, "lo": list(box.lo), "hi": list(box.hi), "seed": box.seed,
           "n": len(data)}
    if box.inflation is not None:
        rec["inflation"] = box.inflation
    if args.method == "adaptive":
        p = box.provenance
        rec.update(subsample_size=p["subsample_size"], subsamples=p["subsamples"],
                   delta_hat=p["delta_hat"], clipped=p["clipped"])
    elif args.method == "unimodal":
        rec["t"] = args.t
    print(json.dumps(rec))
    return 0


def _sim_params(args):
    params = {}
    for key in ("gamma", "mu", "theta", "p", "df", "flavor", "x0"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    return params


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def cmd_simulate(args):
    if args.scenario not in simlab.SCENARIOS:
        return _fail("scenario", f"unknown scenario {args.scenario!r}; known: "
                     f"{', '.join(simlab.SCENARIOS)}", code=2)
    seed = _seed(args)
    method = simlab.MethodSpec(args.method, delta=args.delta, t=args.t,
                               subsample_size=args.subsample_size, subsamples=args.subsamples,
                               delta_cap=args.delta_cap, estimator=args.estimator)
    rep = simlab.run_coverage(args.scenario, method, args.n, args.reps, args.alpha, seed,
                              _sim_params(args), workers=args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(simlab.REPORT_COLUMNS)
    w.writerow([_fmt(v) for v in rep.row().values()])
    _emit(buf.getvalue(), args.out)
    for e in rep.errors:
        print(f"failure: {e}", file=sys.stderr)
    return 0


def _emit(text, out):
    if out and out != "-":
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_band(args):
    seed = _seed(args)
    try:
        data = Dataset.from_csv(args.input, response=args.y, covariates=[args.x])
    except (OSError, ValueError, KeyError) as exc:
        return _fail("input", str(exc), path=args.input)
    x = data.column(args.x)
    pts = simlab.band_points(len(data), args.points, (float(x.min()), float(x.max())))
    try:
        band, _ = simlab.build_band(data, pts, args.alpha, args.method, seed,
                                    subsample_size=args.subsample_size, subsamples=args.subsamples,
                                    delta_cap=args.delta_cap, t=args.t,
                                    delta=0.5 if args.delta is None else args.delta)
    except InfeasibleSplitError as exc:
        return _fail("infeasible", str(exc), b_star=exc.b, n=exc.n)
    except (HulcError, ValueError) as exc:
        return _fail("domain", str(exc))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "lower", "upper"])
    for xi, lo, hi in zip(band.x, band.lower_at, band.upper_at):
        w.writerow([repr(float(xi)), repr(float(lo)), repr(float(hi))])
    _emit(buf.getvalue(), args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hulc", description="Hull-based confidence intervals.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("btable", help="print the split budget B for a grid of (alpha, delta)")
    b.add_argument("--alpha", type=_floats, help="comma-separated levels (default 0.15,0.1,0.05)")
    b.add_argument("--delta", type=_floats, help="comma-separated median biases (default 0..0.4)")
    b.add_argument("--format", choices=("text", "csv"), default="text")
    b.set_defaults(func=cmd_btable)

    def method_opts(q, methods):
        q.add_argument("--method", choices=methods, default=methods[0])
        q.add_argument("--alpha", type=float, default=0.05)
        q.add_argument("--delta", type=float, default=None,
                       help="median bias bound (hulc: estimator default; unimodal: 0.5)")
        q.add_argument("--t", type=float, default=0.5, help="unimodal stretch factor")
        q.add_argument("--subsample-size", type=_subsample_size, default=None,
                       help="adaptive subsample size: 'auto' (floor(n^(2/3))) or an integer")
        q.add_argument("--subsamples", type=int, default=1000)
        q.add_argument("--delta-cap", type=float, default=0.45)
        q.add_argument("--seed", type=int, default=None, help="master seed (default: HULC_SEED or entropy)")

    c = sub.add_parser("ci", help="confidence interval from a CSV file")
    c.add_argument("input")
    c.add_argument("--estimator", default="mean",
                   help=f"one of {', '.join(ESTIMATOR_NAMES)} (ols:<k>, isotonic:<x0>)")
    method_opts(c, ("hulc", "adaptive", "unimodal"))
    c.add_argument("--column", help="sample column for one-sample estimators")
    c.add_argument("--response", help="response column (default y, else the last column)")
    c.add_argument("--covariates", help="comma-separated covariate columns")
    c.add_argument("--inflate", action="store_true", help="apply the estimator's inflation rule")
    c.set_defaults(func=cmd_ci)

    s = sub.add_parser("simulate", help="Monte-Carlo coverage study")
    s.add_argument("--scenario", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--estimator", default=None, help="override the scenario's estimator")
    method_opts(s, ("hulc", "adaptive", "unimodal", "wald"))
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="-")
    s.add_argument("--gamma", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--theta", type=float)
    s.add_argument("--p", type=float)
    s.add_argument("--df", type=float)
    s.add_argument("--flavor", choices=("fig4", "fig8", "flat"))
    s.add_argument("--x0", type=float)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("band", help="monotone regression confidence band from x,y data")
    d.add_argument("--input", required=True)
    d.add_argument("--points", type=int, default=25)
    d.add_argument("--x", default="x", help="covariate column")
    d.add_argument("--y", default="y", help="response column")
    d.add_argument("--out", default="-")
    method_opts(d, ("adaptive", "unimodal"))
    d.set_defaults(func=cmd_band)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
