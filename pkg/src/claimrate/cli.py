"""Command-line interface: ``claimrate <command> [options]``.

Every command writes one table (CSV with a header row, or JSON as a flat
array of row objects) to standard output or ``--output``. Floats are printed
with 12 significant digits; infinite moments print as ``inf``.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from typing import Iterable, Sequence

import numpy as np

from . import estimation, poisson_gamma, poisson_inv_gamma
from .core import ConvergenceError, DomainError
from .estimation import fit_mle, fit_moments, log_likelihood, read_records_csv
from .poisson_gamma import GammaMixParams
from .poisson_inv_gamma import InvGammaMixParams
from .pricing import PremiumPrinciple, bms_table
from .resolution import resolution_profile
from .simulation import SimConfig, goodness_of_fit, sample_portfolio
from .table1 import ROWS, table1_params
from .tail_analysis import default_n_grid, figure1_data, table1_scan

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3

ENV_HELP = """environment overrides:
  CLAIMRATE_SLOPE_DELTA   relative half-width of the log-log slope stencil (default 0.05)
  CLAIMRATE_MLE_XTOL      simplex size at which the MLE search stops (default 1e-8)
  CLAIMRATE_MLE_MAXFEV    likelihood evaluations allowed per MLE start (default 10000)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    if value is None:
        return ""
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return _fmt(value)
        return float(f"{value:.12g}")
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_table(rows: Sequence[dict], fmt: str, out) -> None:
    if fmt == "json":
        json.dump([{k: _json_value(v) for k, v in r.items()} for r in rows], out, indent=1)
        out.write("\n")
        return
    if not rows:
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(rows[0].keys())
    for r in rows:
        writer.writerow(_fmt(v) for v in r.values())


def _model_args(p: argparse.ArgumentParser, flag: str = "--model") -> None:
    p.add_argument(flag, dest="model", choices=["gamma", "invgamma"], required=True)
    p.add_argument("--alpha", type=float, help="gamma shape")
    p.add_argument("--beta", type=float, help="gamma rate")
    p.add_argument("-m", "--m", dest="m", type=float, help="inverse-gamma scale")
    p.add_argument("-s", "--s", dest="s", type=float, help="inverse-gamma shape")


def _output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-o", "--output", default="-", help="output file ('-' for standard output)")


def _build_model(args):
    if args.model == "gamma":
        if args.alpha is None or args.beta is None:
            raise UsageError("--model gamma needs --alpha and --beta")
        return GammaMixParams(args.alpha, args.beta)
    if args.m is None or args.s is None:
        raise UsageError("--model invgamma needs -m and -s")
    return InvGammaMixParams(args.m, args.s)


def _params_row(params) -> dict:
    if isinstance(params, GammaMixParams):
        return {"alpha": params.alpha, "beta": params.beta}
    return {"m": params.m, "s": params.s}


def cmd_pmf(args):
    model = _build_model(args)
    counts = np.arange(args.n_max + 1)
    logp = np.atleast_1d(model.log_pmf(counts, args.J))
    return [{"n": int(n), "probability": math.exp(v), "log_probability": float(v)} for n, v in zip(counts, logp)]


def cmd_posterior(args):
    model = _build_model(args)
    if isinstance(model, GammaMixParams):
        post = poisson_gamma.posterior(model, args.J, args.n)
        mom = poisson_gamma.posterior_moments(model, args.J, args.n)
        return [{
            "n": args.n, "shape": post.shape, "rate": post.rate, "mean": mom.mean,
            "variance": mom.variance, "credibility_weight": mom.credibility_weight,
        }]
    post = poisson_inv_gamma.posterior(model, args.J, args.n)
    mom = post.moments()
    return [{
        "n": args.n, "order": post.order, "lin_coeff": post.lin_coeff, "inv_coeff": post.inv_coeff,
        "mean": mom.mean, "variance": mom.variance, "mode": post.mode,
    }]


def cmd_predict(args):
    model = _build_model(args)
    mom = model.predictive_moments(args.J1, args.n1, args.J2)
    if args.moments:
        return [{"n1": args.n1, "mean": mom.mean, "variance": mom.variance}]
    counts = np.arange(args.n2_max + 1)
    logp = np.atleast_1d(model.predictive_log_pmf(args.J1, args.n1, args.J2, counts))
    return [{"n2": int(n), "probability": math.exp(v), "log_probability": float(v)} for n, v in zip(counts, logp)]


def cmd_premium_table(args):
    model = _build_model(args)
    principle = PremiumPrinciple(args.principle, args.loading)
    rows = bms_table(model, args.J1, args.n1_max, principle)
    return [{
        "n1": r.n1, "posterior_mean": r.posterior_mean, "posterior_variance": r.posterior_variance,
        "relativity": r.relativity, "premium": r.premium,
    } for r in rows]


def cmd_resolution(args):
    model = _build_model(args)
    profile = resolution_profile(model, args.J1, args.J2, args.n1_max, args.threshold, args.pooled)
    rows = []
    for r in profile.reports:
        row = {"n1": r.n1, "resolution": r.resolution}
        # regimes are only classified for the gamma model
        if isinstance(model, GammaMixParams):
            row["high_resolution"] = r.high_resolution
        rows.append(row)
    return rows


def _read_param_csv(path) -> list[InvGammaMixParams]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not {"m", "s"} <= set(reader.fieldnames or ()):
            raise DomainError("tail-scan input needs columns m,s")
        return [InvGammaMixParams(float(r["m"]), float(r["s"])) for r in reader]


def cmd_tail_scan(args):
    x_points = args.x or [10.0, 13.0]
    if args.table1:
        params = table1_params()
    elif args.input:
        params = _read_param_csv(args.input)
    else:
        raise UsageError("tail-scan needs --input FILE or --table1")
    results = table1_scan(params, x_points, args.J, args.half_width, args.workers)
    rows = []
    for i, res in enumerate(results):
        row = {"m": res.params.m, "s": res.params.s, "mean": res.mean, "variance": res.variance}
        for x in x_points:
            row[f"slope_x{x:g}"] = res.slopes.get(float(x), math.nan)
        if args.table1:
            row["published_slope_x10"] = ROWS[i].slope_x10
            row["published_slope_x13"] = ROWS[i].slope_x13
        row["error"] = res.error or ""
        rows.append(row)
    return rows


def cmd_figure1(args):
    pig = InvGammaMixParams(args.m, args.s)
    nb = GammaMixParams(args.alpha, args.beta)
    series = figure1_data(pig, nb, args.J, default_n_grid(args.x_max))
    return [{"model": name, "n": int(round(math.exp(p.x))), "x": p.x, "y": p.y}
            for name, pts in series.items() for p in pts]


def cmd_fit(args):
    records = read_records_csv(args.input)
    family = estimation.normalize_family(args.family)
    if args.method == "moments":
        params = fit_moments(family, records)
        row = {"family": family, "method": "moments", **_params_row(params),
               "log_likelihood": log_likelihood(params, records)}
        if args.standard_errors:
            for k, v in estimation.moment_fit_standard_errors(family, records).items():
                row[f"se_{k}"] = v
        return [row]
    res = fit_mle(
        family, records,
        max_evaluations=int(os.environ.get("CLAIMRATE_MLE_MAXFEV", "10000")),
        xtol=float(os.environ.get("CLAIMRATE_MLE_XTOL", "1e-8")),
    )
    return [{"family": family, "method": "mle", **_params_row(res.params),
             "log_likelihood": res.log_likelihood, "identifiable": res.identifiable,
             "message": "; ".join(res.messages)}]


def cmd_simulate(args):
    model = _build_model(args)
    config = SimConfig(model, args.J, args.size, args.seed)
    return [{"policy_id": r.policy_id, "exposure_years": r.exposure_years, "claim_count": r.claim_count}
            for r in sample_portfolio(config, args.workers)]


def cmd_gof(args):
    model = _build_model(args)
    records = read_records_csv(args.input)
    res = goodness_of_fit(records, model, fitted_params=args.fitted_params)
    if args.bins:
        return [{"low": b.low, "high": "inf" if b.high is None else b.high,
                 "observed": b.observed, "expected": b.expected} for b in res.bins]
    return [{"chi_square": res.chi_square, "degrees_of_freedom": res.degrees_of_freedom,
             "bins": len(res.bins), "p_value": res.p_value}]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="claimrate",
        description="Experience rating with Poisson-gamma and Poisson-inverse-gamma claim-count models.",
        epilog=ENV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pmf", help="unconditional claim-count pmf")
    _model_args(p)
    p.add_argument("-J", type=float, default=1.0, help="exposure in years")
    p.add_argument("--n-max", type=int, required=True)
    _output_args(p)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("posterior", help="posterior law of the intensity after n claims")
    _model_args(p)
    p.add_argument("-J", type=float, default=1.0)
    p.add_argument("-n", type=int, required=True)
    _output_args(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("predict", help="predictive claim-count law for a later window")
    _model_args(p)
    p.add_argument("--J1", type=float, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--J2", type=float, required=True)
    p.add_argument("--n2-max", type=int, default=10)
    p.add_argument("--moments", action="store_true", help="print predictive mean and variance only")
    _output_args(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("premium-table", help="bonus-malus relativities and premiums")
    _model_args(p)
    p.add_argument("--J1", type=float, default=1.0)
    p.add_argument("--n1-max", type=int, default=10)
    p.add_argument("--principle", choices=["expectation", "variance-loaded", "stddev-loaded"], default="expectation")
    p.add_argument("--loading", type=float, default=0.0)
    _output_args(p)
    p.set_defaults(func=cmd_premium_table)

    p = sub.add_parser("resolution", help="resolution profile over observed claim counts")
    _model_args(p)
    p.add_argument("--J1", type=float, default=1.0)
    p.add_argument("--J2", type=float, default=1.0)
    p.add_argument("--n1-max", type=int, default=10)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--pooled", action="store_true", help="average the two predictive variances")
    _output_args(p)
    p.set_defaults(func=cmd_resolution)

    p = sub.add_parser("tail-scan", help="log-log tail slopes of inverse-gamma mixtures")
    p.add_argument("--input", help="CSV with columns m,s")
    p.add_argument("--table1", action="store_true", help="scan the built-in published parameter table")
    p.add_argument("--x", type=float, action="append", help="x = ln n at which to take the slope (repeatable)")
    p.add_argument("-J", type=float, default=1.0)
    p.add_argument("--half-width", type=float, default=float(os.environ.get("CLAIMRATE_SLOPE_DELTA", "0.05")))
    p.add_argument("--workers", type=int, default=None)
    _output_args(p)
    p.set_defaults(func=cmd_tail_scan)

    p = sub.add_parser("figure1", help="log-log series of moment-matched gamma and inverse-gamma mixtures")
    p.add_argument("-m", "--m", dest="m", type=float, default=0.0011)
    p.add_argument("-s", "--s", dest="s", type=float, default=2.1)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=100.0)
    p.add_argument("-J", type=float, default=1.0)
    p.add_argument("--x-max", type=float, default=13.0)
    _output_args(p)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("fit", help="estimate mixing parameters from a claim CSV")
    p.add_argument("--family", choices=["gamma", "invgamma", "inv-gamma"], required=True)
    p.add_argument("--method", choices=["moments", "mle"], default="moments")
    p.add_argument("--input", required=True, help="CSV with header policy_id,exposure_years,claim_count")
    p.add_argument("--standard-errors", action="store_true", help="add delta-method standard errors (moments)")
    _output_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="simulate a portfolio of claim records")
    _model_args(p, "--family")
    p.add_argument("-J", type=float, default=1.0)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=None)
    _output_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gof", help="chi-square goodness of fit of claim records to a model")
    _model_args(p)
    p.add_argument("--input", required=True)
    p.add_argument("--fitted-params", type=int, default=0, help="parameters estimated from the same data")
    p.add_argument("--bins", action="store_true", help="print the bin table instead of the summary")
    _output_args(p)
    p.set_defaults(func=cmd_gof)
    return parser


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(None if argv is None else list(argv))
        rows = args.func(args)
        if args.output == "-":
            write_table(rows, args.format, sys.stdout)
        else:
            with open(args.output, "w", newline="") as fh:
                write_table(rows, args.format, fh)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"claimrate: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"claimrate: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
