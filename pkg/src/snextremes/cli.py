"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 solver or precision
error, 4 I/O error. Output is fully rendered before anything is written, so
a failing command leaves the output sink untouched.
"""

from __future__ import annotations

import argparse
import csv
import decimal
import io
import math
import sys

from . import diagnostics, norming, sn_core, tail_theory
from .errors import DomainError, ExportError, PrecisionError, SolverError, UsageError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_METHOD_ALIASES = {
    "closed": "closed_form",
    "closed_form": "closed_form",
    "quantile": "quantile",
    "leadbetter0": "leadbetter0",
    "hall0": "hall0",
    "nair0": "nair0",
}


def _decimal(text: str) -> decimal.Decimal:
    try:
        value = decimal.Decimal(text.strip())
    except decimal.InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def parse_log_n(text: str) -> float:
    """``"1e300"`` -> ``log(1e300)`` without ever forming n as a float.

    Any exponent is accepted (``"1e100000"``); n must exceed 1.
    """
    value = _decimal(text)
    if value <= 1:
        raise argparse.ArgumentTypeError(f"n must be > 1, got {text!r}")
    ctx = decimal.Context(prec=40, Emax=decimal.MAX_EMAX, Emin=decimal.MIN_EMIN)
    return float(value.ln(ctx))


def parse_sample_size(text: str) -> int:
    value = _decimal(text)
    if value != value.to_integral_value() or value < 2:
        raise argparse.ArgumentTypeError(f"n must be an integer >= 2, got {text!r}")
    if value > 10**12:
        raise argparse.ArgumentTypeError(f"n = {text} is too large to simulate")
    return int(value)


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = _finite_float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        value = _decimal(text)
        if value != value.to_integral_value() or value < lo:
            raise argparse.ArgumentTypeError(f"must be an integer >= {lo}, got {text!r}")
        return int(value)

    return parse


def _comma_list(item_parser):
    def parse(text: str) -> list:
        parts = [p for p in text.split(",") if p.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("empty list")
        return [item_parser(p) for p in parts]

    return parse


def _method(text: str) -> str:
    try:
        return _METHOD_ALIASES[text]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown method {text!r}; choose from {', '.join(sorted(_METHOD_ALIASES))}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snextremes",
        description="Skew-normal tail theory and Gumbel convergence diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("dist", help="evaluate pdf, cdf, survival or log-survival at one point")
    p.add_argument("--lambda", dest="lam", type=_finite_float, required=True)
    p.add_argument("--x", type=_finite_float, required=True)
    what = p.add_mutually_exclusive_group()
    for flag in ("pdf", "cdf", "survival", "log-survival"):
        what.add_argument(f"--{flag}", dest="what", action="store_const", const=flag)
    p.set_defaults(what="pdf")

    p = sub.add_parser("bounds", help="table of Mills bounds and ratios over an x-range")
    p.add_argument("--lambda", dest="lam", type=_finite_float)
    p.add_argument("--x-min", type=_positive_float, required=True)
    p.add_argument("--x-max", type=_positive_float, required=True)
    p.add_argument("--steps", type=_int_at_least(1), required=True)
    p.add_argument("--normal", action="store_true", help="standard normal bounds (lambda ignored)")
    p.add_argument("--out", default="-")

    p = sub.add_parser("norming", help="norming constants (scale, location) for sample size n")
    p.add_argument("--lambda", dest="lam", type=_finite_float)
    p.add_argument("--n", dest="log_n", type=parse_log_n, required=True)
    p.add_argument("--method", type=_method, required=True)
    p.add_argument("--tol", type=_positive_float, default=norming.DEFAULT_TOL)
    p.add_argument("--out", default="-")

    p = sub.add_parser("rates", help="convergence-rate table over n- and x-grids")
    p.add_argument("--lambda", dest="lam", type=_finite_float, required=True)
    p.add_argument("--n-grid", type=_comma_list(parse_log_n), default=None)
    p.add_argument("--x-grid", type=_comma_list(_finite_float), default=None)
    p.add_argument("--order", choices=[o.value for o in diagnostics.Order], required=True)
    p.add_argument("--method", type=_method, required=True)
    p.add_argument("--tol", type=_positive_float, default=norming.DEFAULT_TOL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")

    p = sub.add_parser("simulate", help="Monte Carlo maxima against exact and Gumbel laws")
    p.add_argument("--lambda", dest="lam", type=_finite_float, required=True)
    p.add_argument("--n", type=parse_sample_size, required=True)
    p.add_argument("--reps", type=_int_at_least(100), required=True)
    p.add_argument("--seed", type=_int_at_least(0), required=True)
    p.add_argument("--method", type=_method, default="closed_form")
    p.add_argument("--workers", type=_int_at_least(1), default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    return parser


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([diagnostics.format_number(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out) -> None:
    diagnostics.write_text(text, sys.stdout if out in (None, "-") else out)


def _require_lambda(args, parser) -> float:
    if args.lam is None:
        parser.error(f"{args.command}: --lambda is required")
    return args.lam


def _cmd_dist(args, parser) -> str:
    fn = {
        "pdf": sn_core.pdf,
        "cdf": sn_core.cdf,
        "survival": sn_core.survival,
        "log-survival": sn_core.log_survival,
    }[args.what]
    return f"{fn(args.x, args.lam):.15g}\n"


def _cmd_bounds(args, parser) -> str:
    if args.x_max < args.x_min:
        raise UsageError("--x-max must be >= --x-min")
    if args.steps == 1:
        xs = [args.x_min]
    else:
        step = (args.x_max - args.x_min) / (args.steps - 1)
        xs = [args.x_min + i * step for i in range(args.steps)]
    if args.normal:
        rows = [tail_theory.mills_bounds_normal(x) for x in xs]
    else:
        lam = _require_lambda(args, parser)
        rows = [tail_theory.mills_bounds_sn(x, lam) for x in xs]
    return _csv(
        ("x", "lower", "upper", "ratio", "status"),
        [(b.x, b.lower, b.upper, b.ratio, b.status.value) for b in rows],
    )


def _cmd_norming(args, parser) -> str:
    if args.method in ("closed_form", "quantile"):
        lam = _require_lambda(args, parser)
    else:
        lam = 0.0
    pair = norming.norming(args.log_n, lam, args.method, args.tol)
    return _csv(
        ("method", "lambda", "log_n", "scale", "location"),
        [(pair.method.value, lam, pair.log_n, pair.scale, pair.location)],
    )


def _cmd_rates(args, parser) -> str:
    if args.method not in ("closed_form", "quantile"):
        raise UsageError("rates supports --method closed or quantile only")
    records = diagnostics.rate_ratio_scan(
        args.lam,
        args.n_grid or diagnostics.DEFAULT_LOG_N_GRID,
        args.x_grid or diagnostics.DEFAULT_X_GRID,
        order=args.order,
        method=args.method,
        tol=args.tol,
    )
    return diagnostics.render_table(records, args.format)


def _cmd_simulate(args, parser) -> str:
    if args.method not in ("closed_form", "quantile"):
        raise UsageError("simulate supports --method closed or quantile only")
    pair = norming.norming(math.log(args.n), args.lam, args.method)
    summary = diagnostics.monte_carlo_maxima(
        args.lam, args.n, args.reps, args.seed, pair, workers=args.workers
    )
    return diagnostics.render_table([summary], args.format)


_COMMANDS = {
    "dist": _cmd_dist,
    "bounds": _cmd_bounds,
    "norming": _cmd_norming,
    "rates": _cmd_rates,
    "simulate": _cmd_simulate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        text = _COMMANDS[args.command](args, parser)
        _emit(text, getattr(args, "out", "-"))
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, DomainError) as exc:
        print(f"snextremes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, PrecisionError) as exc:
        print(f"snextremes {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ExportError, OSError) as exc:
        print(f"snextremes {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
