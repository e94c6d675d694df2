"""Numerical checks of the Gumbel convergence rates for SN(lam) maxima.

Everything is evaluated directly from the survival function at the
normalised point ``u_n = scale x + location``, in log space, so the n-grids
can run to 10**100 and beyond. The quantities computed per grid point:

* ``tau_n = n S(u_n)``
* ``h_n = n log F(u_n) + e^-x``
* ``delta_n = F^n(u_n) - Lambda(x) = Lambda(x) expm1(h_n)``

A Monte Carlo path simulates maxima directly for modest n.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import expansion, norming, sn_core
from .errors import DomainError, ExportError, UsageError
from .norming import DEFAULT_TOL, Method, NormingPair
from .sn_core import as_shape

__all__ = [
    "Order",
    "RateRecord",
    "PointEvaluation",
    "SecondOrderResult",
    "SimulationSummary",
    "evaluate_point",
    "delta_n",
    "h_lambda",
    "first_order_residual",
    "second_order_residual",
    "rate_ratio_scan",
    "exact_max_cdf",
    "monte_carlo_maxima",
    "export_table",
    "render_table",
    "write_text",
    "format_number",
    "parse_rate_table",
    "RATE_COLUMNS",
    "RATE_TABLE_SCHEMA",
    "DEFAULT_LOG_N_GRID",
    "DEFAULT_X_GRID",
]

_EPS = np.finfo(float).eps
_SERIES_CUTOFF = 1e-8
MC_BUDGET = 10**10

DEFAULT_LOG_N_GRID = tuple(e * math.log(10.0) for e in (4, 6, 8, 12, 16, 32, 64))
DEFAULT_X_GRID = (-1.0, -0.5, 0.5, 1.0, 2.0, 3.0)


class Order(str, enum.Enum):
    LEADING = "leading"
    FIRST = "first"
    SECOND = "second"


_VALID_COMBOS = {
    Order.LEADING: Method.CLOSED_FORM,
    Order.FIRST: Method.QUANTILE,
    Order.SECOND: Method.QUANTILE,
}


@dataclass(frozen=True)
class PointEvaluation:
    """Raw log-space evaluation of ``F^n`` at one normalised point."""

    log_n: float
    x: float
    u_n: float
    log_tau: float
    h: float
    delta: float
    noise_h: float  # estimated absolute error of h

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)


@dataclass(frozen=True)
class RateRecord:
    method: str
    lam: float
    log_n: float
    x: float
    u_n: float
    tau_n: float
    delta_n: float
    predicted: float
    ratio: float


@dataclass(frozen=True)
class SecondOrderResult:
    """Residuals of the second-order expansion at one ``(n, x)``.

    ``h_residual = b^2 (b^2 h - kappa) - omega`` and
    ``full_residual = b^2 (b^2 (F^n - Lambda) - kappa Lambda) - (omega + kappa^2/2) Lambda``.
    ``precision_limited`` is set when either residual is smaller than the
    arithmetic noise that ``b^4`` amplification puts on it.
    """

    log_n: float
    x: float
    b_n: float
    h_residual: float
    full_residual: float
    limit: float
    noise: float
    precision_limited: bool


def _log_neg_log1m(log_s: float) -> float:
    """``log(-log(1 - S))`` from ``log S``."""
    s = math.exp(log_s)
    if s < _SERIES_CUTOFF:
        # -log(1 - S) = S (1 + S/2 + S^2/3 + ...)
        return log_s + math.log1p(s * (0.5 + s / 3.0))
    return math.log(-math.log1p(-s))


def evaluate_point(log_n, x, pair: NormingPair, shape, tol: float = DEFAULT_TOL) -> PointEvaluation:
    log_n = float(log_n)
    x = float(x)
    shape = as_shape(shape)
    if not math.isclose(log_n, pair.log_n, rel_tol=1e-12, abs_tol=1e-12):
        raise UsageError(f"log n = {log_n} does not match the norming pair's {pair.log_n}")
    u = pair.point(x)
    if not u > 0.0:
        raise DomainError(
            f"normalised point u_n = {u:g} <= 0 is outside the tail regime; raise the n-grid floor"
        )
    log_s = sn_core.log_survival(u, shape)
    log_tau = log_n + log_s
    n_log_f = -math.exp(log_n + _log_neg_log1m(log_s))
    e = math.exp(-x)
    h = n_log_f + e
    delta = expansion.gumbel(x) * math.expm1(h)
    rel = sn_core.survival_rel_error(u, shape) + tol + 4.0 * _EPS * (abs(log_n) + abs(log_s) + 1.0)
    noise = math.exp(log_tau) * rel + 4.0 * _EPS * e
    return PointEvaluation(log_n, x, u, log_tau, h, delta, noise)


def delta_n(log_n, x, pair: NormingPair, shape, predicted: float = math.nan) -> RateRecord:
    """``F^n(scale x + location) - Lambda(x)`` as a :class:`RateRecord`.

    ``ratio`` is ``delta_n / predicted`` when a prediction is supplied.
    """
    ev = evaluate_point(log_n, x, pair, shape)
    ratio = ev.delta / predicted if predicted == predicted and predicted != 0.0 else math.nan
    return RateRecord(
        method=pair.method.value,
        lam=as_shape(shape).lam,
        log_n=ev.log_n,
        x=ev.x,
        u_n=ev.u_n,
        tau_n=ev.tau,
        delta_n=ev.delta,
        predicted=predicted,
        ratio=ratio,
    )


def h_lambda(log_n, x, shape, tol: float = DEFAULT_TOL) -> float:
    """``n log F(a_n x + b_n) + e^-x`` under the quantile norming."""
    shape = as_shape(shape).require_nonzero("h_lambda")
    pair = norming.quantile_norming(log_n, shape, tol)
    return evaluate_point(log_n, x, pair, shape, tol).h


def first_order_residual(log_n, x, shape, tol: float = DEFAULT_TOL) -> float:
    """``b_n^2 h - kappa(x)``."""
    shape = as_shape(shape).require_nonzero("first_order_residual")
    pair = norming.quantile_norming(log_n, shape, tol)
    ev = evaluate_point(log_n, x, pair, shape, tol)
    b2 = pair.location**2
    return b2 * ev.h - expansion.kappa(x, shape)


def second_order_residual(log_n, x, shape, tol: float = DEFAULT_TOL) -> SecondOrderResult:
    shape = as_shape(shape).require_nonzero("second_order_residual")
    pair = norming.quantile_norming(log_n, shape, tol)
    ev = evaluate_point(log_n, x, pair, shape, tol)
    b2 = pair.location**2
    kap = expansion.kappa(x, shape)
    om = expansion.omega(x, shape)
    lam_x = expansion.gumbel(x)
    limit = (om + 0.5 * kap * kap) * lam_x
    h_res = b2 * (b2 * ev.h - kap) - om
    full_res = b2 * (b2 * ev.delta - kap * lam_x) - limit
    noise = b2 * b2 * ev.noise_h
    limited = abs(full_res) < noise or abs(h_res) < noise
    return SecondOrderResult(
        log_n=ev.log_n,
        x=ev.x,
        b_n=pair.location,
        h_residual=h_res,
        full_residual=full_res,
        limit=limit,
        noise=noise,
        precision_limited=limited,
    )


def rate_ratio_scan(
    shape,
    n_grid: Sequence[float],
    x_grid: Sequence[float],
    order="leading",
    method="closed_form",
    tol: float = DEFAULT_TOL,
) -> list[RateRecord]:
    """One :class:`RateRecord` per ``(log n, x)``, n-major then x.

    ``n_grid`` holds ``log n`` values.

    * ``leading`` (closed-form pair): ``predicted`` is the leading rate and
      ``ratio = delta_n / predicted``.
    * ``first`` (quantile pair): ``predicted = kappa Lambda / b_n^2`` and
      ``ratio = b_n^2 h / kappa``.
    * ``second`` (quantile pair): ``predicted = kappa Lambda / b_n^2 +
      (omega + kappa^2/2) Lambda / b_n^4`` and
      ``ratio = b_n^2 (b_n^2 delta_n - kappa Lambda) / ((omega + kappa^2/2) Lambda)``.

    Ratios whose denominator vanishes (e.g. ``kappa(0) = 0``) are NaN.
    """
    shape = as_shape(shape).require_nonzero("rate_ratio_scan")
    try:
        order = Order(order)
        method = Method(method)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if _VALID_COMBOS[order] is not method:
        raise UsageError(
            f"order {order.value!r} requires method {_VALID_COMBOS[order].value!r}, got {method.value!r}"
        )
    n_grid = [float(v) for v in n_grid]
    x_grid = [float(v) for v in x_grid]
    if not n_grid or not x_grid:
        raise UsageError("n-grid and x-grid must both be non-empty")

    records = []
    for log_n in n_grid:
        pair = norming.norming(log_n, shape, method, tol)
        b2 = pair.location**2
        for x in x_grid:
            ev = evaluate_point(log_n, x, pair, shape, tol)
            if order is Order.LEADING:
                predicted = expansion.leading_rate(log_n, x, shape)
                num, den = ev.delta, predicted
            else:
                kap = expansion.kappa(x, shape)
                lam_x = expansion.gumbel(x)
                first = kap * lam_x / b2
                if order is Order.FIRST:
                    predicted = first
                    num, den = b2 * ev.h, kap
                else:
                    second = (expansion.omega(x, shape) + 0.5 * kap * kap) * lam_x
                    predicted = first + second / (b2 * b2)
                    num, den = b2 * (b2 * ev.delta - kap * lam_x), second
            ratio = num / den if den != 0.0 else math.nan
            records.append(
                RateRecord(
                    method=method.value,
                    lam=shape.lam,
                    log_n=log_n,
                    x=x,
                    u_n=ev.u_n,
                    tau_n=ev.tau,
                    delta_n=ev.delta,
                    predicted=predicted,
                    ratio=ratio,
                )
            )
    return records


# -- Monte Carlo -------------------------------------------------------------


@dataclass(eq=False)
class SimulationSummary:
    """Empirical law of ``(M_n - location)/scale`` against its references.

    ``sup_dist_exact`` compares the ECDF with the exact ``F^n`` of the
    affine point, ``sup_dist_gumbel`` with ``Lambda``, and
    ``sup_gap_analytic`` is ``sup_z |F^n(scale z + location) - Lambda(z)|``
    on a fine grid.
    """

    lam: float
    n: int
    reps: int
    seed: int
    method: str
    scale: float
    location: float
    normalized_points: np.ndarray = field(repr=False)
    sup_dist_exact: float
    sup_dist_gumbel: float
    sup_gap_analytic: float

    def summary_row(self) -> dict:
        return {
            "method": self.method,
            "lambda": self.lam,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "scale": self.scale,
            "location": self.location,
            "sup_dist_exact": self.sup_dist_exact,
            "sup_dist_gumbel": self.sup_dist_gumbel,
            "sup_gap_analytic": self.sup_gap_analytic,
        }


def exact_max_cdf(z, n: int, pair: NormingPair, shape) -> np.ndarray:
    """``F^n(scale z + location)`` for an array of ``z`` (Owen's T route)."""
    u = pair.scale * np.asarray(z, dtype=float) + pair.location
    s = sn_core.survival_vec(u, shape)
    with np.errstate(divide="ignore"):
        return np.exp(n * np.log1p(-s))


def _gumbel_vec(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(-np.exp(-z))


def _ecdf_sup_distance(sorted_z: np.ndarray, cdf_values: np.ndarray) -> float:
    m = sorted_z.size
    upper = np.arange(1, m + 1) / m - cdf_values
    lower = cdf_values - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def _block_maxima(lam: float, n: int, reps: int, seed: int, index: int) -> np.ndarray:
    rng = sn_core.substream(seed, index)
    return sn_core._draw(rng, lam, (reps, n)).max(axis=1)


def monte_carlo_maxima(
    shape,
    n: int,
    reps: int,
    seed: int,
    pair: NormingPair | None = None,
    *,
    workers: int = 1,
    block_draws: int = 2_000_000,
) -> SimulationSummary:
    """Simulate ``reps`` maxima of ``n`` SN(lam) draws and compare their law.

    Replications are split into blocks of ``max(1, block_draws // n)``;
    block ``j`` draws from ``sn_core.substream(seed, j + 1)``. The result
    depends only on ``(shape, n, reps, seed, pair, block_draws)``, never on
    ``workers``. ``pair`` defaults to the closed-form norming for ``log n``.
    """
    shape = as_shape(shape).require_nonzero("monte_carlo_maxima")
    if int(n) != n or n < 2:
        raise UsageError(f"n must be an integer >= 2, got {n!r}")
    if int(reps) != reps or reps < 100:
        raise UsageError(f"reps must be an integer >= 100, got {reps!r}")
    n, reps, seed = int(n), int(reps), int(seed)
    if n * reps > MC_BUDGET:
        raise UsageError(
            f"n * reps = {n * reps:.3g} exceeds the simulation budget {MC_BUDGET:.0e}; "
            "use the analytic diagnostics (rates) instead"
        )
    if pair is None:
        pair = norming.closed_form_norming(math.log(n), shape)
    elif not math.isclose(pair.log_n, math.log(n), rel_tol=1e-12):
        raise UsageError("norming pair was built for a different n")

    per_block = max(1, block_draws // n)
    sizes = [min(per_block, reps - start) for start in range(0, reps, per_block)]
    jobs = [(shape.lam, n, size, seed, j + 1) for j, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda args: _block_maxima(*args), jobs))
    else:
        blocks = [_block_maxima(*args) for args in jobs]
    maxima = np.concatenate(blocks)

    z = np.sort((maxima - pair.location) / pair.scale)
    exact = exact_max_cdf(z, n, pair, shape)
    grid = np.linspace(-4.0, 12.0, 4001)
    gap = np.abs(exact_max_cdf(grid, n, pair, shape) - _gumbel_vec(grid)).max()
    return SimulationSummary(
        lam=shape.lam,
        n=n,
        reps=reps,
        seed=seed,
        method=pair.method.value,
        scale=pair.scale,
        location=pair.location,
        normalized_points=z,
        sup_dist_exact=_ecdf_sup_distance(z, exact),
        sup_dist_gumbel=_ecdf_sup_distance(z, _gumbel_vec(z)),
        sup_gap_analytic=float(gap),
    )


# -- export ------------------------------------------------------------------

RATE_COLUMNS = ("method", "lambda", "log_n", "x", "u_n", "tau_n", "delta_n", "predicted", "ratio")
SUMMARY_COLUMNS = (
    "method",
    "lambda",
    "n",
    "reps",
    "seed",
    "scale",
    "location",
    "sup_dist_exact",
    "sup_dist_gumbel",
    "sup_gap_analytic",
)

_NUMBER_OR_NULL = {"type": ["number", "null"]}
RATE_TABLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": list(RATE_COLUMNS),
        "properties": {
            "method": {"type": "string", "enum": [m.value for m in Method]},
            **{c: _NUMBER_OR_NULL for c in RATE_COLUMNS[1:]},
        },
    },
}


def format_number(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.15g}"


def _json_number(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    v = float(value)
    if not math.isfinite(v):
        return None
    return float(f"{v:.15g}")


def _rate_row(rec: RateRecord) -> dict:
    return {
        "method": rec.method,
        "lambda": rec.lam,
        "log_n": rec.log_n,
        "x": rec.x,
        "u_n": rec.u_n,
        "tau_n": rec.tau_n,
        "delta_n": rec.delta_n,
        "predicted": rec.predicted,
        "ratio": rec.ratio,
    }


def render_table(records: list, fmt: str) -> str:
    if all(isinstance(r, RateRecord) for r in records):
        rows, columns = [_rate_row(r) for r in records], RATE_COLUMNS
        extra = None
    elif all(isinstance(r, SimulationSummary) for r in records):
        rows, columns = [r.summary_row() for r in records], SUMMARY_COLUMNS
        extra = [r.normalized_points for r in records]
    else:
        raise UsageError("records must be all RateRecord or all SimulationSummary")

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(row[c]) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        out = []
        for i, row in enumerate(rows):
            obj = {c: _json_number(row[c]) for c in columns}
            if extra is not None:
                obj["normalized_points"] = [_json_number(v) for v in extra[i]]
            out.append(obj)
        return json.dumps(out, indent=1, allow_nan=False) + "\n"
    raise UsageError(f"unknown format {fmt!r}; expected csv or json")


def export_table(records, fmt: str = "csv", destination="-") -> int:
    """Write records as CSV or JSON; return the number of characters written.

    ``destination`` is a path, ``"-"`` for stdout, or any object with a
    ``write`` method. The text is rendered in full before anything is
    written, and files are written through a temporary file that is renamed
    into place, so a failure never leaves a partial file behind.

    CSV: header row, the columns of ``RATE_COLUMNS`` (or ``SUMMARY_COLUMNS``
    for simulation summaries), numbers with 15 significant digits, ``\\n``
    line endings. JSON: an array of objects with the same keys; non-finite
    numbers become ``null``; simulation summaries also carry
    ``normalized_points``.
    """
    if isinstance(records, (RateRecord, SimulationSummary)):
        records = [records]
    records = list(records)
    if not records:
        raise UsageError("nothing to export: records is empty")
    text = render_table(records, fmt)

    return write_text(text, destination)


def write_text(text: str, destination="-") -> int:
    """Write ``text`` to a path, ``"-"`` (stdout) or a writable stream.

    Files go through a temporary sibling that is renamed into place.
    """
    if destination == "-" or destination is None:
        destination = sys.stdout
    if hasattr(destination, "write"):
        try:
            destination.write(text)
            if hasattr(destination, "flush"):
                destination.flush()
        except OSError as exc:
            raise ExportError(f"write to stream failed: {exc} (output may be partial)") from exc
        return len(text)

    path = os.fspath(destination)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".snx-", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise ExportError(f"could not write {path!r}: {exc} (no partial file left)") from exc
    finally:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
    return len(text)


def parse_rate_table(text: str, fmt: str = "csv") -> list[RateRecord]:
    """Inverse of :func:`export_table` for rate records."""

    def num(v):
        return math.nan if v is None or v == "" else float(v)

    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != RATE_COLUMNS:
            raise UsageError(f"unexpected CSV header {reader.fieldnames}")
        rows: Iterable[dict] = list(reader)
    elif fmt == "json":
        rows = json.loads(text)
    else:
        raise UsageError(f"unknown format {fmt!r}")
    return [
        RateRecord(
            method=row["method"],
            lam=num(row["lambda"]),
            log_n=num(row["log_n"]),
            x=num(row["x"]),
            u_n=num(row["u_n"]),
            tau_n=num(row["tau_n"]),
            delta_n=num(row["delta_n"]),
            predicted=num(row["predicted"]),
            ratio=num(row["ratio"]),
        )
        for row in rows
    ]
