"""Norming constants for maxima of SN(lam) samples, plus the lam = 0 baselines.

Sample sizes are carried as ``log n`` throughout: the diagnostics go to
n = 10**100 and beyond, where only ``log n`` is representable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from . import sn_core
from .errors import DomainError, SolverError
from .sn_core import as_shape

__all__ = [
    "Method",
    "NormingPair",
    "DEFAULT_TOL",
    "closed_form_norming",
    "solve_quantile_bn",
    "an_from_bn",
    "quantile_norming",
    "baseline_norming_lambda0",
    "norming",
]

DEFAULT_TOL = 1e-12
_BISECT_WIDTH = 1e-13
_NEWTON_STEPS = 2
_LOG_PI = math.log(math.pi)
_LOG_2PI = math.log(2.0 * math.pi)
_LOG_4PI = math.log(4.0 * math.pi)


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUANTILE = "quantile"
    LEADBETTER0 = "leadbetter0"
    HALL0 = "hall0"
    NAIR0 = "nair0"


@dataclass(frozen=True)
class NormingPair:
    """Affine normalisation ``M_n -> (M_n - location)/scale`` for sample size n."""

    log_n: float
    scale: float
    location: float
    method: Method

    def __post_init__(self):
        if not self.scale > 0.0:
            raise DomainError(f"norming scale must be positive, got {self.scale}")

    def point(self, x: float) -> float:
        """``scale * x + location``."""
        return self.scale * x + self.location


def _check_log_n(log_n, floor: float) -> float:
    log_n = float(log_n)
    if not (math.isfinite(log_n) and log_n > floor):
        raise DomainError(f"log n must be finite and > {floor:g}, got {log_n!r}")
    return log_n


def closed_form_norming(log_n, shape) -> NormingPair:
    """Explicit ``(alpha_n, beta_n)``.

    lam > 0::

        alpha = (2 log n)^-1/2
        beta  = (2 log n)^1/2 - (log log n + log pi) / (2 (2 log n)^1/2)

    lam < 0::

        alpha = (1+lam^2)^-1/2 (2 log n)^-1/2
        beta  = (2 log n/(1+lam^2))^1/2
                - (log log n + log(-2 pi lam)) / ((1+lam^2)^1/2 (2 log n)^1/2)
    """
    log_n = _check_log_n(log_n, 1.0)
    shape = as_shape(shape).require_nonzero("closed_form_norming")
    root = math.sqrt(2.0 * log_n)
    loglog = math.log(log_n)
    if shape.lam > 0.0:
        return NormingPair(
            log_n=log_n,
            scale=1.0 / root,
            location=root - (loglog + _LOG_PI) / (2.0 * root),
            method=Method.CLOSED_FORM,
        )
    sk = math.sqrt(shape.k)
    return NormingPair(
        log_n=log_n,
        scale=1.0 / (sk * root),
        location=root / sk - (loglog + math.log(-2.0 * math.pi * shape.lam)) / (sk * root),
        method=Method.CLOSED_FORM,
    )


def _solve_decreasing(
    residual: Callable[[float], float],
    derivative: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    what: str,
) -> float:
    """Root of a strictly decreasing ``residual`` on ``[lo, hi]``.

    Bisection to width 1e-13, then at most two Newton steps, each kept only
    if it stays in the bracket and does not increase ``|residual|``.
    """
    r_lo, r_hi = residual(lo), residual(hi)
    if not (r_lo >= 0.0 >= r_hi):
        raise SolverError(
            f"{what}: no sign change on [{lo:g}, {hi:g}]",
            lo=lo,
            hi=hi,
            residual_lo=r_lo,
            residual_hi=r_hi,
        )
    a, b = lo, hi
    while b - a > _BISECT_WIDTH:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        r_mid = residual(mid)
        if r_mid == 0.0:
            a = b = mid
            break
        if r_mid > 0.0:
            a = mid
        else:
            b = mid
    x = 0.5 * (a + b)
    r = residual(x)
    for _ in range(_NEWTON_STEPS):
        if r == 0.0:
            break
        d = derivative(x)
        if not (math.isfinite(d) and d < 0.0):
            break
        trial = x - r / d
        if not lo <= trial <= hi:
            break
        r_trial = residual(trial)
        if abs(r_trial) > abs(r):
            break
        x, r = trial, r_trial
    if not abs(r) <= tol:
        raise SolverError(
            f"{what}: residual {r:.3e} above tolerance {tol:.1e}",
            root=x,
            residual=r,
            tol=tol,
        )
    return x


def solve_quantile_bn(log_n, shape, tol: float = DEFAULT_TOL) -> float:
    """``b_n`` with ``1 - F(b_n) = 1/n``, solved in log space.

    The residual ``log S(b) + log n`` is driven below ``tol``; the search
    bracket is ``[0.5, sqrt(2 log n) + 10]``.
    """
    log_n = _check_log_n(log_n, 0.0)
    shape = as_shape(shape).require_nonzero("solve_quantile_bn")
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    return _solve_decreasing(
        lambda b: sn_core.log_survival(b, shape) + log_n,
        lambda b: sn_core.d_log_survival(b, shape),
        0.5,
        math.sqrt(2.0 * log_n) + 10.0,
        tol,
        f"quantile b_n (lam={shape.lam}, log n={log_n})",
    )


def an_from_bn(b_n, shape) -> float:
    """``a_n = f(b_n)``: ``1/b_n`` for lam > 0, ``1/((1+lam^2) b_n)`` for lam < 0."""
    b_n = float(b_n)
    if not b_n > 0.0:
        raise DomainError(f"b_n must be positive, got {b_n}")
    shape = as_shape(shape).require_nonzero("an_from_bn")
    if shape.lam > 0.0:
        return 1.0 / b_n
    return 1.0 / (shape.k * b_n)


def quantile_norming(log_n, shape, tol: float = DEFAULT_TOL) -> NormingPair:
    b_n = solve_quantile_bn(log_n, shape, tol)
    return NormingPair(
        log_n=float(log_n), scale=an_from_bn(b_n, shape), location=b_n, method=Method.QUANTILE
    )


def baseline_norming_lambda0(log_n, variant: str, tol: float = DEFAULT_TOL) -> NormingPair:
    """Classical constants for the standard normal (lam = 0).

    ``leadbetter``: ``alpha = (2 log n)^-1/2``,
    ``beta = 1/alpha - alpha (log log n + log 4 pi)/2``.

    ``hall``: ``2 pi b^2 exp(b^2) = n^2``, ``a = 1/b``.

    ``nair``: ``1 - Phi(b) = 1/n``, ``a = 1/b``.
    """
    log_n = _check_log_n(log_n, 1.0)
    variant = str(variant).lower().removesuffix("0")
    if variant == "leadbetter":
        alpha = 1.0 / math.sqrt(2.0 * log_n)
        beta = 1.0 / alpha - 0.5 * alpha * (math.log(log_n) + _LOG_4PI)
        return NormingPair(log_n, alpha, beta, Method.LEADBETTER0)
    hi = math.sqrt(2.0 * log_n) + 10.0
    if variant == "hall":
        b = _solve_decreasing(
            lambda b: 2.0 * log_n - (_LOG_2PI + 2.0 * math.log(b) + b * b),
            lambda b: -(2.0 / b + 2.0 * b),
            0.5,
            hi,
            tol,
            f"Hall b_n (log n={log_n})",
        )
        return NormingPair(log_n, 1.0 / b, b, Method.HALL0)
    if variant == "nair":
        normal = sn_core.Shape(0.0)
        b = _solve_decreasing(
            lambda b: sn_core.log_survival(b, normal) + log_n,
            lambda b: sn_core.d_log_survival(b, normal),
            0.5,
            hi,
            tol,
            f"Nair b_n (log n={log_n})",
        )
        return NormingPair(log_n, 1.0 / b, b, Method.NAIR0)
    raise DomainError(f"unknown lam = 0 baseline {variant!r}; expected leadbetter, hall or nair")


def norming(log_n, shape, method, tol: float = DEFAULT_TOL) -> NormingPair:
    """Dispatch on :class:`Method` (or its string value)."""
    method = Method(method)
    if method is Method.CLOSED_FORM:
        return closed_form_norming(log_n, shape)
    if method is Method.QUANTILE:
        return quantile_norming(log_n, shape, tol)
    return baseline_norming_lambda0(log_n, method.value, tol)
