"""Gumbel limit and the analytic rate terms for SN(lam) maxima.

``kappa`` and ``omega`` are the first- and second-order coefficients of the
expansion of ``F^n(a_n x + b_n)`` under the quantile norming; their lam > 0
forms coincide with the classical normal-sample coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, ExpansionOverflowError
from .sn_core import as_shape

__all__ = [
    "ExpansionTerms",
    "gumbel",
    "kappa",
    "omega",
    "second_order_limit",
    "second_order_limit_derivative",
    "leading_rate",
    "leading_constant",
    "nair_baseline_terms",
    "expansion_terms",
]

_X_MIN = -700.0


def _horner(coeffs: Sequence[float], x: float) -> float:
    """Evaluate ``coeffs[0] x^d + ... + coeffs[d]``."""
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _exp_neg(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    if x < _X_MIN:
        raise ExpansionOverflowError(f"exp(-x) overflows at x = {x:g} (x must be >= {_X_MIN:g})")
    return math.exp(-x)


def gumbel(x) -> float:
    """``exp(-exp(-x))``."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x!r}")
    if x < _X_MIN:
        return 0.0
    return math.exp(-math.exp(-x))


def _checked(value: float, what: str, x: float) -> float:
    if not math.isfinite(value):
        raise ExpansionOverflowError(f"{what}({x:g}) overflows a double")
    return value


# polynomial coefficients, highest degree first
def _kappa_poly(lam: float) -> tuple[Sequence[float], float]:
    if lam > 0.0:
        return (1.0, 2.0, 0.0), 0.5
    return (1.0, 4.0, 0.0), 0.5 / (1.0 + lam * lam)


def _omega_poly(lam: float) -> tuple[Sequence[float], float]:
    if lam > 0.0:
        return (1.0, 4.0, 8.0, 16.0, 0.0), -0.125
    l2 = lam * lam
    k = 1.0 + l2
    return (l2, 8.0 * l2, 24.0 * l2, 16.0 * (1.0 + 3.0 * l2), 0.0), -0.125 / (l2 * k * k)


def kappa(x, shape) -> float:
    """First-order coefficient.

    lam > 0: ``(x^2 + 2x) e^-x / 2``;
    lam < 0: ``(x^2 + 4x) e^-x / (2 (1 + lam^2))``.
    """
    lam = as_shape(shape).require_nonzero("kappa").lam
    poly, scale = _kappa_poly(lam)
    return _checked(scale * _horner(poly, float(x)) * _exp_neg(x), "kappa", x)


def omega(x, shape) -> float:
    """Second-order coefficient.

    lam > 0: ``-(x^4 + 4x^3 + 8x^2 + 16x) e^-x / 8``;
    lam < 0: ``-(lam^2 x^4 + 8 lam^2 x^3 + 24 lam^2 x^2 + 16 (1 + 3 lam^2) x) e^-x
    / (8 lam^2 (1 + lam^2)^2)``.
    """
    lam = as_shape(shape).require_nonzero("omega").lam
    poly, scale = _omega_poly(lam)
    return _checked(scale * _horner(poly, float(x)) * _exp_neg(x), "omega", x)


def second_order_limit(x, shape) -> float:
    """``(omega(x) + kappa(x)^2 / 2) Lambda(x)``.

    Exactly 0 once ``Lambda(x)`` underflows (x below about -6.6), where the
    polynomial factors may themselves overflow.
    """
    if gumbel(x) == 0.0:
        as_shape(shape).require_nonzero("second_order_limit")
        return 0.0
    k = kappa(x, shape)
    return _checked((omega(x, shape) + 0.5 * k * k) * gumbel(x), "second_order_limit", x)


def _poly_derivative(poly: Sequence[float]) -> list[float]:
    d = len(poly) - 1
    return [c * (d - i) for i, c in enumerate(poly[:-1])]


def second_order_limit_derivative(x, shape) -> float:
    """Analytic ``d/dx`` of :func:`second_order_limit` (product and chain rule)."""
    lam = as_shape(shape).require_nonzero("second_order_limit_derivative").lam
    x = float(x)
    g = gumbel(x)
    if g == 0.0:
        return 0.0
    e = _exp_neg(x)
    kp, ks = _kappa_poly(lam)
    op, os_ = _omega_poly(lam)
    k = ks * _horner(kp, x) * e
    dk = ks * (_horner(_poly_derivative(kp), x) - _horner(kp, x)) * e
    dw = os_ * (_horner(_poly_derivative(op), x) - _horner(op, x)) * e
    w = os_ * _horner(op, x) * e
    dg = g * e
    return (dw + k * dk) * g + (w + 0.5 * k * k) * dg


def leading_constant(shape) -> float:
    """1/16 for lam > 0, 1/4 for lam < 0."""
    lam = as_shape(shape).require_nonzero("leading_rate").lam
    return 1.0 / 16.0 if lam > 0.0 else 0.25


def leading_rate(log_n, x, shape) -> float:
    """``C Lambda(x) e^-x (log log n)^2 / log n`` under the closed-form norming."""
    log_n = float(log_n)
    if not (math.isfinite(log_n) and log_n > 1.0):
        raise DomainError(f"log n must be > 1, got {log_n!r}")
    loglog = math.log(log_n)
    return leading_constant(shape) * gumbel(x) * _exp_neg(x) * loglog * loglog / log_n


@dataclass(frozen=True)
class ExpansionTerms:
    x: float
    kappa: float
    omega: float
    second_order_limit: float
    branch: int  # sign of lam; 0 for the normal baseline


def nair_baseline_terms(x) -> ExpansionTerms:
    """Normal-sample (lam = 0) coefficients under ``1 - Phi(b) = 1/n``, ``a = 1/b``."""
    x = float(x)
    e = _exp_neg(x)
    k = 0.5 * _horner((1.0, 2.0, 0.0), x) * e
    w = -0.125 * _horner((1.0, 4.0, 8.0, 16.0, 0.0), x) * e
    return ExpansionTerms(x, k, w, (w + 0.5 * k * k) * gumbel(x), 0)


def expansion_terms(x, shape) -> ExpansionTerms:
    shape = as_shape(shape)
    if shape.lam == 0.0:
        return nair_baseline_terms(x)
    return ExpansionTerms(
        float(x), kappa(x, shape), omega(x, shape), second_order_limit(x, shape), shape.sign
    )
