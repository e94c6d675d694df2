"""Mills inequalities and ratios, the von Mises-type tail representation,
and the far-tail expansion of the skew-normal survival function."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from scipy import special

from . import sn_core
from .errors import DomainError
from .sn_core import as_shape

__all__ = [
    "BoundStatus",
    "MillsBounds",
    "TailModel",
    "mills_bounds_normal",
    "mills_bounds_sn",
    "mills_ratio_sn",
    "tail_model",
    "representation_residual",
    "tail_expansion_log_survival",
]


class BoundStatus(enum.Enum):
    OK = "ok"
    LOWER_VACUOUS = "lower_vacuous"
    UPPER_VACUOUS = "upper_vacuous"


@dataclass(frozen=True)
class MillsBounds:
    """Bounds on, and the value of, the Mills ratio ``S(x)/f(x)``.

    A bound whose defining factor is not positive carries no information at
    that ``x``. It is then reported through ``status`` instead of being
    clamped: a vacuous lower bound keeps its (non-positive) value, a vacuous
    upper bound is ``inf``.
    """

    x: float
    lower: float
    upper: float
    ratio: float
    status: BoundStatus = BoundStatus.OK

    @property
    def informative(self) -> bool:
        return self.status is BoundStatus.OK

    def contains(self) -> bool:
        return self.lower < self.ratio < self.upper


def _positive_x(x) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"the Mills bounds hold for finite x > 0 only, got {x!r}")
    return x


def mills_bounds_normal(x) -> MillsBounds:
    """``x/(1+x^2) < (1-Phi(x))/phi(x) < 1/x`` for the standard normal."""
    x = _positive_x(x)
    ratio = math.sqrt(math.pi / 2.0) * float(special.erfcx(x / math.sqrt(2.0)))
    return MillsBounds(x=x, lower=1.0 / (x * (1.0 + 1.0 / (x * x))), upper=1.0 / x, ratio=ratio)


def mills_ratio_sn(x, shape, *, baseline: bool = False) -> float:
    """``S(x)/f(x)`` from the cancellation-safe log survival.

    With ``baseline=True``, lam = 0 is accepted and gives the normal Mills
    ratio.
    """
    shape = as_shape(shape)
    if shape.lam == 0.0 and not baseline:
        shape.require_nonzero("mills_ratio_sn")
    return math.exp(sn_core.log_survival(x, shape) - sn_core.log_pdf(x, shape))


def mills_bounds_sn(x, shape) -> MillsBounds:
    """Branch-correct Mills bounds for SN(lam), lam != 0, x > 0.

    lam > 0::

        x^-1 (1 + x^-2)^-1  <  S/f  <  x^-1 (1 - phi(lam x)/(lam x))^-1

    lam < 0::

        x^-1 (1 + x^-2)^-1 (1 - l (1 + 1/(lam^2 x^2)))
            <  S/f  <  x^-1 (1 - l (1 + 1/((1+lam^2) x^2))^-1)

    with ``l = lam^2/(1+lam^2)``.
    """
    x = _positive_x(x)
    shape = as_shape(shape).require_nonzero("mills_bounds_sn")
    lam = shape.lam
    ratio = mills_ratio_sn(x, shape)
    normal_lower = 1.0 / (x * (1.0 + 1.0 / (x * x)))
    status = BoundStatus.OK
    if lam > 0.0:
        lower = normal_lower
        factor = 1.0 - math.exp(sn_core._log_phi(lam * x)) / (lam * x)
        if factor > 0.0:
            upper = 1.0 / (x * factor)
        else:
            upper = math.inf
            status = BoundStatus.UPPER_VACUOUS
    else:
        ell = lam * lam / shape.k
        lower_factor = 1.0 - ell * (1.0 + 1.0 / (lam * lam * x * x))
        lower = normal_lower * lower_factor
        if lower_factor <= 0.0:
            status = BoundStatus.LOWER_VACUOUS
        upper = (1.0 - ell / (1.0 + 1.0 / (shape.k * x * x))) / x
    return MillsBounds(x=x, lower=lower, upper=upper, ratio=ratio, status=status)


@dataclass(frozen=True)
class TailModel:
    """``S(x) = c(x) exp(-int_1^x g(t)/f(t) dt)`` for large ``x``.

    ``c(x)`` itself is only pinned down through its limit ``c_limit``.
    """

    c_limit: float
    f: Callable[[float], float]
    g: Callable[[float], float]
    branch: int
    k: float

    def integral(self, x: float) -> float:
        """``int_1^x g/f`` in closed form."""
        x = float(x)
        if x <= 0.0:
            raise DomainError("the tail representation needs x > 0")
        if self.branch > 0:
            return 0.5 * (x * x - 1.0) + math.log(x)
        return 0.5 * self.k * (x * x - 1.0) + 2.0 * math.log(x)

    def log_tail(self, x: float) -> float:
        """``log c_limit - int_1^x g/f``: the representation with c frozen at its limit."""
        return math.log(self.c_limit) - self.integral(x)


def tail_model(shape) -> TailModel:
    shape = as_shape(shape).require_nonzero("tail_model")
    lam, k = shape.lam, shape.k
    if lam > 0.0:
        return TailModel(
            c_limit=math.sqrt(2.0 / (math.pi * math.e)),
            f=lambda x: 1.0 / x,
            g=lambda x: 1.0 + 1.0 / (x * x),
            branch=1,
            k=k,
        )
    return TailModel(
        c_limit=math.exp(-0.5 * k) / (-lam * k * math.pi),
        f=lambda x: 1.0 / (k * x),
        g=lambda x: 1.0 + 2.0 / (k * x * x),
        branch=-1,
        k=k,
    )


def representation_residual(x, shape) -> float:
    """``log S(x) - (log c_limit - int_1^x g/f)``; tends to 0 as x grows."""
    return sn_core.log_survival(x, shape) - tail_model(shape).log_tail(x)


def tail_expansion_log_survival(x, shape, *, enforce_crossover: bool = True) -> float:
    """Log of the three-term far-tail expansion of ``S(x)``.

    lam > 0: ``2 phi(x) Phi(lam x) x^-1 [1 - x^-2 + 3 x^-4]``

    lam < 0: ``exp(-(1+lam^2) x^2/2) / ((-lam) pi (1+lam^2) x^2)
    [1 - c1 x^-2 + c2 x^-4]`` with
    ``c1 = (1+3 lam^2)/(lam^2 (1+lam^2))`` and
    ``c2 = (15 lam^4 + 10 lam^2 + 3)/(lam^4 (1+lam^2)^2)``.

    Below :func:`sn_core.crossover` the dropped ``O(x^-6)`` terms exceed the
    module's accuracy budget and this raises, unless ``enforce_crossover``
    is False (useful for studying the expansion error itself).
    """
    x = sn_core._check_x(x)
    shape = as_shape(shape).require_nonzero("tail_expansion_log_survival")
    if x <= 0.0:
        raise DomainError("the tail expansion needs x > 0")
    if enforce_crossover and x < sn_core.crossover(shape):
        raise DomainError(
            f"x = {x} is below the crossover {sn_core.crossover(shape):g} for lam = "
            f"{shape.lam}; use sn_core.log_survival (quadrature) there"
        )
    return sn_core._log_tail_expansion(x, shape.lam)
