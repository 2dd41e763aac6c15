"""
Adaptive quadrature on semi-infinite and finite intervals.

Semi-infinite integrals are mapped to [0, 1) with t = u/(1-u) and handed to
QUADPACK's adaptive subdivision. Integrands are supplied in log form so the
Jacobian and large/small factors combine without overflow.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from scipy import integrate

from ..config import Config
from ..errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# QUADPACK roundoff warning; the result is usually still good to the tolerance
_ROUNDOFF_MARK = "roundoff"
_ROUNDOFF_SLACK = 1e4


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and subdivision budget for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise DomainError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")

    @classmethod
    def default(cls) -> 'QuadratureConfig':
        return cls(
            rel_tol=Config.QUAD_REL_TOL,
            abs_tol=Config.QUAD_ABS_TOL,
            max_subdivisions=Config.QUAD_MAX_SUBDIVISIONS,
        )

    def refined(self, factor: int = 4) -> 'QuadratureConfig':
        """Same tolerances with a larger subdivision budget."""
        return QuadratureConfig(self.rel_tol, self.abs_tol, self.max_subdivisions * factor)

    def loosened(self, floor: float) -> 'QuadratureConfig':
        """Relative tolerance no tighter than ``floor``."""
        return QuadratureConfig(max(self.rel_tol, floor), self.abs_tol, self.max_subdivisions)


def _checked(value: float, abserr: float, extra: tuple, config: QuadratureConfig, label: str) -> Tuple[float, float]:
    target = max(config.abs_tol, config.rel_tol * abs(value))
    if len(extra) > 1:
        message = str(extra[1])
        if _ROUNDOFF_MARK in message and abserr <= _ROUNDOFF_SLACK * max(target, 1e-300):
            logger.debug("Quadrature %s: roundoff reported, accepted (abserr=%.3g)", label, abserr)
        elif abserr <= target:
            logger.debug("Quadrature %s: warning raised but error estimate within tolerance", label)
        else:
            raise ConvergenceError(
                f"Quadrature for {label} did not converge: {message} "
                f"(value={value:.6g}, abserr={abserr:.3g})"
            )
    if not math.isfinite(value):
        raise ConvergenceError(f"Quadrature for {label} produced a non-finite value")
    return value, abserr


def integrate_semi_infinite(
    log_integrand: Callable[[float], float],
    config: Optional[QuadratureConfig] = None,
    lower: float = 0.0,
    label: str = "integral",
) -> Tuple[float, float]:
    """
    Integrate exp(log_integrand(t)) over [lower, inf).

    Args:
        log_integrand: Log of the integrand; may return -inf
        config: Tolerances (defaults from Config)
        lower: Lower limit of integration
        label: Name used in log messages and errors

    Returns:
        (value, absolute error estimate)
    """
    config = config or QuadratureConfig.default()

    def mapped(u: float) -> float:
        if u >= 1.0:
            return 0.0
        one_minus = 1.0 - u
        t = lower + u / one_minus
        log_value = log_integrand(t) - 2.0 * math.log(one_minus)
        if log_value == -math.inf:
            return 0.0
        return math.exp(log_value)

    result = integrate.quad(
        mapped, 0.0, 1.0,
        epsabs=config.abs_tol, epsrel=config.rel_tol,
        limit=config.max_subdivisions, full_output=1,
    )
    value, abserr = result[0], result[1]
    return _checked(value, abserr, tuple(result[2:]), config, label)


def integrate_interval(
    integrand: Callable[[float], float],
    a: float,
    b: float,
    config: Optional[QuadratureConfig] = None,
    label: str = "integral",
) -> Tuple[float, float]:
    """Integrate a plain integrand over the finite interval [a, b]."""
    config = config or QuadratureConfig.default()
    result = integrate.quad(
        integrand, a, b,
        epsabs=config.abs_tol, epsrel=config.rel_tol,
        limit=config.max_subdivisions, full_output=1,
    )
    return _checked(result[0], result[1], tuple(result[2:]), config, label)


def power_substituted(log_rest: Callable[[float], float], exponent: float) -> Tuple[Callable[[float], float], float]:
    """
    Remove an integrable x**exponent singularity at the origin.

    With x = v**(1/(exponent+1)), x**exponent dx = dv/(exponent+1), so
    the integral of x**exponent * rest(x) becomes an integral of rest(x(v))
    in v, times the returned constant factor.
    """
    if exponent <= -1.0:
        raise DomainError(f"x**{exponent} is not integrable at 0")
    power = 1.0 / (exponent + 1.0)

    def log_mapped(v: float) -> float:
        if v <= 0.0:
            return log_rest(0.0)
        try:
            x = v ** power
        except OverflowError:
            return -math.inf
        return log_rest(x)

    return log_mapped, power


def integrate_half_line(
    integrand: Callable[[float], float],
    config: Optional[QuadratureConfig] = None,
    label: str = "integral",
) -> Tuple[float, float]:
    """Integrate a plain (possibly sign-changing) integrand over [0, inf) via t = u/(1-u)."""

    def mapped(u: float) -> float:
        if u >= 1.0:
            return 0.0
        one_minus = 1.0 - u
        value = integrand(u / one_minus)
        return 0.0 if value == 0.0 else value / (one_minus * one_minus)

    return integrate_interval(mapped, 0.0, 1.0, config, label)
