"""
Scalar special functions used by the Kotz-Wishart closed forms.

Multivariate gamma, the Whittaker function W (integral representation
only), the G^{30}_{23} Meijer function in the single pattern the
eigenvalue cdf needs, and three integral identities involving W together
with their quadrature self-checks.

All functions are pure; quadrature tolerances come from QuadratureConfig.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from ..errors import DomainError
from .quadrature import QuadratureConfig, integrate_semi_infinite, power_substituted

logger = logging.getLogger(__name__)

__all__ = [
    "WhittakerIndex",
    "QuadratureConfig",
    "multivariate_gamma",
    "log_multivariate_gamma",
    "whittaker_w",
    "log_whittaker_w",
    "whittaker_w_many",
    "mellin_whittaker",
    "mellin_whittaker_quadrature",
    "meijer_g3023",
    "log_meijer_g3023",
    "whittaker_moment",
    "whittaker_moment_quadrature",
]

# Inputs longer than this go through the spline path of whittaker_w_many
_EXACT_BATCH = 64
_SPLINE_NODES = 160
_SPLINE_MAX_NODES = 1300
_SPLINE_CHECK_STRIDE = 4
# Largest accepted spline error in log W at the check points
_SPLINE_TOL = 1e-9
# Outer integral of the Meijer function wraps an inner quadrature
_NESTED_REL_FLOOR = 1e-9


@dataclass(frozen=True)
class WhittakerIndex:
    """The (alpha, beta) index pair of W_{alpha,beta}."""

    alpha: float
    beta: float

    @classmethod
    def for_kotz(cls, q: float, p: int) -> 'WhittakerIndex':
        """Index attached to the Kotz-Wishart density in dimension p."""
        return cls(alpha=(2.0 * q - p) / 4.0, beta=(2.0 * q + p - 2.0) / 4.0)

    @property
    def has_integral_representation(self) -> bool:
        return self.beta - self.alpha > -0.5

    @property
    def is_elementary(self) -> bool:
        """True on the line alpha + beta = 1/2 where W(z) = z^alpha e^{-z/2}."""
        return abs(self.alpha + self.beta - 0.5) < 1e-14

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


# ---------------------------------------------------------------------------
# Multivariate gamma
# ---------------------------------------------------------------------------

def log_multivariate_gamma(p: int, a: float) -> float:
    """log Gamma_p(a), defined for a > (p-1)/2."""
    if int(p) != p or p < 1:
        raise DomainError(f"dimension must be a positive integer, got {p}")
    if not a > (p - 1) / 2.0:
        raise DomainError(f"Gamma_{p}(a) needs a > {(p - 1) / 2.0}, got a={a}")
    return float(special.multigammaln(a, int(p)))


def multivariate_gamma(p: int, a: float) -> float:
    """Gamma_p(a) = pi^{p(p-1)/4} prod_i Gamma(a - (i-1)/2)."""
    return math.exp(log_multivariate_gamma(p, a))


# ---------------------------------------------------------------------------
# Whittaker W
# ---------------------------------------------------------------------------

def _check_index(idx: WhittakerIndex):
    if not idx.has_integral_representation:
        raise DomainError(
            f"W_{{{idx.alpha},{idx.beta}}} needs beta - alpha > -1/2 for its integral representation"
        )


def log_whittaker_w(idx: WhittakerIndex, z: float, config: Optional[QuadratureConfig] = None) -> float:
    """
    log W_{alpha,beta}(z) from the integral representation

        W(z) = z^a e^{-z/2} / Gamma(b-a+1/2) * int_0^inf t^{b-a-1/2} e^{-t} (1+t/z)^{b+a-1/2} dt

    Args:
        idx: Whittaker index (a=alpha, b=beta)
        z: Positive argument
        config: Quadrature tolerances

    Returns:
        log W(z)
    """
    if not z > 0:
        raise DomainError(f"Whittaker argument must be positive, got {z}")
    _check_index(idx)

    t_power = idx.beta - idx.alpha - 0.5
    z_power = idx.beta + idx.alpha - 0.5

    def log_rest(t: float) -> float:
        return -t + z_power * math.log1p(t / z)

    if t_power < 0.0:
        log_integrand, factor = power_substituted(log_rest, t_power)
    else:
        factor = 1.0

        def log_integrand(t: float) -> float:
            return float(special.xlogy(t_power, t)) + log_rest(t)

    value, _ = integrate_semi_infinite(log_integrand, config, label=f"W_{idx.alpha},{idx.beta}({z:.6g})")
    return (
        idx.alpha * math.log(z) - 0.5 * z
        - special.gammaln(t_power + 1.0)
        + math.log(factor * value)
    )


def whittaker_w(idx: WhittakerIndex, z: float, config: Optional[QuadratureConfig] = None) -> float:
    """W_{alpha,beta}(z) for z > 0."""
    return math.exp(log_whittaker_w(idx, z, config))


def _log_w_remainder(idx: WhittakerIndex, z: float, config: Optional[QuadratureConfig]) -> float:
    """log W(z) - alpha log z + z/2, smooth in log z over the whole half line."""
    return log_whittaker_w(idx, z, config) - idx.alpha * math.log(z) + 0.5 * z


def _remainder_spline(idx: WhittakerIndex, low: float, high: float,
                      config: Optional[QuadratureConfig]) -> Optional[CubicSpline]:
    """
    Spline of the remainder against log z, refined until the check points agree.

    Check points are interval midpoints in log z; returns None when the node
    budget runs out before the spline reaches _SPLINE_TOL.
    """
    count = _SPLINE_NODES
    while count <= _SPLINE_MAX_NODES:
        log_nodes = np.linspace(math.log(low), math.log(high), count)
        values = np.array([_log_w_remainder(idx, math.exp(u), config) for u in log_nodes])
        spline = CubicSpline(log_nodes, values)
        centers = 0.5 * (log_nodes[:-1] + log_nodes[1:])
        midpoints = np.append(centers[::_SPLINE_CHECK_STRIDE], centers[-1])
        exact = np.array([_log_w_remainder(idx, math.exp(u), config) for u in midpoints])
        error = float(np.max(np.abs(spline(midpoints) - exact)))
        if error <= _SPLINE_TOL:
            logger.debug("Whittaker spline over [%.4g, %.4g]: %d nodes, check error %.2g",
                         low, high, count, error)
            return spline
        logger.debug("Whittaker spline with %d nodes off by %.2g, refining", count, error)
        count = 2 * count - 1
    return None


def whittaker_w_many(
    idx: WhittakerIndex,
    z: Sequence[float],
    config: Optional[QuadratureConfig] = None,
    log: bool = False,
) -> np.ndarray:
    """
    Vectorized W (or log W) for Monte Carlo integrands.

    Short inputs are evaluated point by point. Longer ones go through a cubic
    spline in log z of log W - alpha log z + z/2, whose accuracy is checked
    against quadrature; when the check fails every distinct point is
    evaluated exactly.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("Whittaker arguments must be positive")
    flat = z.ravel()
    unique = np.unique(flat)

    spline = None
    if unique.size > _EXACT_BATCH:
        spline = _remainder_spline(idx, float(unique[0]), float(unique[-1]), config)
        if spline is None:
            logger.warning("Whittaker spline over [%.4g, %.4g] missed %.1g, evaluating %d points exactly",
                           unique[0], unique[-1], _SPLINE_TOL, unique.size)

    if spline is None:
        table = {value: log_whittaker_w(idx, float(value), config) for value in unique}
        out = np.array([table[value] for value in flat])
    else:
        out = spline(np.log(flat)) + idx.alpha * np.log(flat) - 0.5 * flat

    out = out.reshape(z.shape)
    return out if log else np.exp(out)


# ---------------------------------------------------------------------------
# Integral identities
# ---------------------------------------------------------------------------

def mellin_whittaker(b: float, a: float, nu: float, y: float,
                     config: Optional[QuadratureConfig] = None) -> float:
    """
    Closed form of int_0^inf (b+x)^nu e^{-ax} x^{y-1} dx:

        b^{(y+nu-1)/2} a^{-(y+nu+1)/2} e^{ab/2} Gamma(y) W_{(nu-y+1)/2,(nu+y)/2}(ab)
    """
    if not (b > 0 and a > 0 and y > 0):
        raise DomainError(f"mellin_whittaker needs b, a, y > 0 (got b={b}, a={a}, y={y})")
    idx = WhittakerIndex(alpha=(nu - y + 1.0) / 2.0, beta=(nu + y) / 2.0)
    log_value = (
        0.5 * (y + nu - 1.0) * math.log(b)
        - 0.5 * (y + nu + 1.0) * math.log(a)
        + 0.5 * a * b
        + special.gammaln(y)
        + log_whittaker_w(idx, a * b, config)
    )
    return math.exp(log_value)


def mellin_whittaker_quadrature(b: float, a: float, nu: float, y: float,
                                config: Optional[QuadratureConfig] = None) -> float:
    """Direct quadrature of the integral mellin_whittaker evaluates in closed form."""
    config = config or QuadratureConfig.default()
    value, _ = integrate.quad(
        lambda x: (b + x) ** nu * math.exp(-a * x) * x ** (y - 1.0),
        0.0, math.inf, epsrel=config.rel_tol, epsabs=config.abs_tol,
        limit=config.max_subdivisions,
    )
    return value


def log_meijer_g3023(c: float, rho: float, sigma: float, idx: WhittakerIndex,
                     config: Optional[QuadratureConfig] = None) -> float:
    """
    log G^{30}_{23}(c | 0, 1-alpha-sigma ; -rho, 1/2+beta-sigma, 1/2-beta-sigma).

    The value is defined through

        G = e^{-c/2} c^{-rho} / Gamma(rho) * int_0^inf x^{rho-1} (c+x)^{-sigma} e^{-x/2} W(c+x) dx

    with the integral done by adaptive quadrature.
    """
    if not c > 0:
        raise DomainError(f"Meijer argument must be positive, got c={c}")
    if not rho > 0:
        raise DomainError(f"Meijer parameter rho must be positive, got rho={rho}")
    config = config or QuadratureConfig.default()
    outer = config.loosened(_NESTED_REL_FLOOR)
    shift = 0.5 * c

    def log_rest(x: float) -> float:
        return -sigma * math.log(c + x) - 0.5 * x + log_whittaker_w(idx, c + x, config) + shift

    if rho < 1.0:
        log_integrand, factor = power_substituted(log_rest, rho - 1.0)
    else:
        factor = 1.0

        def log_integrand(x: float) -> float:
            return float(special.xlogy(rho - 1.0, x)) + log_rest(x)

    value, _ = integrate_semi_infinite(log_integrand, outer, label=f"G30_23(c={c:.6g}, rho={rho:.6g})")
    return -c - rho * math.log(c) - special.gammaln(rho) + math.log(factor * value)


def meijer_g3023(c: float, rho: float, sigma: float, idx: WhittakerIndex,
                 config: Optional[QuadratureConfig] = None) -> float:
    return math.exp(log_meijer_g3023(c, rho, sigma, idx, config))


def whittaker_moment(eps: float, idx: WhittakerIndex) -> float:
    """
    Closed form of int_0^inf e^{-x/2} x^{eps-1} W_{alpha,beta}(x) dx:

        Gamma(eps+1/2-beta) Gamma(eps+1/2+beta) / Gamma(eps-alpha+1)
    """
    low, high = eps + 0.5 - idx.beta, eps + 0.5 + idx.beta
    if not (low > 0 and high > 0):
        raise DomainError(f"whittaker_moment needs eps + 1/2 +- beta > 0 (eps={eps}, beta={idx.beta})")
    return math.exp(special.gammaln(low) + special.gammaln(high)) * float(special.rgamma(eps - idx.alpha + 1.0))


def whittaker_moment_quadrature(eps: float, idx: WhittakerIndex,
                                config: Optional[QuadratureConfig] = None) -> float:
    """Direct quadrature of the integral whittaker_moment evaluates in closed form."""
    config = config or QuadratureConfig.default()

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.exp(-0.5 * x + (eps - 1.0) * math.log(x) + log_whittaker_w(idx, x, config))

    value, _ = integrate.quad(
        integrand, 0.0, math.inf,
        epsrel=max(config.rel_tol, _NESTED_REL_FLOOR), epsabs=config.abs_tol,
        limit=config.max_subdivisions,
    )
    return value
