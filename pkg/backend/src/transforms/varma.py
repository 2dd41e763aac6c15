"""
M-Varma integral transform over the positive-definite cone.

    g(Z) = int_{X > 0} (tr ZX)^xi exp(-tr ZX / 2) W_{alpha,beta}(tr ZX) phi(X) dX

with alpha = (2q-p)/4, beta = (2q+p-2)/4 and xi = (2q+p-4)/4. At q = 1 the
kernel is etr(-ZX) and g is the matrix Laplace transform.

Closed forms are given for |X|^{(n-p-2)/2} times 1, a zonal polynomial, a
hypergeometric function and a Laguerre polynomial. Each shares the factor

    omega_k = Gamma((2q+np+2k-2)/2) / Gamma((np+2k)/2)

per degree k, which equals 1 at q = 1.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from ..config import Config
from ..errors import DimensionMismatchError, DivergenceError, DomainError
from ..models.distributions import VarmaKernelParams
from ..models.reports import NumericTransform
from ..numerics.matops import MatrixLike, SpdMatrix, as_array, as_spd, inverse_spd, log_det
from ..numerics.quadrature import QuadratureConfig
from ..numerics.specfun import log_multivariate_gamma, log_whittaker_w, whittaker_w_many
from ..numerics.zonal import (
    Partition, SeriesResult, gen_binomial, gen_laguerre, gen_pochhammer, get_zonal_table,
    hypergeometric_pfq, tail_is_growing,
)
from ..patterns.observer import MonteCarloMonitor
from ..patterns.strategy import ConeIntegrationContext

logger = logging.getLogger(__name__)

StackFunction = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

def _trace_product(z: MatrixLike, x: MatrixLike) -> float:
    z_array, x_array = as_array(z), as_array(x)
    if z_array.shape != x_array.shape:
        raise DimensionMismatchError(f"Z has shape {z_array.shape}, X has shape {x_array.shape}")
    value = float(np.trace(z_array @ x_array))
    if not value > 0:
        raise DomainError(f"tr(ZX) must be positive, got {value}")
    return value


def log_kernel_of_trace(u: float, params: VarmaKernelParams, config: Optional[QuadratureConfig] = None) -> float:
    """log of u^xi e^{-u/2} W(u)."""
    return params.xi * math.log(u) - 0.5 * u + log_whittaker_w(params.whittaker_index, u, config)


def varma_log_kernel(z: MatrixLike, x: MatrixLike, params: VarmaKernelParams,
                     config: Optional[QuadratureConfig] = None) -> float:
    return log_kernel_of_trace(_trace_product(z, x), params, config)


def varma_kernel(z: MatrixLike, x: MatrixLike, params: VarmaKernelParams,
                 config: Optional[QuadratureConfig] = None) -> float:
    """(tr ZX)^xi exp(-tr ZX/2) W_{alpha,beta}(tr ZX)."""
    return math.exp(varma_log_kernel(z, x, params, config))


def vectorized_log_kernel(params: VarmaKernelParams, config: Optional[QuadratureConfig] = None):
    """log kernel as a function of an array of traces."""
    if params.whittaker_index.is_elementary:
        # W(u) = u^alpha e^{-u/2}
        exponent = params.xi + params.alpha

        def elementary(traces: np.ndarray) -> np.ndarray:
            traces = np.asarray(traces, dtype=float)
            return exponent * np.log(traces) - traces

        return elementary

    def general(traces: np.ndarray) -> np.ndarray:
        traces = np.asarray(traces, dtype=float)
        log_w = whittaker_w_many(params.whittaker_index, traces, config, log=True)
        return params.xi * np.log(traces) - 0.5 * traces + log_w

    return general


# ---------------------------------------------------------------------------
# Numeric transform
# ---------------------------------------------------------------------------

def varma_numeric(phi: StackFunction, z: MatrixLike, params: VarmaKernelParams,
                  config: Optional[QuadratureConfig] = None,
                  n_samples: Optional[int] = None, seed: Optional[int] = None, workers: int = 1,
                  monitor: Optional[MonteCarloMonitor] = None) -> NumericTransform:
    """
    Numeric M-Varma transform of phi at Z.

    Args:
        phi: Function evaluated on a (N, p, p) stack, returning N values
        z: SPD argument of the transform
        params: Kernel parameters (params.p must match Z)
        config: Quadrature tolerances (p = 1)
        n_samples: Importance-sampling budget (p >= 2)
        seed: Master seed (p >= 2)
        workers: Number of substreams (p >= 2)
        monitor: Optional run monitor

    Returns:
        NumericTransform with the estimate and its error
    """
    z = as_spd(z)
    if z.dim != params.p:
        raise DimensionMismatchError(f"Z is {z.dim}x{z.dim}, kernel has p={params.p}")
    context = ConeIntegrationContext.for_dimension(params.p, config, n_samples, seed, workers, monitor)
    result = context.integrate(vectorized_log_kernel(params, config), phi, z.array)
    logger.info("M-Varma numeric transform via %s: %.10g +- %.3g",
                context.get_current_method(), result.estimate, result.stderr)
    return result


# ---------------------------------------------------------------------------
# Test functions phi on stacks
# ---------------------------------------------------------------------------

def _log_dets(stack: np.ndarray) -> np.ndarray:
    return np.linalg.slogdet(stack)[1]


def phi_power_det(n: float, p: int) -> StackFunction:
    """|X|^{(n-p-2)/2}."""
    exponent = 0.5 * (n - p - 2.0)
    return lambda stack: np.exp(exponent * _log_dets(stack))


def phi_det_zonal(n: float, kappa: Partition, p: int) -> StackFunction:
    """|X|^{(n-p-2)/2} C_kappa(X)."""
    power = phi_power_det(n, p)
    table = get_zonal_table(p, max(kappa.weight, Config.ZONAL_MAX_DEGREE))

    def phi(stack: np.ndarray) -> np.ndarray:
        eigs = np.linalg.eigvalsh(stack)
        zonals = np.array([float(table.evaluate(kappa, list(row))) for row in eigs])
        return power(stack) * zonals

    return phi


def phi_hypergeom(n: float, a: Sequence[float], b: Sequence[float], p: int, max_degree: int) -> StackFunction:
    """|X|^{(n-p-2)/2} pFq(a; b; X)."""
    power = phi_power_det(n, p)

    def phi(stack: np.ndarray) -> np.ndarray:
        series = np.array([hypergeometric_pfq(a, b, np.linalg.eigvalsh(x), max_degree).value for x in stack])
        return power(stack) * series

    return phi


def phi_laguerre(gamma: float, kappa: Partition, p: int) -> StackFunction:
    """|X|^gamma L_kappa^gamma(X)."""

    def phi(stack: np.ndarray) -> np.ndarray:
        return np.array([
            math.exp(gamma * log_det(x)) * gen_laguerre(gamma, kappa, x) for x in stack
        ])

    return phi


def phi_psi(a: float, c: float, p: int) -> StackFunction:
    """Gamma_p(a)^{-1} |Y|^{a-p} |I+Y|^{c-a-p}."""
    log_norm = log_multivariate_gamma(p, a)
    identity = np.eye(p)

    def phi(stack: np.ndarray) -> np.ndarray:
        return np.exp((a - p) * _log_dets(stack) + (c - a - p) * _log_dets(identity + stack) - log_norm)

    return phi


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def log_omega(k: int, n: float, params: VarmaKernelParams) -> float:
    """log omega_k = log Gamma((2q+np+2k-2)/2) - log Gamma((np+2k)/2)."""
    np_dim = n * params.p
    return (
        special.gammaln(0.5 * (2.0 * params.q + np_dim + 2.0 * k - 2.0))
        - special.gammaln(0.5 * (np_dim + 2.0 * k))
    )


def _check_sample_count(n: float, params: VarmaKernelParams):
    if not n >= params.p + 1:
        raise DomainError(f"M-Varma closed forms need n >= p + 1 (n={n}, p={params.p})")


def _log_base(z: SpdMatrix, n: float, params: VarmaKernelParams) -> float:
    """log[Gamma_p((n-1)/2) |Z|^{-(n-1)/2}]."""
    return log_multivariate_gamma(params.p, 0.5 * (n - 1.0)) - 0.5 * (n - 1.0) * log_det(z)


def varma_power_det(z: MatrixLike, n: float, params: VarmaKernelParams) -> float:
    """g1(Z) = Gamma((2q+np-2)/2) Gamma_p((n-1)/2) / Gamma(np/2) |Z|^{-(n-1)/2}."""
    _check_sample_count(n, params)
    z = _argument(z, params)
    return math.exp(log_omega(0, n, params) + _log_base(z, n, params))


def varma_det_zonal(z: MatrixLike, n: float, kappa: Partition, params: VarmaKernelParams) -> float:
    """
    g2(Z) = Gamma((2q+np+2k-2)/2) Gamma_p((n-1)/2) ((n-1)/2)_kappa / Gamma((np+2k)/2)
            * |Z|^{-(n-1)/2} C_kappa(Z^{-1}).
    """
    _check_sample_count(n, params)
    z = _argument(z, params)
    k = kappa.weight
    table = get_zonal_table(params.p, max(k, Config.ZONAL_MAX_DEGREE))
    c_value = float(table.evaluate(kappa, list(np.linalg.eigvalsh(inverse_spd(z).array))))
    return (
        math.exp(log_omega(k, n, params) + _log_base(z, n, params))
        * gen_pochhammer(0.5 * (n - 1.0), kappa)
        * c_value
    )


def varma_hypergeom(z: MatrixLike, n: float, a: Sequence[float], b: Sequence[float],
                    params: VarmaKernelParams, max_degree: Optional[int] = None) -> SeriesResult:
    """
    Transform of |X|^{(n-p-2)/2} pFq(a; b; X):

        Gamma_p((n-1)/2) |Z|^{-(n-1)/2} sum_k omega_k sum_kappa
            [(a)_kappa ((n-1)/2)_kappa / (b)_kappa] C_kappa(Z^{-1}) / k!

    Raises:
        DivergenceError: when the last three degree contributions do not decrease
    """
    _check_sample_count(n, params)
    z = _argument(z, params)
    degree = Config.ZONAL_MAX_DEGREE if max_degree is None else int(max_degree)
    upper = list(a) + [0.5 * (n - 1.0)]
    table = get_zonal_table(params.p, degree)
    eigs = list(np.linalg.eigvalsh(inverse_spd(z).array))

    contributions = []
    for k in range(degree + 1):
        terms = []
        for kappa, c_value in table.evaluate_degree(k, eigs).items():
            numerator = math.prod(gen_pochhammer(value, kappa) for value in upper)
            if numerator == 0.0:
                continue
            denominator = math.prod(gen_pochhammer(value, kappa) for value in b)
            if denominator == 0.0:
                raise DomainError(f"lower parameter makes (b)_{kappa} vanish")
            terms.append(numerator / denominator * c_value)
        contributions.append(math.exp(log_omega(k, n, params)) * math.fsum(terms) / math.factorial(k))

    if tail_is_growing(contributions):
        raise DivergenceError(
            f"M-Varma hypergeometric series not converging: contributions {contributions[-3:]} at degree {degree}"
        )
    scale = math.exp(_log_base(z, n, params))
    return SeriesResult(scale * math.fsum(contributions), scale * contributions[-1], degree)


def laguerre_sample_count(gamma: float, p: int) -> float:
    """n with |X|^gamma = |X|^{(n-p-2)/2}."""
    return 2.0 * gamma + p + 2.0


def varma_laguerre(z: MatrixLike, gamma: float, kappa: Partition, params: VarmaKernelParams) -> float:
    """
    Transform of |X|^gamma L_kappa^gamma(X):

        (gamma+t)_kappa Gamma_p(gamma+t) |Z|^{-gamma-t} C_kappa(I)
            * sum_s omega_s sum_{o |- s} binom(kappa, o) C_o(-Z^{-1}) / C_o(I),  t = (p+1)/2
    """
    if not gamma > -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {gamma}")
    z = _argument(z, params)
    p = params.p
    if kappa.length > p:
        raise DomainError(f"partition {kappa} longer than the dimension {p}")
    t = 0.5 * (p + 1.0)
    n = laguerre_sample_count(gamma, p)
    table = get_zonal_table(p, max(kappa.weight, Config.ZONAL_MAX_DEGREE))
    identity = [1.0] * p
    negated = [-value for value in np.linalg.eigvalsh(inverse_spd(z).array)]

    terms = []
    for s in range(kappa.weight + 1):
        omega = math.exp(log_omega(s, n, params))
        c_identity = table.evaluate_degree(s, identity)
        for omicron, c_value in table.evaluate_degree(s, negated).items():
            binom = gen_binomial(kappa, omicron)
            if binom == 0.0:
                continue
            terms.append(binom * omega * c_value / c_identity[omicron])

    log_prefix = log_multivariate_gamma(p, gamma + t) - (gamma + t) * log_det(z)
    return (
        gen_pochhammer(gamma + t, kappa)
        * math.exp(log_prefix)
        * float(table.evaluate(kappa, identity))
        * math.fsum(terms)
    )


def psi_q(a: float, c: float, x: MatrixLike, params: VarmaKernelParams,
          config: Optional[QuadratureConfig] = None,
          n_samples: Optional[int] = None, seed: Optional[int] = None, workers: int = 1) -> NumericTransform:
    """
    Numeric M-Varma extension of the confluent function psi(a, c; X):
    the transform of Gamma_p(a)^{-1} |Y|^{a-p} |I+Y|^{c-a-p} at X.
    At p = 1, q = 1 this is Tricomi's U(a, c, x).
    """
    if not a > 0.5 * (params.p - 1):
        raise DomainError(f"psi needs a > (p-1)/2 (a={a}, p={params.p})")
    return varma_numeric(phi_psi(a, c, params.p), x, params, config, n_samples, seed, workers)


def convolution_defect(a1: float, a2: float, z: float, params: VarmaKernelParams,
                       config: Optional[QuadratureConfig] = None) -> float:
    """
    Relative gap between the transform of f1 * f2 and the product of the
    transforms, for f_i(x) = x^{a_i - 1} on the half line (p = 1).

    The convolution of the two powers is B(a1, a2) r^{a1+a2-1}. The gap
    vanishes at q = 1.
    """
    if params.p != 1:
        raise DomainError("convolution check is defined for p = 1")
    if not (a1 > 0 and a2 > 0):
        raise DomainError(f"powers need a1, a2 > 0 (got {a1}, {a2})")
    argument = np.array([[float(z)]])

    def power(exponent: float, factor: float = 1.0) -> StackFunction:
        return lambda stack: factor * np.power(stack[:, 0, 0], exponent)

    beta = math.exp(special.betaln(a1, a2))
    first = varma_numeric(power(a1 - 1.0), argument, params, config).estimate
    second = varma_numeric(power(a2 - 1.0), argument, params, config).estimate
    joint = varma_numeric(power(a1 + a2 - 1.0, beta), argument, params, config).estimate
    product = first * second
    defect = abs(joint - product) / abs(product)
    logger.info("Convolution defect at q=%.4g, z=%.4g: %.3g", params.q, z, defect)
    return defect


def _argument(z: MatrixLike, params: VarmaKernelParams):
    z = as_spd(z)
    if z.dim != params.p:
        raise DimensionMismatchError(f"Z is {z.dim}x{z.dim}, kernel has p={params.p}")
    return z
