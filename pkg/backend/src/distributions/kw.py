"""
Kotz-Wishart and inverted Kotz-Wishart distributions.

The sampler forms the SSP matrix A = X H X' of a Kotz sample. Densities,
zonal expectations, the mgf and the Loewner-order cdf are the s = 1 closed
forms; they are evaluated in the theta-folded shape, C_kappa(theta M) =
theta^k C_kappa(M), so no theta^{p nu/2} prefactor is ever formed.
"""

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special

from ..config import Config
from ..errors import DimensionMismatchError, DivergenceError, DomainError, RankDeficiencyError
from ..models.distributions import IKWDist, KotzModel, KotzVectorDist, KWDist
from ..numerics.matops import (
    MatrixLike, SpdMatrix, as_array, as_spd, inverse, inverse_spd, log_det, product_eigenvalues,
)
from ..numerics.quadrature import QuadratureConfig
from ..numerics.specfun import WhittakerIndex, log_meijer_g3023, log_multivariate_gamma, log_whittaker_w
from ..numerics.zonal import (
    Partition, SeriesResult, gen_pochhammer, get_zonal_table, tail_is_growing, zonal,
)
from .kotz import covariance_scale, sample_kotz_matrix

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _kotz_model(dist: KWDist, n: Optional[int]) -> KotzModel:
    count = dist.require_sample_count()
    if n is not None and int(n) != count:
        raise DomainError(f"sample count n={n} does not match nu + 1 = {count}")
    vector_dist = KotzVectorDist(np.zeros(dist.p), dist.sigma, dist.params)
    return KotzModel(count, vector_dist)


def _ssp(draws: np.ndarray) -> np.ndarray:
    centered = draws - draws.mean(axis=-1, keepdims=True)
    ssp = np.einsum('...ij,...kj->...ik', centered, centered)
    return 0.5 * (ssp + np.swapaxes(ssp, -1, -2))


def sample_kw_batch(dist: KWDist, size: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``size`` SSP matrices, shape (size, p, p)."""
    model = _kotz_model(dist, None)
    if size == 0:
        return np.empty((0, dist.p, dist.p))
    batch = _ssp(sample_kotz_matrix(model, rng, size=size))
    try:
        np.linalg.cholesky(batch)
    except np.linalg.LinAlgError as e:
        raise RankDeficiencyError(
            f"sampled SSP matrix is not positive definite (n={model.n}, p={dist.p})"
        ) from e
    return batch


def sample_kw(dist: KWDist, rng: np.random.Generator, n: Optional[int] = None) -> SpdMatrix:
    """
    One draw A = X H X' with H = I_n - ee'/n.

    Args:
        dist: KW distribution; nu must be an integer
        rng: Seeded generator
        n: Sample count, must equal nu + 1 when given

    Returns:
        The SSP matrix
    """
    model = _kotz_model(dist, n)
    ssp = _ssp(sample_kotz_matrix(model, rng))
    try:
        return SpdMatrix(ssp)
    except DomainError as e:
        raise RankDeficiencyError(f"sampled SSP matrix is rank deficient (n={model.n}, p={dist.p})") from e


def sample_ikw_batch(dist: IKWDist, size: int, rng: np.random.Generator) -> np.ndarray:
    """IKW draws as inverses of KW_p(d - p - 1, V^{-1}) draws."""
    nu = dist.nu
    if nu != int(nu):
        raise DomainError(f"sampling needs an integer d, got {dist.d}")
    kw = KWDist(dist.p, int(nu), inverse_spd(dist.V), dist.params)
    batch = sample_kw_batch(kw, size, rng)
    if size == 0:
        return batch
    inverted = np.linalg.inv(batch)
    return 0.5 * (inverted + np.swapaxes(inverted, -1, -2))


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------

def log_c1_normalizer(p: int, nu: float, params) -> float:
    """log C_1(q, theta) = log[Gamma(p(nu+1)/2) theta^{p nu/2} / (Gamma((2q+p(nu+1)-2)/2) Gamma_p(nu/2))]."""
    return (
        special.gammaln(0.5 * p * (nu + 1.0))
        + 0.5 * p * nu * math.log(params.theta)
        - special.gammaln(0.5 * (2.0 * params.q + p * (nu + 1.0) - 2.0))
        - log_multivariate_gamma(p, 0.5 * nu)
    )


def _log_trace_factor(z: float, idx: WhittakerIndex, q: float, p: int,
                      config: Optional[QuadratureConfig]) -> float:
    """log of z^{(2q+p-4)/4} e^{-z/2} W(z)."""
    xi = (2.0 * q + p - 4.0) / 4.0
    return xi * math.log(z) - 0.5 * z + log_whittaker_w(idx, z, config)


def kw_logpdf(a: MatrixLike, dist: KWDist, config: Optional[QuadratureConfig] = None) -> float:
    """Log density of KW_p(nu, Sigma) at the SPD matrix A (s = 1)."""
    dist.params.require_unit_power("kw_pdf")
    a = as_spd(a)
    if a.dim != dist.p:
        raise DimensionMismatchError(f"A is {a.dim}x{a.dim}, distribution has p={dist.p}")
    p, nu, theta = dist.p, dist.nu, dist.params.theta
    z = theta * float(np.trace(inverse(dist.sigma) @ a.array))
    return (
        log_c1_normalizer(p, nu, dist.params)
        - 0.5 * nu * log_det(dist.sigma)
        + 0.5 * (nu - p - 1.0) * log_det(a)
        + _log_trace_factor(z, dist.whittaker_index, dist.params.q, p, config)
    )


def kw_pdf(a: MatrixLike, dist: KWDist, config: Optional[QuadratureConfig] = None) -> float:
    return math.exp(kw_logpdf(a, dist, config))


def ikw_logpdf(b: MatrixLike, dist: IKWDist, config: Optional[QuadratureConfig] = None) -> float:
    """Log density of IKW_p(d, V) at the SPD matrix B (s = 1)."""
    dist.params.require_unit_power("ikw_pdf")
    b = as_spd(b)
    if b.dim != dist.p:
        raise DimensionMismatchError(f"B is {b.dim}x{b.dim}, distribution has p={dist.p}")
    p, d = dist.p, dist.d
    z = dist.params.theta * float(np.trace(dist.V.array @ inverse(b)))
    return (
        log_c1_normalizer(p, d - p - 1.0, dist.params)
        + 0.5 * (d - p - 1.0) * log_det(dist.V)
        - 0.5 * d * log_det(b)
        + _log_trace_factor(z, dist.whittaker_index, dist.params.q, p, config)
    )


def ikw_pdf(b: MatrixLike, dist: IKWDist, config: Optional[QuadratureConfig] = None) -> float:
    return math.exp(ikw_logpdf(b, dist, config))


def wishart_logpdf(a: MatrixLike, m: float, sigma: MatrixLike) -> float:
    """Classical Wishart_p(m, Sigma) log density."""
    a, sigma = as_spd(a), as_spd(sigma)
    p = sigma.dim
    if a.dim != p:
        raise DimensionMismatchError(f"A is {a.dim}x{a.dim}, Sigma is {p}x{p}")
    return (
        0.5 * (m - p - 1.0) * log_det(a)
        - 0.5 * float(np.trace(inverse(sigma) @ a.array))
        - 0.5 * m * p * math.log(2.0)
        - 0.5 * m * log_det(sigma)
        - log_multivariate_gamma(p, 0.5 * m)
    )


def inv_wishart_logpdf(b: MatrixLike, d: float, v: MatrixLike) -> float:
    """Inverted Wishart log density with d degrees of freedom (B^{-1} ~ Wishart_p(d-p-1, V^{-1}))."""
    b, v = as_spd(b), as_spd(v)
    p = v.dim
    if b.dim != p:
        raise DimensionMismatchError(f"B is {b.dim}x{b.dim}, V is {p}x{p}")
    m = d - p - 1.0
    return (
        0.5 * m * log_det(v)
        - 0.5 * d * log_det(b)
        - 0.5 * float(np.trace(v.array @ inverse(b)))
        - 0.5 * m * p * math.log(2.0)
        - log_multivariate_gamma(p, 0.5 * m)
    )


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

def c1(dist: KWDist) -> float:
    """E(A) = c1 Sigma."""
    return dist.nu * covariance_scale(dist.params, dist.np_dim)


def mean(dist: KWDist) -> np.ndarray:
    return c1(dist) * dist.sigma.array


def c0(dist: KWDist) -> float:
    """
    Constant with E(A^{-1}) = Sigma^{-1} / c0:

        (n-p-2) Gamma((2q+np-2)/(2s)) / [theta^{1/s} (np-2) Gamma((2q+np-4)/(2s))]
    """
    n, p = dist.n, dist.p
    if not n > p + 2:
        raise DomainError(f"needs n > p + 2 (n={n}, p={p})")
    q, theta, s = dist.params.q, dist.params.theta, dist.params.s
    np_dim = dist.np_dim
    low = (2.0 * q + np_dim - 4.0) / (2.0 * s)
    if not low > 0:
        raise DomainError(f"needs 2q + np > 4 (q={q}, np={np_dim})")
    return (n - p - 2.0) / (np_dim - 2.0) * math.exp(
        special.gammaln((2.0 * q + np_dim - 2.0) / (2.0 * s)) - special.gammaln(low) - math.log(theta) / s
    )


def inverse_mean(dist: KWDist) -> np.ndarray:
    return inverse(dist.sigma) / c0(dist)


def second_moment(dist: KWDist) -> np.ndarray:
    """E(A^2) = coeff [(n-1)^2 Sigma^2 + (n-1)(Sigma tr Sigma + Sigma^2)]."""
    q, theta, s = dist.params.q, dist.params.theta, dist.params.s
    np_dim = dist.np_dim
    coeff = math.exp(
        -2.0 * math.log(theta) / s
        + special.gammaln((2.0 * q + np_dim + 2.0) / (2.0 * s))
        - special.gammaln((2.0 * q + np_dim - 2.0) / (2.0 * s))
    ) / (np_dim * (np_dim + 2.0))
    sigma = dist.sigma.array
    sigma_sq = sigma @ sigma
    nu = dist.nu
    return coeff * (nu ** 2 * sigma_sq + nu * (sigma * np.trace(sigma) + sigma_sq))


def gen_variance_moment(t: float, dist: KWDist) -> float:
    """E(|A|^t)."""
    if not t > 0:
        raise DomainError(f"moment order must be positive, got {t}")
    q, theta, s = dist.params.q, dist.params.theta, dist.params.s
    p, np_dim, nu = dist.p, dist.np_dim, dist.nu
    low = (2.0 * q + np_dim - 2.0) / (2.0 * s)
    if not low > 0:
        raise DomainError(f"gamma argument {low} must be positive")
    log_value = (
        -t * p / s * math.log(theta)
        + special.gammaln((2.0 * q + np_dim + 2.0 * t * p - 2.0) / (2.0 * s))
        + special.gammaln(0.5 * np_dim)
        + log_multivariate_gamma(p, 0.5 * nu + t)
        - special.gammaln(low)
        - special.gammaln(0.5 * (np_dim + 2.0 * t * p))
        - log_multivariate_gamma(p, 0.5 * nu)
        + t * log_det(dist.sigma)
    )
    return math.exp(log_value)


def log_zonal_constant(kappa: Partition, dist: KWDist) -> float:
    """log K(n, p) with E[C_kappa(Omega A)] = K(n, p) C_kappa(Omega Sigma)."""
    dist.params.require_unit_power("expected_zonal")
    k = kappa.weight
    q, theta = dist.params.q, dist.params.theta
    np_dim = dist.np_dim
    return (
        -k * math.log(theta)
        + math.log(gen_pochhammer(0.5 * dist.nu, kappa))
        + special.gammaln(0.5 * np_dim)
        + special.gammaln(0.5 * (2.0 * q + np_dim + 2.0 * k - 2.0))
        - special.gammaln(0.5 * (2.0 * q + np_dim - 2.0))
        - special.gammaln(0.5 * (np_dim + 2.0 * k))
    )


def _omega_sigma_eigs(omega: MatrixLike, dist: KWDist) -> np.ndarray:
    omega = as_array(omega)
    if omega.shape != (dist.p, dist.p):
        raise DimensionMismatchError(f"Omega has shape {omega.shape}, distribution has p={dist.p}")
    if not np.allclose(omega, omega.T, rtol=1e-12, atol=1e-12):
        raise DomainError("Omega must be symmetric")
    return product_eigenvalues(omega, dist.sigma)


def expected_zonal(omega: MatrixLike, kappa: Partition, dist: KWDist) -> float:
    """E[C_kappa(Omega A)] = K(n, p) C_kappa(Omega Sigma)."""
    eigs = _omega_sigma_eigs(omega, dist)
    table = get_zonal_table(dist.p, max(kappa.weight, Config.ZONAL_MAX_DEGREE))
    return math.exp(log_zonal_constant(kappa, dist)) * zonal(kappa, eigs, table)


def mgf(omega: MatrixLike, dist: KWDist, max_degree: Optional[int] = None) -> SeriesResult:
    """
    E[etr(Omega A)] as the truncated zonal series sum_k sum_kappa K(n,p) C_kappa(Omega Sigma) / k!.

    Raises:
        DivergenceError: when the last three degree contributions do not decrease
    """
    degree = Config.ZONAL_MAX_DEGREE if max_degree is None else int(max_degree)
    eigs = list(_omega_sigma_eigs(omega, dist))
    table = get_zonal_table(dist.p, degree)

    contributions = []
    for k in range(degree + 1):
        terms = [
            math.exp(log_zonal_constant(kappa, dist)) * value
            for kappa, value in table.evaluate_degree(k, eigs).items()
        ]
        contributions.append(math.fsum(terms) / math.factorial(k))

    if tail_is_growing(contributions):
        raise DivergenceError(
            f"mgf series not converging: degree contributions {contributions[-3:]} at max degree {degree}"
        )
    logger.debug("mgf: %d degrees, last contribution %.3g", degree, contributions[-1])
    return SeriesResult(math.fsum(contributions), contributions[-1], degree)


# ---------------------------------------------------------------------------
# Loewner-order cdf
# ---------------------------------------------------------------------------

_MEIJER_CACHE_SIZE = 4096


@lru_cache(maxsize=_MEIJER_CACHE_SIZE)
def _log_b_term(c: float, rho: float, sigma: float, idx: WhittakerIndex,
                config: Optional[QuadratureConfig]) -> float:
    """log(b_k c^rho), cached per distinct argument."""
    return log_meijer_g3023(c, rho, sigma, idx, config) + rho * math.log(c)


def prob_greater(lam: MatrixLike, dist: KWDist, clamp: bool = True,
                 config: Optional[QuadratureConfig] = None) -> float:
    """
    P(A > Lambda) in the Loewner order.

    Needs m = (nu - p - 1)/2 to be a positive integer; the series then
    terminates at degree p m and only partitions with k_1 <= m enter.

    Args:
        lam: SPD threshold matrix
        dist: KW distribution with s = 1
        clamp: Clamp the result to [0, 1]
        config: Quadrature tolerances for the b_k coefficients

    Returns:
        The probability
    """
    dist.params.require_unit_power("prob_greater")
    m = dist.require_integer_m()
    lam = as_spd(lam)
    if lam.dim != dist.p:
        raise DimensionMismatchError(f"Lambda is {lam.dim}x{lam.dim}, distribution has p={dist.p}")

    p, nu = dist.p, dist.nu
    q, theta = dist.params.q, dist.params.theta
    eigs = theta * product_eigenvalues(lam, inverse_spd(dist.sigma))
    c = float(np.sum(eigs))
    sigma_exponent = -(2.0 * q + p - 4.0) / 4.0
    idx = dist.whittaker_index
    degree = p * m
    table = get_zonal_table(p, max(degree, Config.ZONAL_MAX_DEGREE))

    contributions = []
    for k in range(degree + 1):
        zonal_sum = math.fsum(
            value for kappa, value in table.evaluate_degree(k, list(eigs)).items()
            if not kappa.parts or kappa.parts[0] <= m
        )
        if zonal_sum == 0.0:
            continue
        rho = 0.5 * p * nu - k
        log_b = _log_b_term(c, rho, sigma_exponent, idx, config)
        contributions.append(math.exp(log_b - special.gammaln(k + 1.0)) * zonal_sum)

    log_prefactor = (
        special.gammaln(0.5 * p * (nu + 1.0))
        - special.gammaln(0.5 * (2.0 * q + p * (nu + 1.0) - 2.0))
    )
    raw = math.exp(log_prefactor) * math.fsum(contributions)
    logger.debug("prob_greater: c=%.6g, %d degree terms, raw=%.12g", c, len(contributions), raw)
    return min(max(raw, 0.0), 1.0) if clamp else raw


def smallest_eig_survival(x: float, dist: KWDist, clamp: bool = True,
                          config: Optional[QuadratureConfig] = None) -> float:
    """P(smallest eigenvalue of A > x) = P(A > x I)."""
    if not x > 0:
        raise DomainError(f"eigenvalue threshold must be positive, got {x}")
    return prob_greater(x * np.eye(dist.p), dist, clamp, config)


def smallest_eig_cdf(x: float, dist: KWDist, config: Optional[QuadratureConfig] = None) -> float:
    return 1.0 - smallest_eig_survival(x, dist, True, config)


def largest_eig_inv_cdf(y: float, dist: KWDist, config: Optional[QuadratureConfig] = None) -> float:
    """P(largest eigenvalue of A^{-1} <= y)."""
    if not y > 0:
        raise DomainError(f"eigenvalue threshold must be positive, got {y}")
    return smallest_eig_survival(1.0 / y, dist, True, config)


def inv_cdf_matrix(omega: MatrixLike, dist: KWDist, config: Optional[QuadratureConfig] = None) -> float:
    """P(A^{-1} < Omega) = P(A > Omega^{-1})."""
    return prob_greater(inverse_spd(omega), dist, True, config)
