"""
Kotz-type vector distribution and the matrix-variate Kotz model.

Densities are evaluated in log space. Samplers use the stochastic
representation X = mu e' + R Sigma^{1/2} U with R the radial variable and
vec(U') uniform on the unit sphere.
"""

import logging
import math
import warnings
from typing import Optional, Union

import numpy as np
from scipy import special

from ..errors import DimensionMismatchError, DomainError, SingularDensityWarning
from ..models.distributions import KotzModel, KotzParams, KotzVectorDist
from ..numerics.matops import as_array, inverse, log_det, sqrt_spd

logger = logging.getLogger(__name__)


def _check_gamma_argument(value: float, what: str):
    if not value > 0:
        raise DomainError(f"{what} needs a positive gamma argument, got {value}")


def log_normalizer(params: KotzParams, dim: int) -> float:
    """log C for the Kotz generator in dimension ``dim``."""
    params.check_dimension(dim)
    shape = (2.0 * params.q + dim - 2.0) / (2.0 * params.s)
    return (
        math.log(params.s)
        + special.gammaln(0.5 * dim)
        + shape * math.log(params.theta)
        - 0.5 * dim * math.log(math.pi)
        - special.gammaln(shape)
    )


def _log_generator(z: float, params: KotzParams) -> float:
    """log of z^{q-1} exp(-theta z^s) for z > 0."""
    return (params.q - 1.0) * math.log(z) - params.theta * z ** params.s


def kotz_logpdf(x, dist: KotzVectorDist) -> float:
    """
    Log density of the vector Kotz distribution.

    At x = mu the value is +inf when q < 1 (a SingularDensityWarning is
    issued), log C - log|Sigma|/2 when q = 1 and -inf when q > 1.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != dist.dim:
        raise DimensionMismatchError(f"x has {x.shape[0]} entries, distribution has dimension {dist.dim}")
    params = dist.params
    base = log_normalizer(params, dist.dim) - 0.5 * log_det(dist.sigma)

    diff = x - dist.mu
    z = float(diff @ inverse(dist.sigma) @ diff)
    if z > 0.0:
        return base + _log_generator(z, params)

    if params.q < 1.0:
        message = "Kotz density is unbounded at x = mu for q < 1"
        logger.debug(message)
        warnings.warn(message, SingularDensityWarning, stacklevel=2)
        return math.inf
    if params.q == 1.0:
        return base
    return -math.inf


def kotz_pdf(x, dist: KotzVectorDist) -> float:
    return math.exp(kotz_logpdf(x, dist))


def kotz_matrix_logpdf(x, model: KotzModel) -> float:
    """Joint log density of the p x n sample matrix X under the Kotz model."""
    x = np.asarray(x, dtype=float)
    vector_dist = model.vector_dist
    if x.shape != (model.p, model.n):
        raise DimensionMismatchError(f"X has shape {x.shape}, model needs {(model.p, model.n)}")
    params = vector_dist.params
    centered = x - vector_dist.mu[:, None]
    z = float(np.trace(inverse(vector_dist.sigma) @ centered @ centered.T))
    base = log_normalizer(params, model.joint_dim) - 0.5 * model.n * log_det(vector_dist.sigma)
    if z > 0.0:
        return base + _log_generator(z, params)
    if params.q < 1.0:
        warnings.warn("Kotz matrix density is unbounded at X = M for q < 1", SingularDensityWarning, stacklevel=2)
        return math.inf
    return base if params.q == 1.0 else -math.inf


def radial_moment(t: float, dim: int, params: KotzParams) -> float:
    """
    E(r^{2t}) = theta^{-t/s} Gamma((2q+dim+2t-2)/(2s)) / Gamma((2q+dim-2)/(2s)).

    ``dim`` is p for the vector model and n*p for the matrix model.
    """
    if not t > 0:
        raise DomainError(f"moment order must be positive, got {t}")
    low = (2.0 * params.q + dim - 2.0) / (2.0 * params.s)
    high = (2.0 * params.q + dim + 2.0 * t - 2.0) / (2.0 * params.s)
    _check_gamma_argument(low, "radial_moment")
    return math.exp(-t / params.s * math.log(params.theta) + special.gammaln(high) - special.gammaln(low))


def covariance_scale(params: KotzParams, p: float) -> float:
    """Cov(x) = covariance_scale * Sigma for the p-dimensional Kotz vector."""
    params.check_dimension(p)
    low = (2.0 * params.q + p - 2.0) / (2.0 * params.s)
    high = (2.0 * params.q + p) / (2.0 * params.s)
    return math.exp(
        -math.log(params.theta) / params.s + special.gammaln(high) - special.gammaln(low)
    ) / p


def sample_radial(dim: int, params: KotzParams, rng: np.random.Generator,
                  size: Optional[int] = None) -> Union[float, np.ndarray]:
    """
    Draw R with density proportional to r^{dim-1} r^{2(q-1)} exp(-theta r^{2s}).

    R^{2s} is Gamma((2q+dim-2)/(2s)) with rate theta; numpy's gamma sampler
    is Marsaglia-Tsang with the shape < 1 boost.
    """
    shape = (2.0 * params.q + dim - 2.0) / (2.0 * params.s)
    _check_gamma_argument(shape, "sample_radial")
    u = rng.gamma(shape, 1.0 / params.theta, size=size)
    return u ** (1.0 / (2.0 * params.s))


def sample_kotz_matrix(model: KotzModel, rng: np.random.Generator,
                       size: Optional[int] = None) -> np.ndarray:
    """
    Draw the p x n sample matrix X (or a (size, p, n) stack).

    Args:
        model: Kotz model with n columns
        rng: Seeded generator
        size: Number of matrices; None returns a single p x n matrix

    Returns:
        Sampled matrix or stack of matrices
    """
    p, n = model.p, model.n
    count = 1 if size is None else int(size)
    if count < 0:
        raise DomainError(f"sample size must be >= 0, got {count}")

    gauss = rng.standard_normal((count, p, n))
    norms = np.sqrt(np.einsum('kij,kij->k', gauss, gauss))
    sphere = gauss / norms[:, None, None]
    radius = np.asarray(sample_radial(model.joint_dim, model.vector_dist.params, rng, size=count))

    root = sqrt_spd(model.vector_dist.sigma).array
    draws = model.vector_dist.mu[None, :, None] + radius[:, None, None] * np.einsum('ij,kjl->kil', root, sphere)
    return draws[0] if size is None else draws


def sample_kotz_vector(dist: KotzVectorDist, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Draw from the vector distribution: mu + R Sigma^{1/2} u with u uniform on the sphere."""
    count = 1 if size is None else int(size)
    gauss = rng.standard_normal((count, dist.dim))
    sphere = gauss / np.linalg.norm(gauss, axis=1)[:, None]
    radius = np.asarray(sample_radial(dist.dim, dist.params, rng, size=count))
    draws = dist.mu + radius[:, None] * (sphere @ as_array(sqrt_spd(dist.sigma)).T)
    return draws[0] if size is None else draws
