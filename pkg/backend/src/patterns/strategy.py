"""
Strategy Pattern Implementation
Selects how an integral over the positive-definite cone is evaluated:
adaptive quadrature on the half line for p = 1, Wishart importance sampling for p >= 2
"""

from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence
import logging
import math

import numpy as np
from scipy import stats

from ..config import Config
from ..errors import ConvergenceError, DomainError
from ..models.reports import NumericTransform
from ..numerics.matops import as_spd, inverse, log_det
from ..numerics.montecarlo import run_chunks
from ..numerics.quadrature import QuadratureConfig, integrate_half_line
from ..numerics.specfun import log_multivariate_gamma
from .observer import MonteCarloMonitor

logger = logging.getLogger(__name__)

# log K as a function of tr(ZX); vectorized over a 1-d array
LogKernel = Callable[[np.ndarray], np.ndarray]
# phi evaluated on a (N, p, p) stack of SPD matrices
StackFunction = Callable[[np.ndarray], np.ndarray]

_NESTED_REL_FLOOR = 1e-9
_PILOT_STREAM = 0x5EED
_PILOT_SAMPLES = 2000
_PILOT_SCALES = (0.1, 0.25, 0.5, 1.0, 2.0)


class ConeIntegrationStrategy(ABC):
    """Abstract strategy for integral transforms over the SPD cone"""

    @abstractmethod
    def integrate(self, log_kernel: LogKernel, phi: StackFunction, z: np.ndarray) -> NumericTransform:
        """Evaluate int_{X > 0} K(tr ZX) phi(X) dX"""
        pass

    @abstractmethod
    def get_method_name(self) -> str:
        """Return the method name"""
        pass


class ScalarQuadratureStrategy(ConeIntegrationStrategy):
    """Adaptive quadrature on (0, inf) for 1 x 1 arguments"""

    def __init__(self, config: Optional[QuadratureConfig] = None):
        self.config = (config or QuadratureConfig.default()).loosened(_NESTED_REL_FLOOR)

    def integrate(self, log_kernel: LogKernel, phi: StackFunction, z: np.ndarray) -> NumericTransform:
        z = np.asarray(z, dtype=float)
        if z.shape != (1, 1):
            raise DomainError(f"scalar quadrature needs a 1x1 argument, got shape {z.shape}")
        z_value = float(z[0, 0])

        def integrand(x: float) -> float:
            if x <= 0.0:
                return 0.0
            weight = float(phi(np.array([[[x]]]))[0])
            if weight == 0.0:
                return 0.0
            return math.exp(float(log_kernel(np.array([z_value * x]))[0])) * weight

        value, abserr = integrate_half_line(integrand, self.config, label=f"cone transform at z={z_value:.6g}")
        logger.debug("Scalar transform: %.12g (abserr %.2g)", value, abserr)
        return NumericTransform(estimate=value, stderr=abserr, method=self.get_method_name())

    def get_method_name(self) -> str:
        return "quadrature"


def wishart_logpdf_batch(draws: np.ndarray, df: float, scale: np.ndarray) -> np.ndarray:
    """Wishart_p(df, scale) log density on a (N, p, p) stack."""
    p = scale.shape[0]
    _, logdets = np.linalg.slogdet(draws)
    traces = np.einsum('ij,kji->k', inverse(scale), draws)
    return (
        0.5 * (df - p - 1.0) * logdets
        - 0.5 * traces
        - 0.5 * df * p * math.log(2.0)
        - 0.5 * df * log_det(scale)
        - log_multivariate_gamma(p, 0.5 * df)
    )


class WishartImportanceStrategy(ConeIntegrationStrategy):
    """
    Importance sampling with a Wishart proposal of p + 2 degrees of freedom.

    The proposal scale is tau Z^{-1}, tau picked from a small grid by the
    effective sample size of a pilot run. Weights above the configured
    percentile are clipped and the clipped fraction reported.
    """

    def __init__(self, n_samples: int, seed: int, workers: int = 1,
                 clip_percentile: Optional[float] = None,
                 max_rel_stderr: Optional[float] = None,
                 scales: Sequence[float] = _PILOT_SCALES,
                 monitor: Optional[MonteCarloMonitor] = None):
        if n_samples < 2:
            raise DomainError(f"importance sampling needs at least 2 samples, got {n_samples}")
        self.n_samples = n_samples
        self.seed = seed
        self.workers = workers
        self.clip_percentile = Config.IS_CLIP_PERCENTILE if clip_percentile is None else clip_percentile
        self.max_rel_stderr = Config.IS_MAX_REL_STDERR if max_rel_stderr is None else max_rel_stderr
        self.scales = tuple(scales)
        self.monitor = monitor

    @staticmethod
    def _draw(rng: np.random.Generator, count: int, df: float, scale: np.ndarray) -> np.ndarray:
        p = scale.shape[0]
        if count == 0:
            return np.empty((0, p, p))
        draws = stats.wishart.rvs(df=df, scale=scale, size=count, random_state=rng)
        return np.reshape(draws, (count, p, p))

    @staticmethod
    def _weights(draws: np.ndarray, log_kernel: LogKernel, phi: StackFunction,
                 z: np.ndarray, df: float, scale: np.ndarray) -> np.ndarray:
        if draws.shape[0] == 0:
            return np.empty(0)
        traces = np.einsum('ij,kji->k', z, draws)
        log_ratio = log_kernel(traces) - wishart_logpdf_batch(draws, df, scale)
        return np.exp(log_ratio) * phi(draws)

    def _pick_scale(self, log_kernel: LogKernel, phi: StackFunction, z: np.ndarray, df: float) -> float:
        z_inv = inverse(as_spd(z))
        rng = np.random.default_rng([self.seed, _PILOT_STREAM])
        best_tau, best_ess = self.scales[0], -1.0
        for tau in self.scales:
            draws = self._draw(rng, _PILOT_SAMPLES, df, tau * z_inv)
            weights = np.abs(self._weights(draws, log_kernel, phi, z, df, tau * z_inv))
            total = weights.sum()
            ess = total ** 2 / np.sum(weights ** 2) if total > 0 else 0.0
            logger.debug("Pilot tau=%.3g: ESS %.1f of %d", tau, ess, _PILOT_SAMPLES)
            if ess > best_ess:
                best_tau, best_ess = tau, ess
        return best_tau

    def integrate(self, log_kernel: LogKernel, phi: StackFunction, z: np.ndarray) -> NumericTransform:
        z = np.asarray(z, dtype=float)
        p = z.shape[0]
        df = p + 2.0
        tau = self._pick_scale(log_kernel, phi, z, df)
        scale = tau * inverse(as_spd(z))

        def task(rng: np.random.Generator, count: int) -> np.ndarray:
            return self._weights(self._draw(rng, count, df, scale), log_kernel, phi, z, df, scale)

        weights = run_chunks(task, self.n_samples, self.seed, self.workers, self.monitor)
        magnitude = np.abs(weights)
        threshold = np.percentile(magnitude, self.clip_percentile)
        clipped = magnitude > threshold
        clipped_fraction = float(clipped.mean())
        if clipped_fraction > 0:
            logger.warning("Clipped %.4f%% of importance weights at %.4g", 100 * clipped_fraction, threshold)
        weights = np.where(clipped, np.sign(weights) * threshold, weights)

        estimate = float(weights.mean())
        stderr = float(weights.std(ddof=1) / math.sqrt(weights.shape[0]))
        result = NumericTransform(
            estimate=estimate, stderr=stderr, method=self.get_method_name(),
            n_samples=int(weights.shape[0]), clipped_fraction=clipped_fraction, proposal_scale=tau,
        )
        if not result.rel_stderr <= self.max_rel_stderr:
            raise ConvergenceError(
                f"importance sampling relative error {result.rel_stderr:.3g} exceeds {self.max_rel_stderr}"
            )
        return result

    def get_method_name(self) -> str:
        return "wishart-importance"


class ConeIntegrationContext:
    """Context that uses a cone integration strategy"""

    def __init__(self, strategy: ConeIntegrationStrategy):
        self._strategy = strategy

    @classmethod
    def for_dimension(cls, p: int, config: Optional[QuadratureConfig] = None,
                      n_samples: Optional[int] = None, seed: Optional[int] = None,
                      workers: int = 1, monitor: Optional[MonteCarloMonitor] = None) -> 'ConeIntegrationContext':
        """Quadrature for p = 1, importance sampling otherwise."""
        if p == 1:
            return cls(ScalarQuadratureStrategy(config))
        return cls(WishartImportanceStrategy(
            n_samples=Config.MC_SAMPLES if n_samples is None else n_samples,
            seed=Config.SEED if seed is None else seed,
            workers=workers,
            monitor=monitor,
        ))

    def integrate(self, log_kernel: LogKernel, phi: StackFunction, z: np.ndarray) -> NumericTransform:
        """Integrate using the current strategy"""
        return self._strategy.integrate(log_kernel, phi, z)

    def get_current_method(self) -> str:
        """Get the name of the current method"""
        return self._strategy.get_method_name()
