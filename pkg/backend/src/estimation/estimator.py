"""
Precision-matrix estimation under the Efron-Morris loss.

Estimators of Sigma^{-1} are constant multiples alpha A^{-1} of the inverse
SSP matrix. The risk of alpha A^{-1} is g(alpha)/nu with
g(alpha) = alpha^2/c0 - 2 alpha + c1, minimized at alpha = c0.
"""

import logging
import math
import threading
from typing import List, Optional, Sequence

import numpy as np

from ..errors import ConvergenceError, DimensionMismatchError, DomainError
from ..distributions.kw import c0 as _c0, c1 as _c1, sample_kw_batch
from ..models.distributions import KWDist
from ..models.reports import RiskReport
from ..numerics.matops import MatrixLike, as_array, as_spd, inverse
from ..numerics.montecarlo import run_chunks
from ..patterns.observer import MonteCarloMonitor

logger = logging.getLogger(__name__)

# Sampled A with a larger condition number are redrawn
CONDITION_LIMIT = 1e12
MIN_RISK_SAMPLES = 100


def _check_sample_size(dist: KWDist):
    if not dist.n > dist.p + 2:
        raise DomainError(f"estimation needs n > p + 2 (n={dist.n}, p={dist.p})")


def unbiased_constant(dist: KWDist) -> float:
    """c0 such that c0 A^{-1} is unbiased for Sigma^{-1}."""
    _check_sample_size(dist)
    return _c0(dist)


def em_loss(delta: MatrixLike, sigma_inv: MatrixLike, a: MatrixLike, *, nu: float) -> float:
    """
    Efron-Morris loss tr[(Delta - Sigma^{-1})^2 A] / (nu tr Sigma^{-1}).

    Args:
        delta: Symmetric estimate of the precision matrix
        sigma_inv: True precision matrix
        a: SSP matrix
        nu: Degrees of freedom n - 1 of the sample behind A (keyword only)

    Returns:
        The loss, nonnegative for SPD A
    """
    delta, sigma_inv, a = as_array(delta), as_spd(sigma_inv).array, as_spd(a).array
    p = sigma_inv.shape[0]
    if delta.shape != (p, p) or a.shape != (p, p):
        raise DimensionMismatchError(f"shapes {delta.shape}, {sigma_inv.shape}, {a.shape} differ")
    if not nu > p + 1:
        raise DomainError(f"loss needs nu > p + 1 (nu={nu}, p={p})")
    diff = delta - sigma_inv
    return float(np.trace(diff @ diff @ a)) / (nu * float(np.trace(sigma_inv)))


def _loss_batch(alpha: float, inverses: np.ndarray, batch: np.ndarray, sigma_inv: np.ndarray, nu: float) -> np.ndarray:
    diff = alpha * inverses - sigma_inv[None, :, :]
    return np.einsum('kij,kjl,kli->k', diff, diff, batch) / (nu * np.trace(sigma_inv))


def g_function(alpha: float, dist: KWDist) -> float:
    """g(alpha) = alpha^2/c0 - 2 alpha + c1."""
    return alpha ** 2 / unbiased_constant(dist) - 2.0 * alpha + _c1(dist)


def risk_closed(alpha: float, dist: KWDist) -> float:
    """Closed-form risk g(alpha)/nu of alpha A^{-1}; independent of Sigma."""
    return g_function(alpha, dist) / dist.nu


def best_alpha(dist: KWDist) -> float:
    """Risk-minimizing multiplier c0, checked against neighbours c0 +- 1e-4 c0."""
    best = unbiased_constant(dist)
    delta = 1e-4 * best
    centre = g_function(best, dist)
    if not (g_function(best - delta, dist) > centre and g_function(best + delta, dist) > centre):
        raise ConvergenceError(f"g is not minimized at c0={best}")
    return best


def _conditioned_draws(dist: KWDist, rejected: List[int], lock: threading.Lock,
                       monitor: Optional[MonteCarloMonitor]):
    def task(rng: np.random.Generator, count: int) -> np.ndarray:
        kept = []
        needed = count
        while needed > 0:
            batch = sample_kw_batch(dist, needed, rng)
            good = np.linalg.cond(batch) <= CONDITION_LIMIT
            kept.append(batch[good])
            dropped = int(needed - good.sum())
            if dropped:
                with lock:
                    rejected[0] += dropped
                if monitor:
                    monitor.log_event('draws_rejected', f"{dropped} ill-conditioned draws",
                                      metadata={'rejected': dropped, 'requested': needed})
            needed = dropped
        return np.concatenate(kept, axis=0) if kept else np.empty((0, dist.p, dist.p))
    return task


def sample_conditioned(dist: KWDist, n_samples: int, seed: int, workers: int = 1,
                       monitor: Optional[MonteCarloMonitor] = None):
    """Draw n_samples SSP matrices, redrawing numerically singular ones; returns (draws, rejected)."""
    rejected = [0]
    task = _conditioned_draws(dist, rejected, threading.Lock(), monitor)
    draws = run_chunks(task, n_samples, seed, workers, monitor)
    return draws, rejected[0]


def _report(alpha: float, dist: KWDist, draws: np.ndarray, inverses: np.ndarray, rejected: int) -> RiskReport:
    losses = _loss_batch(alpha, inverses, draws, inverse(dist.sigma), dist.nu)
    n = losses.shape[0]
    return RiskReport(
        alpha=float(alpha),
        closed_risk=risk_closed(alpha, dist),
        mc_risk=float(losses.mean()),
        mc_stderr=float(losses.std(ddof=1) / math.sqrt(n)),
        n_samples=n,
        rejected=rejected,
    )


def risk_mc(alpha: float, dist: KWDist, n_samples: int, seed: int, workers: int = 1,
            monitor: Optional[MonteCarloMonitor] = None) -> RiskReport:
    """
    Monte Carlo risk of alpha A^{-1}.

    Args:
        alpha: Multiplier of A^{-1}
        dist: KW distribution with integer nu
        n_samples: Number of draws (at least 100)
        seed: Master seed
        workers: Number of substreams
        monitor: Optional run monitor

    Returns:
        RiskReport with the closed-form and the Monte Carlo risk
    """
    return risk_table([alpha], dist, n_samples, seed, workers, monitor)[0]


def risk_table(alphas: Sequence[float], dist: KWDist, n_samples: int, seed: int, workers: int = 1,
               monitor: Optional[MonteCarloMonitor] = None) -> List[RiskReport]:
    """RiskReport per multiplier, all evaluated on the same draws."""
    _check_sample_size(dist)
    if n_samples < MIN_RISK_SAMPLES:
        raise DomainError(f"risk Monte Carlo needs at least {MIN_RISK_SAMPLES} samples, got {n_samples}")
    draws, rejected = sample_conditioned(dist, n_samples, seed, workers, monitor)
    if rejected:
        logger.warning("Redrew %d ill-conditioned SSP matrices", rejected)
    inverses = np.linalg.inv(draws)
    inverses = 0.5 * (inverses + np.swapaxes(inverses, -1, -2))
    reports = [_report(alpha, dist, draws, inverses, rejected) for alpha in alphas]
    logger.info("Risk table: %d multipliers, %d draws", len(reports), n_samples)
    return reports
