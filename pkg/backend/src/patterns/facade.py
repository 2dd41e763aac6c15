"""
Facade Pattern Implementation
One entry point over samplers, densities, moments, cdfs, estimator risk and
transforms; every method returns a pandas DataFrame ready for emission
"""

from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd
from scipy import special

from ..distributions import kw
from ..errors import DomainError, KotzWishartError
from ..estimation import estimator
from ..models.distributions import IKWDist, KotzParams, KWDist, VarmaKernelParams
from ..models.run_config import RunConfig
from ..numerics.matops import SpdMatrix, random_spd
from ..numerics.montecarlo import MeanEstimate, run_chunks
from ..numerics.quadrature import integrate_semi_infinite
from ..numerics.specfun import WhittakerIndex, whittaker_moment, whittaker_moment_quadrature, whittaker_w
from ..numerics.zonal import Partition, get_zonal_table
from ..transforms import varma
from .observer import MonteCarloMonitor

logger = logging.getLogger(__name__)

TRANSFORMS = ('power-det', 'det-zonal', 'hypergeom', 'laguerre', 'psi')
SELFTEST_LEVELS = ('quick', 'full')

# Monte Carlo self-checks use a 4 standard error band
_MC_SIGMAS = 4.0


def _entry_columns(p: int) -> List[str]:
    return [f"a{i + 1}{j + 1}" for i in range(p) for j in range(p)]


class KotzWishartFacade:
    """
    Facade that provides a simplified interface to the toolkit modules
    Coordinates run settings, Monte Carlo monitoring and table assembly
    """

    def __init__(self, run: RunConfig):
        self.run = run
        self.monitor = MonteCarloMonitor(run='kwtool')
        logger.info("Kotz-Wishart facade initialized (seed=%d, workers=%d)", run.seed, run.workers)

    # ------------------------------------------------------------------
    # Sampling, densities, moments
    # ------------------------------------------------------------------

    def sample_table(self, dist: KWDist, count: int) -> pd.DataFrame:
        """``count`` KW draws, one row per draw with the p*p entries"""
        draws = run_chunks(
            lambda rng, size: kw.sample_kw_batch(dist, size, rng),
            count, self.run.seed, self.run.workers, self.monitor,
        )
        frame = pd.DataFrame(draws.reshape(count, dist.p * dist.p), columns=_entry_columns(dist.p))
        frame.insert(0, 'draw', np.arange(count))
        return frame

    def pdf_table(self, dist: KWDist, a: SpdMatrix, integrate: bool = False) -> pd.DataFrame:
        """Density and log-density at A; optional p = 1 normalization check"""
        config = self.run.quadrature
        log_value = kw.kw_logpdf(a, dist, config)
        row: Dict[str, Any] = {'pdf': math.exp(log_value), 'logpdf': log_value}
        if integrate:
            row['integral'] = self.normalization(dist)
        return pd.DataFrame([row])

    def normalization(self, dist: KWDist) -> float:
        """int_0^inf kw_pdf(a) da for p = 1"""
        if dist.p != 1:
            raise DomainError("--integrate is available for p = 1 only")
        config = self.run.quadrature.loosened(1e-9)

        def log_density(a: float) -> float:
            if a <= 0.0:
                return -math.inf
            return kw.kw_logpdf([[a]], dist, self.run.quadrature)

        value, _ = integrate_semi_infinite(log_density, config, label="kw_pdf normalization")
        return value

    def moments_table(self, dist: KWDist, t_values: Sequence[float]) -> pd.DataFrame:
        """c1, entries of E(A) and E(A^2), E(|A|^t) for each t, then c0 and E(A^-1) when they exist"""
        rows = [{'quantity': 'c1', 'index': '', 'value': kw.c1(dist)}]
        for name, matrix in (('mean', kw.mean(dist)), ('second_moment', kw.second_moment(dist))):
            for i in range(dist.p):
                for j in range(dist.p):
                    rows.append({'quantity': name, 'index': f"{i + 1},{j + 1}", 'value': float(matrix[i, j])})
        for t in t_values:
            rows.append({'quantity': 'gen_variance_moment', 'index': f"t={t:g}",
                         'value': kw.gen_variance_moment(t, dist)})
        if dist.n > dist.p + 2:
            rows.append({'quantity': 'c0', 'index': '', 'value': kw.c0(dist)})
            inverse = kw.inverse_mean(dist)
            for i in range(dist.p):
                for j in range(dist.p):
                    rows.append({'quantity': 'inverse_mean', 'index': f"{i + 1},{j + 1}",
                                 'value': float(inverse[i, j])})
        return pd.DataFrame(rows, columns=['quantity', 'index', 'value'])

    def eig_table(self, dist: KWDist, grid: Sequence[float]) -> pd.DataFrame:
        """Smallest-eigenvalue survival and cdf on a grid of thresholds"""
        config = self.run.quadrature
        rows = []
        for x in sorted(grid):
            raw = kw.smallest_eig_survival(x, dist, clamp=False, config=config)
            survival = min(max(raw, 0.0), 1.0)
            rows.append({'x': x, 'survival': survival, 'cdf': 1.0 - survival, 'survival_raw': raw})
        return pd.DataFrame(rows, columns=['x', 'survival', 'cdf', 'survival_raw'])

    def risk_table(self, dist: KWDist, alphas: Optional[Sequence[float]] = None) -> pd.DataFrame:
        """Closed-form and Monte Carlo risk per multiplier (default 0.8 c0, c0, 1.2 c0)"""
        best = estimator.best_alpha(dist)
        alphas = list(alphas) if alphas else [0.8 * best, best, 1.2 * best]
        reports = estimator.risk_table(alphas, dist, self.run.mc_samples, self.run.seed,
                                       self.run.workers, self.monitor)
        frame = pd.DataFrame([report.to_dict() for report in reports])
        frame['c0'] = best
        return frame

    # ------------------------------------------------------------------
    # Transforms
    # ------------------------------------------------------------------

    def varma_table(self, name: str, z: SpdMatrix, q: float, n: Optional[float] = None,
                    kappa: Partition = Partition(), gamma: float = 0.0,
                    a: Sequence[float] = (), b: Sequence[float] = (), c: float = 1.0) -> pd.DataFrame:
        """Closed-form and numeric value of a named M-Varma transform at Z"""
        if name not in TRANSFORMS:
            raise DomainError(f"unknown transform '{name}' (choose from {', '.join(TRANSFORMS)})")
        p = z.dim
        params = VarmaKernelParams(q=q, p=p)
        if name in ('power-det', 'det-zonal', 'hypergeom') and n is None:
            raise DomainError(f"transform '{name}' needs --n")

        closed, phi = self._transform_pair(name, z, params, n, kappa, gamma, a, b, c)
        numeric = varma.varma_numeric(phi, z, params, self.run.quadrature, self.run.mc_samples,
                                      self.run.seed, self.run.workers, self.monitor)
        row = {'transform': name, 'closed_form': closed, **numeric.to_dict()}
        return pd.DataFrame([row])

    def _transform_pair(self, name: str, z: SpdMatrix, params: VarmaKernelParams, n: Optional[float],
                        kappa: Partition, gamma: float, a: Sequence[float], b: Sequence[float],
                        c: float) -> Tuple[float, Callable[[np.ndarray], np.ndarray]]:
        p = params.p
        if name == 'power-det':
            return varma.varma_power_det(z, n, params), varma.phi_power_det(n, p)
        if name == 'det-zonal':
            return varma.varma_det_zonal(z, n, kappa, params), varma.phi_det_zonal(n, kappa, p)
        if name == 'hypergeom':
            series = varma.varma_hypergeom(z, n, a, b, params, self.run.max_degree)
            return series.value, varma.phi_hypergeom(n, a, b, p, self.run.max_degree)
        if name == 'laguerre':
            return varma.varma_laguerre(z, gamma, kappa, params), varma.phi_laguerre(gamma, kappa, p)
        # psi has a closed form only in the scalar Laplace case
        closed = float(special.hyperu(a[0] if a else 1.0, c, z.array[0, 0])) if p == 1 and params.q == 1.0 else math.nan
        return closed, varma.phi_psi(a[0] if a else 1.0, c, p)

    # ------------------------------------------------------------------
    # Self test
    # ------------------------------------------------------------------

    def selftest_table(self, level: str = 'quick') -> pd.DataFrame:
        """Run the invariant checks; one row per check"""
        if level not in SELFTEST_LEVELS:
            raise DomainError(f"unknown selftest level '{level}'")
        checks = list(self._quick_checks())
        if level == 'full':
            checks.extend(self._full_checks())

        rows = []
        for name, check in checks:
            try:
                passed, detail = check()
            except KotzWishartError as e:
                passed, detail = False, f"{e.__class__.__name__}: {e}"
            logger.info("selftest %s: %s (%s)", name, 'pass' if passed else 'FAIL', detail)
            rows.append({'check': name, 'passed': bool(passed), 'detail': detail})
        return pd.DataFrame(rows, columns=['check', 'passed', 'detail'])

    def _quick_checks(self):
        rng = np.random.default_rng(self.run.seed)
        normal = KotzParams.normal()

        def whittaker_line():
            idx = WhittakerIndex(alpha=0.3, beta=0.2)
            worst = max(
                abs(whittaker_w(idx, z) / (z ** 0.3 * math.exp(-0.5 * z)) - 1.0) for z in (0.1, 1.0, 7.5)
            )
            return worst < 1e-10, f"max rel err {worst:.2e}"

        def wishart_reduction():
            worst = 0.0
            for p in (1, 2, 3):
                sigma = random_spd(p, rng)
                a = random_spd(p, rng, spread=2.0)
                dist = KWDist(p, p + 3, sigma, normal)
                worst = max(worst, abs(kw.kw_logpdf(a, dist) - kw.wishart_logpdf(a, p + 3, sigma)))
                inverse_dist = IKWDist(p, 2 * p + 3, sigma, normal)
                worst = max(worst, abs(kw.ikw_logpdf(a, inverse_dist)
                                       - kw.inv_wishart_logpdf(a, 2 * p + 3, sigma)))
            return worst < 1e-8, f"max log diff {worst:.2e}"

        def trace_identity():
            eigs = list(random_spd(3, rng).array.diagonal())
            table = get_zonal_table(3, 6)
            worst = max(
                abs(sum(table.evaluate_degree(k, eigs).values()) / sum(eigs) ** k - 1.0) for k in range(7)
            )
            return worst < 1e-10, f"max rel err {worst:.2e}"

        def estimator_normal():
            dist = KWDist(2, 7, SpdMatrix.identity(2), normal)
            c0 = estimator.unbiased_constant(dist)
            risk = estimator.risk_closed(c0, dist)
            ok = abs(c0 - 4.0) < 1e-12 and abs(risk - 3.0 / 7.0) < 1e-12
            return ok, f"c0={c0:.15g}, risk={risk:.15g}"

        def zonal_constant():
            dist = KWDist(2, 7, random_spd(2, rng), KotzParams(q=1.5, theta=0.7))
            omega = random_spd(2, rng).array
            lhs = kw.expected_zonal(omega, Partition.of(1), dist)
            rhs = float(np.trace(omega @ kw.mean(dist)))
            return abs(lhs / rhs - 1.0) < 1e-10, f"rel err {abs(lhs / rhs - 1.0):.2e}"

        def laplace_kernel():
            z, x = random_spd(2, rng), random_spd(2, rng)
            value = varma.varma_kernel(z, x, VarmaKernelParams(q=1.0, p=2))
            expected = math.exp(-float(np.trace(z.array @ x.array)))
            return abs(value / expected - 1.0) < 1e-10, f"rel err {abs(value / expected - 1.0):.2e}"

        def khatri_form():
            sigma = random_spd(2, rng)
            dist = KWDist(2, 7, sigma, normal)
            lam = 0.3 * sigma.array
            value = kw.prob_greater(lam, dist, clamp=False, config=self.run.quadrature)
            half = 0.5 * np.linalg.eigvalsh(np.linalg.solve(sigma.array, lam))
            table = get_zonal_table(2, 4)
            series = sum(
                c_value / math.factorial(k)
                for k in range(5)
                for kappa, c_value in table.evaluate_degree(k, list(half)).items()
                if not kappa.parts or kappa.parts[0] <= 2
            )
            expected = math.exp(-float(np.sum(half))) * series
            return abs(value / expected - 1.0) < 1e-8, f"rel err {abs(value / expected - 1.0):.2e}"

        return [
            ('whittaker_elementary_line', whittaker_line),
            ('wishart_reduction', wishart_reduction),
            ('zonal_trace_identity', trace_identity),
            ('estimator_normal_case', estimator_normal),
            ('zonal_constant_vs_mean', zonal_constant),
            ('varma_laplace_kernel', laplace_kernel),
            ('khatri_cdf', khatri_form),
        ]

    def _full_checks(self):
        def whittaker_moment_identity():
            idx = WhittakerIndex.for_kotz(1.7, 2)
            closed = whittaker_moment(1.3, idx)
            numeric = whittaker_moment_quadrature(1.3, idx, self.run.quadrature)
            return abs(numeric / closed - 1.0) < 1e-8, f"rel err {abs(numeric / closed - 1.0):.2e}"

        def mgf_reduction():
            sigma = SpdMatrix([[1.0, 0.2], [0.2, 0.8]])
            dist = KWDist(2, 6, sigma, KotzParams.normal())
            omega = 0.05 * np.eye(2)
            series = kw.mgf(omega, dist, 20)
            expected = np.linalg.det(np.eye(2) - 2.0 * omega @ sigma.array) ** (-3.0)
            return abs(series.value / expected - 1.0) < 1e-6, f"rel err {abs(series.value / expected - 1.0):.2e}"

        def mean_oracle():
            dist = KWDist(2, 7, SpdMatrix([[1.0, 0.3], [0.3, 2.0]]), KotzParams(q=1.5, theta=0.7))
            draws = run_chunks(lambda rng, size: kw.sample_kw_batch(dist, size, rng),
                               min(self.run.mc_samples, 50000), self.run.seed, self.run.workers, self.monitor)
            estimate = MeanEstimate.of(draws)
            ok = estimate.within(kw.mean(dist), _MC_SIGMAS)
            return ok, f"{estimate.n} draws, band {_MC_SIGMAS:g} s.e."

        return [
            ('whittaker_moment_identity', whittaker_moment_identity),
            ('mgf_wishart_reduction', mgf_reduction),
            ('mean_monte_carlo', mean_oracle),
        ]
