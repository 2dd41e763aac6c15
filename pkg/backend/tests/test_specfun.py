import math

import mpmath
import numpy as np
import pytest

from src.errors import DomainError
from src.numerics import specfun
from src.numerics.quadrature import QuadratureConfig, integrate_semi_infinite, power_substituted
from src.numerics.specfun import (
    WhittakerIndex, log_meijer_g3023, log_multivariate_gamma, log_whittaker_w, mellin_whittaker,
    mellin_whittaker_quadrature, multivariate_gamma, whittaker_moment, whittaker_moment_quadrature,
    whittaker_w, whittaker_w_many,
)


class TestMultivariateGamma:

    @pytest.mark.parametrize("p, a", [(1, 0.7), (2, 1.3), (3, 2.25), (4, 5.0)])
    def test_matches_product_form(self, p, a):
        expected = mpmath.pi ** (p * (p - 1) / 4.0) * mpmath.fprod(
            mpmath.gamma(a - i / 2.0) for i in range(p)
        )
        assert multivariate_gamma(p, a) == pytest.approx(float(expected), rel=1e-12)

    def test_p_one_is_gamma(self):
        assert log_multivariate_gamma(1, 3.5) == pytest.approx(math.lgamma(3.5), rel=1e-14)

    def test_rejects_small_argument(self):
        with pytest.raises(DomainError):
            log_multivariate_gamma(3, 0.9)


class TestWhittaker:

    @pytest.mark.parametrize("alpha, beta", [(0.3, 0.7), (-0.25, 0.75), (0.35, 0.6), (0.0, 0.5), (1.2, 0.9)])
    @pytest.mark.parametrize("z", [0.05, 0.8, 3.0, 25.0])
    def test_against_mpmath(self, alpha, beta, z):
        expected = float(mpmath.whitw(alpha, beta, z))
        assert whittaker_w(WhittakerIndex(alpha, beta), z) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("alpha", [-0.4, 0.1, 0.3, 0.45])
    def test_elementary_line(self, alpha):
        idx = WhittakerIndex(alpha, 0.5 - alpha)
        assert idx.is_elementary
        for z in (0.01, 0.5, 4.0, 40.0):
            assert whittaker_w(idx, z) == pytest.approx(z ** alpha * math.exp(-0.5 * z), rel=1e-10)

    def test_kotz_index(self):
        idx = WhittakerIndex.for_kotz(1.5, 2)
        assert (idx.alpha, idx.beta) == (0.25, 0.75)
        assert WhittakerIndex.for_kotz(1.0, 3).is_elementary

    def test_outside_integral_representation(self):
        idx = WhittakerIndex(1.5, 0.2)
        assert not idx.has_integral_representation
        with pytest.raises(DomainError):
            whittaker_w(idx, 1.0)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(DomainError):
            whittaker_w(WhittakerIndex(0.1, 0.6), 0.0)

    def test_vectorized_exact_path(self):
        idx = WhittakerIndex(0.25, 0.75)
        z = np.array([0.3, 1.0, 2.5, 1.0])
        expected = np.array([whittaker_w(idx, value) for value in z])
        np.testing.assert_allclose(whittaker_w_many(idx, z), expected, rtol=1e-12)

    def test_vectorized_spline_path(self):
        idx = WhittakerIndex(0.25, 0.75)
        z = np.geomspace(0.05, 60.0, 500)
        logs = whittaker_w_many(idx, z, log=True)
        for position in (3, 111, 257, 402, 498):
            expected = math.log(float(mpmath.whitw(0.25, 0.75, z[position])))
            assert abs(logs[position] - expected) < 1e-7

    @pytest.mark.parametrize("idx", [WhittakerIndex(0.25, 0.75), WhittakerIndex.for_kotz(0.8, 3)])
    def test_spline_tail_matches_scalar_path(self, idx):
        z = np.geomspace(0.02, 400.0, 300)
        logs = whittaker_w_many(idx, z, log=True)
        for position in (0, 150, 280, 297, 299):
            assert abs(logs[position] - log_whittaker_w(idx, float(z[position]))) < 1e-8

    def test_spline_budget_falls_back_to_quadrature(self, monkeypatch):
        monkeypatch.setattr(specfun, '_SPLINE_MAX_NODES', 10)
        idx = WhittakerIndex(0.25, 0.75)
        z = np.linspace(0.5, 30.0, 80)
        logs = whittaker_w_many(idx, z, log=True)
        expected = np.array([log_whittaker_w(idx, float(value)) for value in z])
        np.testing.assert_array_equal(logs, expected)


class TestIntegralIdentities:

    def test_mellin_whittaker_grid(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            b, a = rng.uniform(0.2, 2.0), rng.uniform(0.5, 2.0)
            nu, y = rng.uniform(-1.5, 1.5), rng.uniform(1.0, 3.0)
            closed = mellin_whittaker(b, a, nu, y)
            assert mellin_whittaker_quadrature(b, a, nu, y) == pytest.approx(closed, rel=1e-8)

    @pytest.mark.slow
    def test_whittaker_moment_grid(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            idx = WhittakerIndex.for_kotz(rng.uniform(0.8, 2.5), int(rng.integers(1, 4)))
            eps = idx.beta + rng.uniform(0.3, 1.5)
            closed = whittaker_moment(eps, idx)
            assert whittaker_moment_quadrature(eps, idx) == pytest.approx(closed, rel=1e-8)

    def test_whittaker_moment_domain(self):
        with pytest.raises(DomainError):
            whittaker_moment(0.1, WhittakerIndex(0.2, 0.9))

    def test_meijer_elementary_case(self):
        # q = 1, p = 2: W(z) = e^{-z/2}, sigma = 0, so G = e^{-c} c^{-rho}
        idx = WhittakerIndex.for_kotz(1.0, 2)
        for c, rho in ((0.4, 7.0), (2.5, 3.0), (6.0, 0.6)):
            expected = -c - rho * math.log(c)
            assert log_meijer_g3023(c, rho, 0.0, idx) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    @pytest.mark.slow
    def test_meijer_against_defining_integral(self):
        idx = WhittakerIndex.for_kotz(1.5, 2)
        c, rho, sigma = 1.3, 5.0, -0.75
        integral = mpmath.quad(
            lambda x: x ** (rho - 1) * (c + x) ** (-sigma) * mpmath.exp(-x / 2) * mpmath.whitw(idx.alpha, idx.beta, c + x),
            [0, 1, 10, mpmath.inf],
        )
        expected = float(-c / 2 - rho * mpmath.log(c) - mpmath.loggamma(rho) + mpmath.log(integral))
        assert log_meijer_g3023(c, rho, sigma, idx) == pytest.approx(expected, rel=1e-8)

    def test_meijer_domain(self):
        idx = WhittakerIndex.for_kotz(1.5, 2)
        with pytest.raises(DomainError):
            log_meijer_g3023(0.0, 1.0, 0.0, idx)
        with pytest.raises(DomainError):
            log_meijer_g3023(1.0, -1.0, 0.0, idx)


class TestQuadrature:

    def test_semi_infinite_gamma_integral(self):
        value, _ = integrate_semi_infinite(lambda t: 2.5 * math.log(t) - t if t > 0 else -math.inf)
        assert value == pytest.approx(math.gamma(3.5), rel=1e-10)

    def test_power_substitution_removes_singularity(self):
        log_rest, factor = power_substituted(lambda t: -t, -0.5)
        value, _ = integrate_semi_infinite(log_rest)
        assert factor * value == pytest.approx(math.sqrt(math.pi), rel=1e-9)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            QuadratureConfig(rel_tol=0.0)
        assert QuadratureConfig(1e-12).loosened(1e-9).rel_tol == 1e-9
