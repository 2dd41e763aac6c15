import math

import numpy as np
import pytest
from scipy import special

from src.errors import DimensionMismatchError, DivergenceError, DomainError
from src.models.distributions import VarmaKernelParams
from src.numerics.matops import inverse, log_det
from src.numerics.specfun import multivariate_gamma
from src.numerics.zonal import Partition, gen_pochhammer, zonal
from src.patterns.strategy import ConeIntegrationContext, ScalarQuadratureStrategy
from src.transforms.varma import (
    convolution_defect, laguerre_sample_count, log_omega, phi_det_zonal, phi_hypergeom, phi_laguerre, phi_power_det,
    psi_q, varma_det_zonal, varma_hypergeom, varma_kernel, varma_laguerre, varma_numeric, varma_power_det,
)

MC_SIGMAS = 4.0
Z2 = np.array([[2.0, 0.3], [0.3, 1.0]])


class TestKernel:

    def test_unit_q_is_laplace_kernel(self):
        params = VarmaKernelParams(1.0, 2)
        x = np.array([[0.7, 0.1], [0.1, 0.4]])
        assert varma_kernel(Z2, x, params) == pytest.approx(math.exp(-np.trace(Z2 @ x)), rel=1e-9)

    def test_kernel_indices(self):
        params = VarmaKernelParams(1.5, 2)
        assert (params.alpha, params.beta, params.xi) == (0.25, 0.75, 0.25)

    def test_kernel_constraint(self):
        with pytest.raises(DomainError):
            VarmaKernelParams(0.4, 1)
        with pytest.raises(DomainError):
            VarmaKernelParams(-1.0, 3)

    def test_trace_must_be_positive(self):
        with pytest.raises(DomainError):
            varma_kernel(Z2, np.zeros((2, 2)), VarmaKernelParams(1.5, 2))

    def test_omega_vanishes_at_unit_q(self):
        params = VarmaKernelParams(1.0, 3)
        for k in range(6):
            assert log_omega(k, 6.0, params) == pytest.approx(0.0, abs=1e-13)


class TestScalarClosedForms:

    @pytest.mark.parametrize("q", [1.5, 0.8])
    def test_power_det(self, q):
        params = VarmaKernelParams(q, 1)
        z = np.array([[1.7]])
        numeric = varma_numeric(phi_power_det(4.0, 1), z, params)
        assert numeric.method == "quadrature"
        assert numeric.estimate == pytest.approx(varma_power_det(z, 4.0, params), rel=1e-6)

    @pytest.mark.parametrize("q", [1.5, 0.8])
    def test_det_zonal(self, q):
        params = VarmaKernelParams(q, 1)
        z = np.array([[1.7]])
        kappa = Partition.of(2)
        numeric = varma_numeric(phi_det_zonal(4.0, kappa, 1), z, params)
        assert numeric.estimate == pytest.approx(varma_det_zonal(z, 4.0, kappa, params), rel=1e-6)

    @pytest.mark.parametrize("q", [1.5, 0.8])
    def test_laguerre(self, q):
        params = VarmaKernelParams(q, 1)
        z = np.array([[2.0]])
        kappa = Partition.of(2)
        numeric = varma_numeric(phi_laguerre(0.5, kappa, 1), z, params)
        assert numeric.estimate == pytest.approx(varma_laguerre(z, 0.5, kappa, params), rel=1e-6)

    def test_laguerre_first_degree_at_unit_q(self):
        gamma, z = 0.7, 2.5
        expected = math.gamma(gamma + 2.0) * z ** (-gamma - 1.0) * (1.0 - 1.0 / z)
        value = varma_laguerre([[z]], gamma, Partition.of(1), VarmaKernelParams(1.0, 1))
        assert value == pytest.approx(expected, rel=1e-10)

    def test_laguerre_sample_count(self):
        assert laguerre_sample_count(0.5, 2) == 5.0

    def test_psi_is_tricomi_at_unit_q(self):
        a, c, x = 1.5, 0.7, 2.0
        result = psi_q(a, c, [[x]], VarmaKernelParams(1.0, 1))
        assert result.estimate == pytest.approx(special.hyperu(a, c, x), rel=1e-6)

    def test_psi_domain(self):
        with pytest.raises(DomainError):
            psi_q(0.4, 1.0, np.eye(2), VarmaKernelParams(1.0, 2))

    def test_convolution_holds_at_unit_q(self):
        assert convolution_defect(1.5, 2.0, 1.3, VarmaKernelParams(1.0, 1)) < 1e-6

    def test_convolution_needs_scalar_kernel(self):
        with pytest.raises(DomainError):
            convolution_defect(1.5, 2.0, 1.3, VarmaKernelParams(1.0, 2))

    @pytest.mark.parametrize("q", [1.0001, 0.9999])
    def test_psi_continuous_at_unit_q(self, q):
        a, c, x = 1.5, 0.7, 2.0
        near = psi_q(a, c, [[x]], VarmaKernelParams(q, 1)).estimate
        assert near == pytest.approx(special.hyperu(a, c, x), rel=1e-3)

    @pytest.mark.parametrize("a, b", [([-2.0], [1.5]), ([-3.0, 0.7], [1.2])])
    @pytest.mark.parametrize("q", [1.5, 0.8])
    def test_hypergeom_terminating_series(self, a, b, q):
        params = VarmaKernelParams(q, 1)
        z = np.array([[2.5]])
        closed = varma_hypergeom(z, 4.0, a, b, params, max_degree=8)
        numeric = varma_numeric(phi_hypergeom(4.0, a, b, 1, 8), z, params)
        assert numeric.estimate == pytest.approx(closed.value, rel=1e-6)

    @pytest.mark.parametrize("q", [1.5, 0.8])
    def test_convolution_defect_off_unit_q(self, q):
        params = VarmaKernelParams(q, 1)
        a1, a2, z = 1.5, 2.0, 1.3

        def transform(a):
            # x^{a-1} = |X|^{(n-p-2)/2} with n = 2a + 1
            return varma_power_det([[z]], 2.0 * a + 1.0, params)

        product = transform(a1) * transform(a2)
        expected = abs(math.exp(special.betaln(a1, a2)) * transform(a1 + a2) - product) / product
        defect = convolution_defect(a1, a2, z, params)
        assert defect > 0.01
        assert defect == pytest.approx(expected, rel=1e-4, abs=1e-7)


class TestLaplaceReductions:

    def test_power_det(self):
        n = 5.0
        expected = multivariate_gamma(2, 2.0) * math.exp(-2.0 * log_det(Z2))
        assert varma_power_det(Z2, n, VarmaKernelParams(1.0, 2)) == pytest.approx(expected, rel=1e-12)

    def test_det_zonal(self):
        n, kappa = 5.0, Partition.of(2, 1)
        z_inv_eigs = np.linalg.eigvalsh(inverse(Z2))
        expected = (
            multivariate_gamma(2, 2.0) * math.exp(-2.0 * log_det(Z2))
            * gen_pochhammer(2.0, kappa) * zonal(kappa, z_inv_eigs)
        )
        assert varma_det_zonal(Z2, n, kappa, VarmaKernelParams(1.0, 2)) == pytest.approx(expected, rel=1e-10)

    def test_hypergeom_exponential(self):
        # 0F0(X) = etr(X), so the transform is Gamma_p(a) |Z - I|^{-a}
        z = 4.0 * np.eye(2)
        result = varma_hypergeom(z, 5.0, [], [], VarmaKernelParams(1.0, 2), max_degree=25)
        expected = multivariate_gamma(2, 2.0) * np.linalg.det(z - np.eye(2)) ** (-2.0)
        assert result.value == pytest.approx(expected, rel=1e-8)

    def test_hypergeom_divergence(self):
        with pytest.raises(DivergenceError):
            varma_hypergeom(0.5 * np.eye(2), 5.0, [], [], VarmaKernelParams(1.0, 2), max_degree=10)

    def test_sample_count(self):
        with pytest.raises(DomainError):
            varma_power_det(Z2, 2.0, VarmaKernelParams(1.5, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            varma_power_det(np.eye(3), 5.0, VarmaKernelParams(1.5, 2))

    def test_laguerre_domain(self):
        with pytest.raises(DomainError):
            varma_laguerre(Z2, -1.5, Partition.of(1), VarmaKernelParams(1.5, 2))
        with pytest.raises(DomainError):
            varma_laguerre(Z2, 0.5, Partition.of(1, 1, 1), VarmaKernelParams(1.5, 2))


class TestStrategies:

    def test_selection(self):
        assert ConeIntegrationContext.for_dimension(1).get_current_method() == "quadrature"
        context = ConeIntegrationContext.for_dimension(2, n_samples=100, seed=1)
        assert context.get_current_method() == "wishart-importance"

    def test_context_delegates(self):
        context = ConeIntegrationContext(ScalarQuadratureStrategy())
        assert context.get_current_method() == "quadrature"
        result = context.integrate(lambda t: -t, lambda stack: np.ones(len(stack)), np.eye(1))
        assert result.method == "quadrature"
        assert result.estimate == pytest.approx(1.0, rel=1e-9)

    def test_numeric_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            varma_numeric(phi_power_det(5.0, 2), np.eye(3), VarmaKernelParams(1.5, 2))

    @pytest.mark.slow
    def test_importance_sampling_matches_power_det(self):
        params = VarmaKernelParams(1.5, 2)
        result = varma_numeric(phi_power_det(5.0, 2), Z2, params, n_samples=100000, seed=17, workers=2)
        closed = varma_power_det(Z2, 5.0, params)
        assert result.method == "wishart-importance"
        assert result.n_samples == 100000
        assert result.clipped_fraction <= 1e-3
        assert abs(result.estimate - closed) <= MC_SIGMAS * result.stderr + 2e-3 * closed

    @pytest.mark.slow
    def test_importance_sampling_matches_det_zonal(self):
        params = VarmaKernelParams(1.5, 2)
        kappa = Partition.of(1)
        result = varma_numeric(phi_det_zonal(5.0, kappa, 2), Z2, params, n_samples=50000, seed=23, workers=2)
        closed = varma_det_zonal(Z2, 5.0, kappa, params)
        assert result.method == "wishart-importance"
        assert abs(result.estimate - closed) <= MC_SIGMAS * result.stderr + 2e-3 * closed

    @pytest.mark.slow
    @pytest.mark.parametrize("q", [1.0, 1.5])
    def test_psi_matrix_argument(self, q):
        # c = a + p leaves Gamma_p(a)^{-1} |Y|^{a-p}, the power-det test function with n = 2a
        a = 2.5
        params = VarmaKernelParams(q, 2)
        result = psi_q(a, a + 2.0, Z2, params, n_samples=50000, seed=29, workers=2)
        closed = varma_power_det(Z2, 2.0 * a, params) / multivariate_gamma(2, a)
        assert result.method == "wishart-importance"
        assert abs(result.estimate - closed) <= MC_SIGMAS * result.stderr + 2e-3 * closed
