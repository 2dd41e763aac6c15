"""Kotz vector/matrix distributions and the (inverted) Kotz-Wishart law."""

from .kotz import (
    covariance_scale, kotz_logpdf, kotz_matrix_logpdf, kotz_pdf, radial_moment,
    sample_kotz_matrix, sample_radial,
)
from .kw import (
    c0, c1, expected_zonal, gen_variance_moment, ikw_logpdf, ikw_pdf, inv_cdf_matrix, inverse_mean,
    kw_logpdf, kw_pdf, largest_eig_inv_cdf, mean, mgf, prob_greater, sample_ikw_batch, sample_kw,
    sample_kw_batch, second_moment, smallest_eig_cdf, smallest_eig_survival,
)
