"""
Kotz-Wishart Toolkit - matrix-variate Kotz-type distributions
Samplers, densities, moments, eigenvalue cdfs, a precision-matrix
estimator and the M-Varma transform, checked against Monte Carlo
and quadrature oracles.
"""

__version__ = "1.0.0"
__author__ = "Kotz-Wishart Toolkit Team"
