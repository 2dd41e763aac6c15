"""Numerical building blocks: quadrature, special functions, matrices, zonal polynomials, Monte Carlo."""
