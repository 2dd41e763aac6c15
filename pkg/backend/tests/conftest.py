"""Shared fixtures; puts backend/ on sys.path so ``src`` and ``cli`` import as in main.py."""

import sys
from pathlib import Path

import numpy as np
import pytest

backend_dir = Path(__file__).resolve().parent.parent
if str(backend_dir) not in sys.path:
    sys.path.insert(0, str(backend_dir))

from src.models.distributions import KotzParams, KWDist  # noqa: E402
from src.numerics.matops import SpdMatrix  # noqa: E402
from src.numerics.quadrature import QuadratureConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def quad():
    return QuadratureConfig(rel_tol=1e-10, abs_tol=0.0, max_subdivisions=2000)


@pytest.fixture
def sigma2():
    return SpdMatrix([[1.0, 0.3], [0.3, 2.0]])


@pytest.fixture
def kw_nonnormal(sigma2):
    """p = 2, n = 8 (m = 2), q = 1.5, theta = 0.7."""
    return KWDist(2, 7, sigma2, KotzParams(q=1.5, theta=0.7))


@pytest.fixture
def kw_normal(sigma2):
    """The Wishart case with nu = 7."""
    return KWDist(2, 7, sigma2, KotzParams.normal())
