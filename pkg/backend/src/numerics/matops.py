"""
Small dense symmetric / SPD matrix kernels.

Dimensions are expected to stay at or below ten, so everything is a direct
O(p^3) numpy/scipy call. Positive definiteness is decided by the success of
a Cholesky factorization with a relative pivot tolerance.
"""

import json
import logging
import threading
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from ..errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError, SingularMatrixError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PIVOT_TOL = 1e-12


def _as_square(entries) -> np.ndarray:
    array = np.array(entries, dtype=float)
    if array.ndim == 0:
        array = array.reshape(1, 1)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DomainError("matrix has non-finite entries")
    return array


def _is_symmetric(array: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(array))))
    return bool(np.max(np.abs(array - array.T)) <= SYMMETRY_TOL * scale)


def _try_cholesky(array: np.ndarray):
    """Lower factor, or None when the matrix is not positive definite."""
    try:
        factor = np.linalg.cholesky(array)
    except np.linalg.LinAlgError:
        return None
    max_diag = float(np.max(np.diag(array)))
    if max_diag <= 0 or np.min(np.diag(factor)) ** 2 <= PIVOT_TOL * max_diag:
        return None
    return factor


class SpdMatrix:
    """Symmetric positive-definite matrix with a lazily cached Cholesky factor."""

    def __init__(self, entries):
        array = _as_square(entries)
        if not _is_symmetric(array):
            raise DomainError("matrix is not symmetric")
        self._array = 0.5 * (array + array.T)
        self._array.setflags(write=False)
        self._factor = None
        self._lock = threading.Lock()
        # construction is the positive-definiteness check
        self.factor

    @property
    def dim(self) -> int:
        return self._array.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def factor(self) -> np.ndarray:
        """Lower-triangular L with L L' = A (computed once)."""
        if self._factor is None:
            with self._lock:
                if self._factor is None:
                    factor = _try_cholesky(self._array)
                    if factor is None:
                        raise NotPositiveDefiniteError("matrix is not positive definite")
                    factor.setflags(write=False)
                    self._factor = factor
        return self._factor

    @classmethod
    def identity(cls, p: int) -> 'SpdMatrix':
        return cls(np.eye(p))

    def __array__(self, dtype=None, copy=None):
        return self._array if dtype is None else self._array.astype(dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim}, rows={self._array.tolist()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return bool(np.array_equal(self._array, other._array))

    __hash__ = None

    def to_dict(self) -> dict:
        return {"dim": self.dim, "rows": self._array.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> 'SpdMatrix':
        matrix = cls(data["rows"])
        if "dim" in data and int(data["dim"]) != matrix.dim:
            raise DimensionMismatchError(f"declared dim {data['dim']} but rows give {matrix.dim}")
        return matrix


MatrixLike = Union[SpdMatrix, np.ndarray]


def as_array(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, SpdMatrix):
        return matrix.array
    return _as_square(matrix)


def as_spd(matrix: MatrixLike) -> SpdMatrix:
    return matrix if isinstance(matrix, SpdMatrix) else SpdMatrix(matrix)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def cholesky(matrix: MatrixLike) -> np.ndarray:
    """Lower-triangular factor L with L L' = A."""
    return as_spd(matrix).factor


def sqrt_spd(matrix: MatrixLike) -> SpdMatrix:
    """Unique symmetric positive-definite square root."""
    values, vectors = np.linalg.eigh(as_spd(matrix).array)
    root = (vectors * np.sqrt(values)) @ vectors.T
    return SpdMatrix(0.5 * (root + root.T))


def det(matrix: MatrixLike) -> float:
    if isinstance(matrix, SpdMatrix):
        return float(np.prod(np.diag(matrix.factor)) ** 2)
    return float(np.linalg.det(as_array(matrix)))


def log_det(matrix: MatrixLike) -> float:
    """log |A| for an SPD matrix."""
    return float(2.0 * np.sum(np.log(np.diag(as_spd(matrix).factor))))


def inverse(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, SpdMatrix):
        result = linalg.cho_solve((matrix.factor, True), np.eye(matrix.dim))
        return 0.5 * (result + result.T)
    array = as_array(matrix)
    try:
        result = np.linalg.inv(array)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"matrix is singular: {e}") from e
    if not np.all(np.isfinite(result)):
        raise SingularMatrixError("matrix is numerically singular")
    return result


def inverse_spd(matrix: MatrixLike) -> SpdMatrix:
    return SpdMatrix(inverse(as_spd(matrix)))


def trace(matrix: MatrixLike) -> float:
    return float(np.trace(as_array(matrix)))


def eigen_sym(matrix: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix."""
    array = as_array(matrix)
    if not _is_symmetric(array):
        raise DomainError("eigen_sym needs a symmetric matrix")
    return np.linalg.eigh(0.5 * (array + array.T))


def loewner_greater(a: MatrixLike, b: MatrixLike) -> bool:
    """True iff A - B is positive definite."""
    left, right = as_array(a), as_array(b)
    if left.shape != right.shape:
        raise DimensionMismatchError(f"shapes {left.shape} and {right.shape} differ")
    diff = left - right
    return _try_cholesky(0.5 * (diff + diff.T)) is not None


def product_eigenvalues(m: MatrixLike, s: MatrixLike) -> np.ndarray:
    """Eigenvalues of M S for symmetric M and SPD S, via S^{1/2} M S^{1/2}."""
    m_array = as_array(m)
    root = sqrt_spd(s).array
    if root.shape != m_array.shape:
        raise DimensionMismatchError(f"shapes {m_array.shape} and {root.shape} differ")
    sym = root @ m_array @ root
    return np.linalg.eigvalsh(0.5 * (sym + sym.T))


def random_spd(p: int, rng: np.random.Generator, spread: float = 1.0) -> SpdMatrix:
    """Random SPD matrix with eigenvalues in [0.5, 0.5 + 2*spread]."""
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    values = 0.5 + 2.0 * spread * rng.random(p)
    matrix = (q * values) @ q.T
    return SpdMatrix(0.5 * (matrix + matrix.T))


# ---------------------------------------------------------------------------
# Matrix I/O
# ---------------------------------------------------------------------------

def parse_matrix(text: str) -> np.ndarray:
    """
    Parse a matrix from text.

    Accepts the JSON form {"dim": p, "rows": [[...], ...]} or whitespace
    separated rows, one row per line.
    """
    stripped = text.strip()
    if not stripped:
        raise DomainError("empty matrix input")
    if stripped.startswith('{'):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise DomainError(f"invalid matrix JSON: {e}") from e
        if "rows" not in data:
            raise DomainError("matrix JSON needs a 'rows' field")
        array = _as_square(data["rows"])
        if "dim" in data and int(data["dim"]) != array.shape[0]:
            raise DimensionMismatchError(f"declared dim {data['dim']} but rows give {array.shape[0]}")
        return array
    try:
        rows = [[float(token) for token in line.split()] for line in stripped.splitlines() if line.strip()]
    except ValueError as e:
        raise DomainError(f"invalid matrix entry: {e}") from e
    if len({len(row) for row in rows}) != 1:
        raise DimensionMismatchError("matrix rows have different lengths")
    return _as_square(rows)


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise DomainError(f"cannot read matrix file {path}: {e}") from e
    return parse_matrix(text)


def matrix_to_json(matrix: MatrixLike) -> dict:
    array = as_array(matrix)
    return {"dim": int(array.shape[0]), "rows": array.tolist()}
