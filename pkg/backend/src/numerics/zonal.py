"""
Zonal polynomials and hypergeometric functions of matrix argument.

Zonal polynomials C_kappa are stored as exact rational coefficients in the
monomial symmetric basis,

    C_kappa(X) = sum_{lambda <= kappa} c[kappa, lambda] M_lambda(eigenvalues of X),

built with the classical recurrence on the monic polynomials
(Muirhead, Aspects of Multivariate Statistical Theory, ch. 7) and normalized
so that sum_{kappa |- k} C_kappa(X) = (tr X)^k. A table restricted to
partitions with at most ``max_parts`` parts is closed under the recurrence
and the normalization, which keeps high-degree tables cheap for small p.
"""

import logging
import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from ..config import Config
from ..errors import DomainError, SeriesDivergenceWarning, SingularSystemError, UnsupportedDegreeError
from .matops import MatrixLike, as_array, eigen_sym

logger = logging.getLogger(__name__)

TABLE_FORMAT_VERSION = 1
_TABLE_HEADER = "# zonal-table v{version} max_parts={max_parts} max_degree={max_degree}"
_BINOMIAL_CONDITION_LIMIT = 1e10
_BINOMIAL_SEED = 7919


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of positive integers."""

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(part) for part in self.parts)
        object.__setattr__(self, 'parts', parts)
        if any(part < 1 for part in parts):
            raise DomainError(f"partition parts must be positive, got {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"partition parts must be weakly decreasing, got {parts}")

    @classmethod
    def of(cls, *parts: int) -> 'Partition':
        return cls(tuple(parts))

    @classmethod
    def parse(cls, text: str) -> 'Partition':
        """Parse '2,1', '(2,1)' or '-' / '' for the empty partition."""
        cleaned = text.strip().strip('()[]')
        if cleaned in ('', '-'):
            return cls()
        try:
            return cls(tuple(int(token) for token in cleaned.split(',') if token.strip()))
        except ValueError as e:
            raise DomainError(f"invalid partition '{text}'") from e

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __str__(self) -> str:
        return ','.join(str(part) for part in self.parts) if self.parts else '-'

    def dominated_by(self, other: 'Partition') -> bool:
        """True when every partial sum of self is at most that of other."""
        if self.weight != other.weight:
            return False
        mine = 0
        theirs = 0
        for i in range(max(self.length, other.length)):
            mine += self.parts[i] if i < self.length else 0
            theirs += other.parts[i] if i < other.length else 0
            if mine > theirs:
                return False
        return True

    def contained_in(self, other: 'Partition') -> bool:
        if self.length > other.length:
            return False
        return all(part <= other.parts[i] for i, part in enumerate(self.parts))


def _partition_tuples(k: int, largest: int, slots: int) -> Iterator[Tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    if slots == 0:
        return
    for first in range(min(k, largest), 0, -1):
        for rest in _partition_tuples(k - first, first, slots - 1):
            yield (first,) + rest


def partitions(k: int, max_parts: int) -> List[Partition]:
    """All partitions of k with at most max_parts parts, reverse-lexicographic."""
    if k < 0 or max_parts < 1:
        raise DomainError(f"partitions needs k >= 0 and max_parts >= 1 (got {k}, {max_parts})")
    return [Partition(parts) for parts in _partition_tuples(k, k, max_parts)]


# ---------------------------------------------------------------------------
# Monomial symmetric functions
# ---------------------------------------------------------------------------

def monomial_symmetric(lam: Partition, values: Sequence):
    """
    M_lambda at the given variables: the sum over distinct rearrangements of
    lambda (padded with zeros) of prod x_i^{exponent_i}.

    Works for floats and for numpy Polynomial variables.
    """
    count = len(values)
    if lam.length > count:
        return 0.0

    @lru_cache(maxsize=None)
    def assign(i: int, remaining: Tuple[int, ...]):
        if not remaining:
            return 1.0
        if len(remaining) > count - i:
            return 0.0
        total = assign(i + 1, remaining)
        for part in sorted(set(remaining), reverse=True):
            rest = list(remaining)
            rest.remove(part)
            total = total + values[i] ** part * assign(i + 1, tuple(rest))
        return total

    return assign(0, lam.parts)


def _rho(partition: Partition) -> int:
    return sum(part * (part - i - 1) for i, part in enumerate(partition.parts))


def _raise_parts(lam: Partition, i: int, j: int, t: int) -> Partition:
    parts = list(lam.parts)
    parts[i] += t
    parts[j] -= t
    return Partition(tuple(sorted((part for part in parts if part > 0), reverse=True)))


def _monic_coefficients(kappa: Partition, below: List[Partition]) -> Dict[Partition, Fraction]:
    """Coefficients of the monic zonal polynomial (c[kappa, kappa] = 1)."""
    coefficients = {kappa: Fraction(1)}
    rho_kappa = _rho(kappa)
    for lam in below:
        if not lam.dominated_by(kappa):
            continue
        total = Fraction(0)
        parts = lam.parts
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                for t in range(1, parts[j] + 1):
                    mu = _raise_parts(lam, i, j, t)
                    c_mu = coefficients.get(mu)
                    if c_mu:
                        total += (parts[i] - parts[j] + 2 * t) * c_mu
        if total:
            coefficients[lam] = total / (rho_kappa - _rho(lam))
    return coefficients


def _build_degree(k: int, max_parts: int) -> Dict[Partition, Dict[Partition, Fraction]]:
    ordered = partitions(k, max_parts)
    monic = {kappa: _monic_coefficients(kappa, ordered[pos + 1:]) for pos, kappa in enumerate(ordered)}

    # normalization from (tr X)^k = sum_lambda k!/prod(lambda_i!) M_lambda
    scale: Dict[Partition, Fraction] = {}
    for lam in ordered:
        target = Fraction(math.factorial(k), math.prod(math.factorial(part) for part in lam.parts))
        covered = sum((scale[kappa] * monic[kappa].get(lam, 0) for kappa in scale), Fraction(0))
        scale[lam] = target - covered

    return {
        kappa: {lam: scale[kappa] * coefficient for lam, coefficient in monic[kappa].items()}
        for kappa in ordered
    }


class ZonalTable:
    """Exact zonal coefficients for degrees 0..max_degree and at most max_parts parts."""

    def __init__(self, max_degree: int, max_parts: int,
                 coefficients: Optional[Dict[int, Dict[Partition, Dict[Partition, Fraction]]]] = None):
        if max_degree < 0 or max_parts < 1:
            raise DomainError(f"invalid zonal table size (degree={max_degree}, parts={max_parts})")
        self.max_degree = max_degree
        self.max_parts = max_parts
        if coefficients is None:
            coefficients = {k: _build_degree(k, max_parts) for k in range(max_degree + 1)}
            logger.info("Built zonal table: degree <= %d, parts <= %d", max_degree, max_parts)
        self.coefficients = coefficients
        self._floats = {
            k: {
                kappa: [(lam, float(value)) for lam, value in row.items()]
                for kappa, row in rows.items()
            }
            for k, rows in coefficients.items()
        }

    def covers(self, max_degree: int, max_parts: int) -> bool:
        return self.max_degree >= max_degree and self.max_parts >= max_parts

    def partitions(self, k: int, max_parts: Optional[int] = None) -> List[Partition]:
        self._check_degree(k)
        limit = self.max_parts if max_parts is None else min(max_parts, self.max_parts)
        return [kappa for kappa in self.coefficients[k] if kappa.length <= limit]

    def coefficient(self, kappa: Partition, lam: Partition) -> Fraction:
        self._check_degree(kappa.weight)
        return self.coefficients[kappa.weight].get(kappa, {}).get(lam, Fraction(0))

    def _check_degree(self, k: int):
        if k > self.max_degree:
            raise UnsupportedDegreeError(f"degree {k} exceeds the zonal table degree {self.max_degree}")

    def evaluate_degree(self, k: int, eigs: Sequence) -> Dict[Partition, float]:
        """All C_kappa with |kappa| = k and length <= len(eigs)."""
        self._check_degree(k)
        if len(eigs) > self.max_parts:
            raise UnsupportedDegreeError(
                f"table built for at most {self.max_parts} parts, got {len(eigs)} eigenvalues"
            )
        monomials: Dict[Partition, object] = {}
        result = {}
        for kappa, row in self._floats[k].items():
            if kappa.length > len(eigs):
                continue
            terms = []
            for lam, value in row:
                if lam.length > len(eigs):
                    continue
                if lam not in monomials:
                    monomials[lam] = monomial_symmetric(lam, eigs)
                terms.append(value * monomials[lam])
            result[kappa] = _sum(terms)
        return result

    def evaluate(self, kappa: Partition, eigs: Sequence):
        if kappa.length > len(eigs):
            return 0.0
        self._check_degree(kappa.weight)
        return self.evaluate_degree(kappa.weight, eigs)[kappa]

    def to_text(self) -> str:
        """Versioned plain-text export: degree, partition, monomial, numerator, denominator."""
        lines = [_TABLE_HEADER.format(version=TABLE_FORMAT_VERSION, max_parts=self.max_parts,
                                      max_degree=self.max_degree)]
        for k in range(self.max_degree + 1):
            for kappa, row in self.coefficients[k].items():
                for lam, value in row.items():
                    lines.append(f"{k} {kappa} {lam} {value.numerator} {value.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> 'ZonalTable':
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines or not lines[0].startswith("# zonal-table v"):
            raise DomainError("missing zonal table header")
        header = dict(token.split('=') for token in lines[0].split()[3:])
        version = int(lines[0].split()[2][1:])
        if version != TABLE_FORMAT_VERSION:
            raise DomainError(f"unsupported zonal table version {version}")
        max_degree, max_parts = int(header['max_degree']), int(header['max_parts'])
        coefficients: Dict[int, Dict[Partition, Dict[Partition, Fraction]]] = {
            k: {} for k in range(max_degree + 1)
        }
        for line in lines[1:]:
            k, kappa, lam, numerator, denominator = line.split()
            row = coefficients[int(k)].setdefault(Partition.parse(kappa), {})
            row[Partition.parse(lam)] = Fraction(int(numerator), int(denominator))
        return cls(max_degree, max_parts, coefficients)


def _sum(terms: list):
    if terms and all(isinstance(term, float) for term in terms):
        return math.fsum(terms)
    total = 0.0
    for term in terms:
        total = total + term
    return total


_tables: List[ZonalTable] = []
_tables_lock = threading.Lock()


def get_zonal_table(max_parts: int, max_degree: Optional[int] = None) -> ZonalTable:
    """
    Shared table covering (max_degree, max_parts), built at most once.

    Args:
        max_parts: Largest partition length needed (the matrix dimension)
        max_degree: Largest degree needed; defaults to Config.ZONAL_MAX_DEGREE

    Returns:
        A table at least that large
    """
    degree = Config.ZONAL_MAX_DEGREE if max_degree is None else max_degree
    if degree > Config.ZONAL_DEGREE_LIMIT:
        raise UnsupportedDegreeError(
            f"degree {degree} exceeds the configured limit {Config.ZONAL_DEGREE_LIMIT}"
        )
    with _tables_lock:
        for table in _tables:
            if table.covers(degree, max_parts):
                return table
        table = ZonalTable(degree, max_parts)
        _tables.append(table)
        return table


# ---------------------------------------------------------------------------
# Zonal polynomial evaluation
# ---------------------------------------------------------------------------

def _eigs_of(x) -> np.ndarray:
    array = np.asarray(x, dtype=float)
    if array.ndim == 2:
        return eigen_sym(array)[0]
    return array.ravel()


def zonal(kappa: Partition, eigs: Sequence[float], table: Optional[ZonalTable] = None) -> float:
    """C_kappa at a symmetric matrix with the given eigenvalues."""
    eigs = _eigs_of(eigs)
    if kappa.length > len(eigs):
        raise DomainError(f"partition {kappa} longer than the {len(eigs)} eigenvalues")
    table = table or get_zonal_table(len(eigs))
    return float(table.evaluate(kappa, list(eigs)))


def zonal_all(k: int, eigs: Sequence[float], table: Optional[ZonalTable] = None) -> Dict[Partition, float]:
    """All C_kappa of degree k (length <= number of eigenvalues)."""
    eigs = _eigs_of(eigs)
    table = table or get_zonal_table(len(eigs), max(k, Config.ZONAL_MAX_DEGREE))
    return {kappa: float(value) for kappa, value in table.evaluate_degree(k, list(eigs)).items()}


def zonal_matrix(kappa: Partition, x: MatrixLike, table: Optional[ZonalTable] = None) -> float:
    return zonal(kappa, eigen_sym(as_array(x))[0], table)


def gen_pochhammer(a: float, kappa: Partition) -> float:
    """(a)_kappa = prod_i (a - (i-1)/2)_{k_i}."""
    return float(math.prod(
        math.prod(a - 0.5 * i + j for j in range(part))
        for i, part in enumerate(kappa.parts)
    ))


# ---------------------------------------------------------------------------
# Hypergeometric series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesResult:
    """Truncated series value with its last included degree contribution."""

    value: float
    last_contribution: float
    degrees: int

    def to_dict(self) -> dict:
        return {"value": self.value, "last_contribution": self.last_contribution, "degrees": self.degrees}


def tail_is_growing(contributions: Sequence[float], window: int = 3) -> bool:
    """True when the last ``window`` degree contributions are non-decreasing in magnitude."""
    if len(contributions) < window:
        return False
    tail = [abs(value) for value in contributions[-window:]]
    if all(value == 0.0 for value in tail):
        return False
    return all(tail[i] <= tail[i + 1] for i in range(window - 1))


def hypergeometric_pfq(a: Sequence[float], b: Sequence[float], x, max_degree: int) -> SeriesResult:
    """
    Truncated pFq(a; b; X) = sum_k sum_kappa prod(a_i)_kappa / prod(b_j)_kappa C_kappa(X) / k!.

    Args:
        a: Upper parameters
        b: Lower parameters
        x: Symmetric matrix or its eigenvalues
        max_degree: Last degree included

    Returns:
        SeriesResult with the value and the last degree's contribution
    """
    if len(a) > len(b) + 1:
        raise DomainError(f"pFq needs len(a) <= len(b) + 1 (got {len(a)}, {len(b)})")
    eigs = list(_eigs_of(x))
    table = get_zonal_table(len(eigs), max_degree)

    contributions = []
    for k in range(max_degree + 1):
        terms = []
        for kappa, c_value in table.evaluate_degree(k, eigs).items():
            numerator = math.prod(gen_pochhammer(value, kappa) for value in a)
            if numerator == 0.0:
                continue
            denominator = math.prod(gen_pochhammer(value, kappa) for value in b)
            if denominator == 0.0:
                raise DomainError(f"lower parameter makes (b)_{kappa} vanish")
            terms.append(numerator / denominator * c_value)
        contributions.append(math.fsum(terms) / math.factorial(k))

    if tail_is_growing(contributions):
        message = f"pFq contributions still growing at degree {max_degree}"
        logger.warning(message)
        warnings.warn(message, SeriesDivergenceWarning, stacklevel=2)
    return SeriesResult(math.fsum(contributions), contributions[-1], max_degree)


# ---------------------------------------------------------------------------
# Generalized binomial coefficients and Laguerre polynomials
# ---------------------------------------------------------------------------

_BINOMIAL_CACHE_SIZE = 1024


def _binomial_system(kappa: Partition, s: int, dim: int, table: ZonalTable,
                     rng: np.random.Generator) -> Tuple[List[Partition], np.ndarray, np.ndarray]:
    unknowns = table.partitions(s, dim)
    c_kappa_identity = table.evaluate(kappa, [1.0] * dim)
    c_identity = table.evaluate_degree(s, [1.0] * dim)
    rows, rhs = [], []
    for _ in range(2 * len(unknowns) + 2):
        diag = np.sort(rng.uniform(0.25, 1.75, dim))[::-1]
        variables = [Polynomial([1.0, value]) for value in diag]
        expansion = table.evaluate(kappa, variables)
        coef = expansion.coef[s] if len(expansion.coef) > s else 0.0
        rhs.append(coef / c_kappa_identity)
        c_values = table.evaluate_degree(s, list(diag))
        rows.append([c_values[o] / c_identity[o] for o in unknowns])
    return unknowns, np.array(rows), np.array(rhs)


@lru_cache(maxsize=_BINOMIAL_CACHE_SIZE)
def _binomial_row(kappa: Partition, s: int) -> Mapping[Partition, float]:
    dim = max(kappa.length, 1)
    table = get_zonal_table(dim, max(kappa.weight, Config.ZONAL_MAX_DEGREE))
    attempts = Config.BINOMIAL_MAX_ATTEMPTS
    for attempt in range(attempts):
        rng = np.random.default_rng([_BINOMIAL_SEED, kappa.weight, s, attempt])
        unknowns, matrix, rhs = _binomial_system(kappa, s, dim, table, rng)
        condition = np.linalg.cond(matrix)
        if np.isfinite(condition) and condition < _BINOMIAL_CONDITION_LIMIT:
            solution, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
            # read-only, the cached row is shared between callers
            return MappingProxyType(dict(zip(unknowns, solution.tolist())))
        logger.warning(
            "Binomial system for kappa=%s, s=%d ill-conditioned (cond=%.3g), attempt %d/%d",
            kappa, s, condition, attempt + 1, attempts,
        )
    raise SingularSystemError(f"could not solve binomial system for kappa={kappa}, degree {s}")


def gen_binomial(kappa: Partition, omicron: Partition) -> float:
    """
    Generalized binomial coefficient defined by

        C_kappa(I + Y) / C_kappa(I) = sum_s sum_{o |- s} binom(kappa, o) C_o(Y) / C_o(I),

    solved per degree from evaluations at random distinct diagonal Y.
    """
    if omicron.weight > kappa.weight:
        return 0.0
    if omicron.weight == 0:
        return 1.0
    if omicron.length > kappa.length:
        return 0.0
    return _binomial_row(kappa, omicron.weight).get(omicron, 0.0)


def gen_laguerre(gamma: float, kappa: Partition, x: MatrixLike) -> float:
    """
    L_kappa^gamma(X) = (gamma+t)_kappa C_kappa(I)
        * sum_s sum_{o |- s} binom(kappa, o) C_o(-X) / ((gamma+t)_o C_o(I)),  t = (p+1)/2.
    """
    if not gamma > -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {gamma}")
    eigs = list(eigen_sym(as_array(x))[0])
    p = len(eigs)
    if kappa.length > p:
        raise DomainError(f"partition {kappa} longer than the dimension {p}")
    t = 0.5 * (p + 1)
    table = get_zonal_table(p, max(kappa.weight, Config.ZONAL_MAX_DEGREE))
    identity = [1.0] * p
    negated = [-value for value in eigs]

    terms = []
    for s in range(kappa.weight + 1):
        c_neg = table.evaluate_degree(s, negated)
        c_identity = table.evaluate_degree(s, identity)
        for omicron, c_value in c_neg.items():
            binom = gen_binomial(kappa, omicron)
            if binom == 0.0:
                continue
            terms.append(binom * c_value / (gen_pochhammer(gamma + t, omicron) * c_identity[omicron]))
    return gen_pochhammer(gamma + t, kappa) * table.evaluate(kappa, identity) * math.fsum(terms)
