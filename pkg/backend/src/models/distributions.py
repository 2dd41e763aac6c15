"""Distribution descriptors: Kotz parameters, Kotz vector/matrix models, KW and IKW."""

from dataclasses import dataclass
from typing import Any, Dict, Optional
import json

import numpy as np

from ..errors import DimensionMismatchError, DomainError, PreconditionError
from ..numerics.matops import SpdMatrix, as_spd
from ..numerics.specfun import WhittakerIndex


@dataclass(frozen=True)
class KotzParams:
    """Shape triple (q, theta, s) of the Kotz density generator z^{q-1} exp(-theta z^s)."""
    q: float
    theta: float
    s: float = 1.0

    def __post_init__(self):
        for name in ('q', 'theta', 's'):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"Kotz parameter {name} must be finite")
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")

    @classmethod
    def normal(cls) -> 'KotzParams':
        """The parameters that give the multivariate normal family."""
        return cls(q=1.0, theta=0.5, s=1.0)

    @property
    def is_normal(self) -> bool:
        return self.q == 1.0 and self.theta == 0.5 and self.s == 1.0

    def check_dimension(self, dim: int):
        """Raise unless 2q + dim > 2."""
        if not 2.0 * self.q + dim > 2.0:
            raise DomainError(f"Kotz constraint 2q + p > 2 fails for q={self.q}, p={dim}")

    def require_unit_power(self, operation: str):
        if self.s != 1.0:
            raise DomainError(f"{operation} has a closed form only for s = 1 (got s={self.s})")

    def to_dict(self) -> Dict[str, Any]:
        return {'q': self.q, 'theta': self.theta, 's': self.s}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KotzParams':
        return cls(q=float(data['q']), theta=float(data['theta']), s=float(data.get('s', 1.0)))


@dataclass(frozen=True)
class KotzVectorDist:
    """Vector Kotz-type distribution with location mu and scale sigma."""
    mu: np.ndarray
    sigma: SpdMatrix
    params: KotzParams

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'sigma', as_spd(self.sigma))
        if mu.shape[0] != self.sigma.dim:
            raise DimensionMismatchError(f"mu has {mu.shape[0]} entries, sigma is {self.sigma.dim}x{self.sigma.dim}")
        self.params.check_dimension(self.dim)

    @property
    def dim(self) -> int:
        return self.sigma.dim


@dataclass(frozen=True)
class KotzModel:
    """n uncorrelated Kotz vectors sharing a joint density generator of dimension n*p."""
    n: int
    vector_dist: KotzVectorDist

    def __post_init__(self):
        if int(self.n) != self.n:
            raise DomainError(f"sample count must be an integer, got {self.n}")
        if not self.n > self.vector_dist.dim:
            raise DomainError(f"Kotz model needs n > p (n={self.n}, p={self.vector_dist.dim})")
        self.vector_dist.params.check_dimension(self.n * self.vector_dist.dim)

    @property
    def p(self) -> int:
        return self.vector_dist.dim

    @property
    def joint_dim(self) -> int:
        return self.n * self.p


@dataclass(frozen=True)
class KWDist:
    """Kotz-Wishart distribution KW_p(nu, sigma) of the SSP matrix of n = nu + 1 Kotz vectors."""
    p: int
    nu: float
    sigma: SpdMatrix
    params: KotzParams

    def __post_init__(self):
        object.__setattr__(self, 'sigma', as_spd(self.sigma))
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.p}")
        if self.sigma.dim != self.p:
            raise DimensionMismatchError(f"sigma is {self.sigma.dim}x{self.sigma.dim}, expected p={self.p}")
        if not self.nu >= self.p:
            raise DomainError(f"degrees of freedom must satisfy nu >= p (nu={self.nu}, p={self.p})")
        self.params.check_dimension(self.p)
        self.params.check_dimension(self.n * self.p)

    @property
    def n(self) -> float:
        return self.nu + 1

    @property
    def np_dim(self) -> float:
        return self.n * self.p

    @property
    def whittaker_index(self) -> WhittakerIndex:
        return WhittakerIndex.for_kotz(self.params.q, self.p)

    @property
    def m(self) -> float:
        """(nu - p - 1)/2, the truncation index of the eigenvalue cdf series."""
        return 0.5 * (self.nu - self.p - 1)

    def require_integer_m(self) -> int:
        m = self.m
        if m < 1 or m != int(m):
            raise PreconditionError(
                f"m = (nu - p - 1)/2 must be a positive integer, got {m} (nu={self.nu}, p={self.p})"
            )
        return int(m)

    def require_sample_count(self) -> int:
        if self.nu != int(self.nu):
            raise DomainError(f"sampling needs an integer nu, got {self.nu}")
        return int(self.nu) + 1

    def with_sigma(self, sigma) -> 'KWDist':
        return KWDist(self.p, self.nu, as_spd(sigma), self.params)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'nu': self.nu,
            'sigma': self.sigma.array.tolist(),
            **self.params.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KWDist':
        try:
            sigma = SpdMatrix(data['sigma'])
            p = int(data.get('p', sigma.dim))
            nu = float(data['nu'])
            params = KotzParams.from_dict(data)
        except KeyError as e:
            raise DomainError(f"distribution spec is missing field {e}") from e
        return cls(p=p, nu=int(nu) if nu == int(nu) else nu, sigma=sigma, params=params)

    @classmethod
    def from_json(cls, text: str) -> 'KWDist':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DomainError(f"invalid distribution JSON: {e}") from e
        return cls.from_dict(data)


@dataclass(frozen=True)
class IKWDist:
    """Inverted Kotz-Wishart distribution IKW_p(d, V)."""
    p: int
    d: float
    V: SpdMatrix
    params: KotzParams

    def __post_init__(self):
        object.__setattr__(self, 'V', as_spd(self.V))
        if self.V.dim != self.p:
            raise DimensionMismatchError(f"V is {self.V.dim}x{self.V.dim}, expected p={self.p}")
        if not self.d > 2 * self.p:
            raise DomainError(f"IKW needs d > 2p (d={self.d}, p={self.p})")
        self.params.check_dimension(self.p)

    @property
    def nu(self) -> float:
        """Degrees of freedom of the KW law whose inverse this is."""
        return self.d - self.p - 1

    @property
    def whittaker_index(self) -> WhittakerIndex:
        return WhittakerIndex.for_kotz(self.params.q, self.p)

    @classmethod
    def of_inverse(cls, dist: KWDist) -> 'IKWDist':
        """Law of A^{-1} when A ~ KW_p(nu, sigma): IKW_p(nu + p + 1, sigma^{-1})."""
        from ..numerics.matops import inverse_spd
        return cls(dist.p, dist.nu + dist.p + 1, inverse_spd(dist.sigma), dist.params)

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 'd': self.d, 'V': self.V.array.tolist(), **self.params.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'IKWDist':
        V = SpdMatrix(data['V'])
        return cls(p=int(data.get('p', V.dim)), d=float(data['d']), V=V, params=KotzParams.from_dict(data))


@dataclass(frozen=True)
class VarmaKernelParams:
    """Kernel parameters of the M-Varma transform (s = 1 implicit)."""
    q: float
    p: int

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"M-Varma parameter q must be positive, got {self.q}")
        if not 2.0 * self.q + self.p > 2.0:
            raise DomainError(f"M-Varma kernel needs 2q + p > 2 (q={self.q}, p={self.p})")

    @property
    def alpha(self) -> float:
        return (2.0 * self.q - self.p) / 4.0

    @property
    def beta(self) -> float:
        return (2.0 * self.q + self.p - 2.0) / 4.0

    @property
    def xi(self) -> float:
        return (2.0 * self.q + self.p - 4.0) / 4.0

    @property
    def whittaker_index(self) -> WhittakerIndex:
        return WhittakerIndex(self.alpha, self.beta)

    def with_q(self, q: float) -> 'VarmaKernelParams':
        return VarmaKernelParams(q=q, p=self.p)

    def to_dict(self) -> Dict[str, Any]:
        return {'q': self.q, 'p': self.p, 'alpha': self.alpha, 'beta': self.beta, 'xi': self.xi}


def kw_from_options(p: Optional[int], nu: float, q: float, theta: float, s: float, sigma) -> KWDist:
    """Build a KWDist from loose inline options (sigma defaults to the identity)."""
    if sigma is None:
        if p is None:
            raise DomainError("either p or sigma is required")
        sigma = np.eye(int(p))
    sigma = as_spd(sigma)
    return KWDist(p=int(p) if p is not None else sigma.dim, nu=nu, sigma=sigma,
                  params=KotzParams(q=q, theta=theta, s=s))
