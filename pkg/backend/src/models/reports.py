"""Result records returned by the estimator and the numeric transforms."""

from dataclasses import dataclass, asdict
from typing import Any, Dict
import math

from ..errors import DomainError


@dataclass(frozen=True)
class RiskReport:
    """Closed-form and Monte Carlo risk of the estimator alpha * A^{-1}."""
    alpha: float
    closed_risk: float
    mc_risk: float
    mc_stderr: float
    n_samples: int
    rejected: int = 0

    def __post_init__(self):
        if self.n_samples > 1 and not self.mc_stderr > 0:
            raise DomainError("Monte Carlo standard error must be positive with more than one sample")

    @property
    def z_score(self) -> float:
        if self.mc_stderr == 0:
            return math.inf if self.mc_risk != self.closed_risk else 0.0
        return (self.mc_risk - self.closed_risk) / self.mc_stderr

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RiskReport':
        return cls(**data)


@dataclass(frozen=True)
class NumericTransform:
    """Numerically evaluated M-Varma transform."""
    estimate: float
    stderr: float
    method: str
    n_samples: int = 0
    clipped_fraction: float = 0.0
    proposal_scale: float = float('nan')

    @property
    def rel_stderr(self) -> float:
        return abs(self.stderr / self.estimate) if self.estimate else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
