"""Dataclass descriptors for distributions, reports and run settings."""

from .distributions import IKWDist, KotzModel, KotzParams, KotzVectorDist, KWDist, VarmaKernelParams
from .reports import NumericTransform, RiskReport
from .run_config import OutputFormat, RunConfig

__all__ = [
    'KotzParams', 'KotzVectorDist', 'KotzModel', 'KWDist', 'IKWDist', 'VarmaKernelParams',
    'RiskReport', 'NumericTransform', 'RunConfig', 'OutputFormat',
]
