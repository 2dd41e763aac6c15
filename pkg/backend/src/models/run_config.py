"""Per-invocation run configuration of the command-line front end."""

from dataclasses import dataclass, asdict, fields
from enum import Enum
from typing import Any, Dict, Optional

from ..config import Config
from ..errors import DomainError
from ..numerics.quadrature import QuadratureConfig

_SEED_MAX = 2 ** 64 - 1


class OutputFormat(Enum):
    """Machine-readable output formats."""
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class RunConfig:
    """Seed, parallelism, output format and numeric overrides for one command."""
    seed: int
    workers: int = 1
    output_format: OutputFormat = OutputFormat.JSON
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 2000
    max_degree: int = 8
    mc_samples: int = 200000

    def __post_init__(self):
        if not 0 <= self.seed <= _SEED_MAX:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.mc_samples < 0:
            raise DomainError(f"mc-samples must be >= 0, got {self.mc_samples}")
        if self.max_degree < 0:
            raise DomainError(f"max-degree must be >= 0, got {self.max_degree}")
        # raises DomainError on invalid tolerances
        self.quadrature

    @property
    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(self.rel_tol, self.abs_tol, self.max_subdivisions)

    @classmethod
    def defaults(cls) -> Dict[str, Any]:
        return {
            'seed': Config.SEED,
            'workers': Config.WORKERS,
            'output_format': Config.OUTPUT_FORMAT,
            'rel_tol': Config.QUAD_REL_TOL,
            'abs_tol': Config.QUAD_ABS_TOL,
            'max_subdivisions': Config.QUAD_MAX_SUBDIVISIONS,
            'max_degree': Config.ZONAL_MAX_DEGREE,
            'mc_samples': Config.MC_SAMPLES,
        }

    @classmethod
    def resolve(cls, run_file: Optional[Dict[str, Any]] = None, **overrides) -> 'RunConfig':
        """Merge Config defaults, then the YAML run file, then explicit CLI flags."""
        known = {field.name for field in fields(cls)}
        merged = cls.defaults()
        for source in (run_file or {}, overrides):
            unknown = set(source) - known
            if unknown:
                raise DomainError(f"unknown run settings: {', '.join(sorted(unknown))}")
            merged.update({key: value for key, value in source.items() if value is not None})
        return cls.from_dict(merged)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['output_format'] = self.output_format.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        try:
            output_format = OutputFormat(str(data.get('output_format', 'json')).lower())
        except ValueError as e:
            raise DomainError(f"unknown output format {data.get('output_format')!r}") from e
        return cls(
            seed=int(data['seed']),
            workers=int(data.get('workers', 1)),
            output_format=output_format,
            rel_tol=float(data.get('rel_tol', 1e-10)),
            abs_tol=float(data.get('abs_tol', 0.0)),
            max_subdivisions=int(data.get('max_subdivisions', 2000)),
            max_degree=int(data.get('max_degree', 8)),
            mc_samples=int(data.get('mc_samples', 200000)),
        )
