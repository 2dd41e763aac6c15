"""
Configuration management for the Kotz-Wishart toolkit.
Loads configuration from environment variables and .env file.
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

# Load .env file from project root
project_root = Path(__file__).parent.parent.parent
env_path = project_root / '.env'
load_dotenv(dotenv_path=env_path)


class Config:
    """Toolkit configuration."""

    # ============================================
    # Run defaults
    # ============================================
    TOOLKIT_NAME: str = os.getenv('KW_TOOLKIT_NAME', 'Kotz-Wishart Toolkit')
    SEED: int = int(os.getenv('KW_SEED', '20240601'))
    WORKERS: int = int(os.getenv('KW_WORKERS', '1'))
    OUTPUT_FORMAT: str = os.getenv('KW_OUTPUT_FORMAT', 'json')
    MC_SAMPLES: int = int(os.getenv('KW_MC_SAMPLES', '200000'))

    # ============================================
    # Quadrature
    # ============================================
    QUAD_REL_TOL: float = float(os.getenv('KW_QUAD_REL_TOL', '1e-10'))
    QUAD_ABS_TOL: float = float(os.getenv('KW_QUAD_ABS_TOL', '0.0'))
    QUAD_MAX_SUBDIVISIONS: int = int(os.getenv('KW_QUAD_MAX_SUBDIVISIONS', '2000'))

    # ============================================
    # Zonal polynomials and series
    # ============================================
    ZONAL_MAX_DEGREE: int = int(os.getenv('KW_ZONAL_MAX_DEGREE', '8'))
    ZONAL_DEGREE_LIMIT: int = int(os.getenv('KW_ZONAL_DEGREE_LIMIT', '30'))
    BINOMIAL_MAX_ATTEMPTS: int = int(os.getenv('KW_BINOMIAL_MAX_ATTEMPTS', '3'))

    # ============================================
    # Importance sampling over the positive-definite cone
    # ============================================
    IS_CLIP_PERCENTILE: float = float(os.getenv('KW_IS_CLIP_PERCENTILE', '99.99'))
    IS_MAX_REL_STDERR: float = float(os.getenv('KW_IS_MAX_REL_STDERR', '0.05'))

    # Logging
    LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'WARNING')
    LOG_FORMAT: str = os.getenv('LOG_FORMAT', 'json')

    @classmethod
    def as_dict(cls) -> Dict[str, Any]:
        """
        Get the active settings as a plain dictionary.

        Returns:
            dict: setting name -> value
        """
        return {
            name: getattr(cls, name)
            for name in vars(cls)
            if name.isupper()
        }

    @classmethod
    def load_run_file(cls, path: Optional[str]) -> Dict[str, Any]:
        """
        Read a YAML run file with RunConfig overrides.

        Args:
            path: Path to the YAML file, or None

        Returns:
            dict: Parsed mapping (empty when no file is given)
        """
        if not path:
            return {}
        with open(path, 'r', encoding='utf-8') as handle:
            data = yaml.safe_load(handle) or {}
        if not isinstance(data, dict):
            raise ValueError(f"Run file {path} must contain a mapping")
        return data

    @classmethod
    def validate(cls) -> bool:
        """
        Validate that all configuration values are in range.

        Returns:
            bool: True if configuration is valid
        """
        if cls.WORKERS < 1:
            raise ValueError("KW_WORKERS must be >= 1")

        if cls.OUTPUT_FORMAT not in ('json', 'csv'):
            raise ValueError("KW_OUTPUT_FORMAT must be 'json' or 'csv'")

        if cls.QUAD_REL_TOL <= 0 or cls.QUAD_ABS_TOL < 0:
            raise ValueError("Quadrature tolerances must satisfy rel > 0, abs >= 0")

        if cls.QUAD_MAX_SUBDIVISIONS < 1:
            raise ValueError("KW_QUAD_MAX_SUBDIVISIONS must be >= 1")

        if not 0 <= cls.ZONAL_MAX_DEGREE <= cls.ZONAL_DEGREE_LIMIT:
            raise ValueError("KW_ZONAL_MAX_DEGREE must lie in [0, KW_ZONAL_DEGREE_LIMIT]")

        if not 50.0 < cls.IS_CLIP_PERCENTILE <= 100.0:
            raise ValueError("KW_IS_CLIP_PERCENTILE must lie in (50, 100]")

        return True

    @classmethod
    def print_config(cls):
        """Print current configuration (for debugging)."""
        print("=" * 50)
        print(f"{cls.TOOLKIT_NAME} Configuration")
        print("=" * 50)
        for name, value in cls.as_dict().items():
            print(f"{name}: {value}")
        print("=" * 50)
