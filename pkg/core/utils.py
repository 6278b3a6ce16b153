"""
Shared utilities for the spectral zeta toolkit.

Includes the error hierarchy, exact summation, logging setup,
configuration management and stable hashing of run configurations.
"""

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional

import numpy as np
import yaml

logger = logging.getLogger(__name__)


class SpectralError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SpectralError, ValueError):
    """Parameter, index or point outside the admissible domain."""


class PoleError(SpectralError):
    """A finite value was requested exactly at a pole."""


class DivergenceError(SpectralError):
    """A series was requested where it does not converge."""


class ConvergenceError(SpectralError):
    """An iterative solver, quadrature or root search failed."""


class ConfigError(SpectralError):
    """Invalid run configuration or preset."""


def exact_sum(values) -> float:
    """Correctly rounded sum of a real array (math.fsum on the flattened data)."""
    arr = np.asarray(values, dtype=float).ravel()
    return math.fsum(arr.tolist())


@dataclass
class Tolerances:
    """Process-wide numerical tolerances; `configure` loads them from `tolerances.*`."""
    pole: float = 1e-9
    imaginary: float = 1e-9
    quadrature: float = 1e-12
    series: float = 1e-16
    series_cap: int = 10 ** 7

    def configure(self, manager: 'ConfigManager'):
        for f in fields(self):
            current = getattr(self, f.name)
            setattr(self, f.name, type(current)(manager.get(f"tolerances.{f.name}", current)))
        logger.debug("tolerances: %s", self)


TOLERANCES = Tolerances()


def setup_logging(level: Any = 'WARNING'):
    """Configure root logging once for CLI and scripts."""
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.WARNING)
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def config_hash(config: Dict[str, Any]) -> str:
    """Stable short hash of a JSON-serialisable configuration."""
    canonical = json.dumps(config, sort_keys=True, default=str, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]


class ConfigManager:
    """Configuration management for spectral zeta runs."""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or os.path.join(
            os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'configs', 'default.yaml')
        self.config = self._load_default_config()

        if os.path.exists(self.config_file):
            self.load_config(self.config_file)

    def _load_default_config(self) -> Dict[str, Any]:
        """Load default configuration."""
        return {
            'truncation': {
                'one_d': 200,
                'two_d': 64,
                'k_band': 64,
                'tail_one_d': 100000,
                'tail_two_d': 1024
            },
            'collocation': {
                'grid_n': 60
            },
            'tolerances': {
                'pole': 1e-9,
                'imaginary': 1e-9,
                'quadrature': 1e-12,
                'series': 1e-16,
                'series_cap': 10 ** 7
            },
            'cutoff': {
                'a_min': 1e-3,
                'a_max': 1e-1,
                'points': 16
            },
            'performance': {
                'max_worker_threads': 4
            },
            'logging': {
                'level': 'WARNING'
            },
            'export': {
                'default_format': 'json',
                'precision': 12
            }
        }

    def load_config(self, filename: str) -> bool:
        """Load configuration from a YAML or JSON file and merge it over the defaults."""
        try:
            with open(filename, 'r') as f:
                if filename.endswith(('.yaml', '.yml')):
                    user_config = yaml.safe_load(f)
                else:
                    user_config = json.load(f)

            if user_config is None:
                user_config = {}
            if not isinstance(user_config, dict):
                logger.error("Configuration %s is not a mapping", filename)
                return False

            self._merge_config(self.config, user_config)
            return True

        except (OSError, yaml.YAMLError, json.JSONDecodeError) as e:
            logger.error("Error loading config file %s: %s", filename, e)
            return False

    def save_config(self, filename: Optional[str] = None) -> bool:
        """Save configuration to file."""
        filename = filename or self.config_file

        try:
            directory = os.path.dirname(filename)
            if directory:
                os.makedirs(directory, exist_ok=True)

            with open(filename, 'w') as f:
                if filename.endswith(('.yaml', '.yml')):
                    yaml.safe_dump(self.config, f, default_flow_style=False, sort_keys=True)
                else:
                    json.dump(self.config, f, indent=2, sort_keys=True)
            return True

        except OSError as e:
            logger.error("Error saving config file %s: %s", filename, e)
            return False

    def _merge_config(self, default: Dict[str, Any], user: Dict[str, Any]):
        """Recursively merge user config into default config."""
        for key, value in user.items():
            if key in default and isinstance(default[key], dict) and isinstance(value, dict):
                self._merge_config(default[key], value)
            else:
                default[key] = value

    def get(self, key_path: str, default_value: Any = None) -> Any:
        """Get config value using dot notation (e.g., 'truncation.one_d')."""
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default_value

        return value

    def set(self, key_path: str, value: Any):
        """Set config value using dot notation."""
        keys = key_path.split('.')
        config = self.config

        for key in keys[:-1]:
            if key not in config or not isinstance(config[key], dict):
                config[key] = {}
            config = config[key]

        config[keys[-1]] = value
