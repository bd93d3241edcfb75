"""
Configuration management for fraclap.

Defaults live in config/config.yaml. ${VAR} and ${VAR:-default} references are
expanded from the environment (after loading .env) before the YAML is parsed,
so numeric values may come from variables as quoted strings; the typed
accessors and validate() coerce them.
"""

import math
import os
import re
from pathlib import Path
from typing import Any, Dict, Optional
import yaml
from dotenv import load_dotenv

DEFAULT_CONFIG_PATH = "config/config.yaml"

ENV_PATTERN = re.compile(r'\$\{([A-Z_][A-Z0-9_]*)(?::-([^}]*))?\}')
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ConfigLoader:
    """Load, query and validate the YAML configuration."""

    REQUIRED_KEYS = [
        "numerics.abs_tol",
        "numerics.rel_tol",
        "numerics.agreement_tol",
        "ladders.singular.r0",
        "ladders.semigroup.t0",
        "ladders.harmonic.y0",
        "montecarlo.n_paths",
        "montecarlo.seed",
        "logging.level",
    ]

    # Checked when present
    POSITIVE_KEYS = [
        "numerics.abs_tol",
        "numerics.rel_tol",
        "numerics.agreement_tol",
        "numerics.truncation",
        "numerics.inner_radius",
        "numerics.gradient_step",
        "ladders.singular.r0",
        "ladders.semigroup.t0",
        "ladders.harmonic.y0",
        "profile.rho_max",
        "montecarlo.n_paths",
        "montecarlo.dt",
        "montecarlo.ball_radius",
        "montecarlo.max_steps",
        "parallel.threads",
    ]

    CHOICES = {
        "logging.level": LOG_LEVELS,
        "montecarlo.mode": ("exact", "path"),
        "output.format": ("json", "csv", "human"),
    }

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH, env_file: str = ".env"):
        """
        Args:
            config_path: Path to the configuration YAML file
            env_file: dotenv file loaded when it exists
        """
        self.config_path = Path(config_path)
        self.config: Dict[str, Any] = {}

        env_path = Path(env_file)
        if env_path.exists():
            load_dotenv(env_path)

    def load(self) -> Dict[str, Any]:
        """
        Read, expand and parse the configuration file.

        Returns:
            Configuration dictionary

        Raises:
            FileNotFoundError: If configuration file doesn't exist
            ValueError: If a referenced variable has no value and no default
            yaml.YAMLError: If configuration file is invalid
        """
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        text = self.config_path.read_text(encoding='utf-8')
        self.config = yaml.safe_load(self._substitute_env_vars(text)) or {}
        return self.config

    @staticmethod
    def _substitute_env_vars(text: str) -> str:
        def replace_var(match):
            var_name, default = match.group(1), match.group(2)
            value = os.environ.get(var_name)
            if value is not None:
                return value
            if default is not None:
                return default
            raise ValueError(
                f"Environment variable '{var_name}' not found. "
                f"Please set it in .env file or environment."
            )

        return ENV_PATTERN.sub(replace_var, text)

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key_path: Dot-separated path (e.g., "ladders.singular.steps")
            default: Value returned when any segment is missing

        Returns:
            Configuration value or default
        """
        value: Any = self.config
        for key in key_path.split('.'):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def get_required(self, key_path: str) -> Any:
        """
        Get required configuration value.

        Raises:
            ValueError: If required key is not found
        """
        value = self.get(key_path)
        if value is None:
            raise ValueError(f"Required configuration key '{key_path}' not found")
        return value

    def get_float(self, key_path: str, default: Optional[float] = None) -> Optional[float]:
        """Numeric value of a key; quoted numbers from ${VAR} references are accepted."""
        value = self.get(key_path)
        if value is None:
            return default
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ValueError(f"Configuration key '{key_path}' must be a number, got {value!r}")

    def section(self, name: str) -> Dict[str, Any]:
        """Top-level section as a dict (empty when absent)."""
        value = self.config.get(name) if isinstance(self.config, dict) else None
        return dict(value) if isinstance(value, dict) else {}

    def validate(self) -> None:
        """
        Check required keys, positivity of sizes and tolerances, and enumerated choices.

        Raises:
            ValueError: On the first offending key
        """
        for key in self.REQUIRED_KEYS:
            self.get_required(key)

        for key in self.POSITIVE_KEYS:
            value = self.get_float(key)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ValueError(f"Configuration key '{key}' must be positive, got {self.get(key)!r}")

        for key, allowed in self.CHOICES.items():
            value = self.get(key)
            if value is None:
                continue
            check = str(value).upper() if key == "logging.level" else str(value)
            if check not in allowed:
                raise ValueError(f"Configuration key '{key}' must be one of {', '.join(allowed)}, got {value!r}")
