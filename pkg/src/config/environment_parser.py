"""
Environment variable parser for run defaults.
"""

import logging
import os
from typing import Any, Callable, Dict, List, Optional, Tuple

from .run_configuration import RunConfig


def _parse_float(value: str) -> float:
    return float(value)


def _parse_int(value: str) -> int:
    return int(value)


def _parse_str(value: str) -> str:
    return value.strip()


def _parse_bool(value: str) -> bool:
    return value.strip().lower() in ("true", "1", "yes", "on")


class EnvironmentConfigurationParser:
    """
    Parser for ``TUBED_*`` environment variables supplying RunConfig defaults.

    Supports variables like:
    TUBED_ETA = 0.5
    TUBED_MODE = bounded
    TUBED_MESH = 512
    TUBED_DETERMINISTIC = true

    Command-line flags override whatever the environment provides.
    """

    ENV_PREFIX = "TUBED_"

    # Registry of supported variables: suffix -> (RunConfig field, converter)
    VARIABLE_REGISTRY: Dict[str, Tuple[str, Callable[[str], Any]]] = {
        "ETA": ("eta", _parse_float),
        "C1": ("C1", _parse_float),
        "MODE": ("mode", _parse_str),
        "MESH": ("mesh", _parse_int),
        "THREADS": ("threads", _parse_int),
        "DETERMINISTIC": ("deterministic", _parse_bool),
        "LOG_LEVEL": ("log_level", _parse_str),
        "LAMBDA_CAP": ("lambda_cap", _parse_float),
        "OUT": ("output", _parse_str),
    }

    def __init__(self, environ: Optional[Dict[str, str]] = None):
        self.logger = logging.getLogger(__name__)
        self._environ = environ if environ is not None else os.environ

    def parse_run_defaults(self) -> Dict[str, Any]:
        """
        Parse every registered variable present in the environment.

        Returns:
            Mapping of RunConfig field names to parsed values

        Raises:
            ValueError: If a present variable cannot be converted
        """
        defaults = {}
        for suffix, (field_name, convert) in self.VARIABLE_REGISTRY.items():
            key = f"{self.ENV_PREFIX}{suffix}"
            raw = self._environ.get(key)
            if raw is None or not raw.strip():
                continue
            try:
                defaults[field_name] = convert(raw)
            except ValueError as e:
                raise ValueError(f"Invalid value for {key}: {raw!r} ({e})")
            self.logger.debug(f"Environment default {field_name}={defaults[field_name]!r} from {key}")
        return defaults

    def build_config(self, **overrides) -> RunConfig:
        """
        RunConfig from environment defaults, overridden by explicit values.

        Args:
            **overrides: Field values from the command line; None means unset

        Raises:
            ValueError: If the merged configuration is invalid
        """
        values = self.parse_run_defaults()
        values.update({k: v for k, v in overrides.items() if v is not None})
        config = RunConfig(**values)
        changed = config.changed_fields(RunConfig(command=config.command))
        if changed:
            self.logger.info(f"Configuration differs from defaults in: {', '.join(changed)}")
        return config

    def validate_environment(self) -> Dict[str, Any]:
        """
        Validate environment configuration without building a RunConfig.

        Returns:
            Dictionary with validation results
        """
        result = {
            "valid": True,
            "errors": [],
            "warnings": [],
            "variables_found": [],
        }
        for suffix, (field_name, convert) in self.VARIABLE_REGISTRY.items():
            key = f"{self.ENV_PREFIX}{suffix}"
            if key not in self._environ:
                continue
            result["variables_found"].append(key)
            try:
                convert(self._environ[key])
            except ValueError as e:
                result["valid"] = False
                result["errors"].append(f"{key}: {e}")

        known = {f"{self.ENV_PREFIX}{suffix}" for suffix in self.VARIABLE_REGISTRY}
        for key in self._environ:
            if key.startswith(self.ENV_PREFIX) and key not in known:
                result["warnings"].append(f"Unrecognized variable {key}")

        if result["valid"]:
            try:
                RunConfig(**self.parse_run_defaults())
            except ValueError as e:
                result["valid"] = False
                result["errors"].append(f"Environment defaults are invalid: {e}")
        return result

    def get_supported_variables(self) -> List[str]:
        return [f"{self.ENV_PREFIX}{suffix}" for suffix in self.VARIABLE_REGISTRY]

    def __str__(self) -> str:
        return f"EnvironmentConfigurationParser(variables={self.get_supported_variables()})"

    def __repr__(self) -> str:
        return f"EnvironmentConfigurationParser(registry={list(self.VARIABLE_REGISTRY)})"
