"""Configuration models for ambiset.yml and environment variables."""

from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from ambiset.errors import SchemaViolation
from ambiset.models.convergence import ConvergenceRule

DEFAULT_CONFIG_FILE = "ambiset.yml"

ENV_OVERRIDABLE = ("tol", "lenient_tolerance", "seed", "format", "workers", "log_level", "json_logs")


class OutputFormat(StrEnum):
    """Rendering of command results on standard output."""

    JSON = "json"
    TABLE = "table"
    CSV = "csv"


class AmbisetConfig(BaseModel):
    """Main configuration model for ambiset.yml."""

    version: str = Field(default="1", description="Configuration version")

    # Numerics
    tol: float = Field(default=1e-7, gt=0.0, description="Decision tolerance for hull membership and hull equality")
    lenient_tolerance: float = Field(default=1e-9, ge=0.0, description="Relative tolerance of lenient validation")
    p: float = Field(default=1.0, ge=1.0, description="Default transport exponent")

    # Experiments
    seed: int = Field(default=42, description="Seed for random panels and families")
    workers: int = Field(default=1, ge=1, description="Threads for per-term computations")
    rule: ConvergenceRule = Field(default_factory=ConvergenceRule, description="Rule judging that a trace tends to 0")

    # Output
    format: OutputFormat = Field(default=OutputFormat.JSON, description="Output format")
    log_level: str = Field(default="INFO", description="Logging level")
    json_logs: bool = Field(default=False, description="Render diagnostics as JSON lines")


class EnvironmentSettings(BaseSettings):
    """Environment variable settings for ambiset."""

    model_config = SettingsConfigDict(
        env_prefix="AMBISET_", case_sensitive=False, env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    tol: float | None = Field(default=None, gt=0.0, description="Decision tolerance override")
    lenient_tolerance: float | None = Field(default=None, ge=0.0, description="Lenient validation tolerance override")
    seed: int | None = Field(default=None, description="Seed override")
    format: OutputFormat | None = Field(default=None, description="Output format override")
    workers: int | None = Field(default=None, ge=1, description="Thread count override")
    log_level: str = Field(default="INFO", description="Global log level override")
    json_logs: bool | None = Field(default=None, description="JSON log rendering override")
    config_file: str = Field(default=DEFAULT_CONFIG_FILE, description="Path to configuration file")


def _merge_layer(data: dict[str, Any], layer: dict[str, Any]) -> None:
    """Apply one layer in place; nested mappings such as ``rule`` merge key by key."""
    for name, value in layer.items():
        if isinstance(value, dict):
            value = {key: item for key, item in value.items() if item is not None}
            if not value:
                continue
            below = data.get(name)
            data[name] = {**below, **value} if isinstance(below, dict) else value
        elif value is not None:
            data[name] = value


class ConfigManager:
    """Manager for loading and validating configuration.

    Precedence: built-in defaults, then the YAML file (optional), then the
    options block of a problem file, then environment variables that are
    actually set, then command-line flags.
    """

    def __init__(self, config_path: Path | None = None):
        self.env_settings = EnvironmentSettings()
        self.config_path = config_path or Path(self.env_settings.config_file)

    def load_config(self) -> AmbisetConfig:
        """Load configuration from file (when present) and environment variables."""
        return self.resolve()

    def resolve(self, file_options: dict[str, Any] | None = None, flags: dict[str, Any] | None = None) -> AmbisetConfig:
        """Merge every configuration layer; ``None`` values in the upper layers are ignored."""
        data: dict[str, Any] = {}
        if self.config_path.exists():
            with open(self.config_path, encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
            if loaded is not None and not isinstance(loaded, dict):
                raise SchemaViolation(f"configuration file {self.config_path} must hold a mapping")
            data = loaded or {}

        # Only variables that were explicitly set override the file
        env = {name: getattr(self.env_settings, name) for name in ENV_OVERRIDABLE}
        env = {name: value for name, value in env.items() if name in self.env_settings.model_fields_set}

        for layer in (file_options or {}, env, flags or {}):
            _merge_layer(data, layer)
        return AmbisetConfig.model_validate(data)

    def validate_config(self, config: AmbisetConfig) -> list[str]:
        """Validate configuration and return list of errors."""
        errors = []

        if config.lenient_tolerance > config.tol:
            errors.append(
                f"lenient_tolerance {config.lenient_tolerance:g} is looser than the decision tolerance {config.tol:g}"
            )

        if config.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            errors.append(f"Unknown log level '{config.log_level}'")

        if config.rule.abs_threshold < config.tol:
            errors.append("convergence rule threshold is below the decision tolerance")

        return errors
