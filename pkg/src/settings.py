"""
Settings Loader

Repository defaults come from config/settings.yaml, then environment
variables (WEAKBOX3D_JOBS). A user file given with --config (TOML, or a
JSON run manifest whose `config` block is reused) overrides both section
by section, and command-line flags override everything.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import toml
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .fitting import FitConfig
from .kitti import EvalConfig
from .pointcloud import ExtractionConfig
from .synth import SceneSpec
from .utils.errors import ConfigError
from .utils.logger import DEFAULT_FORMAT, get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.yaml"

JOBS_ENV_VAR = "WEAKBOX3D_JOBS"


class LoggingSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: str = "INFO"
    log_file: Optional[str] = None
    format: str = DEFAULT_FORMAT


class RunSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    jobs: int = Field(default=1, ge=1)


class Settings(BaseModel):
    """Merged configuration of a run, one model per section."""

    model_config = ConfigDict(frozen=True)

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    extraction: ExtractionConfig = Field(default_factory=ExtractionConfig)
    fit: FitConfig = Field(default_factory=FitConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    synth: SceneSpec = Field(default_factory=SceneSpec)
    run: RunSettings = Field(default_factory=RunSettings)

    def snapshot(self) -> Dict[str, Any]:
        """JSON-ready dump recorded in run manifests."""
        return self.model_dump(mode="json", by_alias=True)


SECTIONS = tuple(Settings.model_fields)


def load_yaml_defaults(path: Optional[PathLike] = None) -> Dict[str, Any]:
    """
    Load the YAML defaults file.

    Args:
        path: defaults file, config/settings.yaml by default

    Returns:
        Configuration dictionary (empty when the file does not exist)
    """
    path = Path(path) if path is not None else DEFAULT_SETTINGS_PATH
    if not path.exists():
        logger.debug(f"No defaults file at {path}")
        return {}
    with open(path, "r") as f:
        return yaml.safe_load(f) or {}


def load_user_config(path: PathLike) -> Dict[str, Any]:
    """
    Load a user configuration file.

    TOML files are parsed directly; a `.json` file is treated as a run
    manifest and its recorded `config` block is returned.

    Raises:
        ConfigError: unreadable or malformed file
    """
    path = Path(path)
    try:
        if path.suffix == ".json":
            with open(path, "r") as f:
                return json.load(f).get("config", {})
        return toml.load(str(path))
    except (OSError, ValueError, toml.TomlDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e


def merge_sections(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; values in `override` win."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_sections(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(
    config_path: Optional[PathLike] = None,
    overrides: Optional[Dict[str, Any]] = None,
    defaults_path: Optional[PathLike] = None,
    environment: Optional[Dict[str, Any]] = None
) -> Settings:
    """
    Build the merged settings: YAML defaults < environment < user file < overrides.

    Args:
        config_path: optional TOML file or run manifest
        overrides: section dicts from command-line flags
        defaults_path: alternative defaults file
        environment: section dicts taken from environment variables

    Returns:
        Validated Settings

    Raises:
        ConfigError: unknown section or invalid value
    """
    data = load_yaml_defaults(defaults_path)
    if environment:
        data = merge_sections(data, environment)
    if config_path is not None:
        data = merge_sections(data, load_user_config(config_path))
        logger.info(f"Loaded configuration overrides from {config_path}")
    if overrides:
        data = merge_sections(data, overrides)

    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown configuration sections: {', '.join(unknown)}")
    try:
        return Settings(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def default_jobs() -> int:
    """Worker count from WEAKBOX3D_JOBS, 1 when unset."""
    value = os.getenv(JOBS_ENV_VAR)
    if not value:
        return 1
    try:
        jobs = int(value)
    except ValueError as e:
        raise ConfigError(f"{JOBS_ENV_VAR} must be an integer, got {value!r}") from e
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV_VAR} must be >= 1, got {jobs}")
    return jobs


def environment_settings() -> Dict[str, Any]:
    """Section dicts for the environment variables that are set."""
    if not os.getenv(JOBS_ENV_VAR):
        return {}
    return {"run": {"jobs": default_jobs()}}
