"""
Runtime settings: environment variables, an optional .env file and an optional
YAML override file.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import find_dotenv, load_dotenv
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    MOMENT_TOL: float = Field(1e-9, gt=0, description="Default membership threshold")
    RANK_TOL: float = Field(1e-8, gt=0, description="Relative singular-value cut for numerical rank")
    SECANT_TOL: float = Field(1e-7, gt=0, description="Relative m6 tolerance of the secant tests")
    ROOT_CLUSTER_TOL: float = Field(1e-6, gt=0, description="Root clustering tolerance")
    P_ZERO_TOL: float = Field(1e-9, gt=0, description="Standardized |p| treated as the equal-means branch")
    CUMULANT_SNAP_TOL: float = Field(1e-10, ge=0, description="Standardized cumulants snapped to zero")
    EM_MAX_ITERS: int = Field(100000, ge=1)
    EM_LOGLIK_TOL: float = Field(1e-10, gt=0)
    EM_VARIANCE_FLOOR: float = Field(1e-12, ge=0)
    MAX_WORKERS: int = Field(4, ge=1, description="Thread pool size for batch fits")
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


def load_env_from_root() -> Optional[str]:
    """
    Look for a .env file from the working directory upward and load it.
    Variables already present in the process environment win.
    """
    try:
        env_file = find_dotenv(usecwd=True)
        if env_file:
            load_dotenv(env_file, override=False)
            logger.info(f"Loaded environment file: {env_file}")
            return env_file
        logger.debug("No .env file found; using the process environment")
    except Exception as e:
        logger.info(f"Using the process environment directly: {e}")
    return None


def _read_yaml(config_path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping, got {type(data).__name__}")
    return {str(key).upper(): value for key, value in data.items()}


def load_settings(config_path: Optional[Union[str, Path]] = None) -> Settings:
    """Build settings from the environment, overridden by a YAML file if given.

    Args:
        config_path: Optional YAML mapping of setting names to values.

    Returns:
        The active Settings.

    Raises:
        ConfigError: If the YAML file is missing, malformed or not a mapping, or a
            value fails validation.
    """
    overrides = _read_yaml(config_path) if config_path else {}
    if overrides:
        logger.info(f"Applying {len(overrides)} setting override(s) from {config_path}")
    try:
        return Settings(**overrides)
    except ValidationError as e:
        raise ConfigError(f"Invalid settings: {e}") from e

