"""
Configuration management for the moplda toolkit.
File: src/core/config.py
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import load_dotenv

from core.exceptions import ConfigError


@dataclass
class LoggingConfig:
    log_dir: Optional[str]
    level: str


@dataclass
class Config:
    logging: LoggingConfig


class Settings:
    """Toolkit settings."""

    def __init__(self):
        """Initialize settings from environment variables."""
        self.log_dir = os.getenv("MOPLDA_LOG_DIR") or None
        self.log_level = os.getenv("MOPLDA_LOG_LEVEL", "INFO")


def load_config(env_file: Optional[Union[str, Path]] = None) -> Config:
    """
    Load configuration from environment variables.

    Args:
        env_file: Optional .env file, defaults to the one in the working directory

    Returns:
        Config: Loaded configuration
    """
    if env_file is not None:
        load_dotenv(env_file)
    else:
        load_dotenv()

    settings = Settings()
    return Config(
        logging=LoggingConfig(
            log_dir=settings.log_dir,
            level=settings.log_level.upper()
        )
    )


def read_run_config(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read a flat key=value run configuration file.

    Blank lines and lines starting with '#' are skipped. Keys are normalized
    to option destinations (hyphens become underscores).

    Args:
        path: Path to the file

    Returns:
        Dict[str, str]: Raw string values by key

    Raises:
        ConfigError: If a line is malformed or a key repeats
    """
    values: Dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise ConfigError(f"{path}:{number}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{number}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def parse_bool(value: str) -> bool:
    """Parse a boolean config value."""
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"Invalid boolean value: {value!r}")
