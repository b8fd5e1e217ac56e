"""
Tests for settings, run configuration files and logging setup.
"""

import logging

import pytest

from core.config import load_config, parse_bool, read_run_config
from core.exceptions import ConfigError
from core.logging import get_logger, setup_logging


def test_load_config_defaults():
    """Test defaults without environment variables."""
    config = load_config()
    assert config.logging.log_dir is None
    assert config.logging.level == "INFO"


def test_load_config_from_env_file(tmp_path):
    """Test settings read from an env file."""
    env_file = tmp_path / "test.env"
    env_file.write_text("MOPLDA_LOG_DIR=logs\nMOPLDA_LOG_LEVEL=debug\n")
    config = load_config(env_file)
    assert config.logging.log_dir == "logs"
    assert config.logging.level == "DEBUG"


def test_read_run_config(tmp_path):
    """Test key=value parsing with comments and hyphenated keys."""
    path = tmp_path / "run.conf"
    path.write_text("# sweep settings\n\nmode = mo\nlda-dim=5\nalpha=1.7\n")
    assert read_run_config(path) == {"mode": "mo", "lda_dim": "5", "alpha": "1.7"}


@pytest.mark.parametrize("content", ["alpha\n", "=3\n", "rank=2\nrank=3\n"])
def test_read_run_config_rejects_malformed(tmp_path, content):
    """Test malformed lines and duplicate keys."""
    path = tmp_path / "bad.conf"
    path.write_text(content)
    with pytest.raises(ConfigError):
        read_run_config(path)


def test_read_run_config_missing_file(tmp_path):
    """Test a missing config file."""
    with pytest.raises(ConfigError):
        read_run_config(tmp_path / "absent.conf")


def test_parse_bool():
    """Test boolean tokens."""
    assert parse_bool("Yes") is True
    assert parse_bool(" 0 ") is False
    with pytest.raises(ConfigError):
        parse_bool("maybe")


def test_setup_logging_writes_files(tmp_path):
    """Test file handlers and handler replacement on a second call."""
    log_dir = tmp_path / "logs"
    setup_logging(str(log_dir), "DEBUG")
    setup_logging(str(log_dir), "DEBUG")
    root = logging.getLogger()
    ours = [h for h in root.handlers if getattr(h, "_moplda", False)]
    assert len(ours) == 3

    get_logger("moplda.test").error("first line\nsecond line")
    for handler in ours:
        handler.flush()
    assert "second line" in (log_dir / "errors.log").read_text(encoding="utf-8")
    assert "first line" in (log_dir / "moplda.log").read_text(encoding="utf-8")

    setup_logging()
    assert len([h for h in root.handlers if getattr(h, "_moplda", False)]) == 1
