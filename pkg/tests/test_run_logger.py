"""Tests for the run logger module."""

import logging
import re
import tempfile
from pathlib import Path
from unittest.mock import patch

from hypothesis import given, settings, strategies as st

from mmgeo.config import parse_config
from mmgeo.run_logger import get_log_file_path, setup_run_logger, sweep_point
from mmgeo.runner import run

log_message_strategy = st.text(
  min_size=1,
  max_size=200,
  alphabet=st.characters(
    blacklist_categories=("Cs",),
    blacklist_characters=("\n", "\r"),
  ),
)


def _fresh_logger() -> logging.Logger:
  logger = logging.getLogger("mmgeo")
  for handler in list(logger.handlers):
    handler.close()
  logger.handlers.clear()
  return logger


def test_log_file_path_returns_expected_location() -> None:
  """Test that get_log_file_path returns the correct path."""
  expected = Path.home() / ".config" / "mmgeo" / "logs" / "mmgeo-run.log"
  assert get_log_file_path() == expected


def test_setup_run_logger_creates_directory() -> None:
  """Test that setup_run_logger creates the log directory if needed."""
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "logs" / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      _fresh_logger()
      logger = setup_run_logger()
      try:
        assert log_file.parent.exists(), "Log directory should be created"
        assert logger.name == "mmgeo"
        assert len(logger.handlers) == 1
      finally:
        _fresh_logger()


def test_setup_run_logger_is_idempotent() -> None:
  """Test that repeated setup does not add handlers."""
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      _fresh_logger()
      try:
        setup_run_logger()
        logger = setup_run_logger()
        assert len(logger.handlers) == 1
      finally:
        _fresh_logger()


def test_library_loggers_share_the_handler() -> None:
  """Test that module loggers under mmgeo write to the run log."""
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      _fresh_logger()
      try:
        setup_run_logger()
        logging.getLogger("mmgeo.montecarlo").info("Simulating 100 realizations")
      finally:
        _fresh_logger()
    assert "INFO: Simulating 100 realizations" in log_file.read_text(encoding="utf-8")


def test_sweep_point_tags_records() -> None:
  """Test that records inside a sweep point carry its label and others do not."""
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      _fresh_logger()
      try:
        setup_run_logger()
        child = logging.getLogger("mmgeo.montecarlo")
        with sweep_point("d=40"):
          child.info("Simulating 100 realizations")
        child.info("Done")
      finally:
        _fresh_logger()
    lines = log_file.read_text(encoding="utf-8").strip().split("\n")
  assert lines[0].endswith("INFO [d=40]: Simulating 100 realizations")
  assert lines[1].endswith("INFO: Done")


def test_runner_tags_each_point() -> None:
  """Test that a sweep logs every point under its own label."""
  text = (
    "d = 50\nphi_t_deg = 110\nphi_r_deg = 40\ntheta_b_deg = 10\n"
    "phi_b_deg = 15\nsweep = d:40:60:2\n"
  )
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      _fresh_logger()
      try:
        setup_run_logger()
        run(parse_config(text))
      finally:
        _fresh_logger()
    content = log_file.read_text(encoding="utf-8")
  assert "INFO [d=40]: [1/2] analyze at d=40" in content
  assert "INFO [d=60]: [2/2] analyze at d=60" in content


@settings(max_examples=100)
@given(
  message=log_message_strategy,
  level=st.sampled_from(["INFO", "WARNING", "ERROR"]),
)
def test_property_log_entry_format_compliance(message: str, level: str) -> None:
  """**Feature: run-logging, Property 1: Log entry format compliance**

  *For any* log entry written by the run logger, the entry SHALL contain
  a timestamp and a log level (INFO, ERROR, or WARNING).

  **Validates: Requirements logging.format**
  """
  with tempfile.TemporaryDirectory() as tmpdir:
    log_file = Path(tmpdir) / "mmgeo-run.log"

    with patch("mmgeo.run_logger.get_log_file_path", return_value=log_file):
      logger = _fresh_logger()
      try:
        setup_run_logger()
        logger.log(getattr(logging, level), message)
      finally:
        _fresh_logger()

    entry = log_file.read_text(encoding="utf-8").strip().split("\n")[-1]
    assert re.match(r"\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2} ", entry), entry
    assert f" {level}: " in entry
