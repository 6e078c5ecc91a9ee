"""Run logger module for logging analysis and simulation runs.

This module configures logging for mmgeo runs, writing logs to
~/.config/mmgeo/logs/mmgeo-run.log with timestamps and log levels. Library
modules log to children of the "mmgeo" logger and share this handler.
Records emitted while a sweep point is evaluated carry that point, e.g.
"2025-01-15 10:30:45 INFO [d=40]: Simulating 20000 realizations".
"""

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path

_current_point: ContextVar[str | None] = ContextVar("mmgeo_sweep_point", default=None)


class SweepPointFilter(logging.Filter):
  """Stamp each record with the sweep point being evaluated, if any."""

  def filter(self, record: logging.LogRecord) -> bool:
    point = _current_point.get()
    record.point = f" [{point}]" if point else ""
    return True


@contextmanager
def sweep_point(label: str) -> Iterator[None]:
  """Tag log records emitted inside the block with a sweep point label.

  Args:
    label: Point description such as "d=40".
  """
  token = _current_point.set(label)
  try:
    yield
  finally:
    _current_point.reset(token)


def get_log_file_path() -> Path:
  """Return the path to the mmgeo-run.log file.

  Returns:
    Path to ~/.config/mmgeo/logs/mmgeo-run.log
  """
  return Path.home() / ".config" / "mmgeo" / "logs" / "mmgeo-run.log"


def setup_run_logger() -> logging.Logger:
  """Configure and return the logger for mmgeo runs.

  Creates the log directory if it doesn't exist and configures a file handler
  with timestamp, level and sweep-point format.

  Returns:
    Configured "mmgeo" logger.

  Raises:
    OSError: If log directory cannot be created.
  """
  logger = logging.getLogger("mmgeo")

  if logger.handlers:
    return logger

  logger.setLevel(logging.DEBUG)

  log_file = get_log_file_path()
  log_file.parent.mkdir(parents=True, exist_ok=True)

  file_handler = logging.FileHandler(log_file, encoding="utf-8")
  file_handler.setLevel(logging.DEBUG)
  # Handler-level so records propagated from mmgeo.* children are stamped too.
  file_handler.addFilter(SweepPointFilter())
  file_handler.setFormatter(
    logging.Formatter(
      fmt="%(asctime)s %(levelname)s%(point)s: %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
    )
  )

  logger.addHandler(file_handler)

  return logger
