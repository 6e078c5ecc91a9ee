"""Settings module for reading user-level defaults.

This module handles reading the default worker count for Monte Carlo runs
from the config.json file at ~/.config/mmgeo/config.json.
"""

import json
from pathlib import Path

DEFAULT_WORKERS = 1


def get_settings_file_path() -> Path:
  """Return the path to the config.json file.

  Returns:
    Path to ~/.config/mmgeo/config.json
  """
  return Path.home() / ".config" / "mmgeo" / "config.json"


def get_default_workers() -> int:
  """Read simulate.workers from ~/.config/mmgeo/config.json.

  Reads the worker count from the nested structure: {"simulate": {"workers": N}}.
  If the file does not exist, contains invalid JSON, lacks the nested key or
  holds anything but a positive integer, returns DEFAULT_WORKERS.

  Returns:
    The configured number of worker processes.
  """
  settings_file = get_settings_file_path()

  if not settings_file.exists():
    return DEFAULT_WORKERS

  try:
    with settings_file.open("r", encoding="utf-8") as f:
      content = f.read()
      if not content.strip():
        return DEFAULT_WORKERS
      settings = json.loads(content)
  except (json.JSONDecodeError, OSError):
    return DEFAULT_WORKERS

  if not isinstance(settings, dict):
    return DEFAULT_WORKERS
  simulate = settings.get("simulate", {})
  if not isinstance(simulate, dict):
    return DEFAULT_WORKERS
  workers = simulate.get("workers")
  if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
    return DEFAULT_WORKERS
  return workers
