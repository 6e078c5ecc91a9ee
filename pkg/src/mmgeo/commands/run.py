"""Run commands for the analytic and Monte Carlo pipelines.

This module provides the analyze, simulate and compare commands. Each reads a
configuration file, applies command-line overrides, evaluates every sweep
point, writes the CSV report and echoes a summary table.
"""

from pathlib import Path

import typer

from mmgeo.config import ConfigError, ParsedConfig, RunMode, override, parse_config
from mmgeo.report import summary_table, write_csv
from mmgeo.run_logger import setup_run_logger
from mmgeo.runner import SweepPointError, run
from mmgeo.scenario import ScenarioError
from mmgeo.settings import get_default_workers

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

CONFIG_OPTION = typer.Option(..., "--config", "-c", help="Path to the scenario configuration file")
SWEEP_OPTION = typer.Option(None, "--sweep", help="Sweep as key:start:stop:steps")
SEED_OPTION = typer.Option(None, "--seed", help="Master seed for Monte Carlo scenes")
REALIZATIONS_OPTION = typer.Option(None, "--realizations", help="Number of Monte Carlo scenes")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Path of the CSV report")
WORKERS_OPTION = typer.Option(None, "--workers", help="Monte Carlo worker processes")


def _load(
  mode: RunMode,
  config: Path,
  sweep: str | None,
  seed: int | None,
  realizations: int | None,
  out: Path | None,
) -> ParsedConfig:
  text = config.read_text(encoding="utf-8")
  parsed = parse_config(text, mode)
  return override(
    parsed,
    {
      "sweep": sweep,
      "seed": None if seed is None else str(seed),
      "realizations": None if realizations is None else str(realizations),
      "out": None if out is None else str(out),
    },
  )


def _resolve_workers(option: int | None, parsed: ParsedConfig) -> int:
  if option is not None:
    if option < 1:
      raise ConfigError(f"workers must be at least 1, got {option}", "workers")
    return option
  if parsed.run.workers is not None:
    return parsed.run.workers
  return get_default_workers()


def execute(
  mode: RunMode,
  config: Path,
  sweep: str | None = None,
  seed: int | None = None,
  realizations: int | None = None,
  out: Path | None = None,
  workers: int | None = None,
) -> None:
  """Run one pipeline end to end, mapping failures to exit codes.

  Raises:
    typer.Exit: With 2 on a configuration error, 3 on a numerical or model
      failure and 4 on an I/O error.
  """
  try:
    logger = setup_run_logger()
  except OSError as e:
    typer.echo(f"Error: Failed to open run log - {e}")
    raise typer.Exit(EXIT_IO)
  logger.info(f"Starting {mode} with config {config}")

  # Step 1: Read and validate the configuration
  typer.echo(f"Reading configuration {config}...")
  try:
    parsed = _load(mode, config, sweep, seed, realizations, out)
    n_workers = _resolve_workers(workers, parsed)
    logger.info(f"Configuration loaded: sweep={parsed.run.sweep}, out={parsed.run.out}")
  except OSError as e:
    logger.error(f"Failed to read configuration {config}: {e}")
    typer.echo(f"Error: Failed to read {config} - {e}")
    raise typer.Exit(EXIT_IO)
  except (ConfigError, ScenarioError) as e:
    logger.error(f"Invalid configuration {config}: {e}")
    typer.echo(f"Error: {config}: {e}")
    raise typer.Exit(EXIT_CONFIG)

  # Step 2: Evaluate every sweep point
  typer.echo(f"Running {mode}...")
  try:
    rows = run(parsed, n_workers, progress=typer.echo)
  except SweepPointError as e:
    typer.echo(f"Error: {e}")
    raise typer.Exit(EXIT_NUMERICAL)
  except (ConfigError, ScenarioError) as e:
    logger.error(f"Invalid sweep point: {e}")
    typer.echo(f"Error: {e}")
    raise typer.Exit(EXIT_CONFIG)

  # Step 3: Write the report
  path = parsed.run.out
  try:
    write_csv(path, mode, rows)
    logger.info(f"Wrote {len(rows)} row(s) to {path}")
  except OSError as e:
    logger.error(f"Failed to write {path}: {e}")
    typer.echo(f"Error: Failed to write {path} - {e}")
    raise typer.Exit(EXIT_IO)

  typer.echo(summary_table(mode, rows))
  typer.echo(f"Results written to {path}")
  logger.info(f"{mode} completed successfully")


def analyze(
  config: Path = CONFIG_OPTION,
  sweep: str | None = SWEEP_OPTION,
  seed: int | None = SEED_OPTION,
  realizations: int | None = REALIZATIONS_OPTION,
  out: Path | None = OUT_OPTION,
  workers: int | None = WORKERS_OPTION,
) -> None:
  """Evaluate the analytic models over the sweep."""
  execute(RunMode.ANALYZE, config, sweep, seed, realizations, out, workers)


def simulate(
  config: Path = CONFIG_OPTION,
  sweep: str | None = SWEEP_OPTION,
  seed: int | None = SEED_OPTION,
  realizations: int | None = REALIZATIONS_OPTION,
  out: Path | None = OUT_OPTION,
  workers: int | None = WORKERS_OPTION,
) -> None:
  """Estimate the statistics by Monte Carlo over the sweep."""
  execute(RunMode.SIMULATE, config, sweep, seed, realizations, out, workers)


def compare(
  config: Path = CONFIG_OPTION,
  sweep: str | None = SWEEP_OPTION,
  seed: int | None = SEED_OPTION,
  realizations: int | None = REALIZATIONS_OPTION,
  out: Path | None = OUT_OPTION,
  workers: int | None = WORKERS_OPTION,
) -> None:
  """Compare analytic values with Monte Carlo estimates over the sweep."""
  execute(RunMode.COMPARE, config, sweep, seed, realizations, out, workers)
