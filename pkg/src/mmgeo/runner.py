"""Runner module executing analytic and Monte Carlo pipelines over a sweep.

This module handles expanding a sweep into configurations, evaluating each
point in the requested mode and assembling report rows. Failures at a point
are re-raised as SweepPointError carrying the point.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from mmgeo.config import ParsedConfig, RunMode, apply_sweep_value
from mmgeo.first_order import (
  avg_first_order_closed,
  avg_first_order_exact,
  path_loss_closed,
  path_loss_db,
  path_loss_exact,
)
from mmgeo.montecarlo import EstimateWithCI, PathLossEstimate, simulate
from mmgeo.pdp import DelayStats, DelayStatsError, delay_stats
from mmgeo.quadrature import NumericalError
from mmgeo.report import Row
from mmgeo.run_logger import sweep_point
from mmgeo.scenario import Scenario, ScenarioError
from mmgeo.scene import SceneConfig
from mmgeo.second_order import ModelError

logger = logging.getLogger(__name__)

# A compare row is flagged when the analytic value is this many SE away.
FLAG_SE = 2.0


class SweepPointError(Exception):
  """Exception raised when a sweep point fails to evaluate."""

  def __init__(self, key: str | None, value: float | None, cause: Exception):
    self.key = key
    self.value = value
    self.cause = cause
    point = f"{key}={value!r}" if key is not None else "the configured point"
    super().__init__(f"Failed at {point}: {cause}")


@dataclass(frozen=True)
class AnalyticPoint:
  """Analytic results at one point; closed forms need a fixed orientation."""

  n_r_exact: float
  n_r_closed: float | None
  pl_exact: float
  pl_closed: float | None
  delay: DelayStats | None


@dataclass(frozen=True)
class MonteCarloPoint:
  """Monte Carlo estimates at one point."""

  count: EstimateWithCI
  path_loss: PathLossEstimate
  delay: DelayStats | None


def _delay(scenario: Scenario) -> DelayStats | None:
  try:
    return delay_stats(scenario)
  except DelayStatsError as e:
    if e.m0 is not None and e.m0 <= 0:
      return None
    raise


def analyze_point(scenario: Scenario) -> AnalyticPoint:
  """Evaluate the analytic models at one scenario."""
  closed = scenario.is_fixed
  return AnalyticPoint(
    avg_first_order_exact(scenario),
    avg_first_order_closed(scenario) if closed else None,
    path_loss_exact(scenario),
    path_loss_closed(scenario) if closed else None,
    _delay(scenario),
  )


def simulate_point(scenario: Scenario, scene: SceneConfig, workers: int) -> MonteCarloPoint:
  """Run the Monte Carlo estimators at one scenario."""
  result = simulate(scenario, scene, workers)
  return MonteCarloPoint(result.count(), result.path_loss(), result.delay_stats())


def _ns(seconds: float | None) -> float | None:
  return None if seconds is None else seconds * 1e9


def _relative_error(analytic: float, estimate: float) -> float | None:
  if math.isinf(analytic) or math.isinf(estimate):
    return None
  if analytic == 0:
    return 0.0 if estimate == 0 else math.inf
  return abs(estimate - analytic) / abs(analytic)


def _flagged(analytic: float, estimate: float, se: float) -> bool:
  if math.isinf(analytic) or math.isinf(estimate):
    return analytic != estimate
  return abs(analytic - estimate) > FLAG_SE * se


def analyze_row(point: AnalyticPoint) -> Row:
  delay = point.delay
  return {
    "n_r_exact": point.n_r_exact,
    "n_r_closed": point.n_r_closed,
    "pl_db_exact": path_loss_db(point.pl_exact),
    "pl_db_closed": None if point.pl_closed is None else path_loss_db(point.pl_closed),
    "tau_mean_ns": _ns(delay.tau_mean) if delay else None,
    "tau_rms_ns": _ns(delay.tau_rms) if delay else None,
    "bc_mhz": delay.coherence_bandwidth / 1e6 if delay else None,
  }


def simulate_row(point: MonteCarloPoint) -> Row:
  return {
    "n_r_mc": point.count.mean,
    "n_r_se": point.count.se,
    "pl_db_mc": point.path_loss.pl_db,
    "pl_db_se": point.path_loss.pl_db_se,
    "tau_rms_ns_mc": _ns(point.delay.tau_rms) if point.delay else None,
  }


def compare_row(analytic: AnalyticPoint, mc: MonteCarloPoint) -> Row:
  pl_db = path_loss_db(analytic.pl_exact)
  pl_se = 0.0 if math.isnan(mc.path_loss.pl_db_se) else mc.path_loss.pl_db_se
  return {
    "n_r_exact": analytic.n_r_exact,
    "n_r_mc": mc.count.mean,
    "n_r_se": mc.count.se,
    "n_r_rel_err": _relative_error(analytic.n_r_exact, mc.count.mean),
    "n_r_flag": _flagged(analytic.n_r_exact, mc.count.mean, mc.count.se),
    "pl_db_exact": pl_db,
    "pl_db_mc": mc.path_loss.pl_db,
    "pl_db_se": mc.path_loss.pl_db_se,
    "pl_db_rel_err": _relative_error(pl_db, mc.path_loss.pl_db),
    "pl_db_flag": _flagged(pl_db, mc.path_loss.pl_db, pl_se),
  }


def sweep_points(parsed: ParsedConfig) -> list[tuple[float | None, ParsedConfig]]:
  """Expand the sweep into (value, configuration) pairs.

  Without a sweep the configuration itself is the only point.
  """
  sweep = parsed.run.sweep
  if sweep is None:
    return [(None, parsed)]
  return [(value, apply_sweep_value(parsed, sweep.key, value)) for value in sweep.values()]


def evaluate(parsed: ParsedConfig, workers: int) -> Row:
  """Evaluate one configuration in its run mode."""
  mode = parsed.run.mode
  if mode == RunMode.ANALYZE:
    return analyze_row(analyze_point(parsed.scenario))
  mc = simulate_point(parsed.scenario, parsed.scene, workers)
  if mode == RunMode.SIMULATE:
    return simulate_row(mc)
  return compare_row(analyze_point(parsed.scenario), mc)


def run(
  parsed: ParsedConfig,
  workers: int = 1,
  progress: Callable[[str], None] | None = None,
) -> list[Row]:
  """Evaluate every sweep point and return report rows in sweep order.

  Args:
    parsed: Configuration including the run mode and sweep.
    workers: Monte Carlo worker processes.
    progress: Optional callback receiving a line per point.

  Returns:
    One row per sweep point.

  Raises:
    SweepPointError: If a point fails numerically, in the models or on a
      derived scenario quantity such as the thinned human density.
    ConfigError: If a sweep value is invalid for the configuration.
  """
  sweep = parsed.run.sweep
  key = sweep.key if sweep else None
  points = sweep_points(parsed)
  rows = []
  for n, (value, point) in enumerate(points, start=1):
    label = f"{key}={value:.6g}" if key is not None else "configured point"
    message = f"[{n}/{len(points)}] {parsed.run.mode} at {label}"
    if progress:
      progress(message)
    with sweep_point(label):
      logger.info(message)
      try:
        row = dict(evaluate(point, workers))
      except (NumericalError, DelayStatsError, ModelError, ScenarioError) as e:
        logger.error(f"{message} failed: {e}")
        raise SweepPointError(key, value, e) from e
    row["sweep_value"] = value
    rows.append(row)
  return rows
