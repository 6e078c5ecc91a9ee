"""Monte Carlo module estimating channel statistics from traced scenes.

This module handles running seeded realizations (optionally across worker
processes), collecting per-realization counts, powers and delays, and turning
them into estimates with standard errors: the mean reflection count, path
loss, count distribution and its divergence from a Poisson law, a PDP
histogram, pooled delay statistics and the occupancy of the first-reflector
region.

Every realization draws from its own stream keyed by (seed, index), and
results are merged in index order, so estimates do not depend on the number
of workers.
"""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from multiprocessing import Pool

import numpy as np
from scipy.stats import poisson

from mmgeo.pdp import (
  DelayStats,
  DelayStatsError,
  MomentIntegrals,
  PathOrder,
  delay_stats_from_moments,
)
from mmgeo.scenario import FixedOrientation, Scenario
from mmgeo.scene import SceneConfig, generate_scene
from mmgeo.second_order import first_bounce_region_contains, image_source_model
from mmgeo.tracing import trace_first_order, trace_second_order

logger = logging.getLogger(__name__)

# Realizations handed to a worker at a time.
CHUNK_SIZE = 256


class Estimand(StrEnum):
  """Statistic requested from estimate()."""

  COUNT = "count"
  COUNT_PMF = "count_pmf"
  PATH_LOSS = "path_loss"
  PDP_HISTOGRAM = "pdp_histogram"
  DELAY_STATS = "delay_stats"
  OCCUPANCY = "occupancy"


@dataclass(frozen=True)
class EstimateWithCI:
  """Sample mean with its standard error over m realizations."""

  mean: float
  se: float
  m: int

  @property
  def ci95(self) -> tuple[float, float]:
    return self.mean - 1.96 * self.se, self.mean + 1.96 * self.se

  def within(self, value: float, k: float = 2.0) -> bool:
    """Return True if value lies within k standard errors of the mean."""
    return abs(value - self.mean) <= k * self.se


@dataclass(frozen=True)
class PathLossEstimate:
  """Path loss from the mean received power, with delta-method errors."""

  pl: float
  pl_se: float
  pl_db: float
  pl_db_se: float
  power: EstimateWithCI


@dataclass(frozen=True)
class PdpHistogram:
  """Mean received power per delay bin, divided by the bin width."""

  edges: np.ndarray
  density: np.ndarray

  @property
  def bin_width(self) -> float:
    return float(self.edges[1] - self.edges[0]) if len(self.edges) > 1 else 0.0

  @property
  def centers(self) -> np.ndarray:
    return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class RealizationResult:
  """Statistics of one realization."""

  index: int
  count: int
  thinned_count: int
  second_count: int
  power: float
  delays: np.ndarray
  powers: np.ndarray
  rejections: int
  occupied: bool


@dataclass(frozen=True)
class SimulationResult:
  """All realizations of a run, in index order."""

  scenario: Scenario
  config: SceneConfig
  realizations: tuple[RealizationResult, ...]

  @property
  def m(self) -> int:
    return len(self.realizations)

  @property
  def rejections(self) -> int:
    return sum(r.rejections for r in self.realizations)

  def counts(self) -> np.ndarray:
    return np.array([r.count for r in self.realizations], dtype=float)

  def thinned_counts(self) -> np.ndarray:
    return np.array([r.thinned_count for r in self.realizations], dtype=int)

  def powers(self) -> np.ndarray:
    """Total received power per realization, self-blockage weighted."""
    weight = self.scenario.self_weight
    return np.array([r.power * weight for r in self.realizations])

  def count(self) -> EstimateWithCI:
    """Mean number of unblocked first-order reflections, N_r."""
    return _mean_estimate(self.counts() * self.scenario.self_weight)

  def path_loss(self) -> PathLossEstimate:
    """Path loss 1 / mean(power); math.inf when no power was received."""
    power = _mean_estimate(self.powers())
    if not power.mean > 0:
      return PathLossEstimate(math.inf, math.nan, math.inf, math.nan, power)
    pl = 1.0 / power.mean
    relative = power.se / power.mean
    return PathLossEstimate(
      pl,
      pl * relative,
      10.0 * math.log10(pl),
      10.0 / math.log(10.0) * relative,
      power,
    )

  def count_pmf(self, k_max: int = 2) -> np.ndarray:
    """Empirical pmf of the self-blockage thinned count for k = 0..k_max."""
    counts = self.thinned_counts()
    return np.array([np.mean(counts == k) for k in range(k_max + 1)])

  def pdp_histogram(self, bin_width: float | None = None) -> PdpHistogram:
    """Histogram of received power over delay, averaged over realizations."""
    width = bin_width or self.config.pdp_bin
    delays = np.concatenate([r.delays for r in self.realizations] or [np.zeros(0)])
    powers = np.concatenate([r.powers for r in self.realizations] or [np.zeros(0)])
    if len(delays) == 0:
      return PdpHistogram(np.zeros(0), np.zeros(0))
    start = math.floor(delays.min() / width) * width
    n_bins = max(1, math.ceil((delays.max() - start) / width) + 1)
    edges = start + width * np.arange(n_bins + 1)
    totals, _ = np.histogram(delays, bins=edges, weights=powers)
    density = totals * self.scenario.self_weight / (self.m * width)
    return PdpHistogram(edges, density)

  def moments(self) -> MomentIntegrals:
    """Empirical PDP moments per realization, by path order."""
    weight = self.scenario.self_weight / self.m
    sums = [[], [], [], [], [], []]
    for r in self.realizations:
      first = r.powers[: r.count]
      second = r.powers[r.count :]
      tau_first = r.delays[: r.count]
      tau_second = r.delays[r.count :]
      for k in range(3):
        sums[k].append(float(np.sum(first * tau_first**k)))
        sums[3 + k].append(float(np.sum(second * tau_second**k)))
    return MomentIntegrals(*(weight * math.fsum(s) for s in sums))

  def delay_stats(self) -> DelayStats | None:
    """Power-weighted delay statistics pooled over all paths."""
    try:
      return delay_stats_from_moments(self.moments())
    except DelayStatsError:
      return None

  def occupancy(self) -> EstimateWithCI:
    """Fraction of scenes with a building center in the first-reflector region."""
    return _mean_estimate(np.array([float(r.occupied) for r in self.realizations]))


def _mean_estimate(values: np.ndarray) -> EstimateWithCI:
  m = len(values)
  mean = math.fsum(values) / m
  se = float(np.std(values, ddof=1)) / math.sqrt(m) if m > 1 else 0.0
  return EstimateWithCI(mean, se, m)


def kld_poisson(pmf: np.ndarray, mean: float, k_max: int = 2) -> float:
  """Truncated Kullback-Leibler divergence of an empirical pmf from Poisson.

  Sums p(k) ln(p(k) / Poisson(k; mean)) for k <= k_max without
  renormalizing, so the result can be negative. Empty bins contribute zero.
  """
  total = 0.0
  for k in range(k_max + 1):
    p = float(pmf[k])
    if p > 0:
      total += p * math.log(p / poisson.pmf(k, mean))
  return total


def _occupied(scenario: Scenario, centers: np.ndarray) -> bool:
  if not isinstance(scenario.orientation, FixedOrientation) or len(centers) == 0:
    return False
  model = image_source_model(scenario, scenario.orientation.phi_b)
  return bool(first_bounce_region_contains(scenario, model, centers).any())


def run_realization(scenario: Scenario, config: SceneConfig, index: int) -> RealizationResult:
  """Generate, trace and summarize one realization."""
  scene = generate_scene(scenario, config, index)
  paths = trace_first_order(scene, scenario)
  count = len(paths)
  if scenario.second_order:
    paths = paths + trace_second_order(scene, scenario)
  rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(index,)))
  thinned = int(rng.binomial(count, scenario.self_weight)) if count else 0
  powers = np.array([p.power for p in paths])
  return RealizationResult(
    index,
    count,
    thinned,
    sum(1 for p in paths if p.order == PathOrder.SECOND),
    math.fsum(powers),
    np.array([p.delay for p in paths]),
    powers,
    scene.rejections,
    _occupied(scenario, scene.centers),
  )


def _run_chunk(task: tuple[Scenario, SceneConfig, range]) -> list[RealizationResult]:
  scenario, config, indices = task
  return [run_realization(scenario, config, i) for i in indices]


def simulate(scenario: Scenario, config: SceneConfig, workers: int = 1) -> SimulationResult:
  """Run config.realizations seeded realizations.

  Args:
    scenario: Deployment parameters.
    config: Monte Carlo settings, validated against the scenario.
    workers: Worker processes; 1 runs in-process.

  Returns:
    The realizations in index order.

  Raises:
    ScenarioError: If the samplers do not match the scenario moments.
  """
  config.validate(scenario)
  chunks = [
    range(start, min(start + CHUNK_SIZE, config.realizations))
    for start in range(0, config.realizations, CHUNK_SIZE)
  ]
  tasks = [(scenario, config, chunk) for chunk in chunks]
  logger.info(
    f"Simulating {config.realizations} realizations with {workers} worker(s), seed {config.seed}"
  )
  if workers > 1:
    with Pool(processes=workers) as pool:
      parts = pool.map(_run_chunk, tasks)
  else:
    parts = [_run_chunk(task) for task in tasks]
  results = tuple(r for part in parts for r in part)
  result = SimulationResult(scenario, config, results)
  if result.rejections:
    logger.info(
      f"Resampled {result.rejections} scene(s) with a terminal inside a building "
      f"({result.rejections / (result.m + result.rejections):.3%} of draws)"
    )
  return result


def estimate(
  scenario: Scenario, config: SceneConfig, what: Estimand, workers: int = 1
) -> EstimateWithCI | PathLossEstimate | PdpHistogram | DelayStats | np.ndarray | None:
  """Run a simulation and return one statistic.

  Args:
    scenario: Deployment parameters.
    config: Monte Carlo settings.
    what: Statistic to return.
    workers: Worker processes.

  Returns:
    The requested statistic.
  """
  result = simulate(scenario, config, workers)
  match Estimand(what):
    case Estimand.COUNT:
      return result.count()
    case Estimand.COUNT_PMF:
      return result.count_pmf()
    case Estimand.PATH_LOSS:
      return result.path_loss()
    case Estimand.PDP_HISTOGRAM:
      return result.pdp_histogram()
    case Estimand.DELAY_STATS:
      return result.delay_stats()
    case Estimand.OCCUPANCY:
      return result.occupancy()
