"""Scene module generating random building and human layouts.

This module handles the Monte Carlo scene: building centers drawn from a
Poisson point process over a square region centered on Rx, building
dimensions from moment-matched samplers, orientations that are fixed or
uniform, and human discs outside buildings. Every scene is reproducible from
the master seed and its realization index.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property

import numpy as np

from mmgeo.geometry import BlockerSet, Building, Person, Point2
from mmgeo.scenario import FixedOrientation, Scenario, ScenarioError
from mmgeo.validator import validate_positive, validate_realizations

logger = logging.getLogger(__name__)

# Relative tolerance on sampler moments.
MOMENT_TOL = 1e-9


class SamplerKind(StrEnum):
  """Distribution family of a building dimension."""

  CONSTANT = "constant"
  UNIFORM = "uniform"
  EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class DimensionSampler:
  """Sampler of one building dimension matched to (mean, second moment).

  Raises:
    ScenarioError: If the family cannot reproduce the moments.
  """

  kind: SamplerKind
  mean: float
  second: float
  name: str = "dimension"

  def __post_init__(self) -> None:
    if not self.mean > 0:
      raise ScenarioError(self.name, f"mean must be positive, got {self.mean}")
    tol = MOMENT_TOL * max(1.0, self.second)
    if self.kind == SamplerKind.CONSTANT:
      if abs(self.second - self.mean**2) > tol:
        raise ScenarioError(
          self.name,
          f"constant sampler needs second moment {self.mean**2}, got {self.second}",
        )
    elif self.kind == SamplerKind.UNIFORM:
      if self.second < self.mean**2 - tol or self.half_width > self.mean:
        raise ScenarioError(
          self.name,
          f"no non-negative uniform law has mean {self.mean} and second moment {self.second}",
        )
    elif abs(self.second - 2 * self.mean**2) > tol:
      raise ScenarioError(
        self.name,
        f"exponential sampler needs second moment {2 * self.mean**2}, got {self.second}",
      )

  @property
  def half_width(self) -> float:
    """Half-width of the uniform law, sqrt(3 Var)."""
    return math.sqrt(3 * max(0.0, self.second - self.mean**2))

  def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
    if self.kind == SamplerKind.CONSTANT:
      return np.full(n, self.mean)
    if self.kind == SamplerKind.UNIFORM:
      h = self.half_width
      return rng.uniform(self.mean - h, self.mean + h, n)
    return rng.exponential(self.mean, n)


@dataclass(frozen=True)
class SceneConfig:
  """Monte Carlo settings.

  Attributes:
    half_extent: Half side of the square region centered on Rx, meters.
    length_sampler: Family of building lengths.
    width_sampler: Family of building widths.
    seed: Master seed.
    realizations: Number of scenes M.
    pdp_bin_ns: PDP histogram bin width in nanoseconds.
    max_attempts: Resampling attempts before a scene is given up.
  """

  half_extent: float = 400.0
  length_sampler: SamplerKind = SamplerKind.CONSTANT
  width_sampler: SamplerKind = SamplerKind.CONSTANT
  seed: int = 0
  realizations: int = 200_000
  pdp_bin_ns: float = 1.0
  max_attempts: int = 1000

  def __post_init__(self) -> None:
    for name, check in (("half_extent", validate_positive), ("pdp_bin_ns", validate_positive)):
      is_valid, message = check(name, getattr(self, name))
      if not is_valid:
        raise ScenarioError(name, message)
    is_valid, message = validate_realizations(self.realizations)
    if not is_valid:
      raise ScenarioError("realizations", message)
    if not 0 <= self.seed < 2**64:
      raise ScenarioError("seed", f"seed must be an unsigned 64-bit integer, got {self.seed}")

  @property
  def pdp_bin(self) -> float:
    """Histogram bin width in seconds."""
    return self.pdp_bin_ns * 1e-9

  @property
  def area(self) -> float:
    return (2 * self.half_extent) ** 2

  def samplers(self, scenario: Scenario) -> tuple[DimensionSampler, DimensionSampler]:
    """Return (length, width) samplers matched to the scenario's moments."""
    m = scenario.moments
    return (
      DimensionSampler(self.length_sampler, m.e_l, m.e_l2, "e_l"),
      DimensionSampler(self.width_sampler, m.e_w, m.e_w2, "e_w"),
    )

  def validate(self, scenario: Scenario) -> None:
    """Check that the samplers reproduce the scenario's moments.

    Raises:
      ScenarioError: On a moment mismatch or a region too small to hold Tx.
    """
    self.samplers(scenario)
    if scenario.d >= self.half_extent:
      raise ScenarioError(
        "half_extent", f"region half-extent {self.half_extent} m must exceed d={scenario.d} m"
      )


@dataclass(frozen=True)
class Scene:
  """One realization of buildings and people around the link."""

  index: int
  tx: Point2
  rx: Point2
  buildings: tuple[Building, ...]
  persons: tuple[Person, ...]
  rejections: int = 0
  attempt: int = field(default=0, compare=False)

  @cached_property
  def blockers(self) -> BlockerSet:
    return BlockerSet.from_objects(self.buildings, self.persons)

  @cached_property
  def centers(self) -> np.ndarray:
    return np.array([[b.center.x, b.center.y] for b in self.buildings]).reshape(-1, 2)


def scene_rng(seed: int, index: int, attempt: int = 0) -> np.random.Generator:
  """Random stream of one scene attempt, independent of worker layout."""
  return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, attempt)))


def _orientations(scenario: Scenario, rng: np.random.Generator, n: int) -> np.ndarray:
  if isinstance(scenario.orientation, FixedOrientation):
    return np.full(n, scenario.orientation.phi_b)
  return rng.uniform(0.0, math.pi, n)


def _draw(
  scenario: Scenario, config: SceneConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
  h = config.half_extent
  n = rng.poisson(scenario.lambda_b * config.area)
  centers = rng.uniform(-h, h, (n, 2))
  length_sampler, width_sampler = config.samplers(scenario)
  lengths = length_sampler.sample(rng, n)
  widths = width_sampler.sample(rng, n)
  return centers, lengths, widths, _orientations(scenario, rng, n)


def _people(
  scenario: Scenario,
  config: SceneConfig,
  rng: np.random.Generator,
  buildings: BlockerSet,
  terminals: np.ndarray,
) -> np.ndarray:
  """Human centers outside buildings; discs covering a terminal are dropped."""
  h = config.half_extent
  n = rng.poisson(scenario.lambda_h_raw * config.area)
  people = rng.uniform(-h, h, (n, 2))
  keep = ~buildings.building_contains(people)
  for terminal in terminals:
    keep &= np.hypot(*(people - terminal).T) >= scenario.w_h / 2
  return people[keep]


def generate_scene(scenario: Scenario, config: SceneConfig, index: int) -> Scene:
  """Generate realization index of the scene.

  Scenes in which Tx or Rx falls inside a building are redrawn from the
  next attempt stream; the number of redraws is recorded on the scene.

  Args:
    scenario: Deployment parameters.
    config: Monte Carlo settings.
    index: Realization index.

  Returns:
    The scene, identical for identical (seed, index).

  Raises:
    ScenarioError: If no valid scene is found in max_attempts draws.
  """
  tx = Point2(-scenario.d, 0.0)
  rx = Point2(0.0, 0.0)
  terminals = np.array([[tx.x, tx.y], [rx.x, rx.y]])
  for attempt in range(config.max_attempts):
    rng = scene_rng(config.seed, index, attempt)
    centers, lengths, widths, orientations = _draw(scenario, config, rng)
    buildings = BlockerSet(centers, lengths, widths, orientations, np.zeros((0, 2)), scenario.w_h)
    if buildings.building_contains(terminals).any():
      continue
    people = _people(scenario, config, rng, buildings, terminals)
    return Scene(
      index,
      tx,
      rx,
      tuple(
        Building(Point2(float(c[0]), float(c[1])), float(l), float(w), float(o))
        for c, l, w, o in zip(centers, lengths, widths, orientations)
      ),
      tuple(Person(Point2(float(p[0]), float(p[1])), scenario.w_h) for p in people),
      rejections=attempt,
      attempt=attempt,
    )
  raise ScenarioError(
    "lambda_b",
    f"no scene with both terminals outdoors after {config.max_attempts} attempts",
  )
