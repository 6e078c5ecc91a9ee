"""Power delay profile module for reflected NLOS paths.

This module handles the arrival-time density of unblocked reflections, the
power delay profile (PDP), its moment integrals and the derived mean delay,
RMS delay spread and coherence bandwidth. First-order paths follow one wall
family each; second-order paths are integrated over the image-source mixture.
"""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from mmgeo.first_order import (
  ClosedFormTerms,
  CouplingWindow,
  FaceFamily,
  blockage_exponent,
  face_families,
  face_window,
  linear_panels,
  linearize,
  orientation_limits,
)
from mmgeo.geometry import FaceDim
from mmgeo.quadrature import gauss_legendre, integrate
from mmgeo.scenario import BlockageVariant, FixedOrientation, Scenario, require_fixed
from mmgeo.second_order import (
  ImageSourceModel,
  image_source_model,
  mixture_nodes,
  second_order_windows,
)

logger = logging.getLogger(__name__)

# Tolerance below zero accepted for a variance before it is an error.
VARIANCE_TOL = 1e-18
PDP_RESOLUTION = 1e-10
# Gauss-Legendre nodes per second-order window in quadrature mode.
WINDOW_NODES = 24


class DelayStatsError(Exception):
  """Exception raised when delay statistics are undefined."""

  def __init__(self, message: str, m0: float | None = None):
    self.m0 = m0
    super().__init__(message)


class DelayDomainError(Exception):
  """Exception raised for a delay shorter than any reflected path."""

  def __init__(self, tau: float, tau_min: float):
    self.tau = tau
    self.tau_min = tau_min
    super().__init__(
      f"Delay {tau * 1e9:.4f} ns is below the shortest reflected delay "
      f"{tau_min * 1e9:.4f} ns"
    )


class PathOrder(StrEnum):
  """Number of reflections along a path."""

  FIRST = "first"
  SECOND = "second"


class MomentMethod(StrEnum):
  """How moment integrals are evaluated."""

  CLOSED = "closed"
  QUADRATURE = "quadrature"


@dataclass(frozen=True)
class DelayStats:
  """Delay statistics in seconds and hertz."""

  tau_mean: float
  tau_rms: float
  coherence_bandwidth: float


@dataclass(frozen=True)
class MomentIntegrals:
  """Zeroth, first and second delay moments of the PDP by path order.

  The zeroth moment is the received power normalized by P_t and the free
  space factor, i.e. the reciprocal path loss up to that factor.
  """

  m0_first: float
  m1_first: float
  m2_first: float
  m0_second: float = 0.0
  m1_second: float = 0.0
  m2_second: float = 0.0

  @property
  def m0(self) -> float:
    return self.m0_first + self.m0_second

  @property
  def m1(self) -> float:
    return self.m1_first + self.m1_second

  @property
  def m2(self) -> float:
    return self.m2_first + self.m2_second

  def __add__(self, other: "MomentIntegrals") -> "MomentIntegrals":
    return MomentIntegrals(
      self.m0_first + other.m0_first,
      self.m1_first + other.m1_first,
      self.m2_first + other.m2_first,
      self.m0_second + other.m0_second,
      self.m1_second + other.m1_second,
      self.m2_second + other.m2_second,
    )

  def scaled(self, k: float) -> "MomentIntegrals":
    return MomentIntegrals(
      k * self.m0_first,
      k * self.m1_first,
      k * self.m2_first,
      k * self.m0_second,
      k * self.m1_second,
      k * self.m2_second,
    )


@dataclass(frozen=True)
class FirstOrderBranch:
  """One coupled wall family of a fixed orientation."""

  family: FaceFamily
  window: CouplingWindow
  d_proj: float

  @property
  def delay_range(self) -> tuple[float, float]:
    return (
      self.d_proj / (SPEED_OF_LIGHT * math.cos(self.window.theta_i)),
      self.d_proj / (SPEED_OF_LIGHT * math.cos(self.window.theta_u)),
    )


@dataclass(frozen=True)
class SecondOrderBranch:
  """Image-source mixture of a fixed orientation.

  Arrays hold one entry per mixture node; weights already include the
  node's distance and angle probabilities.
  """

  model: ImageSourceModel
  family: FaceFamily
  d_proj: float
  weight: np.ndarray
  theta_i: np.ndarray
  theta_u: np.ndarray

  def coverage(self, theta: float) -> float:
    """Mixture weight of nodes whose window contains theta."""
    inside = (self.theta_i <= theta) & (theta <= self.theta_u)
    return float(np.sum(self.weight[inside]))


@dataclass(frozen=True)
class PdpModel:
  """Precomputed branches of a fixed-orientation scenario."""

  scenario: Scenario
  first: tuple[FirstOrderBranch, ...]
  second: SecondOrderBranch | None

  @property
  def tau_min(self) -> float:
    """Shortest reflected delay, D / c of the nearest wall family."""
    d_proj = [b.d_proj for b in self.first]
    if self.second is not None:
      d_proj.append(self.second.d_proj)
    if not d_proj:
      return self.scenario.d / SPEED_OF_LIGHT
    return min(d_proj) / SPEED_OF_LIGHT

  def support(self) -> tuple[float, float] | None:
    """Delay interval in which the PDP can be nonzero."""
    spans = [b.delay_range for b in self.first]
    second = self.second
    if second is not None and np.any(second.weight > 0):
      spans.append(
        (
          second.d_proj / (SPEED_OF_LIGHT * math.cos(float(np.min(second.theta_i)))),
          second.d_proj / (SPEED_OF_LIGHT * math.cos(float(np.max(second.theta_u)))),
        )
      )
    if not spans:
      return None
    return min(s[0] for s in spans), max(s[1] for s in spans)


def _second_branch(scenario: Scenario, phi_b: float) -> SecondOrderBranch | None:
  model = image_source_model(scenario, phi_b)
  if model.p <= 0:
    return None
  family = FaceFamily(model.psi, FaceDim.LENGTH, scenario.moments)
  d_proj = scenario.d * math.cos(model.psi)
  if d_proj <= 0:
    return None
  d_hat, theta_hat, weight = mixture_nodes(model)
  theta_i, theta_u, valid = second_order_windows(scenario, model, theta_hat, d_hat)
  if not np.any(valid):
    return None
  return SecondOrderBranch(
    model,
    family,
    d_proj,
    weight[valid] * model.p,
    theta_i[valid],
    theta_u[valid],
  )


def pdp_model(scenario: Scenario) -> PdpModel:
  """Build the branches of a fixed-orientation scenario.

  Raises:
    ScenarioError: If the orientation is not fixed.
  """
  phi_b = require_fixed(scenario, "PDP model")
  first = []
  for family in face_families(scenario):
    d_proj = scenario.d * math.cos(family.psi)
    if d_proj <= 0:
      continue
    window = face_window(scenario, family.psi, family.dim, warn=False)
    if window is not None:
      first.append(FirstOrderBranch(family, window, d_proj))
  second = _second_branch(scenario, phi_b) if scenario.second_order else None
  return PdpModel(scenario, tuple(first), second)


def _arrival_angle(d_proj: float, tau: float) -> float | None:
  ratio = d_proj / (SPEED_OF_LIGHT * tau)
  if ratio > 1:
    return None
  return math.acos(ratio)


def _clear(scenario: Scenario, family: FaceFamily, d_proj: float, theta: float) -> float:
  """Probability that no building or person blocks the path."""
  exponent = blockage_exponent(
    scenario, d_proj, theta, BlockageVariant.FIXED_APPROX, family.moments
  )
  return math.exp(-exponent)


def _non_blocking(
  scenario: Scenario, family: FaceFamily, d_proj: float, theta: float
) -> float:
  return scenario.self_weight * _clear(scenario, family, d_proj, theta)


def _check_domain(model: PdpModel, tau: float) -> None:
  if tau < model.tau_min:
    raise DelayDomainError(tau, model.tau_min)


def _fixed_arrival_density(model: PdpModel, order: PathOrder, tau: float) -> float:
  _check_domain(model, tau)
  scenario = model.scenario
  total = 0.0
  if order == PathOrder.FIRST:
    for branch in model.first:
      theta = _arrival_angle(branch.d_proj, tau)
      if theta is None or not branch.window.theta_i <= theta <= branch.window.theta_u:
        continue
      total += (
        branch.family.face_length
        * _non_blocking(scenario, branch.family, branch.d_proj, theta)
        / (2 * math.sin(theta))
      )
  elif model.second is not None:
    second = model.second
    theta = _arrival_angle(second.d_proj, tau)
    if theta is not None and theta > 0:
      total += (
        second.model.a_prime
        * second.coverage(theta)
        * _non_blocking(scenario, second.family, second.d_proj, theta)
        / (2 * math.sin(theta))
      )
  return SPEED_OF_LIGHT * scenario.lambda_b * total


def _fixed_pdp(model: PdpModel, tau: float) -> float:
  if tau <= 0:
    return 0.0
  scenario = model.scenario
  first = 0.0
  for branch in model.first:
    theta = _arrival_angle(branch.d_proj, tau)
    if theta is None or not branch.window.theta_i <= theta <= branch.window.theta_u:
      continue
    first += branch.family.face_length * _non_blocking(
      scenario, branch.family, branch.d_proj, theta
    )
  second = 0.0
  if model.second is not None:
    branch = model.second
    theta = _arrival_angle(branch.d_proj, tau)
    if theta is not None:
      second = (
        branch.model.a_prime
        * scenario.gamma_rm
        * math.sin(theta)
        * branch.coverage(theta)
        * _non_blocking(scenario, branch.family, branch.d_proj, theta)
      )
  scale = (
    scenario.friis * scenario.gamma_rm * scenario.lambda_b / (2 * SPEED_OF_LIGHT * tau**2)
  )
  return scale * (first + second)


def _orientation_breaks(scenario: Scenario) -> list[float]:
  """Orientations in [0, pi) where a wall family enters or leaves coupling."""
  limits = orientation_limits(scenario)
  breaks = set()
  for psi in limits:
    breaks.add(psi % math.pi)
    breaks.add((psi - math.pi / 2) % math.pi)
  breaks.add(math.pi / 2)
  return sorted(breaks)


def _orientation_mean(scenario: Scenario, fn, label: str) -> float:
  """Mean of fn(fixed scenario) over orientations uniform in [0, pi).

  Per-orientation values use the fixed-orientation blockage law.
  """
  breaks = _orientation_breaks(scenario)

  def inner(phi_b: float) -> float:
    return fn(scenario.replace(orientation=FixedOrientation(phi_b)))

  return integrate(inner, 0.0, math.pi, label, points=breaks) / math.pi


def _orientation_rule(scenario: Scenario, fn, panel_nodes: int = 16) -> float:
  """Fixed-rule orientation mean for integrands with jumps in phi_b."""
  edges = [0.0, *[b for b in _orientation_breaks(scenario) if 0 < b < math.pi], math.pi]
  total = 0.0
  for lower, upper in zip(edges[:-1], edges[1:]):
    if upper <= lower:
      continue
    nodes, weights = gauss_legendre(panel_nodes, lower, upper)
    for phi_b, w in zip(nodes, weights):
      total += w * fn(scenario.replace(orientation=FixedOrientation(float(phi_b))))
  return total / math.pi


def arrival_density(scenario: Scenario, order: PathOrder, tau: float) -> float:
  """Density in delay of unblocked reflections of the given order.

  For a first-order family the density is E[a] c lambda_b (1 - P_b) /
  (2 sin theta) with cos theta = D / (c tau); uniform orientations average
  over phi_b.

  Raises:
    DelayDomainError: If tau is below the shortest reflected delay.
  """
  if scenario.is_fixed:
    return _fixed_arrival_density(pdp_model(scenario), order, tau)
  def fixed(s: Scenario) -> float:
    model = pdp_model(s)
    return 0.0 if tau < model.tau_min else _fixed_arrival_density(model, order, tau)

  return _orientation_rule(scenario, fixed)


def pdp(scenario: Scenario, tau: float) -> float:
  """Power delay profile at delay tau, per unit transmit power.

  Delays outside every branch support, including those shorter than any
  reflected path, give 0.
  """
  if scenario.is_fixed:
    return _fixed_pdp(pdp_model(scenario), tau)
  return _orientation_rule(scenario, lambda s: _fixed_pdp(pdp_model(s), tau))


def pdp_curve(
  scenario: Scenario, resolution: float = PDP_RESOLUTION
) -> tuple[np.ndarray, np.ndarray]:
  """Sample the PDP of a fixed orientation over its support.

  Args:
    scenario: Fixed-orientation scenario.
    resolution: Grid spacing in seconds.

  Returns:
    Tuple of (delays, pdp) arrays, both empty when nothing couples.
  """
  model = pdp_model(scenario)
  support = model.support()
  if support is None:
    return np.zeros(0), np.zeros(0)
  start = 0.9 * support[0]
  taus = np.arange(start, 1.1 * support[1] + resolution, resolution)
  values = np.array([_fixed_pdp(model, float(t)) for t in taus])
  return taus, values


def first_order_moments(
  terms: ClosedFormTerms, theta_i: float, theta_u: float
) -> tuple[float, float, float]:
  """Closed-form brackets of the first-order moments.

  Returns:
    Brackets (b0, b1, b2) with M_k = prefactor_k * e0 * b_k, where the
    prefactors are K / (2D), K / (2c) and K D / (2c^2).
  """
  s, u0 = terms.slope, terms.u0
  flat = 1 + s * u0
  ti, tu = math.tan(theta_i), math.tan(theta_u)
  si, su = 1 / math.cos(theta_i), 1 / math.cos(theta_u)
  log_ratio = math.log((tu + su) / (ti + si))
  b0 = flat * (math.cos(theta_i) - math.cos(theta_u)) - s * (
    log_ratio - math.sin(theta_u) + math.sin(theta_i)
  )
  b1 = flat * math.log(math.cos(theta_i) / math.cos(theta_u)) - s * (
    tu - ti - theta_u + theta_i
  )
  b2 = flat * (su - si) - (s / 2) * (tu * su - ti * si - log_ratio)
  return b0, b1, b2


def second_order_brackets(
  slope: np.ndarray, u0: np.ndarray, theta_i: np.ndarray, theta_u: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
  """Closed-form brackets of the second-order moments (vectorized).

  The integrands carry an extra sin(theta) from the second reflection loss.
  """
  flat = 1 + slope * u0
  ti, tu = np.tan(theta_i), np.tan(theta_u)
  si, su = 1 / np.cos(theta_i), 1 / np.cos(theta_u)
  b0 = flat * (
    (theta_u - theta_i) / 2 - (np.sin(2 * theta_u) - np.sin(2 * theta_i)) / 4
  ) - slope * (
    np.log(np.cos(theta_i) / np.cos(theta_u))
    + (np.cos(theta_u) ** 2 - np.cos(theta_i) ** 2) / 2
  )
  b1 = flat * (
    np.log((tu + su) / (ti + si)) - np.sin(theta_u) + np.sin(theta_i)
  ) - slope * ((su**2 + 1) / su - (si**2 + 1) / si)
  b2 = flat * (tu - ti - theta_u + theta_i) - slope * (
    (tu**2 - ti**2) / 2 - np.log(su / si)
  )
  return b0, b1, b2


def _first_closed(scenario: Scenario, branch: FirstOrderBranch) -> MomentIntegrals:
  d, c = branch.d_proj, SPEED_OF_LIGHT
  total = MomentIntegrals(0.0, 0.0, 0.0)
  for panel in linear_panels(scenario, branch.family, branch.window):
    b0, b1, b2 = first_order_moments(panel.terms, panel.theta_i, panel.theta_u)
    k = branch.family.face_length * panel.terms.e0
    total = total + MomentIntegrals(
      k * b0 / (2 * d), k * b1 / (2 * c), k * d * b2 / (2 * c * c)
    )
  return total


def _first_quadrature(scenario: Scenario, branch: FirstOrderBranch) -> MomentIntegrals:
  d, c = branch.d_proj, SPEED_OF_LIGHT
  family, window = branch.family, branch.window

  def factor(theta: float) -> float:
    return _clear(scenario, family, d, theta)

  i0 = integrate(
    lambda t: math.sin(t) * factor(t), window.theta_i, window.theta_u, "zeroth moment"
  )
  i1 = integrate(
    lambda t: math.tan(t) * factor(t), window.theta_i, window.theta_u, "first moment"
  )
  i2 = integrate(
    lambda t: math.sin(t) / math.cos(t) ** 2 * factor(t),
    window.theta_i,
    window.theta_u,
    "second moment",
  )
  k = family.face_length
  return MomentIntegrals(k * i0 / (2 * d), k * i1 / (2 * c), k * d * i2 / (2 * c * c))


def _second_closed(scenario: Scenario, branch: SecondOrderBranch) -> MomentIntegrals:
  m = branch.family.moments
  d = branch.d_proj
  x = scenario.lambda_b * d * m.e_l
  y = scenario.lambda_b * (d * m.e_w + m.e_l * m.e_w)
  z = scenario.lambda_h * scenario.w_h * d
  u0 = (np.tan(branch.theta_i) + np.tan(branch.theta_u)) / 2
  slope = np.empty_like(u0)
  e0 = np.empty_like(u0)
  for j, u in enumerate(u0):
    terms = linearize(scenario, x, y, z, float(u), d)
    slope[j], e0[j] = terms.slope, terms.e0
  b0, b1, b2 = second_order_brackets(slope, u0, branch.theta_i, branch.theta_u)
  k = branch.model.a_prime * scenario.gamma_rm
  w = branch.weight * e0
  c = SPEED_OF_LIGHT
  return MomentIntegrals(
    0.0,
    0.0,
    0.0,
    k * float(np.sum(w * b0)) / (2 * d),
    k * float(np.sum(w * b1)) / (2 * c),
    k * d * float(np.sum(w * b2)) / (2 * c * c),
  )


def _second_quadrature(scenario: Scenario, branch: SecondOrderBranch) -> MomentIntegrals:
  d, c = branch.d_proj, SPEED_OF_LIGHT
  unit, unit_w = gauss_legendre(WINDOW_NODES, 0.0, 1.0)
  span = (branch.theta_u - branch.theta_i)[:, None]
  theta = branch.theta_i[:, None] + span * unit[None, :]
  weights = span * unit_w[None, :] * branch.weight[:, None]
  m = branch.family.moments
  exponent = scenario.lambda_b * (
    d * (m.e_l * np.tan(theta) + m.e_w) + m.e_l * m.e_w
  ) + scenario.lambda_h * scenario.w_h * d / np.cos(theta)
  factor = np.exp(-exponent) * np.sin(theta) * weights
  i0 = float(np.sum(factor * np.sin(theta)))
  i1 = float(np.sum(factor * np.tan(theta)))
  i2 = float(np.sum(factor * np.sin(theta) / np.cos(theta) ** 2))
  k = branch.model.a_prime * scenario.gamma_rm
  return MomentIntegrals(0.0, 0.0, 0.0, k * i0 / (2 * d), k * i1 / (2 * c), k * d * i2 / (2 * c * c))


def _fixed_moments(scenario: Scenario, method: MomentMethod) -> MomentIntegrals:
  model = pdp_model(scenario)
  total = MomentIntegrals(0.0, 0.0, 0.0)
  for branch in model.first:
    if method == MomentMethod.CLOSED:
      total = total + _first_closed(scenario, branch)
    else:
      total = total + _first_quadrature(scenario, branch)
  if model.second is not None:
    if method == MomentMethod.CLOSED:
      total = total + _second_closed(scenario, model.second)
    else:
      total = total + _second_quadrature(scenario, model.second)
  scale = scenario.friis * scenario.gamma_rm * scenario.lambda_b * scenario.self_weight
  return total.scaled(scale)


def moment_integrals(
  scenario: Scenario, method: MomentMethod = MomentMethod.CLOSED
) -> MomentIntegrals:
  """Delay moments of the PDP, split by path order.

  Args:
    scenario: Deployment parameters; uniform orientations average the
      fixed-orientation moments over phi_b.
    method: Closed forms of the linearized exponential, or quadrature of
      the exact one.

  Returns:
    The moment integrals per unit transmit power.

  Raises:
    NumericalError: If a quadrature does not converge.
  """
  method = MomentMethod(method)
  if scenario.lambda_b == 0:
    return MomentIntegrals(0.0, 0.0, 0.0)
  if scenario.is_fixed:
    return _fixed_moments(scenario, method)
  parts = [
    _orientation_mean(
      scenario,
      lambda s, name=name: getattr(_fixed_moments(s, method), name),
      f"{name} over orientations",
    )
    for name in ("m0_first", "m1_first", "m2_first", "m0_second", "m1_second", "m2_second")
  ]
  return MomentIntegrals(*parts)


def delay_stats_from_moments(moments: MomentIntegrals) -> DelayStats:
  """Mean delay, RMS delay spread and coherence bandwidth of moments.

  Raises:
    DelayStatsError: If the zeroth moment vanishes or the variance is
      negative beyond rounding.
  """
  if not moments.m0 > 0:
    raise DelayStatsError("No power is received, delay statistics are undefined", moments.m0)
  tau_mean = moments.m1 / moments.m0
  variance = moments.m2 / moments.m0 - tau_mean**2
  if variance < 0:
    if variance < -VARIANCE_TOL:
      raise DelayStatsError(f"Negative delay variance {variance:.6g} s^2", moments.m0)
    logger.debug(f"Clamping delay variance {variance:.3g} to zero")
    variance = 0.0
  tau_rms = math.sqrt(variance)
  bandwidth = math.inf if tau_rms == 0 else 1.0 / (50.0 * tau_rms)
  return DelayStats(tau_mean, tau_rms, bandwidth)


def delay_stats(
  scenario: Scenario, method: MomentMethod = MomentMethod.CLOSED
) -> DelayStats:
  """Delay statistics of a scenario.

  Raises:
    DelayStatsError: If no power is received or the variance is negative.
    NumericalError: If a quadrature does not converge.
  """
  return delay_stats_from_moments(moment_integrals(scenario, method))
