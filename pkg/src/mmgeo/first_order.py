"""First-order reflection analytics module.

This module handles the coupling window between the transmitter and receiver
main lobes, the feasible area of reflector centers, blockage probabilities,
and the exact (quadrature) and closed-form (linearized) average reflection
count and path loss.

Angles follow a rotated frame in which the reflecting wall is horizontal: the
angle of arrival theta_n is measured from the wall, a reflected path has
length D * sec(theta_n) with D = d * |cos(psi)|, and psi is the signed angle
of the wall relative to the Tx -> Rx line. Length faces of a building with
orientation phi_b have psi = phi_b and width faces psi = phi_b + pi/2, both
wrapped to [-pi/2, pi/2).
"""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

from scipy.stats import poisson

from mmgeo.geometry import ANGLE_TOL, FaceDim
from mmgeo.quadrature import NumericalError, integrate
from mmgeo.scenario import (
  BlockageMoments,
  BlockageVariant,
  Scenario,
  SlopeRule,
  UniformOrientation,
  require_fixed,
)

logger = logging.getLogger(__name__)

# Upper clamp on angles of arrival; the feasible area diverges at pi/2.
THETA_MAX = math.pi / 2 - 1e-3


class UnboundedWindowError(NumericalError):
  """Exception raised when a coupling window reaches the wall normal."""

  def __init__(self, theta_u: float):
    super().__init__(
      "Coupling window reaches pi/2, the feasible area is unbounded",
      {"theta_u": theta_u},
    )


class CouplingScenario(StrEnum):
  """Which beam edge limits the coupling window."""

  SCENARIO_1 = "scenario1"
  SCENARIO_2 = "scenario2"


@dataclass(frozen=True)
class AngleSet:
  """Beam-edge angles measured from the reflecting wall."""

  theta_ri: float
  theta_ru: float
  theta_ti: float
  theta_tu: float
  theta_ra: float
  theta_ta: float


@dataclass(frozen=True)
class CouplingWindow:
  """Interval of arrival angles coupling both main lobes."""

  theta_i: float
  theta_u: float
  scenario_tag: CouplingScenario
  face_dim: FaceDim = FaceDim.LENGTH

  @property
  def width(self) -> float:
    return self.theta_u - self.theta_i


@dataclass(frozen=True)
class FaceFamily:
  """Faces sharing one wall direction.

  Attributes:
    psi: Wall direction relative to the Tx -> Rx line, in [-pi/2, pi/2).
    dim: Building dimension running along the faces.
    moments: Moments oriented so that e_l runs along the wall.
  """

  psi: float
  dim: FaceDim
  moments: BlockageMoments

  @property
  def face_length(self) -> float:
    """Mean face length E[a]."""
    return self.moments.e_l


@dataclass(frozen=True)
class ClosedFormTerms:
  """Composites of the linearized blockage exponential for one family.

  The exponential exp(-x u - y - z sqrt(1 + u^2)) in u = tan(theta) is
  replaced by e0 * (1 + slope * (u0 - u)) around the panel midpoint u0.
  """

  x: float
  y: float
  z: float
  u0: float
  slope: float
  e0: float
  d_proj: float


def angle_set(
  phi_t: float, phi_r: float, phi_b: float, theta_bt: float, theta_br: float
) -> AngleSet:
  """Return the beam-edge angles for a wall of direction phi_b.

  Args:
    phi_t: Transmitter pointing angle.
    phi_r: Receiver pointing angle.
    phi_b: Wall direction.
    theta_bt: Transmitter beamwidth.
    theta_br: Receiver beamwidth.

  Returns:
    The six angles of the rotated frame.
  """
  return AngleSet(
    theta_ri=phi_r + phi_b - theta_br / 2,
    theta_ru=phi_r + phi_b + theta_br / 2,
    theta_ti=math.pi - (phi_t + phi_b - theta_bt / 2),
    theta_tu=math.pi - (phi_t + phi_b + theta_bt / 2),
    theta_ra=phi_r + phi_b,
    theta_ta=math.pi - (phi_t + phi_b),
  )


def coupling_window(
  angles: AngleSet, face_dim: FaceDim = FaceDim.LENGTH
) -> CouplingWindow | None:
  """Intersect the receiver and transmitter angle intervals.

  The receiver lobe admits [theta_ri, theta_ru] and the transmitter lobe
  [theta_tu, theta_ti]. Scenario 1 (theta_ta > theta_ra) is limited by
  theta_tu and theta_ru, Scenario 2 by theta_ri and theta_ti.

  Args:
    angles: Beam-edge angles.
    face_dim: Dimension tag carried on the window.

  Returns:
    The window, or None when the intervals do not overlap.
  """
  theta_i = max(angles.theta_ri, angles.theta_tu)
  theta_u = min(angles.theta_ru, angles.theta_ti)
  if theta_u - theta_i <= ANGLE_TOL:
    return None
  tag = (
    CouplingScenario.SCENARIO_1
    if angles.theta_ta > angles.theta_ra
    else CouplingScenario.SCENARIO_2
  )
  return CouplingWindow(theta_i, theta_u, tag, face_dim)


def wall_direction(phi_b: float, dim: FaceDim) -> float:
  """Return the wall direction of a face family, wrapped to [-pi/2, pi/2)."""
  psi = phi_b if dim == FaceDim.LENGTH else phi_b + math.pi / 2
  return (psi + math.pi / 2) % math.pi - math.pi / 2


def face_window(
  scenario: Scenario, psi: float, dim: FaceDim = FaceDim.LENGTH, warn: bool = True
) -> CouplingWindow | None:
  """Return the usable coupling window of walls with direction psi.

  The window is clamped below at |psi| (the wall must lie beyond both
  terminals) and above at THETA_MAX.

  Args:
    scenario: Deployment parameters.
    psi: Wall direction in [-pi/2, pi/2).
    dim: Face dimension tag.
    warn: Log a warning when the upper clamp applies.

  Returns:
    The clamped window, or None when it is empty.
  """
  angles = angle_set(
    scenario.phi_t, scenario.phi_r, psi, scenario.theta_bt, scenario.theta_br
  )
  window = coupling_window(angles, dim)
  if window is None:
    return None
  theta_i = max(window.theta_i, abs(psi))
  theta_u = window.theta_u
  if theta_u > THETA_MAX:
    if warn:
      logger.warning(
        f"Clamping theta_u from {math.degrees(theta_u):.4f} deg to "
        f"{math.degrees(THETA_MAX):.4f} deg ({dim} faces)"
      )
    theta_u = THETA_MAX
  if theta_u - theta_i <= ANGLE_TOL:
    return None
  return CouplingWindow(theta_i, theta_u, window.scenario_tag, dim)


def feasible_area(a: float, d: float, phi_b: float, window: CouplingWindow) -> float:
  """Area of reflector centers producing a coupled reflection.

  Args:
    a: Face length in meters.
    d: Tx-Rx separation in meters.
    phi_b: Wall direction.
    window: Nonempty coupling window.

  Returns:
    a * (d |cos phi_b| / 2) * (tan theta_u - tan theta_i), never negative.

  Raises:
    UnboundedWindowError: If theta_u is at or beyond pi/2.
  """
  if window.theta_u >= math.pi / 2:
    raise UnboundedWindowError(window.theta_u)
  span = math.tan(window.theta_u) - math.tan(window.theta_i)
  return max(0.0, a * (d * abs(math.cos(phi_b)) / 2) * span)


def elemental_area(
  d: float, phi_b: float, theta_n: float, d_theta: float, d_a: float
) -> float:
  """Feasible-area element (d |cos phi_b| / 2) sec^2(theta_n) dtheta da."""
  return (d * abs(math.cos(phi_b)) / 2) / math.cos(theta_n) ** 2 * d_theta * d_a


def block_area_buildings(
  d: float, phi_b: float, theta_n: float, m: BlockageMoments
) -> float:
  """Approximate area in which a building center blocks the path.

  General-orientation form: blocker orientations are uniform relative to the
  path.

  Args:
    d: Tx-Rx separation.
    phi_b: Wall direction.
    theta_n: Angle of arrival.
    m: Building dimension moments.

  Returns:
    Blockage area in square meters.
  """
  path = d * abs(math.cos(phi_b)) / math.cos(theta_n)
  corner = (2 - (math.cos(theta_n) + math.sin(theta_n))) / (2 * math.pi)
  return (
    path * (2 / math.pi) * (m.e_l + m.e_w)
    + m.e_l * m.e_w
    - corner * (m.e_l2 + m.e_w2)
  )


def blockage_exponent(
  scenario: Scenario,
  d_proj: float,
  theta_n: float,
  variant: BlockageVariant,
  moments: BlockageMoments,
) -> float:
  """Return E such that the non-blocking probability is (P_self)^i exp(-E).

  Args:
    scenario: Deployment parameters.
    d_proj: Projected separation D = d |cos psi|.
    theta_n: Angle of arrival.
    variant: Blockage-area law.
    moments: Moments oriented so that e_l runs along the reflecting wall.
  """
  sec = 1.0 / math.cos(theta_n)
  if variant == BlockageVariant.FIXED_APPROX:
    building = scenario.lambda_b * (
      d_proj * (moments.e_l * math.tan(theta_n) + moments.e_w)
      + moments.e_l * moments.e_w
    )
  else:
    building = scenario.lambda_b * block_area_buildings(
      d_proj, 0.0, theta_n, moments
    )
  human = scenario.lambda_h * scenario.w_h * d_proj * sec
  return building + human


def p_block(
  d: float,
  phi_b: float,
  theta_n: float,
  scenario: Scenario,
  variant: BlockageVariant = BlockageVariant.GENERAL,
  face_dim: FaceDim = FaceDim.LENGTH,
) -> float:
  """Probability that a first-order path with arrival angle theta_n is blocked.

  Args:
    d: Tx-Rx separation.
    phi_b: Wall direction.
    theta_n: Angle of arrival, below pi/2.
    scenario: Supplies densities, moments and self-blockage.
    variant: General (random blocker orientation) or the fixed-orientation
      approximation.
    face_dim: Dimension along the reflecting wall; width faces exchange the
      length and width roles in the fixed-orientation approximation.

  Returns:
    Blocking probability in [0, 1].

  Raises:
    ScenarioError: If the human thinning factor is negative.
  """
  moments = scenario.moments
  if face_dim == FaceDim.WIDTH:
    moments = moments.swapped()
  d_proj = d * abs(math.cos(phi_b))
  exponent = blockage_exponent(scenario, d_proj, theta_n, variant, moments)
  return 1.0 - scenario.self_weight * math.exp(-exponent)


def default_variant(scenario: Scenario) -> BlockageVariant:
  """Fixed-orientation approximation for common orientations, else general."""
  if isinstance(scenario.orientation, UniformOrientation):
    return BlockageVariant.GENERAL
  return BlockageVariant.FIXED_APPROX


def family_moments(moments: BlockageMoments, dim: FaceDim) -> BlockageMoments:
  return moments if dim == FaceDim.LENGTH else moments.swapped()


def face_families(scenario: Scenario) -> list[FaceFamily]:
  """Return the length-face and width-face families of a fixed orientation."""
  phi_b = require_fixed(scenario, "Face families")
  return [
    FaceFamily(wall_direction(phi_b, dim), dim, family_moments(scenario.moments, dim))
    for dim in (FaceDim.LENGTH, FaceDim.WIDTH)
  ]


def orientation_limits(scenario: Scenario) -> tuple[float, float, float, float]:
  """Return (phi_i1, phi_u1, phi_i2, phi_u2) bounding coupled wall directions.

  Walls whose direction lies outside [phi_i1, phi_u2] produce no coupling;
  phi_u1 = phi_i2 separates Scenario 1 from Scenario 2.
  """
  base = math.pi - scenario.phi_t - scenario.phi_r
  theta_b = scenario.theta_b
  mid = base / 2
  return (base - theta_b) / 2, mid, mid, (base + theta_b) / 2


def _family_integral(
  scenario: Scenario,
  family: FaceFamily,
  variant: BlockageVariant,
  weight: str,
  warn: bool,
) -> float:
  """Integrate the non-blocking factor over a family's window.

  weight "count" integrates sec^2(theta) exp(-E); weight "power" integrates
  sin(theta) exp(-E). Both integrands are dimensionless.
  """
  d_proj = scenario.d * math.cos(family.psi)
  if d_proj <= 0:
    return 0.0
  window = face_window(scenario, family.psi, family.dim, warn)
  if window is None:
    return 0.0

  def shape(theta: float) -> float:
    factor = math.exp(
      -blockage_exponent(scenario, d_proj, theta, variant, family.moments)
    )
    if weight == "count":
      return factor / math.cos(theta) ** 2
    return factor * math.sin(theta)

  return integrate(
    shape, window.theta_i, window.theta_u, f"{weight} over {family.dim} faces"
  )


def _family_count(
  scenario: Scenario, family: FaceFamily, variant: BlockageVariant, warn: bool
) -> float:
  d_proj = scenario.d * math.cos(family.psi)
  inner = _family_integral(scenario, family, variant, "count", warn)
  return family.face_length * d_proj / 2 * inner


def _family_power(
  scenario: Scenario, family: FaceFamily, variant: BlockageVariant, warn: bool
) -> float:
  d_proj = scenario.d * math.cos(family.psi)
  if d_proj <= 0:
    return 0.0
  inner = _family_integral(scenario, family, variant, "power", warn)
  return family.face_length / (2 * d_proj) * inner


def _orientation_average(scenario: Scenario, per_family, label: str) -> float:
  """Average a per-family quantity over uniform wall directions.

  Both face families of a uniformly oriented building have uniform wall
  directions, so the average is (1/pi) times the integral over psi of the
  length-face and width-face contributions.
  """
  phi_i1, phi_u1, _, phi_u2 = orientation_limits(scenario)
  lower = max(phi_i1, -math.pi / 2)
  upper = min(phi_u2, math.pi / 2)

  def outer(psi: float) -> float:
    return sum(
      per_family(FaceFamily(psi, dim, family_moments(scenario.moments, dim)))
      for dim in (FaceDim.LENGTH, FaceDim.WIDTH)
    )

  return integrate(outer, lower, upper, label, points=[phi_u1]) / math.pi


def avg_first_order_exact(
  scenario: Scenario, variant: BlockageVariant | None = None
) -> float:
  """Average number of unblocked first-order reflections by quadrature.

  Args:
    scenario: Deployment parameters.
    variant: Blockage law; defaults to the fixed-orientation approximation
      for a fixed orientation and the general law otherwise.

  Returns:
    N_r, 0.0 when no wall direction couples both lobes.

  Raises:
    NumericalError: If a quadrature does not converge.
  """
  if scenario.lambda_b == 0:
    return 0.0
  variant = variant or default_variant(scenario)
  scale = scenario.lambda_b * scenario.self_weight
  if isinstance(scenario.orientation, UniformOrientation):
    total = _orientation_average(
      scenario,
      lambda family: _family_count(scenario, family, variant, warn=False),
      "reflection count over orientations",
    )
  else:
    total = sum(
      _family_count(scenario, family, variant, warn=True)
      for family in face_families(scenario)
    )
  return scale * total


def path_loss_exact(scenario: Scenario, variant: BlockageVariant | None = None) -> float:
  """Directional path loss (linear) from Campbell's theorem by quadrature.

  Reflection loss is Gamma_rm * sin(theta_n); for uniform orientations the
  received power is averaged over wall directions.

  Returns:
    PL as a linear power ratio, math.inf when no power is received.

  Raises:
    NumericalError: If a quadrature does not converge.
  """
  if scenario.lambda_b == 0:
    return math.inf
  variant = variant or default_variant(scenario)
  if isinstance(scenario.orientation, UniformOrientation):
    shape = _orientation_average(
      scenario,
      lambda family: _family_power(scenario, family, variant, warn=False),
      "received power over orientations",
    )
  else:
    shape = sum(
      _family_power(scenario, family, variant, warn=True)
      for family in face_families(scenario)
    )
  inverse = (
    scenario.friis
    * scenario.gamma_rm
    * scenario.lambda_b
    * scenario.self_weight
    * shape
  )
  return 1.0 / inverse if inverse > 0 else math.inf


def closed_form_terms(
  scenario: Scenario, family: FaceFamily, theta_i: float, theta_u: float
) -> ClosedFormTerms:
  """Return the linearization composites of a family over [theta_i, theta_u]."""
  d_proj = scenario.d * math.cos(family.psi)
  m = family.moments
  x = scenario.lambda_b * d_proj * m.e_l
  y = scenario.lambda_b * (d_proj * m.e_w + m.e_l * m.e_w)
  z = scenario.lambda_h * scenario.w_h * d_proj
  u0 = (math.tan(theta_i) + math.tan(theta_u)) / 2
  return linearize(scenario, x, y, z, u0, d_proj)


def linearize(
  scenario: Scenario, x: float, y: float, z: float, u0: float, d_proj: float
) -> ClosedFormTerms:
  """Linearize exp(-x u - y - z sqrt(1 + u^2)) around u0."""
  root = math.sqrt(1 + u0 * u0)
  factor = 2.0 if scenario.slope == SlopeRule.PRINTED else 1.0
  slope = x + factor * u0 * z / root
  e0 = math.exp(-x * u0 - y - z * root)
  return ClosedFormTerms(x, y, z, u0, slope, e0, d_proj)


@dataclass(frozen=True)
class LinearPanel:
  """A slice of a coupling window linearized about its own midpoint."""

  theta_i: float
  theta_u: float
  terms: ClosedFormTerms


def panel_count(scenario: Scenario, family: FaceFamily, window: CouplingWindow) -> int:
  """Number of equal tan(theta) steps keeping each panel within linear_span.

  The exponent x u + z sqrt(1 + u^2) changes by at most (x + z) per unit of
  u = tan(theta). A linear_span of 0 keeps the window as a single panel.
  """
  if scenario.linear_span == 0:
    return 1
  d_proj = scenario.d * math.cos(family.psi)
  rate = scenario.lambda_b * d_proj * family.moments.e_l
  rate += scenario.lambda_h * scenario.w_h * d_proj
  change = rate * (math.tan(window.theta_u) - math.tan(window.theta_i))
  return max(1, math.ceil(change / scenario.linear_span))


def linear_panels(
  scenario: Scenario, family: FaceFamily, window: CouplingWindow
) -> list[LinearPanel]:
  """Split a window into panels of equal width in tan(theta).

  Args:
    scenario: Deployment parameters; linear_span bounds each panel.
    family: Wall family of the window.
    window: Nonempty coupling window.

  Returns:
    Panels covering the window in order.
  """
  n = panel_count(scenario, family, window)
  lower, upper = math.tan(window.theta_i), math.tan(window.theta_u)
  edges = [window.theta_i]
  edges += [math.atan(lower + (upper - lower) * k / n) for k in range(1, n)]
  edges.append(window.theta_u)
  return [
    LinearPanel(a, b, closed_form_terms(scenario, family, a, b))
    for a, b in zip(edges[:-1], edges[1:])
  ]


def power_bracket(terms: ClosedFormTerms, theta_i: float, theta_u: float) -> float:
  """Closed form of the integral of sin(theta) (1 + s (u0 - tan theta))."""
  s, u0 = terms.slope, terms.u0
  log_term = math.log(
    (math.tan(theta_i) + 1 / math.cos(theta_i))
    / (math.tan(theta_u) + 1 / math.cos(theta_u))
  )
  return (1 + s * u0) * (math.cos(theta_i) - math.cos(theta_u)) + s * (
    log_term + math.sin(theta_u) - math.sin(theta_i)
  )


def _closed_families(scenario: Scenario):
  require_fixed(scenario, "Closed forms")
  for family in face_families(scenario):
    if scenario.d * math.cos(family.psi) <= 0:
      continue
    window = face_window(scenario, family.psi, family.dim)
    if window is None:
      continue
    yield family, linear_panels(scenario, family, window)


def avg_first_order_closed(scenario: Scenario) -> float:
  """Closed-form N_r for a fixed building orientation.

  With the exponential linearized about the midpoint of [tan theta_i,
  tan theta_u] the slope term integrates to zero, leaving
  (lambda_b D (P_self)^i / 2) E[a] (tan theta_u - tan theta_i) e0 per panel.

  Raises:
    ScenarioError: If the orientation is not fixed.
  """
  if scenario.lambda_b == 0:
    return 0.0
  total = 0.0
  for family, panels in _closed_families(scenario):
    for panel in panels:
      span = math.tan(panel.theta_u) - math.tan(panel.theta_i)
      total += family.face_length * panel.terms.d_proj / 2 * span * panel.terms.e0
  return scenario.lambda_b * scenario.self_weight * total


def inverse_path_loss_closed(scenario: Scenario) -> float:
  """Closed-form reciprocal path loss for a fixed building orientation."""
  if scenario.lambda_b == 0:
    return 0.0
  total = 0.0
  for family, panels in _closed_families(scenario):
    for panel in panels:
      bracket = power_bracket(panel.terms, panel.theta_i, panel.theta_u)
      total += family.face_length / (2 * panel.terms.d_proj) * bracket * panel.terms.e0
  return (
    scenario.friis * scenario.gamma_rm * scenario.lambda_b * scenario.self_weight * total
  )


def path_loss_closed(scenario: Scenario) -> float:
  """Closed-form path loss (linear), math.inf when no power is received.

  Raises:
    ScenarioError: If the orientation is not fixed.
  """
  inverse = inverse_path_loss_closed(scenario)
  return 1.0 / inverse if inverse > 0 else math.inf


def path_loss_db(pl: float) -> float:
  """Convert a linear path loss to dB; math.inf passes through."""
  return math.inf if math.isinf(pl) else 10.0 * math.log10(pl)


def from_db(value_db: float) -> float:
  return 10.0 ** (value_db / 10.0)


def poisson_pmf(n_r: float, k: int) -> float:
  """Probability of exactly k first-order reflections given the mean n_r."""
  return float(poisson.pmf(k, n_r))
