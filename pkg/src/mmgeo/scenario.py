"""Scenario module describing a directional NLOS deployment.

This module holds the immutable parameter set shared by the analytic models
and the Monte Carlo simulator: link geometry, antenna beams, building and
human densities, blockage moments and reflection losses.
"""

import dataclasses
import math
from dataclasses import dataclass
from enum import StrEnum

from scipy.constants import c as SPEED_OF_LIGHT

from mmgeo.validator import (
  validate_beamwidth,
  validate_carried,
  validate_finite,
  validate_moments,
  validate_non_negative,
  validate_positive,
  validate_probability,
  validate_reflection_coefficient,
)


class ScenarioError(Exception):
  """Exception raised when a scenario parameter violates its invariant."""

  def __init__(self, field: str, message: str):
    self.field = field
    super().__init__(f"Invalid scenario field '{field}': {message}")


class BlockageVariant(StrEnum):
  """Blockage-area law used for the building blockage probability."""

  GENERAL = "general"
  FIXED_APPROX = "fixed"


class SlopeRule(StrEnum):
  """Slope used when the blockage exponential is linearized in tan(theta)."""

  TANGENT = "tangent"
  PRINTED = "printed"


class UpperEdge(StrEnum):
  """Formula for the upper edge of the image transmitter's virtual beam."""

  TAN = "tan"
  LITERAL = "literal"


@dataclass(frozen=True)
class BlockageMoments:
  """First and second moments of building length and width in meters."""

  e_l: float
  e_w: float
  e_l2: float
  e_w2: float

  def __post_init__(self) -> None:
    for name, mean, second in (
      ("e_l", self.e_l, self.e_l2),
      ("e_w", self.e_w, self.e_w2),
    ):
      is_valid, message = validate_moments(name, mean, second)
      if not is_valid:
        raise ScenarioError(name, message)

  @classmethod
  def constant(cls, length: float, width: float) -> "BlockageMoments":
    """Return moments of buildings with fixed length and width."""
    return cls(length, width, length * length, width * width)

  def swapped(self) -> "BlockageMoments":
    """Return the moments with the length and width roles exchanged."""
    return BlockageMoments(self.e_w, self.e_l, self.e_w2, self.e_l2)


@dataclass(frozen=True)
class FixedOrientation:
  """All buildings share the orientation phi_b (length axis angle)."""

  phi_b: float


@dataclass(frozen=True)
class UniformOrientation:
  """Building orientations are uniform over [0, pi)."""


Orientation = FixedOrientation | UniformOrientation


@dataclass(frozen=True)
class Scenario:
  """Full parameterization of a deployment.

  Angles are in radians, powers in watts and densities per square meter.
  Tx and Rx sit on the x-axis, Rx at the origin and Tx at (-d, 0).

  Attributes:
    d: Tx-Rx separation in meters.
    f: Carrier frequency in hertz.
    p_t: Transmit power in watts.
    phi_t: Transmitter beam pointing angle.
    phi_r: Receiver beam pointing angle.
    theta_bt: Transmitter half-power beamwidth.
    theta_br: Receiver half-power beamwidth.
    lambda_b: Building density.
    moments: Building dimension moments.
    orientation: Fixed or uniformly distributed building orientation.
    lambda_h_raw: Human density before thinning by buildings.
    w_h: Human disc diameter in meters.
    p_self: Self non-blocking probability per carried terminal.
    carried: Number of terminals held by a person (0, 1 or 2).
    gamma_rm: Maximum reflection coefficient (linear power ratio).
    second_order: Whether second-order reflections are modeled.
    upper_edge: Virtual beam upper-edge formula.
    slope: Linearization slope rule for the closed forms.
    linear_span: Largest change of the blockage exponent across one
      linearization panel of a closed form; 0 linearizes each window once.
  """

  d: float = 75.0
  f: float = 38e9
  p_t: float = 1.0
  phi_t: float = math.radians(110.0)
  phi_r: float = math.radians(50.0)
  theta_bt: float = math.radians(20.0)
  theta_br: float = math.radians(20.0)
  lambda_b: float = 8e-5
  moments: BlockageMoments = BlockageMoments.constant(25.0, 25.0)
  orientation: Orientation = UniformOrientation()
  lambda_h_raw: float = 0.0
  w_h: float = 0.30
  p_self: float = 0.25
  carried: int = 0
  gamma_rm: float = 10.0 ** (-19.1 / 10.0)
  second_order: bool = False
  upper_edge: UpperEdge = UpperEdge.TAN
  slope: SlopeRule = SlopeRule.PRINTED
  linear_span: float = 0.5

  def __post_init__(self) -> None:
    checks = (
      ("d", validate_positive),
      ("f", validate_positive),
      ("p_t", validate_positive),
      ("phi_t", validate_finite),
      ("phi_r", validate_finite),
      ("theta_bt", validate_beamwidth),
      ("theta_br", validate_beamwidth),
      ("lambda_b", validate_non_negative),
      ("lambda_h_raw", validate_non_negative),
      ("w_h", validate_positive),
      ("p_self", validate_probability),
      ("carried", validate_carried),
      ("gamma_rm", validate_reflection_coefficient),
      ("linear_span", validate_non_negative),
    )
    for field, check in checks:
      is_valid, message = check(field, getattr(self, field))
      if not is_valid:
        raise ScenarioError(field, message)
    if isinstance(self.orientation, FixedOrientation):
      is_valid, message = validate_finite("phi_b", self.orientation.phi_b)
      if not is_valid:
        raise ScenarioError("phi_b", message)

  def replace(self, **changes: object) -> "Scenario":
    """Return a copy with the given fields changed (revalidated)."""
    return dataclasses.replace(self, **changes)

  @property
  def theta_b(self) -> float:
    """Mean of the two beamwidths, used for the orientation limits."""
    return 0.5 * (self.theta_bt + self.theta_br)

  @property
  def friis(self) -> float:
    """Free-space loss factor (c / 4 pi f)^2."""
    return (SPEED_OF_LIGHT / (4.0 * math.pi * self.f)) ** 2

  @property
  def self_weight(self) -> float:
    """Self non-blocking weight (P_self)^i."""
    return self.p_self**self.carried

  @property
  def lambda_h(self) -> float:
    """Human density thinned by the area covered by buildings.

    Raises:
      ScenarioError: If the building coverage exceeds the whole plane.
    """
    factor = 1.0 - self.lambda_b * self.moments.e_l * self.moments.e_w
    if factor < 0:
      raise ScenarioError(
        "lambda_b",
        f"building coverage lambda_b*E[l]*E[w] = {1.0 - factor:.4g} exceeds 1",
      )
    return self.lambda_h_raw * factor

  @property
  def is_fixed(self) -> bool:
    return isinstance(self.orientation, FixedOrientation)


def require_fixed(scenario: Scenario, what: str) -> float:
  """Return phi_b of a fixed-orientation scenario.

  Args:
    scenario: Scenario to inspect.
    what: Name of the quantity needing a fixed orientation.

  Returns:
    The common building orientation.

  Raises:
    ScenarioError: If building orientations are uniformly distributed.
  """
  if not isinstance(scenario.orientation, FixedOrientation):
    raise ScenarioError("orientation", f"{what} requires a fixed orientation")
  return scenario.orientation.phi_b
