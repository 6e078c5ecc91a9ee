"""Second-order reflection module for the virtual image transmitter.

This module handles the statistics of the image transmitter created by a
first bounce: its maximum reach, the feasible area of first reflectors, the
Bernoulli occupancy of that area, and the joint distribution of the image's
distance and virtual beam edge. A second-order path is then treated as a
first-order reflection of the image off a perpendicular wall, so angles of
the image beam and of the receiver window are measured as complements.
"""

import math
from dataclasses import dataclass

import numpy as np

from mmgeo.first_order import (
  THETA_MAX,
  CouplingScenario,
  CouplingWindow,
  angle_set,
  wall_direction,
)
from mmgeo.geometry import FaceDim
from mmgeo.quadrature import gauss_legendre, integrate
from mmgeo.scenario import Scenario, UpperEdge

# Lower clamp on beam-edge angles so that cotangents stay finite.
THETA_MIN = 1e-3


class ModelError(Exception):
  """Exception raised when the image-source distributions are degenerate."""

  pass


@dataclass(frozen=True)
class ImageSourceModel:
  """Distribution of the first-bounce image transmitter.

  Attributes:
    psi: Direction of the first reflecting wall.
    a: Mean length of the first reflecting face.
    a_prime: Mean length of the second face; the image distance is measured
      from a_prime / 2.
    theta_ti: Upper transmitter beam edge of the first bounce.
    theta_tu: Lower transmitter beam edge of the first bounce.
    d_max: Maximum distance of a first reflector from Tx.
    c1: Constant coefficient of the image distance density.
    c2: Linear coefficient of the image distance density.
    area: Feasible area A' of first reflectors.
    p: Probability that A' holds at least one reflector.
  """

  psi: float
  a: float
  a_prime: float
  theta_ti: float
  theta_tu: float
  d_max: float
  c1: float
  c2: float
  area: float
  p: float

  @property
  def d_min(self) -> float:
    return self.a_prime / 2

  @property
  def angle_support(self) -> tuple[float, float]:
    """Support of the virtual beam's lower edge."""
    return math.pi / 2 - self.theta_ti, math.pi / 2 - self.theta_tu


@dataclass(frozen=True)
class ImageAnglePdf:
  """Mixed density of the virtual beam's lower edge given the image distance.

  A continuous part proportional to sec^2 on the support plus an atom at the
  support's lower end.
  """

  lower: float
  upper: float
  tan_li: float
  denominator: float
  atom_mass: float

  @property
  def atom_location(self) -> float:
    return self.lower

  @property
  def support(self) -> tuple[float, float]:
    return self.lower, self.upper

  def density(self, theta: float) -> float:
    """Continuous part of the density at theta."""
    if not self.lower <= theta <= self.upper or math.isinf(self.denominator):
      return 0.0
    return 1.0 / (math.cos(theta) ** 2 * self.denominator)

  def continuous_mass(self) -> float:
    return integrate(self.density, self.lower, self.upper, "image angle density")

  def total_mass(self) -> float:
    """Quadrature of the continuous part plus the atom."""
    return self.continuous_mass() + self.atom_mass


def _dimensions(scenario: Scenario, phi_b: float) -> tuple[float, float]:
  """Return (a, a_prime) for orientation phi_b."""
  m = scenario.moments
  if 0.0 <= phi_b % math.pi <= math.pi / 2:
    return m.e_l, m.e_w
  return m.e_w, m.e_l


def image_source_model(scenario: Scenario, phi_b: float) -> ImageSourceModel:
  """Build the image-transmitter model of buildings with orientation phi_b.

  Args:
    scenario: Deployment parameters.
    phi_b: Common building orientation.

  Returns:
    The model; an empty transmitter beam yields p = 0 and A' = 0.
  """
  psi = wall_direction(phi_b, FaceDim.LENGTH)
  angles = angle_set(
    scenario.phi_t, scenario.phi_r, psi, scenario.theta_bt, scenario.theta_br
  )
  theta_ti = min(angles.theta_ti, THETA_MAX)
  theta_tu = max(angles.theta_tu, THETA_MIN)
  a, a_prime = _dimensions(scenario, phi_b)
  d_max = (
    0.5 * scenario.d * (abs(math.cos(phi_b)) * math.tan(theta_ti) + abs(math.sin(phi_b)))
    + a_prime / 2
  )
  if theta_tu >= theta_ti:
    return ImageSourceModel(psi, a, a_prime, theta_ti, theta_tu, d_max, 0.0, 0.0, 0.0, 0.0)
  c1 = a / 2 * (
    math.sin(theta_ti) * math.tan(theta_ti) + math.sin(theta_tu) * math.tan(theta_tu)
  )
  c2 = (1 / math.tan(theta_tu) - 1 / math.tan(theta_ti)) / 2
  h = a_prime / 2
  area = c1 * (d_max - h) + c2 * (d_max**2 - h**2)
  p = -math.expm1(-scenario.lambda_b * area)
  return ImageSourceModel(psi, a, a_prime, theta_ti, theta_tu, d_max, c1, c2, area, p)


def image_distance_pdf(model: ImageSourceModel, d_hat: float) -> float:
  """Density of the image distance; zero outside [a'/2, d_max]."""
  if model.area <= 0 or not model.d_min <= d_hat <= model.d_max:
    return 0.0
  return (model.c1 + 2 * model.c2 * d_hat) / model.area


def image_distance_cdf(model: ImageSourceModel, d_hat: float) -> float:
  """Cumulative distribution of the image distance."""
  if model.area <= 0 or d_hat >= model.d_max:
    return 1.0
  if d_hat <= model.d_min:
    return 0.0
  h = model.d_min
  return (model.c1 * (d_hat - h) + model.c2 * (d_hat**2 - h**2)) / model.area


def _gap(model: ImageSourceModel, d_hat: np.ndarray | float) -> np.ndarray | float:
  """Return a / (d_hat - a'/2), infinite at or below a'/2."""
  r = np.asarray(d_hat, dtype=float) - model.d_min
  with np.errstate(divide="ignore"):
    gap = np.where(r > 0, model.a / np.where(r > 0, r, 1.0), np.inf)
  return gap if gap.ndim else float(gap)


def image_angle_pdf(model: ImageSourceModel, d_hat: float) -> ImageAnglePdf:
  """Conditional distribution of the virtual beam's lower edge.

  Args:
    model: Image-source model.
    d_hat: Image distance in the support.

  Returns:
    The mixed distribution.

  Raises:
    ModelError: If the density's normalizing denominator is not positive.
  """
  lower, upper = model.angle_support
  cot_ti = 1 / math.tan(model.theta_ti)
  cot_tu = 1 / math.tan(model.theta_tu)
  gap = _gap(model, d_hat)
  tan_li = cot_ti - gap
  denominator = cot_tu - tan_li
  if math.isinf(denominator):
    return ImageAnglePdf(lower, upper, tan_li, denominator, 1.0)
  if not denominator > 0:
    raise ModelError(
      f"Degenerate image angle density: denominator {denominator:.6g} at d={d_hat:.6g}"
    )
  return ImageAnglePdf(lower, upper, tan_li, denominator, gap / denominator)


def image_upper_edge(
  model: ImageSourceModel,
  theta_ti_hat: float,
  d_hat: float,
  variant: UpperEdge = UpperEdge.TAN,
) -> float:
  """Upper edge of the virtual beam given its lower edge.

  The tan variant extends the lower edge by the face seen from the image,
  atan(tan(theta) + a / (d - a'/2)); the literal variant adds the ratio to the
  angle itself. Both are clipped to the support and never fall below
  theta_ti_hat.
  """
  return float(upper_edges(model, np.asarray(theta_ti_hat), np.asarray(d_hat), variant))


def upper_edges(
  model: ImageSourceModel,
  theta_hat: np.ndarray,
  d_hat: np.ndarray,
  variant: UpperEdge = UpperEdge.TAN,
) -> np.ndarray:
  """Vectorized image_upper_edge."""
  gap = _gap(model, d_hat)
  base = np.tan(theta_hat) if variant == UpperEdge.TAN else theta_hat
  edge = np.arctan(base + gap)
  _, upper = model.angle_support
  return np.maximum(np.minimum(edge, upper), theta_hat)


def second_order_windows(
  scenario: Scenario, model: ImageSourceModel, theta_hat: np.ndarray, d_hat: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
  """Coupling windows of the virtual beam with the complemented Rx window.

  Returns:
    Tuple of (theta_i, theta_u, valid) arrays.
  """
  angles = angle_set(
    scenario.phi_t, scenario.phi_r, model.psi, scenario.theta_bt, scenario.theta_br
  )
  edge = upper_edges(model, theta_hat, d_hat, scenario.upper_edge)
  theta_i = np.maximum(np.maximum(theta_hat, math.pi / 2 - angles.theta_ru), THETA_MIN)
  theta_u = np.minimum(np.minimum(edge, math.pi / 2 - angles.theta_ri), THETA_MAX)
  return theta_i, theta_u, theta_i < theta_u


def second_order_window(
  scenario: Scenario, model: ImageSourceModel, theta_ti_hat: float, d_hat: float
) -> CouplingWindow | None:
  """Scalar form of second_order_windows."""
  theta_i, theta_u, valid = second_order_windows(
    scenario, model, np.asarray([theta_ti_hat]), np.asarray([d_hat])
  )
  if not valid[0]:
    return None
  edge = image_upper_edge(model, theta_ti_hat, d_hat, scenario.upper_edge)
  # Scenario 2 when the virtual beam edge bounds the window.
  tag = CouplingScenario.SCENARIO_2 if theta_u[0] >= edge else CouplingScenario.SCENARIO_1
  return CouplingWindow(float(theta_i[0]), float(theta_u[0]), tag, FaceDim.WIDTH)


def mixture_nodes(
  model: ImageSourceModel, n: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
  """Tensor-product rule over (image distance, beam lower edge).

  Gauss-Legendre nodes cover the distance support and the continuous part
  of the angle density; the atom enters as an extra node per distance.

  Returns:
    Tuple of (d_hat, theta_hat, weight) arrays; weights sum to about one.
  """
  if model.area <= 0:
    empty = np.zeros(0)
    return empty, empty, empty
  d_nodes, d_weights = gauss_legendre(n, model.d_min, model.d_max)
  lower, upper = model.angle_support
  t_nodes, t_weights = gauss_legendre(n, lower, upper)
  d_list, t_list, w_list = [], [], []
  for d_hat, wd in zip(d_nodes, d_weights):
    pdf = image_angle_pdf(model, float(d_hat))
    base = wd * image_distance_pdf(model, float(d_hat))
    if not math.isinf(pdf.denominator):
      d_list.append(np.full(n, d_hat))
      t_list.append(t_nodes)
      w_list.append(base * t_weights / (np.cos(t_nodes) ** 2 * pdf.denominator))
    d_list.append(np.array([d_hat]))
    t_list.append(np.array([pdf.atom_location]))
    w_list.append(np.array([base * pdf.atom_mass]))
  return np.concatenate(d_list), np.concatenate(t_list), np.concatenate(w_list)


def sample_image_source(
  model: ImageSourceModel, rng: np.random.Generator, n: int
) -> tuple[np.ndarray, np.ndarray]:
  """Draw (d_hat, theta_ti_hat) pairs by inverse transform sampling.

  Args:
    model: Image-source model with positive area.
    rng: Random generator.
    n: Number of samples.

  Returns:
    Tuple of (d_hat, theta_hat) arrays.
  """
  h = model.d_min
  u = rng.random(n)
  k = model.c2 * h * h + model.c1 * h + u * model.area
  d_hat = 2 * k / (model.c1 + np.sqrt(model.c1**2 + 4 * model.c2 * k))
  d_hat = np.clip(d_hat, h, model.d_max)
  gap = _gap(model, d_hat)
  cot_ti = 1 / math.tan(model.theta_ti)
  cot_tu = 1 / math.tan(model.theta_tu)
  finite = np.isfinite(gap)
  denominator = np.where(finite, cot_tu - cot_ti + np.where(finite, gap, 0.0), 1.0)
  atom = np.where(finite, np.where(finite, gap, 0.0) / denominator, 1.0)
  v = rng.random(n)
  lower, upper = model.angle_support
  with np.errstate(invalid="ignore"):
    theta = np.arctan(cot_ti + (v - atom) * denominator)
  theta = np.where(v < atom, lower, np.clip(theta, lower, upper))
  return d_hat, theta


def first_bounce_region_contains(
  scenario: Scenario, model: ImageSourceModel, points: np.ndarray
) -> np.ndarray:
  """Return a mask of points inside the feasible region of first reflectors.

  In Tx coordinates with r along the wall normal and s along the wall, the
  region is a'/2 <= r <= d_max and r cot(theta_ti) - C1 <= s <= r cot(theta_tu);
  its area is A'.
  """
  points = np.asarray(points, dtype=float).reshape(-1, 2)
  if model.area <= 0:
    return np.zeros(len(points), dtype=bool)
  rel = points - np.array([-scenario.d, 0.0])
  t = np.array([math.cos(model.psi), math.sin(model.psi)])
  normal = np.array([-t[1], t[0]])
  r = rel @ normal
  s = rel @ t
  cot_ti = 1 / math.tan(model.theta_ti)
  cot_tu = 1 / math.tan(model.theta_tu)
  return (
    (r >= model.d_min)
    & (r <= model.d_max)
    & (s >= r * cot_ti - model.c1)
    & (s <= r * cot_tu)
  )
