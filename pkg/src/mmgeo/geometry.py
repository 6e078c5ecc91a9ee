"""Geometry module for the 2D reflection and blockage kernel.

This module handles points, segments, rectangular buildings and disc-shaped
people, image points, specular reflection construction, main-lobe tests and
segment blockage. Blockage is evaluated with numpy over all obstacles at once
so the same code serves single queries and the Monte Carlo tracer.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

ANGLE_TOL = 1e-12
# Obstacles are shrunk by this much so that grazing contact is not blockage.
CONTACT_TOL = 1e-9


class GeometryError(Exception):
  """Exception raised for degenerate or invalid geometric input."""

  pass


class FaceDim(StrEnum):
  """Building dimension running along a reflecting face."""

  LENGTH = "length"
  WIDTH = "width"


def wrap_angle(angle: float) -> float:
  """Wrap an angle to [-pi, pi)."""
  return (angle + math.pi) % (2.0 * math.pi) - math.pi


def angle_diff(a: float, b: float) -> float:
  """Return a - b wrapped to [-pi, pi)."""
  return wrap_angle(a - b)


@dataclass(frozen=True)
class Point2:
  """A point in the plane, coordinates in meters."""

  x: float
  y: float

  def __post_init__(self) -> None:
    if not (math.isfinite(self.x) and math.isfinite(self.y)):
      raise GeometryError(f"Point coordinates must be finite, got ({self.x}, {self.y})")

  def __add__(self, other: "Point2") -> "Point2":
    return Point2(self.x + other.x, self.y + other.y)

  def __sub__(self, other: "Point2") -> "Point2":
    return Point2(self.x - other.x, self.y - other.y)

  def __mul__(self, k: float) -> "Point2":
    return Point2(self.x * k, self.y * k)

  __rmul__ = __mul__

  def dot(self, other: "Point2") -> float:
    return self.x * other.x + self.y * other.y

  def cross(self, other: "Point2") -> float:
    return self.x * other.y - self.y * other.x

  def norm(self) -> float:
    return math.hypot(self.x, self.y)

  def rotate(self, angle: float, about: "Point2 | None" = None) -> "Point2":
    """Rotate counterclockwise by angle around about (origin by default)."""
    origin = about or Point2(0.0, 0.0)
    dx, dy = self.x - origin.x, self.y - origin.y
    c, s = math.cos(angle), math.sin(angle)
    return Point2(origin.x + c * dx - s * dy, origin.y + s * dx + c * dy)

  def as_array(self) -> np.ndarray:
    return np.array([self.x, self.y])


def bearing(a: Point2, b: Point2) -> float:
  """Return the direction angle of the vector a -> b."""
  return math.atan2(b.y - a.y, b.x - a.x)


@dataclass(frozen=True)
class Segment2:
  """A directed segment from a to b."""

  a: Point2
  b: Point2

  def __post_init__(self) -> None:
    if self.a == self.b:
      raise GeometryError(f"Degenerate segment at ({self.a.x}, {self.a.y})")

  @property
  def length(self) -> float:
    return (self.b - self.a).norm()

  @property
  def direction(self) -> Point2:
    """Unit vector from a to b."""
    v = self.b - self.a
    return v * (1.0 / v.norm())

  @property
  def normal(self) -> Point2:
    """Left-hand unit normal of the directed segment."""
    u = self.direction
    return Point2(-u.y, u.x)

  def side(self, p: Point2) -> float:
    """Signed distance of p from the segment's line (positive on the left)."""
    return self.direction.cross(p - self.a)


@dataclass(frozen=True)
class Face:
  """One reflecting face of a building.

  Attributes:
    segment: Face extent.
    normal: Outward unit normal.
    dim: Building dimension running along the face.
    building: Index of the owning building in its scene.
  """

  segment: Segment2
  normal: Point2
  dim: FaceDim
  building: int


@dataclass(frozen=True)
class Building:
  """Rectangular building; orientation is the angle of the length axis."""

  center: Point2
  length: float
  width: float
  orientation: float

  def __post_init__(self) -> None:
    if not (self.length > 0 and self.width > 0):
      raise GeometryError(
        f"Building dimensions must be positive, got {self.length} x {self.width}"
      )

  def _axes(self) -> tuple[Point2, Point2]:
    u = Point2(math.cos(self.orientation), math.sin(self.orientation))
    return u, Point2(-u.y, u.x)

  def corners(self) -> tuple[Point2, Point2, Point2, Point2]:
    """Return corners counterclockwise, starting at (-l/2, -w/2) local."""
    u, v = self._axes()
    hl, hw = 0.5 * self.length, 0.5 * self.width
    c = self.center
    return (
      c - u * hl - v * hw,
      c + u * hl - v * hw,
      c + u * hl + v * hw,
      c - u * hl + v * hw,
    )

  def faces(self, index: int = 0) -> list[Face]:
    """Return the four faces with outward normals.

    Args:
      index: Building index recorded on each face.

    Returns:
      Faces in corner order: bottom, right, top, left in the local frame.
    """
    p0, p1, p2, p3 = self.corners()
    u, v = self._axes()
    return [
      Face(Segment2(p0, p1), v * -1.0, FaceDim.LENGTH, index),
      Face(Segment2(p1, p2), u, FaceDim.WIDTH, index),
      Face(Segment2(p2, p3), v, FaceDim.LENGTH, index),
      Face(Segment2(p3, p0), u * -1.0, FaceDim.WIDTH, index),
    ]

  def contains(self, p: Point2) -> bool:
    """Return True if p lies strictly inside the rectangle."""
    u, v = self._axes()
    q = p - self.center
    return (
      abs(q.dot(u)) < 0.5 * self.length and abs(q.dot(v)) < 0.5 * self.width
    )


@dataclass(frozen=True)
class Person:
  """Disc-shaped human blocker."""

  center: Point2
  diameter: float

  def __post_init__(self) -> None:
    if not self.diameter > 0:
      raise GeometryError(f"Person diameter must be positive, got {self.diameter}")

  def contains(self, p: Point2) -> bool:
    return (p - self.center).norm() < 0.5 * self.diameter


@dataclass(frozen=True)
class Cone:
  """Ideal antenna main lobe: constant gain inside, zero outside."""

  apex: Point2
  boresight: float
  half_angle: float

  def __post_init__(self) -> None:
    if not 0.0 < self.half_angle <= math.pi:
      raise GeometryError(f"Cone half-angle must lie in (0, pi], got {self.half_angle}")


@dataclass(frozen=True)
class RayVertex:
  """Specular reflection point and the grazing angle of the bounce."""

  point: Point2
  grazing: float


def image_point(p: Point2, face: Segment2) -> Point2:
  """Mirror p across the infinite line through face.

  Args:
    p: Point to mirror.
    face: Mirror segment.

  Returns:
    The image point.

  Raises:
    GeometryError: If the face has zero length.
  """
  d = face.b - face.a
  norm2 = d.dot(d)
  if norm2 == 0.0:
    raise GeometryError("Cannot mirror across a zero-length face")
  t = (p - face.a).dot(d) / norm2
  foot = face.a + d * t
  return foot * 2.0 - p


def mirror_across(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
  """Vectorized image_point: mirror points across the lines through a and b.

  Args:
    points: (n, 2) points, or a single point broadcast against the lines.
    a: (n, 2) first endpoints.
    b: (n, 2) second endpoints, distinct from a.

  Returns:
    (n, 2) image points.
  """
  d = b - a
  t = np.sum((points - a) * d, axis=-1) / np.sum(d * d, axis=-1)
  foot = a + t[..., None] * d
  return 2.0 * foot - points


def specular_reflection(tx: Point2, rx: Point2, face: Segment2) -> RayVertex | None:
  """Construct the specular point of tx -> face -> rx by image theory.

  Args:
    tx: Source point.
    rx: Destination point.
    face: Reflecting segment.

  Returns:
    The reflection vertex, or None when tx and rx are on opposite sides of
    the face line or the image ray misses the face extent.

  Raises:
    GeometryError: If tx or rx lies on the face line.
  """
  side_t = face.side(tx)
  side_r = face.side(rx)
  if abs(side_t) <= ANGLE_TOL * max(1.0, face.length) or abs(side_r) <= ANGLE_TOL * max(
    1.0, face.length
  ):
    raise GeometryError("Terminal lies on the reflecting face line")
  if (side_t > 0) != (side_r > 0):
    return None
  im = image_point(tx, face)
  # rx and the image sit on opposite sides at distances |side_r|, |side_t|.
  s = abs(side_r) / (abs(side_r) + abs(side_t))
  r = rx + (im - rx) * s
  d = face.b - face.a
  t = (r - face.a).dot(d) / d.dot(d)
  if t < -ANGLE_TOL or t > 1.0 + ANGLE_TOL:
    return None
  grazing = math.asin(min(1.0, abs(side_r) / (rx - r).norm()))
  return RayVertex(r, grazing)


def in_main_lobe(cone: Cone, target: Point2) -> bool:
  """Return True if target lies within the cone's main lobe.

  Raises:
    GeometryError: If target coincides with the apex.
  """
  if target == cone.apex:
    raise GeometryError("Main-lobe test target coincides with the apex")
  offset = angle_diff(bearing(cone.apex, target), cone.boresight)
  return abs(offset) <= cone.half_angle + ANGLE_TOL


def lobe_mask(
  apex: np.ndarray, targets: np.ndarray, boresight: float, half_angle: float
) -> np.ndarray:
  """Vectorized main-lobe test of an (n, 2) array of targets."""
  delta = targets - apex
  angles = np.arctan2(delta[..., 1], delta[..., 0])
  offset = (angles - boresight + np.pi) % (2.0 * np.pi) - np.pi
  return np.abs(offset) <= half_angle + ANGLE_TOL


def _slab(p: np.ndarray, dp: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
  with np.errstate(divide="ignore", invalid="ignore"):
    t1 = (-h - p) / dp
    t2 = (h - p) / dp
  lo = np.minimum(t1, t2)
  hi = np.maximum(t1, t2)
  parallel = dp == 0.0
  inside = np.abs(p) < h
  lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
  hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
  return lo, hi


class BlockerSet:
  """Array form of a scene's obstacles for vectorized blockage tests.

  Args:
    centers: (n, 2) building centers.
    lengths: (n,) building lengths.
    widths: (n,) building widths.
    orientations: (n,) length-axis angles.
    people: (m, 2) person centers.
    diameter: Person diameter, scalar or one per person.
  """

  def __init__(
    self,
    centers: np.ndarray,
    lengths: np.ndarray,
    widths: np.ndarray,
    orientations: np.ndarray,
    people: np.ndarray,
    diameter: float | np.ndarray,
  ):
    self.centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    self.half_l = np.maximum(0.5 * np.asarray(lengths, dtype=float) - CONTACT_TOL, 0.0)
    self.half_w = np.maximum(0.5 * np.asarray(widths, dtype=float) - CONTACT_TOL, 0.0)
    orientations = np.asarray(orientations, dtype=float)
    self.cos = np.cos(orientations)
    self.sin = np.sin(orientations)
    self.people = np.asarray(people, dtype=float).reshape(-1, 2)
    self.radius = 0.5 * np.asarray(diameter, dtype=float)

  @classmethod
  def from_objects(
    cls, buildings: Sequence[Building], humans: Sequence[Person]
  ) -> "BlockerSet":
    return cls(
      np.array([[b.center.x, b.center.y] for b in buildings]).reshape(-1, 2),
      np.array([b.length for b in buildings]),
      np.array([b.width for b in buildings]),
      np.array([b.orientation for b in buildings]),
      np.array([[h.center.x, h.center.y] for h in humans]).reshape(-1, 2),
      np.array([h.diameter for h in humans]),
    )

  def building_hits(self, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Return a boolean mask of buildings whose interior the segment crosses."""
    d = p1 - p0
    rel = p0 - self.centers
    # Segment start and direction in each rectangle's local frame.
    qx = rel[:, 0] * self.cos + rel[:, 1] * self.sin
    qy = -rel[:, 0] * self.sin + rel[:, 1] * self.cos
    dx = d[0] * self.cos + d[1] * self.sin
    dy = -d[0] * self.sin + d[1] * self.cos
    lo_x, hi_x = _slab(qx, dx, self.half_l)
    lo_y, hi_y = _slab(qy, dy, self.half_w)
    t_in = np.maximum(np.maximum(lo_x, lo_y), 0.0)
    t_out = np.minimum(np.minimum(hi_x, hi_y), 1.0)
    return t_in < t_out

  def building_contains(self, points: np.ndarray) -> np.ndarray:
    """Return a mask of points lying inside any building."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(self.centers) == 0:
      return np.zeros(len(points), dtype=bool)
    rel = points[:, None, :] - self.centers[None, :, :]
    qx = rel[..., 0] * self.cos + rel[..., 1] * self.sin
    qy = -rel[..., 0] * self.sin + rel[..., 1] * self.cos
    inside = (np.abs(qx) < self.half_l) & (np.abs(qy) < self.half_w)
    return inside.any(axis=1)

  def person_hits(self, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Return a boolean mask of people whose disc the segment crosses."""
    if len(self.people) == 0:
      return np.zeros(0, dtype=bool)
    d = p1 - p0
    norm2 = float(d @ d)
    t = np.clip(((self.people - p0) @ d) / norm2, 0.0, 1.0)
    closest = p0 + t[:, None] * d
    dist = np.hypot(*(self.people - closest).T)
    return dist < self.radius

  def blocks(self, p0: np.ndarray, p1: np.ndarray, exclude: Iterable[int] = ()) -> bool:
    """Return True if the segment p0 -> p1 is blocked.

    Args:
      p0: Segment start as a length-2 array.
      p1: Segment end as a length-2 array.
      exclude: Building indices ignored (the reflectors of the path).
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if len(self.centers):
      hits = self.building_hits(p0, p1)
      excluded = [i for i in exclude if 0 <= i < len(hits)]
      if excluded:
        hits[excluded] = False
      if hits.any():
        return True
    return bool(self.person_hits(p0, p1).any())


def segment_blocked(
  s: Segment2,
  buildings: Sequence[Building],
  humans: Sequence[Person],
  exclude: int | Iterable[int] | None = None,
) -> bool:
  """Return True if s crosses a building interior or a human disc.

  Args:
    s: Segment to test.
    buildings: Candidate rectangular blockers.
    humans: Candidate disc blockers.
    exclude: Index (or indices) into buildings that are ignored.

  Returns:
    Whether the segment is blocked.
  """
  if exclude is None:
    excluded: tuple[int, ...] = ()
  elif isinstance(exclude, int):
    excluded = (exclude,)
  else:
    excluded = tuple(exclude)
  blockers = BlockerSet.from_objects(buildings, humans)
  return blockers.blocks(s.a.as_array(), s.b.as_array(), excluded)
