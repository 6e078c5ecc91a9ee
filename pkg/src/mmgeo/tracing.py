"""Tracing module for first- and second-order reflections in a scene.

This module handles image-theory ray tracing over all building faces of a
scene: specular construction, the Tx and Rx main-lobe tests and segment
blockage with the reflectors excluded. Candidate faces are processed as numpy
arrays; blockage is then tested per surviving candidate.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from mmgeo.geometry import (
  ANGLE_TOL,
  Cone,
  FaceDim,
  Point2,
  Segment2,
  in_main_lobe,
  lobe_mask,
  mirror_across,
  segment_blocked,
)
from mmgeo.pdp import PathOrder
from mmgeo.scenario import Scenario
from mmgeo.scene import Scene
from mmgeo.second_order import image_source_model

# Relative tolerance on the specular point lying within a face.
EXTENT_TOL = 1e-9
# Tolerance of the audit's reflection-law and length checks.
AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class RayPath:
  """A traced reflection path.

  Attributes:
    order: First or second order.
    vertices: Tx, the reflection points and Rx.
    theta_n: Grazing angle of the last bounce (arrival angle at Rx).
    grazing: Grazing angle of every bounce, in path order.
    length: Total path length in meters.
    power: Gain-normalized received power per unit P_t,
      Gamma_l * prod(Gamma_rm sin(theta)) / length^2.
    blocked: Whether any segment is blocked.
    self_block_weight: Self non-blocking weight (P_self)^i.
    buildings: Reflecting building indices, in path order.
    face_dims: Dimension of every reflecting face, in path order.
  """

  order: PathOrder
  vertices: tuple[Point2, ...]
  theta_n: float
  grazing: tuple[float, ...]
  length: float
  power: float
  blocked: bool
  self_block_weight: float
  buildings: tuple[int, ...]
  face_dims: tuple[FaceDim, ...]

  @property
  def delay(self) -> float:
    return self.length / SPEED_OF_LIGHT


@dataclass(frozen=True)
class FaceArrays:
  """All faces of a scene as arrays."""

  a: np.ndarray
  b: np.ndarray
  normal: np.ndarray
  dim: np.ndarray
  building: np.ndarray

  def __len__(self) -> int:
    return len(self.building)


def face_arrays(scene: Scene) -> FaceArrays:
  """Collect the four faces of every building."""
  faces = [face for i, b in enumerate(scene.buildings) for face in b.faces(i)]
  if not faces:
    empty = np.zeros((0, 2))
    return FaceArrays(empty, empty, empty, np.zeros(0, dtype=object), np.zeros(0, dtype=int))
  return FaceArrays(
    np.array([[f.segment.a.x, f.segment.a.y] for f in faces]),
    np.array([[f.segment.b.x, f.segment.b.y] for f in faces]),
    np.array([[f.normal.x, f.normal.y] for f in faces]),
    np.array([f.dim for f in faces], dtype=object),
    np.array([f.building for f in faces]),
  )


def _cones(scene: Scene, scenario: Scenario) -> tuple[Cone, Cone]:
  return (
    Cone(scene.tx, math.pi - scenario.phi_t, scenario.theta_bt / 2),
    Cone(scene.rx, math.pi - scenario.phi_r, scenario.theta_br / 2),
  )


def _extent(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
  """Parameter of points along each face, 0 at a and 1 at b."""
  d = b - a
  return np.sum((points - a) * d, axis=-1) / np.sum(d * d, axis=-1)


def _within(t: np.ndarray) -> np.ndarray:
  return (t >= -EXTENT_TOL) & (t <= 1.0 + EXTENT_TOL)


def _point(p: np.ndarray) -> Point2:
  return Point2(float(p[0]), float(p[1]))


def trace_first_order(
  scene: Scene, scenario: Scenario, include_blocked: bool = False
) -> list[RayPath]:
  """Trace single-bounce paths off every building face.

  A face yields a path when Tx and Rx both lie on its outward side, the
  specular point falls within the face, it sits inside both main lobes and,
  unless include_blocked is set, neither segment is blocked.

  Args:
    scene: Scene to trace.
    scenario: Supplies beams and reflection loss.
    include_blocked: Keep blocked paths, marked as blocked.

  Returns:
    Paths in face order.
  """
  faces = face_arrays(scene)
  if len(faces) == 0:
    return []
  tx, rx = scene.tx.as_array(), scene.rx.as_array()
  tx_cone, rx_cone = _cones(scene, scenario)
  side_t = np.sum((tx - faces.a) * faces.normal, axis=1)
  side_r = np.sum((rx - faces.a) * faces.normal, axis=1)
  usable = (side_t > ANGLE_TOL) & (side_r > ANGLE_TOL)
  with np.errstate(divide="ignore", invalid="ignore"):
    image = tx - 2.0 * side_t[:, None] * faces.normal
    s = side_r / (side_r + side_t)
    point = rx + s[:, None] * (image - rx)
  usable &= _within(_extent(point, faces.a, faces.b))
  usable &= lobe_mask(tx, point, tx_cone.boresight, tx_cone.half_angle)
  usable &= lobe_mask(rx, point, rx_cone.boresight, rx_cone.half_angle)

  paths = []
  for k in np.flatnonzero(usable):
    r = point[k]
    b = int(faces.building[k])
    blocked = scene.blockers.blocks(tx, r, (b,)) or scene.blockers.blocks(r, rx, (b,))
    if blocked and not include_blocked:
      continue
    to_rx = float(np.hypot(*(rx - r)))
    length = float(np.hypot(*(r - tx))) + to_rx
    grazing = math.asin(min(1.0, side_r[k] / to_rx))
    paths.append(
      RayPath(
        PathOrder.FIRST,
        (scene.tx, _point(r), scene.rx),
        grazing,
        (grazing,),
        length,
        scenario.friis * scenario.gamma_rm * math.sin(grazing) / length**2,
        blocked,
        scenario.self_weight,
        (b,),
        (faces.dim[k],),
      )
    )
  return paths


def _facing(
  apex: np.ndarray, faces: FaceArrays, cone: Cone
) -> np.ndarray:
  """Faces whose outward side holds apex and that overlap the cone."""
  side = np.sum((apex - faces.a) * faces.normal, axis=1)
  ea = np.arctan2(*(faces.a - apex).T[::-1])
  eb = np.arctan2(*(faces.b - apex).T[::-1])
  oa = (ea - cone.boresight + np.pi) % (2 * np.pi) - np.pi
  ob = (eb - cone.boresight + np.pi) % (2 * np.pi) - np.pi
  lo, hi = np.minimum(oa, ob), np.maximum(oa, ob)
  overlap = (lo <= cone.half_angle) & (hi >= -cone.half_angle) & (hi - lo < np.pi)
  return (side > ANGLE_TOL) & overlap


@lru_cache(maxsize=1024)
def _reach(scenario: Scenario, orientation: float) -> float:
  return image_source_model(scenario, orientation).d_max


def _near_link(scene: Scene, scenario: Scenario) -> np.ndarray:
  """Buildings whose center lies within d_max + 3 max(l, w) of the link midpoint."""
  if not scene.buildings:
    return np.zeros(0, dtype=bool)
  midpoint = np.array([-scenario.d / 2, 0.0])
  margin = 3 * np.array([max(b.length, b.width) for b in scene.buildings])
  reach = np.array([_reach(scenario, b.orientation) for b in scene.buildings])
  distance = np.hypot(*(scene.centers - midpoint).T)
  return distance <= reach + margin


def trace_second_order(
  scene: Scene, scenario: Scenario, include_blocked: bool = False
) -> list[RayPath]:
  """Trace two-bounce paths off ordered face pairs of distinct buildings.

  The double image of Tx (mirrored across the first face, then the second)
  fixes both reflection points. Both bounces must be specular within their
  faces, the first point must lie in the Tx lobe and the second in the Rx
  lobe, and all three segments are tested for blockage.

  Args:
    scene: Scene to trace.
    scenario: Supplies beams and reflection loss.
    include_blocked: Keep blocked paths, marked as blocked.

  Returns:
    Paths ordered by (first face, second face).
  """
  faces = face_arrays(scene)
  if len(scene.buildings) < 2:
    return []
  tx, rx = scene.tx.as_array(), scene.rx.as_array()
  tx_cone, rx_cone = _cones(scene, scenario)
  near = _near_link(scene, scenario)[faces.building]
  first = np.flatnonzero(_facing(tx, faces, tx_cone) & near)
  second = np.flatnonzero(_facing(rx, faces, rx_cone) & near)
  if len(first) == 0 or len(second) == 0:
    return []
  i, j = (g.ravel() for g in np.meshgrid(first, second, indexing="ij"))
  distinct = faces.building[i] != faces.building[j]
  i, j = i[distinct], j[distinct]
  if len(i) == 0:
    return []

  a1, b1, n1 = faces.a[i], faces.b[i], faces.normal[i]
  a2, b2, n2 = faces.a[j], faces.b[j], faces.normal[j]
  image1 = mirror_across(tx, a1, b1)
  image2 = mirror_across(image1, a2, b2)
  side_r2 = np.sum((rx - a2) * n2, axis=1)
  side_i2 = np.sum((image1 - a2) * n2, axis=1)
  valid = side_i2 > ANGLE_TOL
  with np.errstate(divide="ignore", invalid="ignore"):
    s2 = side_r2 / (side_r2 + side_i2)
    r2 = rx + s2[:, None] * (image2 - rx)
    side_t1 = np.sum((tx - a1) * n1, axis=1)
    side_q1 = np.sum((r2 - a1) * n1, axis=1)
    s1 = side_q1 / (side_q1 + side_t1)
    r1 = r2 + s1[:, None] * (image1 - r2)
  valid &= side_q1 > ANGLE_TOL
  valid &= _within(_extent(r2, a2, b2)) & _within(_extent(r1, a1, b1))
  valid &= lobe_mask(tx, r1, tx_cone.boresight, tx_cone.half_angle)
  valid &= lobe_mask(rx, r2, rx_cone.boresight, rx_cone.half_angle)

  paths = []
  for k in np.flatnonzero(valid):
    p1, p2 = r1[k], r2[k]
    f1, f2 = int(faces.building[i[k]]), int(faces.building[j[k]])
    blocked = (
      scene.blockers.blocks(tx, p1, (f1,))
      or scene.blockers.blocks(p1, p2, (f1, f2))
      or scene.blockers.blocks(p2, rx, (f2,))
    )
    if blocked and not include_blocked:
      continue
    mid = float(np.hypot(*(p2 - p1)))
    last = float(np.hypot(*(rx - p2)))
    length = float(np.hypot(*(p1 - tx))) + mid + last
    theta1 = math.asin(min(1.0, side_q1[k] / mid))
    theta2 = math.asin(min(1.0, side_r2[k] / last))
    power = (
      scenario.friis
      * scenario.gamma_rm**2
      * math.sin(theta1)
      * math.sin(theta2)
      / length**2
    )
    paths.append(
      RayPath(
        PathOrder.SECOND,
        (scene.tx, _point(p1), _point(p2), scene.rx),
        theta2,
        (theta1, theta2),
        length,
        power,
        blocked,
        scenario.self_weight,
        (f1, f2),
        (faces.dim[i[k]], faces.dim[j[k]]),
      )
    )
  return paths


def _reflection_law(
  before: Point2, at: Point2, after: Point2, face: Segment2
) -> bool:
  """Incoming and outgoing rays make equal angles with the face."""
  t = face.direction
  incoming = at - before
  outgoing = after - at
  n_in = incoming.norm()
  n_out = outgoing.norm()
  along = abs(incoming.dot(t) / n_in - outgoing.dot(t) / n_out)
  across = abs(face.side(before) / abs(face.side(before)) - face.side(after) / abs(face.side(after)))
  return along <= AUDIT_TOL and across == 0.0


def audit_path(path: RayPath, scene: Scene, scenario: Scenario) -> list[str]:
  """Re-verify a path against the scene with the scalar geometry kernel.

  Args:
    path: Path produced by a tracer.
    scene: The scene it was traced in.
    scenario: The scenario it was traced with.

  Returns:
    Descriptions of every failed check; empty when the path is valid.
  """
  problems = []
  tx_cone, rx_cone = _cones(scene, scenario)
  vertices = path.vertices
  if not in_main_lobe(tx_cone, vertices[1]):
    problems.append("first bounce outside the Tx main lobe")
  if not in_main_lobe(rx_cone, vertices[-2]):
    problems.append("last bounce outside the Rx main lobe")
  for k, building in enumerate(path.buildings):
    at = vertices[k + 1]
    face = _face_at(scene, building, at)
    if face is None:
      problems.append(f"bounce {k + 1} does not lie on a face of building {building}")
      continue
    if not _reflection_law(vertices[k], at, vertices[k + 2], face):
      problems.append(f"bounce {k + 1} violates the reflection law")
  length = sum((q - p).norm() for p, q in zip(vertices[:-1], vertices[1:]))
  if abs(length - path.length) > AUDIT_TOL * max(1.0, length):
    problems.append(f"length {path.length} differs from the vertex sum {length}")
  blocked = _segments_blocked(path, scene)
  if blocked != path.blocked:
    problems.append(f"blockage flag {path.blocked} but audit found {blocked}")
  return problems


def _face_at(scene: Scene, building: int, point: Point2) -> Segment2 | None:
  for face in scene.buildings[building].faces(building):
    seg = face.segment
    if abs(seg.side(point)) <= AUDIT_TOL * max(1.0, seg.length):
      t = (point - seg.a).dot(seg.direction) / seg.length
      if -EXTENT_TOL <= t <= 1.0 + EXTENT_TOL:
        return seg
  return None


def _segments_blocked(path: RayPath, scene: Scene) -> bool:
  vertices = path.vertices
  for k in range(len(vertices) - 1):
    excluded: Sequence[int] = [
      b for m, b in enumerate(path.buildings) if m in (k - 1, k)
    ]
    if segment_blocked(
      Segment2(vertices[k], vertices[k + 1]), scene.buildings, scene.persons, excluded
    ):
      return True
  return False
