"""Tests for the first-order analytics module.

Covers beam-edge angles, coupling windows, feasible and blockage areas,
blockage probabilities, and the exact and closed-form reflection count and
path loss.
"""

import math

import pytest
from hypothesis import given, settings, strategies as st

from mmgeo.first_order import (
  THETA_MAX,
  AngleSet,
  CouplingScenario,
  CouplingWindow,
  UnboundedWindowError,
  angle_set,
  avg_first_order_closed,
  avg_first_order_exact,
  block_area_buildings,
  coupling_window,
  elemental_area,
  face_families,
  face_window,
  feasible_area,
  from_db,
  linear_panels,
  orientation_limits,
  p_block,
  panel_count,
  path_loss_closed,
  path_loss_db,
  path_loss_exact,
  poisson_pmf,
  wall_direction,
)
from mmgeo.geometry import FaceDim
from mmgeo.quadrature import integrate
from mmgeo.scenario import (
  BlockageMoments,
  BlockageVariant,
  FixedOrientation,
  Scenario,
  ScenarioError,
)

deg = math.radians


def _fixed_scenario(beam: float = deg(10.0), **changes: object) -> Scenario:
  """Fixed-orientation link whose length faces couple over [55 - b/2, 55 + b/2] deg."""
  base = dict(
    d=50.0,
    phi_t=deg(110.0),
    phi_r=deg(40.0),
    theta_bt=beam,
    theta_br=beam,
    lambda_b=12e-5,
    moments=BlockageMoments.constant(25.0, 25.0),
    orientation=FixedOrientation(deg(15.0)),
  )
  base.update(changes)
  return Scenario(**base)


class TestAngleSet:
  """Tests for angle_set."""

  def test_receiver_edges(self) -> None:
    """Test receiver beam edges for phi_r = 50 deg, phi_b = 0."""
    a = angle_set(deg(110.0), deg(50.0), 0.0, deg(20.0), deg(20.0))
    assert a.theta_ri == pytest.approx(deg(40.0))
    assert a.theta_ru == pytest.approx(deg(60.0))
    assert a.theta_ra == pytest.approx(deg(50.0))

  def test_transmitter_edges(self) -> None:
    """Test transmitter beam edges for phi_t = 110 deg, phi_b = 0."""
    a = angle_set(deg(110.0), deg(50.0), 0.0, deg(20.0), deg(20.0))
    assert a.theta_ti == pytest.approx(deg(80.0))
    assert a.theta_tu == pytest.approx(deg(60.0))
    assert a.theta_ta == pytest.approx(deg(70.0))

  @settings(max_examples=100)
  @given(
    phi_t=st.floats(min_value=0.0, max_value=math.pi),
    phi_r=st.floats(min_value=0.0, max_value=math.pi),
    phi_b=st.floats(min_value=-math.pi / 2, max_value=math.pi / 2),
    theta_bt=st.floats(min_value=0.01, max_value=math.pi),
    theta_br=st.floats(min_value=0.01, max_value=math.pi),
  )
  def test_property_edge_spacing_equals_beamwidth(
    self, phi_t: float, phi_r: float, phi_b: float, theta_bt: float, theta_br: float
  ) -> None:
    """**Feature: first-order, Property 1: Beam edges are one beamwidth apart**

    *For any* pointing angles and beamwidths, theta_ru - theta_ri SHALL equal
    theta_br and theta_ti - theta_tu SHALL equal theta_bt.

    **Validates: Requirements first_order.angle_set**
    """
    a = angle_set(phi_t, phi_r, phi_b, theta_bt, theta_br)
    assert a.theta_ru - a.theta_ri == pytest.approx(theta_br, abs=1e-12)
    assert a.theta_ti - a.theta_tu == pytest.approx(theta_bt, abs=1e-12)


class TestCouplingWindow:
  """Tests for coupling_window and face_window."""

  def test_disjoint_intervals_give_no_window(self) -> None:
    """Test receiver [40, 60] and transmitter [60, 80] deg do not couple."""
    a = AngleSet(deg(40.0), deg(60.0), deg(80.0), deg(60.0), deg(50.0), deg(70.0))
    assert coupling_window(a) is None

  def test_overlapping_intervals(self) -> None:
    """Test the window is the intersection of both lobes' intervals."""
    a = AngleSet(deg(40.0), deg(60.0), deg(55.0), deg(45.0), deg(50.0), deg(50.0) + 0.1)
    window = coupling_window(a, FaceDim.WIDTH)
    assert window is not None
    assert window.theta_i == pytest.approx(deg(45.0))
    assert window.theta_u == pytest.approx(deg(55.0))
    assert window.scenario_tag == CouplingScenario.SCENARIO_1
    assert window.face_dim == FaceDim.WIDTH

  def test_scenario_two_tag(self) -> None:
    """Test the Scenario 2 tag when the receiver axis is steeper."""
    a = AngleSet(deg(40.0), deg(60.0), deg(55.0), deg(45.0), deg(50.0), deg(49.0))
    window = coupling_window(a)
    assert window is not None
    assert window.scenario_tag == CouplingScenario.SCENARIO_2

  def test_face_window_symmetric_link(self) -> None:
    """Test the length faces of the reference link couple over [50, 60] deg."""
    s = _fixed_scenario()
    window = face_window(s, deg(15.0), FaceDim.LENGTH)
    assert window is not None
    assert window.theta_i == pytest.approx(deg(50.0))
    assert window.theta_u == pytest.approx(deg(60.0))

  def test_face_window_clamps_upper_edge(self) -> None:
    """Test windows reaching the wall normal are clamped to THETA_MAX."""
    s = Scenario(phi_t=deg(95.0), phi_r=deg(85.0), theta_bt=deg(30.0), theta_br=deg(30.0))
    window = face_window(s, 0.0, warn=False)
    assert window is not None
    assert window.theta_u == THETA_MAX

  def test_wall_direction_wraps(self) -> None:
    """Test width faces are a quarter turn from length faces, wrapped."""
    assert wall_direction(0.3, FaceDim.LENGTH) == pytest.approx(0.3)
    assert wall_direction(0.3, FaceDim.WIDTH) == pytest.approx(0.3 - math.pi / 2)

  def test_orientation_limits(self) -> None:
    """Test the coupled wall directions of the default link."""
    limits = orientation_limits(Scenario())
    expected = (0.0, deg(10.0), deg(10.0), deg(20.0))
    assert limits == pytest.approx(expected, abs=1e-12)


class TestAreas:
  """Tests for feasible, elemental and blockage areas."""

  def test_feasible_area_unit_case(self) -> None:
    """Test a = 1, d = 2, window [0, 45] deg gives 1 square meter."""
    window = CouplingWindow(0.0, deg(45.0), CouplingScenario.SCENARIO_1)
    assert feasible_area(1.0, 2.0, 0.0, window) == pytest.approx(1.0)

  def test_feasible_area_reference_value(self) -> None:
    """Test a = 25, d = 50, phi_b = 15 deg over [55, 60] deg."""
    window = CouplingWindow(deg(55.0), deg(60.0), CouplingScenario.SCENARIO_1)
    area = feasible_area(25.0, 50.0, deg(15.0), window)
    expected = 25.0 * (50.0 * math.cos(deg(15.0)) / 2) * (math.tan(deg(60.0)) - math.tan(deg(55.0)))
    assert area == pytest.approx(expected, rel=1e-12)
    assert area == pytest.approx(183.5, rel=1e-3)

  def test_feasible_area_degenerate_window(self) -> None:
    """Test a zero-width window has zero area."""
    window = CouplingWindow(deg(50.0), deg(50.0), CouplingScenario.SCENARIO_1)
    assert feasible_area(25.0, 50.0, 0.0, window) == 0.0

  def test_feasible_area_unbounded_raises(self) -> None:
    """Test a window reaching pi/2 raises UnboundedWindowError."""
    window = CouplingWindow(deg(50.0), math.pi / 2, CouplingScenario.SCENARIO_1)
    with pytest.raises(UnboundedWindowError):
      feasible_area(25.0, 50.0, 0.0, window)

  def test_elemental_area_reference_value(self) -> None:
    """Test d = 50 at 45 deg with unit-less steps of 1e-3."""
    assert elemental_area(50.0, 0.0, deg(45.0), 1e-3, 1e-3) == pytest.approx(5e-5)

  def test_elemental_area_integrates_to_feasible_area(self) -> None:
    """Test integrating the element over the window reproduces the area."""
    window = CouplingWindow(deg(50.0), deg(70.0), CouplingScenario.SCENARIO_1)
    total = integrate(
      lambda t: elemental_area(60.0, deg(20.0), t, 1.0, 25.0),
      window.theta_i,
      window.theta_u,
      "element",
    )
    assert total == pytest.approx(feasible_area(25.0, 60.0, deg(20.0), window), rel=1e-9)

  def test_block_area_zero_moments(self) -> None:
    """Test buildings of zero size have zero blockage area."""
    m = BlockageMoments(0.0, 0.0, 0.0, 0.0)
    assert block_area_buildings(50.0, 0.0, deg(45.0), m) == 0.0

  def test_block_area_zero_distance(self) -> None:
    """Test the footprint-only blockage area at d = 0."""
    m = BlockageMoments.constant(25.0, 25.0)
    expected = 625.0 - (2 - math.sqrt(2)) / (2 * math.pi) * 1250.0
    assert block_area_buildings(0.0, 0.0, deg(45.0), m) == pytest.approx(expected)
    assert expected == pytest.approx(508.5, abs=0.1)

  def test_block_area_reference_value(self) -> None:
    """Test d = 50, theta_n = 30 deg with 25 m square buildings."""
    m = BlockageMoments.constant(25.0, 25.0)
    assert block_area_buildings(50.0, 0.0, deg(30.0), m) == pytest.approx(2336.6, abs=0.1)


class TestBlockageProbability:
  """Tests for p_block."""

  def test_nothing_to_block(self) -> None:
    """Test an empty deployment never blocks."""
    s = Scenario(lambda_b=0.0, lambda_h_raw=0.0, carried=0)
    assert p_block(50.0, 0.0, deg(45.0), s) == 0.0

  def test_self_blockage_only(self) -> None:
    """Test two carried terminals with p_self = 0.25 block with 1 - 0.0625."""
    s = Scenario(lambda_b=0.0, lambda_h_raw=0.0, carried=2, p_self=0.25)
    assert p_block(50.0, 0.0, deg(45.0), s) == pytest.approx(1 - 0.0625)

  def test_variants_agree_for_small_corner_terms(self) -> None:
    """Test both blockage laws are close at the reference deployment."""
    s = Scenario(lambda_b=12e-5)
    general = p_block(50.0, deg(15.0), deg(57.5), s, BlockageVariant.GENERAL)
    fixed = p_block(50.0, deg(15.0), deg(57.5), s, BlockageVariant.FIXED_APPROX)
    assert abs(general - fixed) < 0.15

  def test_overfull_coverage_raises(self) -> None:
    """Test coverage beyond the plane makes human thinning invalid."""
    s = Scenario(lambda_b=0.01, lambda_h_raw=0.01)
    with pytest.raises(ScenarioError):
      p_block(50.0, 0.0, deg(45.0), s)

  @settings(max_examples=100)
  @given(
    lambda_b=st.floats(min_value=0.0, max_value=5e-4),
    lambda_h=st.floats(min_value=0.0, max_value=0.05),
    d=st.floats(min_value=1.0, max_value=300.0),
    theta=st.floats(min_value=0.0, max_value=1.5),
    step=st.floats(min_value=0.0, max_value=1.0),
  )
  def test_property_probability_and_monotonicity(
    self, lambda_b: float, lambda_h: float, d: float, theta: float, step: float
  ) -> None:
    """**Feature: first-order, Property 2: Blocking probability bounds**

    *For any* valid deployment, p_block SHALL lie in [0, 1] and SHALL not
    decrease with the building density, the human density, the separation
    or the angle of arrival.

    **Validates: Requirements first_order.p_block**
    """
    s = Scenario(lambda_b=lambda_b, lambda_h_raw=lambda_h, carried=1)
    variant = BlockageVariant.FIXED_APPROX
    p = p_block(d, deg(10.0), theta, s, variant)
    assert 0.0 <= p <= 1.0
    tol = 1e-12
    assert p_block(d, deg(10.0), theta, s.replace(lambda_b=lambda_b * (1 + step)), variant) >= p - tol
    assert p_block(d, deg(10.0), theta, s.replace(lambda_h_raw=lambda_h + step), variant) >= p - tol
    assert p_block(d + 10.0 * step, deg(10.0), theta, s, variant) >= p - tol
    assert p_block(d, deg(10.0), min(theta + 0.05 * step, 1.55), s, variant) >= p - tol


class TestReflectionCount:
  """Tests for the exact and closed-form average reflection count."""

  def test_no_buildings(self) -> None:
    """Test lambda_b = 0 gives no reflections."""
    s = _fixed_scenario(lambda_b=0.0)
    assert avg_first_order_exact(s) == 0.0
    assert avg_first_order_closed(s) == 0.0

  def test_empty_window(self) -> None:
    """Test a fixed orientation with no coupled faces gives zero."""
    s = Scenario(orientation=FixedOrientation(0.0))
    assert avg_first_order_exact(s) == 0.0
    assert avg_first_order_closed(s) == 0.0

  def test_closed_matches_exact(self) -> None:
    """Test the closed form is within 0.1% of quadrature at 10 deg beams."""
    s = _fixed_scenario()
    exact = avg_first_order_exact(s)
    closed = avg_first_order_closed(s)
    assert exact > 0
    assert abs(closed - exact) / exact < 1e-3

  def test_closed_error_shrinks_with_window(self) -> None:
    """Test the linearization error decreases as the window narrows."""
    errors = []
    for beam in (10.0, 5.0, 1.0):
      s = _fixed_scenario(beam=deg(beam))
      exact = avg_first_order_exact(s)
      errors.append(abs(avg_first_order_closed(s) - exact) / exact)
    assert errors[0] > errors[1] > errors[2]

  def test_no_blockage_equals_area_count(self) -> None:
    """Test without blockage N_r is lambda_b times the feasible area."""
    s = _fixed_scenario(lambda_b=1e-9)
    window = CouplingWindow(deg(50.0), deg(60.0), CouplingScenario.SCENARIO_1)
    expected = 1e-9 * feasible_area(25.0, 50.0, deg(15.0), window)
    assert avg_first_order_exact(s) == pytest.approx(expected, rel=1e-5)

  def test_closed_requires_fixed_orientation(self) -> None:
    """Test closed forms reject uniform orientations."""
    with pytest.raises(ScenarioError):
      avg_first_order_closed(Scenario())

  def test_uniform_orientation_is_positive(self) -> None:
    """Test the orientation-averaged count of the default link."""
    assert avg_first_order_exact(Scenario()) > 0

  def test_self_blockage_scales_count(self) -> None:
    """Test carried terminals scale N_r by p_self^i."""
    s = _fixed_scenario()
    scaled = _fixed_scenario(carried=2, p_self=0.5)
    assert avg_first_order_exact(scaled) == pytest.approx(0.25 * avg_first_order_exact(s))

  def test_poisson_pmf(self) -> None:
    """Test the Poisson reflection-count law."""
    assert poisson_pmf(0.5, 0) == pytest.approx(math.exp(-0.5))
    assert poisson_pmf(0.5, 2) == pytest.approx(0.125 * math.exp(-0.5))


class TestPathLoss:
  """Tests for the exact and closed-form path loss."""

  def test_no_buildings_is_infinite(self) -> None:
    """Test lambda_b = 0 gives infinite path loss."""
    s = _fixed_scenario(lambda_b=0.0)
    assert path_loss_exact(s) == math.inf
    assert path_loss_closed(s) == math.inf
    assert path_loss_db(math.inf) == math.inf

  def test_empty_window_is_infinite(self) -> None:
    """Test no coupled faces gives infinite path loss."""
    s = Scenario(orientation=FixedOrientation(0.0))
    assert path_loss_exact(s) == math.inf
    assert path_loss_closed(s) == math.inf

  def test_doubling_frequency_adds_6_db(self) -> None:
    """Test the free-space factor: doubling f adds 20 log10(2) dB."""
    s = _fixed_scenario()
    low = path_loss_db(path_loss_exact(s))
    high = path_loss_db(path_loss_exact(s.replace(f=2 * s.f)))
    assert high - low == pytest.approx(20 * math.log10(2), abs=1e-9)

  def test_transmit_power_cancels(self) -> None:
    """Test the path loss does not depend on the transmit power."""
    s = _fixed_scenario()
    assert path_loss_exact(s.replace(p_t=10.0)) == path_loss_exact(s)

  def test_closed_matches_exact(self) -> None:
    """Test the closed-form path loss is close to quadrature at 10 deg beams."""
    s = _fixed_scenario()
    exact = path_loss_exact(s)
    closed = path_loss_closed(s)
    assert abs(closed - exact) / exact < 0.01

  def test_increasing_in_distance(self) -> None:
    """Test path loss increases with separation for uniform orientations."""
    s = Scenario(lambda_b=8e-5, theta_bt=deg(20.0), theta_br=deg(20.0))
    losses = [path_loss_exact(s.replace(d=d)) for d in (25.0, 50.0, 100.0, 150.0)]
    assert all(a < b for a, b in zip(losses, losses[1:]))

  def test_db_conversion(self) -> None:
    """Test dB conversion and its inverse."""
    assert path_loss_db(1000.0) == pytest.approx(30.0)
    assert from_db(30.0) == pytest.approx(1000.0)


SWEEP_ANGLES = [
  (phi_r, phi_t) for phi_r in range(40, 91, 5) for phi_t in range(95, 146, 5)
]


def _sweep_scenario(d: float, beam: float, **changes: object) -> Scenario:
  """Reference city with people and two carried terminals, phi_b = 15 deg."""
  base = dict(
    d=d,
    theta_bt=deg(beam),
    theta_br=deg(beam),
    lambda_b=12e-5,
    moments=BlockageMoments.constant(25.0, 25.0),
    orientation=FixedOrientation(deg(15.0)),
    lambda_h_raw=20e-4,
    w_h=0.30,
    p_self=0.25,
    carried=2,
  )
  base.update(changes)
  return Scenario(**base)


def _sweep_errors(d: float, beam: float, **changes: object) -> dict:
  """Relative closed-form errors of N_r and PL at every coupled sweep angle."""
  errors = {}
  for phi_r, phi_t in SWEEP_ANGLES:
    s = _sweep_scenario(d, beam, phi_r=deg(phi_r), phi_t=deg(phi_t), **changes)
    exact = avg_first_order_exact(s)
    if exact == 0:
      continue
    loss = path_loss_exact(s)
    errors[(phi_r, phi_t)] = (
      abs(avg_first_order_closed(s) - exact) / exact,
      abs(path_loss_closed(s) - loss) / loss,
    )
  return errors


class TestClosedFormAccuracy:
  """Closed forms against quadrature over the pointing-angle sweep."""

  def test_wide_beams_at_75_m(self) -> None:
    """Test mean errors at d = 75 m with 30 deg beams."""
    errors = _sweep_errors(75.0, 30.0)
    assert len(errors) > 20
    counts = [e[0] for e in errors.values()]
    losses = [e[1] for e in errors.values()]
    assert 1e-3 <= sum(counts) / len(counts) <= 1e-2
    assert 2e-4 <= sum(losses) / len(losses) <= 5e-3

  def test_narrow_beams_at_50_m(self) -> None:
    """Test mean and worst errors at d = 50 m with 10 deg beams."""
    errors = _sweep_errors(50.0, 10.0)
    assert errors
    counts = [e[0] for e in errors.values()]
    losses = [e[1] for e in errors.values()]
    assert sum(counts) / len(counts) <= 1e-3
    assert max(counts) <= 0.04
    assert sum(losses) / len(losses) <= 5e-4

  def test_single_panel_worst_path_loss(self) -> None:
    """Test one linearization per window misses by 20-45% on the widest window."""
    errors = _sweep_errors(75.0, 30.0, linear_span=0.0)
    worst = max(errors, key=lambda key: errors[key][1])
    assert worst == (55, 95)
    assert 0.20 <= errors[worst][1] <= 0.45

  def test_panels_beat_single_linearization(self) -> None:
    """Test splitting the window never hurts the worst path-loss error."""
    split = _sweep_errors(75.0, 30.0)
    single = _sweep_errors(75.0, 30.0, linear_span=0.0)
    assert max(e[1] for e in split.values()) < max(e[1] for e in single.values())


class TestLinearPanels:
  """Tests for panel_count and linear_panels."""

  def _window(self, s: Scenario) -> tuple:
    family = next(f for f in face_families(s) if f.dim == FaceDim.LENGTH)
    return family, face_window(s, family.psi, family.dim)

  def test_zero_span_is_one_panel(self) -> None:
    """Test linear_span = 0 keeps the whole window."""
    s = _sweep_scenario(75.0, 30.0, phi_r=deg(55.0), phi_t=deg(95.0), linear_span=0.0)
    family, window = self._window(s)
    panels = linear_panels(s, family, window)
    assert len(panels) == 1
    assert panels[0].theta_i == window.theta_i
    assert panels[0].theta_u == window.theta_u

  def test_panels_tile_the_window(self) -> None:
    """Test panels are contiguous and equally wide in tan(theta)."""
    s = _sweep_scenario(75.0, 30.0, phi_r=deg(55.0), phi_t=deg(95.0))
    family, window = self._window(s)
    panels = linear_panels(s, family, window)
    assert len(panels) == panel_count(s, family, window) > 1
    assert panels[0].theta_i == window.theta_i
    assert panels[-1].theta_u == window.theta_u
    for a, b in zip(panels, panels[1:]):
      assert a.theta_u == b.theta_i
    widths = [math.tan(p.theta_u) - math.tan(p.theta_i) for p in panels]
    assert widths == pytest.approx([widths[0]] * len(widths))

  def test_each_panel_is_centered(self) -> None:
    """Test every panel linearizes about its own tan(theta) midpoint."""
    s = _sweep_scenario(75.0, 30.0, phi_r=deg(55.0), phi_t=deg(95.0))
    family, window = self._window(s)
    for panel in linear_panels(s, family, window):
      mid = (math.tan(panel.theta_i) + math.tan(panel.theta_u)) / 2
      assert panel.terms.u0 == pytest.approx(mid)

  def test_smaller_span_gives_more_panels(self) -> None:
    """Test the panel count grows as linear_span shrinks."""
    s = _sweep_scenario(75.0, 30.0, phi_r=deg(55.0), phi_t=deg(95.0))
    family, window = self._window(s)
    coarse = panel_count(s, family, window)
    fine = panel_count(s.replace(linear_span=0.1), family, window)
    assert fine > coarse


class TestTrends:
  """Path-loss trends over distance, beamwidth and density."""

  @pytest.mark.parametrize("beam", [10.0, 20.0, 30.0])
  def test_increasing_in_distance(self, beam: float) -> None:
    """Test PL strictly increases from 25 m to 150 m."""
    s = Scenario(theta_bt=deg(beam), theta_br=deg(beam))
    distances = (25.0, 50.0, 75.0, 100.0, 125.0, 150.0)
    losses = [path_loss_exact(s.replace(d=d)) for d in distances]
    assert all(a < b for a, b in zip(losses, losses[1:]))

  def test_decreasing_in_beamwidth(self) -> None:
    """Test wider beams lower the path loss at a fixed distance."""
    s = Scenario()
    losses = [
      path_loss_exact(s.replace(theta_bt=deg(b), theta_br=deg(b)))
      for b in (10.0, 20.0, 30.0)
    ]
    assert all(a > b for a, b in zip(losses, losses[1:]))

  def test_decreasing_in_building_density(self) -> None:
    """Test more 15 x 15 m buildings give more reflectors and lower path loss."""
    s = Scenario(moments=BlockageMoments.constant(15.0, 15.0))
    losses = [path_loss_exact(s.replace(lambda_b=lb)) for lb in (2e-5, 4e-5, 8e-5, 12e-5)]
    assert all(a > b for a, b in zip(losses, losses[1:]))

  @pytest.mark.parametrize("d", [100.0, 125.0, 150.0])
  def test_human_density_shifts_a_few_db(self, d: float) -> None:
    """Test raising lambda_h' from 1e-3 to 6e-3 adds 1 to 2 dB."""
    s = Scenario(d=d, lambda_b=8e-5, carried=1, phi_t=deg(110.0), phi_r=deg(50.0))
    sparse = path_loss_db(path_loss_exact(s.replace(lambda_h_raw=1e-3)))
    dense = path_loss_db(path_loss_exact(s.replace(lambda_h_raw=6e-3)))
    assert 1.0 <= dense - sparse <= 2.0
