"""Tests for the config module."""

import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from mmgeo.config import (
  ConfigError,
  RunMode,
  SweepSpec,
  apply_sweep_value,
  override,
  parse_config,
  parse_sweep,
  serialize_config,
  with_mode,
)
from mmgeo.scenario import (
  FixedOrientation,
  Scenario,
  SlopeRule,
  UniformOrientation,
  UpperEdge,
)
from mmgeo.scene import SamplerKind, SceneConfig

REFERENCE = """\
# Reference link
d = 50
f = 38e9
phi_t_deg = 110   # Tx pointing
phi_r_deg = 40
theta_b_deg = 10

lambda_b = 12e-5
e_l = 25
e_w = 25
phi_b_deg = 15
realizations = 500
seed = 9
"""


class TestParseConfig:
  """Tests for parse_config."""

  def test_empty_uses_defaults(self) -> None:
    """Test an empty file gives the default scenario and run."""
    parsed = parse_config("")
    assert parsed.scenario == Scenario()
    assert parsed.scene == SceneConfig()
    assert parsed.run.mode == RunMode.ANALYZE
    assert parsed.run.out == Path("mmgeo.csv")
    assert parsed.run.sweep is None

  def test_reference_file(self) -> None:
    """Test units, comments and the beamwidth shorthand."""
    parsed = parse_config(REFERENCE, RunMode.SIMULATE)
    s = parsed.scenario
    assert s.d == 50.0
    assert s.phi_t == pytest.approx(math.radians(110.0))
    assert s.theta_bt == s.theta_br == pytest.approx(math.radians(10.0))
    assert s.orientation == FixedOrientation(math.radians(15.0))
    assert parsed.scene.realizations == 500
    assert parsed.run.seed == 9
    assert parsed.run.mode == RunMode.SIMULATE
    assert parsed.lines["phi_b_deg"] == 11

  def test_decibel_twins(self) -> None:
    """Test dB spellings convert to linear values."""
    s = parse_config("p_t_dBW = 10\nreflection_loss_dB = 19.1\n").scenario
    assert s.p_t == pytest.approx(10.0)
    assert s.gamma_rm == pytest.approx(10 ** (-1.91))

  def test_both_twins_raise(self) -> None:
    """Test setting a quantity in both units names the second key."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("phi_t = 1.9\nphi_t_deg = 110\n")
    assert exc_info.value.key == "phi_t_deg"
    assert exc_info.value.line == 2

  def test_shorthand_conflict(self) -> None:
    """Test theta_b cannot be combined with a per-side beamwidth."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("theta_b_deg = 10\ntheta_bt_deg = 12\n")
    assert exc_info.value.key == "theta_bt"
    assert exc_info.value.line == 2

  def test_unknown_key(self) -> None:
    """Test an unknown key is reported with its line."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("d = 50\n\nbogus = 1\n")
    assert exc_info.value.key == "bogus"
    assert exc_info.value.line == 3
    assert "line 3" in str(exc_info.value)

  def test_duplicate_key(self) -> None:
    """Test a repeated key points back at its first line."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("d = 50\nd = 60\n")
    assert exc_info.value.line == 2
    assert "first set on line 1" in exc_info.value.message

  def test_missing_equals(self) -> None:
    """Test a line without an assignment is rejected."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("d 50\n")
    assert exc_info.value.line == 1
    assert exc_info.value.key is None

  def test_missing_value(self) -> None:
    """Test an empty value is rejected."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("d =   # nothing\n")
    assert exc_info.value.key == "d"

  @pytest.mark.parametrize(
    "text,key",
    [
      ("d = fifty\n", "d"),
      ("d = inf\n", "d"),
      ("carried = 1.5\n", "carried"),
      ("second_order = maybe\n", "second_order"),
      ("upper_edge = sideways\n", "upper_edge"),
    ],
  )
  def test_malformed_values(self, text: str, key: str) -> None:
    """Test malformed values name their key and line."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config(text)
    assert exc_info.value.key == key
    assert exc_info.value.line == 1

  def test_invalid_scenario_value(self) -> None:
    """Test a scenario invariant violation is reported against its key."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("f = 38e9\nd = -5\n")
    assert exc_info.value.key == "d"
    assert exc_info.value.line == 2

  def test_region_smaller_than_link(self) -> None:
    """Test a region not holding Tx is reported against region_half_extent."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("region_half_extent = 50\n")
    assert exc_info.value.key == "region_half_extent"

  def test_orientation_rules(self) -> None:
    """Test phi_b implies a fixed orientation and conflicts are rejected."""
    assert parse_config("phi_b = 0.2\n").scenario.orientation == FixedOrientation(0.2)
    assert parse_config("orientation = uniform\n").scenario.orientation == UniformOrientation()
    with pytest.raises(ConfigError):
      parse_config("orientation = fixed\n")
    with pytest.raises(ConfigError):
      parse_config("orientation = uniform\nphi_b = 0.2\n")

  def test_choices_are_case_insensitive(self) -> None:
    """Test enumerated values ignore case."""
    parsed = parse_config("upper_edge = LITERAL\nlength_sampler = Constant\n")
    assert parsed.scenario.upper_edge == UpperEdge.LITERAL
    assert parsed.scene.length_sampler == SamplerKind.CONSTANT

  def test_linearization_settings(self) -> None:
    """Test the slope rule and panel span keys."""
    parsed = parse_config("slope = tangent\nlinear_span = 0.25\n")
    assert parsed.scenario.slope == SlopeRule.TANGENT
    assert parsed.scenario.linear_span == 0.25
    assert parse_config("").scenario.linear_span == 0.5
    with pytest.raises(ConfigError) as exc_info:
      parse_config("linear_span = -1\n")
    assert exc_info.value.key == "linear_span"

  def test_workers_must_be_positive(self) -> None:
    """Test a worker count below one is rejected."""
    with pytest.raises(ConfigError) as exc_info:
      parse_config("workers = 0\n")
    assert exc_info.value.key == "workers"


class TestParseSweep:
  """Tests for parse_sweep."""

  def test_values(self) -> None:
    """Test a sweep expands to evenly spaced values."""
    sweep = parse_sweep("d:25:150:6")
    assert sweep == SweepSpec("d", 25.0, 150.0, 6)
    assert sweep.values() == [25.0, 50.0, 75.0, 100.0, 125.0, 150.0]

  @pytest.mark.parametrize("text", ["d:25:150", "seed:1:5:3", "d:25:150:1", "d:a:150:3"])
  def test_invalid(self, text: str) -> None:
    """Test malformed sweeps are rejected."""
    with pytest.raises(ConfigError) as exc_info:
      parse_sweep(text)
    assert exc_info.value.key == "sweep"

  def test_sweep_in_file(self) -> None:
    """Test a sweep entry lands on the run settings."""
    parsed = parse_config("sweep = lambda_b:1e-5:1e-4:4\n")
    assert parsed.run.sweep == SweepSpec("lambda_b", 1e-5, 1e-4, 4)


class TestOverride:
  """Tests for override and apply_sweep_value."""

  def test_replaces_and_skips_none(self) -> None:
    """Test changes replace entries and None leaves them alone."""
    parsed = override(parse_config(REFERENCE), {"seed": "7", "out": None})
    assert parsed.run.seed == 7
    assert parsed.scene.realizations == 500

  def test_drops_unit_twin(self) -> None:
    """Test overriding the SI key replaces a value given in degrees."""
    parsed = override(parse_config(REFERENCE), {"phi_t": "2.0"})
    assert parsed.scenario.phi_t == 2.0
    assert "phi_t_deg" not in parsed.entries

  def test_shorthand_drops_per_side_beams(self) -> None:
    """Test overriding theta_b replaces both per-side beamwidths."""
    parsed = parse_config("theta_bt_deg = 10\ntheta_br_deg = 12\n")
    changed = override(parsed, {"theta_b_deg": "20"})
    assert changed.scenario.theta_bt == pytest.approx(math.radians(20.0))
    assert changed.scenario.theta_br == pytest.approx(math.radians(20.0))

  def test_unknown_key(self) -> None:
    """Test an unknown override is rejected."""
    with pytest.raises(ConfigError):
      override(parse_config(""), {"bogus": "1"})

  def test_apply_sweep_value(self) -> None:
    """Test a sweep point sets the swept key."""
    parsed = apply_sweep_value(parse_config(REFERENCE), "phi_r_deg", 45.0)
    assert parsed.scenario.phi_r == pytest.approx(math.radians(45.0))
    with pytest.raises(ConfigError):
      apply_sweep_value(parsed, "seed", 3.0)

  def test_with_mode(self) -> None:
    """Test the mode can be changed without reparsing."""
    parsed = with_mode(parse_config(REFERENCE), RunMode.COMPARE)
    assert parsed.run.mode == RunMode.COMPARE


class TestSerializeConfig:
  """Tests for serialize_config."""

  def test_round_trip_reference(self) -> None:
    """Test a serialized configuration re-parses to the same values."""
    extra = "workers = 3\nsweep = d:25:150:6\nout = runs/a.csv\nlinear_span = 0.1\n"
    parsed = parse_config(REFERENCE + extra)
    assert parse_config(serialize_config(parsed)) == parsed

  @settings(max_examples=100)
  @given(
    d=st.floats(min_value=1.0, max_value=300.0),
    phi_t=st.floats(min_value=-7.0, max_value=7.0),
    lambda_b=st.floats(min_value=0.0, max_value=5e-4),
    phi_b=st.one_of(st.none(), st.floats(min_value=0.0, max_value=math.pi)),
  )
  def test_property_round_trip(
    self, d: float, phi_t: float, lambda_b: float, phi_b: float | None
  ) -> None:
    """**Feature: config, Property 1: Serialization round trip**

    *For any* valid configuration, serializing and re-parsing SHALL give an
    equal configuration.

    **Validates: Requirements config.serialize_config**
    """
    text = f"d = {d!r}\nphi_t = {phi_t!r}\nlambda_b = {lambda_b!r}\n"
    if phi_b is not None:
      text += f"phi_b = {phi_b!r}\n"
    parsed = parse_config(text)
    assert parse_config(serialize_config(parsed)) == parsed
