"""Config module for parsing run configuration files.

This module handles the flat key = value configuration format: comments,
unit twins (radians or _deg, linear or _dB/_dBW), defaults for every key,
validation into a Scenario, a SceneConfig and a RunSpec, sweep
specifications, and serialization back to text that re-parses to the same
configuration.
"""

import dataclasses
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path

import numpy as np

from mmgeo.scenario import (
  BlockageMoments,
  FixedOrientation,
  Scenario,
  ScenarioError,
  SlopeRule,
  UniformOrientation,
  UpperEdge,
)
from mmgeo.scene import SamplerKind, SceneConfig
from mmgeo.validator import validate_steps

DEFAULT_OUT = "mmgeo.csv"


class ConfigError(Exception):
  """Exception raised for an invalid configuration entry."""

  def __init__(self, message: str, key: str | None = None, line: int | None = None):
    self.message = message
    self.key = key
    self.line = line
    where = []
    if line is not None:
      where.append(f"line {line}")
    if key is not None:
      where.append(f"key '{key}'")
    prefix = f"{', '.join(where)}: " if where else ""
    super().__init__(f"{prefix}{message}")


class RunMode(StrEnum):
  """Pipeline run by the CLI."""

  ANALYZE = "analyze"
  SIMULATE = "simulate"
  COMPARE = "compare"


@dataclass(frozen=True)
class SweepSpec:
  """Linear sweep of one scenario key over steps points."""

  key: str
  start: float
  stop: float
  steps: int

  def values(self) -> list[float]:
    return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]

  def __str__(self) -> str:
    return f"{self.key}:{self.start!r}:{self.stop!r}:{self.steps}"


@dataclass(frozen=True)
class RunSpec:
  """What to run and where to write it."""

  mode: RunMode = RunMode.ANALYZE
  sweep: SweepSpec | None = None
  out: Path = Path(DEFAULT_OUT)
  seed: int = 0
  realizations: int = 200_000
  workers: int | None = None


@dataclass(frozen=True)
class ParsedConfig:
  """A validated configuration and the assignments it came from."""

  scenario: Scenario
  scene: SceneConfig
  run: RunSpec
  entries: Mapping[str, str] = field(default_factory=dict, compare=False)
  lines: Mapping[str, int] = field(default_factory=dict, compare=False)


def _parse_float(key: str, value: str) -> float:
  try:
    number = float(value)
  except ValueError:
    raise ConfigError(f"expected a number, got '{value}'", key) from None
  if not math.isfinite(number):
    raise ConfigError(f"expected a finite number, got '{value}'", key)
  return number


def _parse_int(key: str, value: str) -> int:
  try:
    return int(value)
  except ValueError:
    raise ConfigError(f"expected an integer, got '{value}'", key) from None


def _parse_bool(key: str, value: str) -> bool:
  lowered = value.lower()
  if lowered in ("true", "yes", "on", "1"):
    return True
  if lowered in ("false", "no", "off", "0"):
    return False
  raise ConfigError(f"expected true or false, got '{value}'", key)


def _parse_choice(enum: type[StrEnum]) -> Callable[[str, str], StrEnum]:
  def parse(key: str, value: str) -> StrEnum:
    try:
      return enum(value.lower())
    except ValueError:
      choices = ", ".join(e.value for e in enum)
      raise ConfigError(f"expected one of {choices}, got '{value}'", key) from None

  return parse


class Orientation(StrEnum):
  """Building orientation model named in a config."""

  UNIFORM = "uniform"
  FIXED = "fixed"


# Quantities with two spellings: (SI key, twin key, twin -> SI conversion).
TWINS: tuple[tuple[str, str, Callable[[float], float]], ...] = (
  ("phi_t", "phi_t_deg", math.radians),
  ("phi_r", "phi_r_deg", math.radians),
  ("theta_b", "theta_b_deg", math.radians),
  ("theta_bt", "theta_bt_deg", math.radians),
  ("theta_br", "theta_br_deg", math.radians),
  ("phi_b", "phi_b_deg", math.radians),
  ("p_t", "p_t_dBW", lambda db: 10.0 ** (db / 10.0)),
  ("gamma_rm", "reflection_loss_dB", lambda db: 10.0 ** (-db / 10.0)),
)

FLOAT_KEYS = (
  "d",
  "f",
  "lambda_b",
  "e_l",
  "e_w",
  "e_l2",
  "e_w2",
  "lambda_h",
  "w_h",
  "p_self",
  "region_half_extent",
  "pdp_bin_ns",
  "linear_span",
  *(si for si, _, _ in TWINS),
  *(twin for _, twin, _ in TWINS),
)

PARSERS: dict[str, Callable[[str, str], object]] = {
  **{key: _parse_float for key in FLOAT_KEYS},
  "carried": _parse_int,
  "seed": _parse_int,
  "realizations": _parse_int,
  "workers": _parse_int,
  "second_order": _parse_bool,
  "orientation": _parse_choice(Orientation),
  "upper_edge": _parse_choice(UpperEdge),
  "slope": _parse_choice(SlopeRule),
  "length_sampler": _parse_choice(SamplerKind),
  "width_sampler": _parse_choice(SamplerKind),
  "sweep": lambda key, value: parse_sweep(value),
  "out": lambda key, value: Path(value),
}

# Keys a sweep may vary.
SWEEP_KEYS = frozenset(
  {"d", "f", "lambda_b", "e_l", "e_w", "lambda_h", "w_h", "p_self"}
  | {si for si, _, _ in TWINS}
  | {twin for _, twin, _ in TWINS}
)

# Scenario fields reported by ScenarioError, mapped to config keys.
FIELD_KEYS = {
  "lambda_h_raw": "lambda_h",
  "half_extent": "region_half_extent",
  "pdp_bin_ns": "pdp_bin_ns",
}


def parse_sweep(text: str) -> SweepSpec:
  """Parse key:start:stop:steps.

  Raises:
    ConfigError: If the text is malformed, the key cannot be swept or there
      are fewer than two steps.
  """
  parts = [p.strip() for p in text.split(":")]
  if len(parts) != 4:
    raise ConfigError(f"expected key:start:stop:steps, got '{text}'", "sweep")
  key, start, stop, steps = parts
  if key not in SWEEP_KEYS:
    raise ConfigError(f"'{key}' is not a sweepable scenario key", "sweep")
  count = _parse_int("sweep", steps)
  is_valid, message = validate_steps(count)
  if not is_valid:
    raise ConfigError(message, "sweep")
  return SweepSpec(key, _parse_float("sweep", start), _parse_float("sweep", stop), count)


def _read_entries(text: str) -> tuple[dict[str, str], dict[str, int]]:
  entries: dict[str, str] = {}
  lines: dict[str, int] = {}
  for number, raw in enumerate(text.splitlines(), start=1):
    line = raw.split("#", 1)[0].strip()
    if not line:
      continue
    if "=" not in line:
      raise ConfigError(f"expected key = value, got '{line}'", line=number)
    key, value = (part.strip() for part in line.split("=", 1))
    if key not in PARSERS:
      raise ConfigError("unknown key", key, number)
    if key in entries:
      raise ConfigError(f"duplicate key, first set on line {lines[key]}", key, number)
    if not value:
      raise ConfigError("missing value", key, number)
    entries[key] = value
    lines[key] = number
  return entries, lines


def _twin_of(key: str) -> str | None:
  for si, twin, _ in TWINS:
    if key == si:
      return twin
    if key == twin:
      return si
  return None


def _build(entries: Mapping[str, str], lines: Mapping[str, int], mode: RunMode) -> ParsedConfig:
  values: dict[str, object] = {}
  for key, text in entries.items():
    try:
      values[key] = PARSERS[key](key, text)
    except ConfigError as e:
      raise ConfigError(e.message, key, lines.get(key)) from None

  def line_of(key: str) -> int | None:
    if key in lines:
      return lines[key]
    twin = _twin_of(key)
    return lines.get(twin) if twin else None

  for si, twin, convert in TWINS:
    if si in values and twin in values:
      raise ConfigError(f"set both '{si}' and '{twin}'", twin, lines[twin])
    if twin in values:
      values[si] = convert(values.pop(twin))
  if "theta_b" in values:
    for key in ("theta_bt", "theta_br"):
      if key in values:
        raise ConfigError("set together with 'theta_b'", key, line_of(key))
      values[key] = values["theta_b"]

  orientation = values.get("orientation")
  if "phi_b" in values:
    if orientation == Orientation.UNIFORM:
      raise ConfigError("phi_b given with a uniform orientation", "phi_b", line_of("phi_b"))
    building_orientation = FixedOrientation(values["phi_b"])
  elif orientation == Orientation.FIXED:
    raise ConfigError("a fixed orientation needs phi_b", "orientation", line_of("orientation"))
  else:
    building_orientation = UniformOrientation()

  defaults = Scenario()
  try:
    e_l = values.get("e_l", defaults.moments.e_l)
    e_w = values.get("e_w", defaults.moments.e_w)
    moments = BlockageMoments(
      e_l, e_w, values.get("e_l2", e_l * e_l), values.get("e_w2", e_w * e_w)
    )
    scenario = Scenario(
      d=values.get("d", defaults.d),
      f=values.get("f", defaults.f),
      p_t=values.get("p_t", defaults.p_t),
      phi_t=values.get("phi_t", defaults.phi_t),
      phi_r=values.get("phi_r", defaults.phi_r),
      theta_bt=values.get("theta_bt", defaults.theta_bt),
      theta_br=values.get("theta_br", defaults.theta_br),
      lambda_b=values.get("lambda_b", defaults.lambda_b),
      moments=moments,
      orientation=building_orientation,
      lambda_h_raw=values.get("lambda_h", defaults.lambda_h_raw),
      w_h=values.get("w_h", defaults.w_h),
      p_self=values.get("p_self", defaults.p_self),
      carried=values.get("carried", defaults.carried),
      gamma_rm=values.get("gamma_rm", defaults.gamma_rm),
      second_order=values.get("second_order", defaults.second_order),
      upper_edge=values.get("upper_edge", defaults.upper_edge),
      slope=values.get("slope", defaults.slope),
      linear_span=values.get("linear_span", defaults.linear_span),
    )
    scene = SceneConfig(
      half_extent=values.get("region_half_extent", SceneConfig.half_extent),
      length_sampler=values.get("length_sampler", SceneConfig.length_sampler),
      width_sampler=values.get("width_sampler", SceneConfig.width_sampler),
      seed=values.get("seed", SceneConfig.seed),
      realizations=values.get("realizations", SceneConfig.realizations),
      pdp_bin_ns=values.get("pdp_bin_ns", SceneConfig.pdp_bin_ns),
    )
    scene.validate(scenario)
  except ScenarioError as e:
    key = FIELD_KEYS.get(e.field, e.field)
    raise ConfigError(str(e), key, line_of(key)) from None

  workers = values.get("workers")
  if workers is not None and workers < 1:
    raise ConfigError(f"workers must be at least 1, got {workers}", "workers", line_of("workers"))
  run = RunSpec(
    mode=mode,
    sweep=values.get("sweep"),
    out=values.get("out", Path(DEFAULT_OUT)),
    seed=scene.seed,
    realizations=scene.realizations,
    workers=workers,
  )
  return ParsedConfig(scenario, scene, run, dict(entries), dict(lines))


def parse_config(text: str, mode: RunMode = RunMode.ANALYZE) -> ParsedConfig:
  """Parse and validate configuration text.

  Args:
    text: Configuration file contents.
    mode: Pipeline the configuration is run with.

  Returns:
    The parsed configuration; missing keys take their defaults.

  Raises:
    ConfigError: On an unknown key, a malformed value or an invariant
      violation, naming the key and line.
  """
  entries, lines = _read_entries(text)
  return _build(entries, lines, RunMode(mode))


def override(parsed: ParsedConfig, changes: Mapping[str, str | None]) -> ParsedConfig:
  """Return the configuration with entries replaced, as from the command line.

  A change replaces the key and drops its unit twin; None values are
  ignored.

  Raises:
    ConfigError: If a key is unknown or the result is invalid.
  """
  entries = dict(parsed.entries)
  lines = dict(parsed.lines)
  for key, value in changes.items():
    if value is None:
      continue
    if key not in PARSERS:
      raise ConfigError("unknown key", key)
    twin = _twin_of(key)
    for dropped in (key, twin):
      if dropped is not None:
        entries.pop(dropped, None)
        lines.pop(dropped, None)
    if key in ("theta_b", "theta_b_deg"):
      for dropped in ("theta_bt", "theta_bt_deg", "theta_br", "theta_br_deg"):
        entries.pop(dropped, None)
        lines.pop(dropped, None)
    entries[key] = value
  return _build(entries, lines, parsed.run.mode)


def apply_sweep_value(parsed: ParsedConfig, key: str, value: float) -> ParsedConfig:
  """Return the configuration with sweep key set to value.

  Raises:
    ConfigError: If the key cannot be swept or the value is invalid.
  """
  if key not in SWEEP_KEYS:
    raise ConfigError(f"'{key}' is not a sweepable scenario key", "sweep")
  return override(parsed, {key: repr(float(value))})


def serialize_config(parsed: ParsedConfig) -> str:
  """Write a configuration with SI keys that re-parses to the same values."""
  s, scene, run = parsed.scenario, parsed.scene, parsed.run
  m = s.moments
  lines = [
    f"d = {s.d!r}",
    f"f = {s.f!r}",
    f"p_t = {s.p_t!r}",
    f"phi_t = {s.phi_t!r}",
    f"phi_r = {s.phi_r!r}",
    f"theta_bt = {s.theta_bt!r}",
    f"theta_br = {s.theta_br!r}",
    f"lambda_b = {s.lambda_b!r}",
    f"e_l = {m.e_l!r}",
    f"e_w = {m.e_w!r}",
    f"e_l2 = {m.e_l2!r}",
    f"e_w2 = {m.e_w2!r}",
  ]
  if isinstance(s.orientation, FixedOrientation):
    lines += ["orientation = fixed", f"phi_b = {s.orientation.phi_b!r}"]
  else:
    lines.append("orientation = uniform")
  lines += [
    f"lambda_h = {s.lambda_h_raw!r}",
    f"w_h = {s.w_h!r}",
    f"p_self = {s.p_self!r}",
    f"carried = {s.carried}",
    f"gamma_rm = {s.gamma_rm!r}",
    f"second_order = {str(s.second_order).lower()}",
    f"upper_edge = {s.upper_edge}",
    f"slope = {s.slope}",
    f"linear_span = {s.linear_span!r}",
    f"region_half_extent = {scene.half_extent!r}",
    f"length_sampler = {scene.length_sampler}",
    f"width_sampler = {scene.width_sampler}",
    f"seed = {scene.seed}",
    f"realizations = {scene.realizations}",
    f"pdp_bin_ns = {scene.pdp_bin_ns!r}",
  ]
  if run.workers is not None:
    lines.append(f"workers = {run.workers}")
  if run.sweep is not None:
    lines.append(f"sweep = {run.sweep}")
  lines.append(f"out = {run.out}")
  return "\n".join(lines) + "\n"


def with_mode(parsed: ParsedConfig, mode: RunMode) -> ParsedConfig:
  return dataclasses.replace(parsed, run=dataclasses.replace(parsed.run, mode=mode))
