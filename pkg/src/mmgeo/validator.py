"""Input validation module for scenario and run parameters.

This module provides validation functions shared by scenario construction and
configuration parsing. Each returns an (is_valid, error_message) tuple so that
callers can attach their own context (a dataclass field or a config line).
"""

import math


def validate_finite(name: str, value: float) -> tuple[bool, str]:
  """Validate a value is a finite number.

  Args:
    name: Parameter name used in the error message.
    value: The value to validate.

  Returns:
    Tuple of (is_valid, error_message). error_message is empty if valid.
  """
  if not math.isfinite(value):
    return False, f"{name} must be finite, got {value}"
  return True, ""


def validate_positive(name: str, value: float) -> tuple[bool, str]:
  """Validate a value is finite and strictly positive.

  Args:
    name: Parameter name used in the error message.
    value: The value to validate.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(value) or value <= 0:
    return False, f"{name} must be a positive number, got {value}"
  return True, ""


def validate_non_negative(name: str, value: float) -> tuple[bool, str]:
  """Validate a value is finite and not negative.

  Args:
    name: Parameter name used in the error message.
    value: The value to validate.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(value) or value < 0:
    return False, f"{name} must be non-negative, got {value}"
  return True, ""


def validate_probability(name: str, value: float) -> tuple[bool, str]:
  """Validate a value lies in the closed unit interval.

  Args:
    name: Parameter name used in the error message.
    value: The value to validate.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(value) or not 0.0 <= value <= 1.0:
    return False, f"{name} must be a probability in [0, 1], got {value}"
  return True, ""


def validate_beamwidth(name: str, value: float) -> tuple[bool, str]:
  """Validate a half-power beamwidth in radians lies in (0, pi].

  Args:
    name: Parameter name used in the error message.
    value: Beamwidth in radians.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(value) or not 0.0 < value <= math.pi:
    return False, f"{name} must lie in (0, pi] radians, got {value}"
  return True, ""


def validate_reflection_coefficient(name: str, value: float) -> tuple[bool, str]:
  """Validate a maximum reflection coefficient lies in (0, 1].

  Args:
    name: Parameter name used in the error message.
    value: Linear power ratio.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(value) or not 0.0 < value <= 1.0:
    return False, f"{name} must lie in (0, 1], got {value}"
  return True, ""


def validate_carried(name: str, value: int) -> tuple[bool, str]:
  """Validate the number of carried terminals is 0, 1 or 2.

  Args:
    name: Parameter name used in the error message.
    value: Number of terminals held by a person.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if value not in (0, 1, 2):
    return False, f"{name} must be 0, 1 or 2, got {value}"
  return True, ""


def validate_moments(name: str, mean: float, second: float) -> tuple[bool, str]:
  """Validate a (mean, second moment) pair describes a distribution.

  The second moment may not fall below the squared mean by more than a
  relative rounding allowance.

  Args:
    name: Parameter name used in the error message.
    mean: First moment, non-negative.
    second: Second moment.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if not math.isfinite(mean) or mean < 0:
    return False, f"{name} mean must be non-negative, got {mean}"
  if not math.isfinite(second) or second < mean * mean * (1.0 - 1e-12):
    return False, (
      f"{name} second moment {second} is smaller than the squared mean "
      f"{mean * mean}"
    )
  return True, ""


def validate_steps(steps: int) -> tuple[bool, str]:
  """Validate a sweep has at least two points.

  Args:
    steps: Number of sweep points.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if steps < 2:
    return False, f"Sweep needs at least 2 steps, got {steps}"
  return True, ""


def validate_realizations(count: int) -> tuple[bool, str]:
  """Validate a Monte Carlo realization count.

  Args:
    count: Number of realizations.

  Returns:
    Tuple of (is_valid, error_message).
  """
  if count < 100:
    return False, f"realizations must be at least 100, got {count}"
  return True, ""
