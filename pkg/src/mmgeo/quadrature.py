"""Quadrature module wrapping adaptive and fixed-rule integration.

This module handles one-dimensional integration for the analytic models. The
adaptive rule is scipy's Gauss-Kronrod QUADPACK driver with fixed tolerances;
non-convergence is turned into NumericalError carrying diagnostics instead of
a silent warning.
"""

import math
from collections.abc import Callable
from functools import cache

import numpy as np
from scipy.integrate import quad

EPSABS = 1e-10
EPSREL = 1e-8
LIMIT = 200


class NumericalError(Exception):
  """Exception raised when a numerical evaluation fails."""

  def __init__(self, message: str, diagnostics: dict[str, float] | None = None):
    self.diagnostics = dict(diagnostics or {})
    detail = ", ".join(f"{k}={v:.6g}" for k, v in self.diagnostics.items())
    super().__init__(f"{message} ({detail})" if detail else message)


def integrate(
  func: Callable[[float], float],
  lower: float,
  upper: float,
  what: str,
  points: list[float] | None = None,
) -> float:
  """Integrate func over [lower, upper] to the module tolerances.

  Integrands should be dimensionless and of order one; callers multiply
  physical prefactors outside so that EPSABS stays meaningful.

  Args:
    func: Scalar integrand.
    lower: Lower limit.
    upper: Upper limit.
    what: Label used in error messages.
    points: Optional interior break points (kinks or jumps).

  Returns:
    The integral, 0.0 for an empty or reversed interval.

  Raises:
    NumericalError: If QUADPACK reports non-convergence or the result is not
      finite.
  """
  if not upper > lower:
    return 0.0
  inner = None
  if points:
    inner = [p for p in points if lower < p < upper] or None
  result = quad(
    func,
    lower,
    upper,
    epsabs=EPSABS,
    epsrel=EPSREL,
    limit=LIMIT,
    points=inner,
    full_output=1,
  )
  value, abserr = result[0], result[1]
  if len(result) > 3:
    raise NumericalError(
      f"Integration of {what} did not converge: {result[3]}",
      {"lower": lower, "upper": upper, "value": value, "abserr": abserr},
    )
  if not math.isfinite(value):
    raise NumericalError(
      f"Integration of {what} produced a non-finite value",
      {"lower": lower, "upper": upper},
    )
  return float(value)


@cache
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
  return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n: int, lower: float, upper: float) -> tuple[np.ndarray, np.ndarray]:
  """Return n-point Gauss-Legendre nodes and weights mapped to [lower, upper].

  Args:
    n: Number of nodes.
    lower: Lower limit.
    upper: Upper limit.

  Returns:
    Tuple of (nodes, weights) arrays.
  """
  nodes, weights = _legendre(n)
  half = 0.5 * (upper - lower)
  return lower + half * (nodes + 1.0), half * weights
