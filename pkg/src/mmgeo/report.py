"""Report module for writing sweep results.

This module handles the versioned CSV output of a run and the plain-text
summary echoed after it.
"""

import csv
import math
from collections.abc import Mapping, Sequence
from pathlib import Path

from mmgeo.config import RunMode

SCHEMA_VERSION = 1

COLUMNS: dict[RunMode, tuple[str, ...]] = {
  RunMode.ANALYZE: (
    "sweep_value",
    "n_r_exact",
    "n_r_closed",
    "pl_db_exact",
    "pl_db_closed",
    "tau_mean_ns",
    "tau_rms_ns",
    "bc_mhz",
  ),
  RunMode.SIMULATE: (
    "sweep_value",
    "n_r_mc",
    "n_r_se",
    "pl_db_mc",
    "pl_db_se",
    "tau_rms_ns_mc",
  ),
  RunMode.COMPARE: (
    "sweep_value",
    "n_r_exact",
    "n_r_mc",
    "n_r_se",
    "n_r_rel_err",
    "n_r_flag",
    "pl_db_exact",
    "pl_db_mc",
    "pl_db_se",
    "pl_db_rel_err",
    "pl_db_flag",
  ),
}

Row = Mapping[str, float | int | bool | None]


def format_value(value: float | int | bool | None) -> str:
  """Format a cell: empty for None, "inf" for infinity, repr for floats."""
  if value is None:
    return ""
  if isinstance(value, bool):
    return "1" if value else "0"
  if isinstance(value, int):
    return str(value)
  if math.isinf(value):
    return "inf" if value > 0 else "-inf"
  if math.isnan(value):
    return ""
  return repr(float(value))


def write_csv(path: Path, mode: RunMode, rows: Sequence[Row]) -> None:
  """Write rows under the schema comment and the mode's header.

  Args:
    path: Output file; parent directories must exist.
    mode: Selects the column set.
    rows: One mapping per sweep point.

  Raises:
    OSError: If the file cannot be written.
  """
  columns = COLUMNS[mode]
  with path.open("w", encoding="utf-8", newline="") as f:
    f.write(f"# schema={SCHEMA_VERSION}\n")
    writer = csv.writer(f)
    writer.writerow(columns)
    for row in rows:
      writer.writerow([format_value(row.get(column)) for column in columns])


def summary_table(mode: RunMode, rows: Sequence[Row]) -> str:
  """Render rows as an aligned text table."""
  columns = COLUMNS[mode]
  cells = [[_short(row.get(column)) for column in columns] for row in rows]
  widths = [
    max([len(column), *(len(line[i]) for line in cells)]) for i, column in enumerate(columns)
  ]
  lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
  lines += ["  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in cells]
  return "\n".join(lines)


def _short(value: float | int | bool | None) -> str:
  if value is None:
    return "-"
  if isinstance(value, bool):
    return "yes" if value else "no"
  if isinstance(value, int):
    return str(value)
  if math.isinf(value) or math.isnan(value):
    return format_value(value) or "-"
  return f"{value:.6g}"
