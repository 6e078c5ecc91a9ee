"""Tests for the report module."""

import csv
import math
import tempfile
from pathlib import Path

import pytest

from mmgeo.config import RunMode
from mmgeo.report import COLUMNS, SCHEMA_VERSION, format_value, summary_table, write_csv


class TestFormatValue:
  """Tests for format_value."""

  @pytest.mark.parametrize(
    "value,expected",
    [
      (None, ""),
      (True, "1"),
      (False, "0"),
      (7, "7"),
      (math.inf, "inf"),
      (-math.inf, "-inf"),
      (math.nan, ""),
      (0.1, "0.1"),
      (1e-9, "1e-09"),
    ],
  )
  def test_cells(self, value: object, expected: str) -> None:
    """Test each kind of cell value."""
    assert format_value(value) == expected

  def test_floats_round_trip(self) -> None:
    """Test floats are written with full precision."""
    value = 1.0 / 3.0
    assert float(format_value(value)) == value


class TestWriteCsv:
  """Tests for write_csv."""

  def test_schema_line_and_header(self) -> None:
    """Test the file starts with the schema comment and the mode's header."""
    rows = [
      {"sweep_value": 25.0, "n_r_exact": 0.5, "pl_db_exact": math.inf},
      {"sweep_value": 50.0, "n_r_exact": 0.25, "n_r_closed": None},
    ]
    with tempfile.TemporaryDirectory() as tmpdir:
      path = Path(tmpdir) / "out.csv"
      write_csv(path, RunMode.ANALYZE, rows)
      lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0] == f"# schema={SCHEMA_VERSION}"
    table = list(csv.reader(lines[1:]))
    assert tuple(table[0]) == COLUMNS[RunMode.ANALYZE]
    assert len(table) == 3
    first = dict(zip(table[0], table[1]))
    assert first["sweep_value"] == "25.0"
    assert first["pl_db_exact"] == "inf"
    assert first["n_r_closed"] == ""

  def test_compare_flags(self) -> None:
    """Test boolean flags are written as 0 and 1."""
    rows = [{"sweep_value": None, "n_r_flag": True, "pl_db_flag": False}]
    with tempfile.TemporaryDirectory() as tmpdir:
      path = Path(tmpdir) / "out.csv"
      write_csv(path, RunMode.COMPARE, rows)
      table = list(csv.DictReader(path.read_text(encoding="utf-8").splitlines()[1:]))

    assert table[0]["n_r_flag"] == "1"
    assert table[0]["pl_db_flag"] == "0"
    assert table[0]["sweep_value"] == ""

  def test_missing_directory_raises(self) -> None:
    """Test writing into a missing directory raises OSError."""
    with tempfile.TemporaryDirectory() as tmpdir:
      with pytest.raises(OSError):
        write_csv(Path(tmpdir) / "missing" / "out.csv", RunMode.SIMULATE, [])


class TestSummaryTable:
  """Tests for summary_table."""

  def test_aligned_columns(self) -> None:
    """Test every line has the same width and values are shortened."""
    rows = [
      {"sweep_value": 25.0, "n_r_mc": 0.123456789, "n_r_se": 0.01},
      {"sweep_value": 150.0, "n_r_mc": None, "pl_db_mc": math.inf},
    ]
    text = summary_table(RunMode.SIMULATE, rows)
    lines = text.splitlines()
    assert len(lines) == 3
    assert len({len(line) for line in lines}) == 1
    assert lines[0].split() == list(COLUMNS[RunMode.SIMULATE])
    assert "0.123457" in lines[1]
    assert "inf" in lines[2]
    assert lines[2].split()[1] == "-"
