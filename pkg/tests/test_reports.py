"""Unit tests for report and table writers."""

import json
import math

import numpy as np
import pandas as pd
import pytest

from cbr_tuning.reports import OutputDirectory, command_report, spectrum_frame
from cbr_tuning.spectra import AxisKind, Spectrum
from cbr_tuning.utils import dumps, safe_get, to_builtin, uniform_spacing
from cbr_tuning.exceptions import ValidationError


class TestOutputDirectory:
    """Test cases for OutputDirectory."""

    def test_write_json(self, tmp_path):
        """Test reports are written with sorted keys and numpy values converted."""
        out = OutputDirectory(tmp_path / "run")
        target = out.write_json("g2_report.json", {"b": np.float64(0.5), "a": np.arange(2)})
        text = open(target, encoding="utf-8").read()
        assert json.loads(text) == {"a": [0, 1], "b": 0.5}
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")
        assert str(out) == f"{out.directory} (1 artifacts)"

    def test_repeatable(self, tmp_path):
        """Test writing the same record twice gives identical bytes."""
        out = OutputDirectory(tmp_path)
        record = {"tau_ps": 53.123456789, "nan": math.nan}
        first = open(out.write_json("one.json", record), "rb").read()
        second = open(out.write_json("two.json", record), "rb").read()
        assert first == second
        assert json.loads(first)["nan"] is None

    def test_write_csv(self, tmp_path):
        """Test the float format and line endings of tables."""
        out = OutputDirectory(tmp_path)
        target = out.write_csv("t.csv", pd.DataFrame({"x": [1.0 / 3.0], "n": [2]}))
        assert open(target, "rb").read() == b"x,n\n0.3333333333,2\n"

    def test_write_table_headers(self, tmp_path):
        """Test comment headers precede the table."""
        out = OutputDirectory(tmp_path)
        target = out.write_table("d.csv", pd.DataFrame({"time_ps": [0.0, 4.0], "counts": [1, 2]}), {"bin_width_ps": 4.0})
        lines = open(target, encoding="utf-8").read().splitlines()
        assert lines == ["# bin_width_ps=4.0", "time_ps,counts", "0,1", "4,2"]

    @pytest.mark.parametrize("name", ["/tmp/escape.json", "../escape.json"])
    def test_outside_names_rejected(self, tmp_path, name):
        """Test artifacts cannot leave the output directory."""
        with pytest.raises(ValueError):
            OutputDirectory(tmp_path).write_json(name, {})

    def test_path_registered(self, tmp_path):
        """Test paths for other writers are tracked."""
        out = OutputDirectory(tmp_path)
        target = out.path("figure.svg")
        assert out.written == [target]


class TestRecords:
    """Test cases for report helpers."""

    def test_command_report(self):
        """Test the report envelope."""
        record = command_report("g2", 7, {"window_ns": 2.0}, {"g2_0": 0.03})
        assert record == {"command": "g2", "seed": 7, "settings": {"window_ns": 2.0}, "results": {"g2_0": 0.03}}

    def test_spectrum_frame(self):
        """Test spectrum columns are named after the axis unit."""
        spectrum = Spectrum([780.0, 790.0], [0.5, 0.6], AxisKind.WAVELENGTH)
        frame = spectrum_frame(spectrum, "reflectance")
        assert list(frame.columns) == ["wavelength_nm", "reflectance"]

    def test_to_builtin_enum(self):
        """Test enumerations are reported by value."""
        assert to_builtin({"axis": AxisKind.ENERGY, "flag": np.bool_(True)}) == {"axis": "energy", "flag": True}
        assert dumps([np.inf]) == "[\n  null\n]\n"


class TestUtils:
    """Test cases for utility helpers."""

    def test_safe_get(self):
        """Test dotted lookups with defaults."""
        config = {"g2": {"window_ns": 2.0, "align": None}}
        assert safe_get(config, "g2.window_ns") == 2.0
        assert safe_get(config, "g2.align", True) is True
        assert safe_get(config, "etch.column", "RT") == "RT"
        assert safe_get(None, "any.path", "fallback") == "fallback"

    def test_uniform_spacing(self):
        """Test uniform and irregular grids."""
        assert uniform_spacing(np.arange(5) * 0.1) == pytest.approx(0.1)
        with pytest.raises(ValidationError):
            uniform_spacing([0.0, 1.0, 3.0])
        with pytest.raises(ValidationError):
            uniform_spacing([1.0])
