"""Unit tests for run configuration documents."""

import json

import pytest

from cbr_tuning.config import RunConfig, load_config, validate_document
from cbr_tuning.exceptions import ParseError, ValidationError
from cbr_tuning.fdtd import CbrGeometry


@pytest.fixture
def document():
    return {
        "g2": {"window_ns": 3.0, "align": False},
        "etch": {"exclude_cycles": [1], "column": "RT"},
        "geometry": {"n_rings": 3},
        "simulation": {"grid_resolution": 10, "pml": {"cells": 10}},
    }


class TestRunConfig:
    """Test cases for RunConfig."""

    def test_get_precedence(self, document):
        """Test overrides win over the document and the document over defaults."""
        config = RunConfig("g2", document=document, overrides={"g2.window_ns": 1.5, "g2.rep_period_ns": None})
        assert config.get("g2.window_ns") == 1.5
        assert config.get("g2.align", True) is False
        assert config.get("g2.rep_period_ns", 12.5) == 12.5

    def test_section(self, document):
        """Test a section merges its overrides."""
        config = RunConfig("etch", document=document, overrides={"etch.sensitivity": 2.9})
        assert config.section("etch") == {"exclude_cycles": [1], "column": "RT", "sensitivity": 2.9}
        assert config.section("michelson") == {}

    def test_structured_sections(self, document):
        """Test geometry and solver settings are built from their sections."""
        config = RunConfig("simulate", document=document)
        assert config.geometry() == CbrGeometry(n_rings=3)
        simulation = config.simulation()
        assert simulation.grid_resolution == 10
        assert simulation.pml.cells == 10

    def test_effective(self, document):
        """Test the recorded settings include override-only sections."""
        config = RunConfig("g2", document={"g2": {"window_ns": 3.0}}, overrides={"michelson.tau_ps": 53.0})
        assert config.effective() == {"g2": {"window_ns": 3.0}, "michelson": {"tau_ps": 53.0}}


class TestValidateDocument:
    """Test cases for validate_document."""

    def test_valid(self, document):
        """Test a valid document is returned unchanged."""
        assert validate_document(document) is document

    @pytest.mark.parametrize(
        "bad",
        [
            [],
            {"plotting": {}},
            {"g2": {"widow_ns": 2.0}},
            {"fano": [1.52, 1.58]},
            {"geometry": {"rings": 6}},
            {"simulation": {"pml": {"depth": 10}}},
        ],
    )
    def test_invalid(self, bad):
        """Test unknown sections and keys raise ValidationError."""
        with pytest.raises(ValidationError):
            validate_document(bad)


class TestLoadConfig:
    """Test cases for load_config."""

    def test_none(self):
        """Test no path gives an empty document."""
        assert load_config(None) == {}

    def test_load(self, tmp_path, document):
        """Test a document is read and validated."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        assert load_config(str(path)) == document

    def test_missing(self, tmp_path):
        """Test a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_config(str(tmp_path / "absent.json"))

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON raises ParseError with its line."""
        path = tmp_path / "run.json"
        path.write_text('{\n  "g2": {\n    "window_ns": ,\n  }\n}\n', encoding="utf-8")
        with pytest.raises(ParseError) as info:
            load_config(str(path))
        assert info.value.line == 3
