"""
Run configuration: one JSON document with a section per command.

Usage
-----
    from cbr_tuning.config import load_config

    config = load_config("run.json")
    config.section("fano")["window"]
    config.get("g2.window_ns", 2.0)

Document layout (every section and key optional)::

    {
      "geometry":   {"p": 380.0, "n_rings": 6, ...},
      "simulation": {"grid_resolution": 20, "pml": {"cells": 12}, ...},
      "fano":       {"window": [1.52, 1.58]},
      "lifetime":   {"model": "x", "tau_ref": 230.0, "tau_ref_err": 0.0},
      "g2":         {"window_ns": 2.0, "rep_period_ns": 12.5, "align": true},
      "michelson":  {"wavelength_nm": 784.0, "tau_ps": 53.0},
      "etch":       {"exclude_cycles": [1], "column": "RT", "sensitivity": 2.9},
      "sweep":      {"steps": 14, "step_nm": 1.5, "extraction": false}
    }
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .exceptions import ParseError, ValidationError
from .fdtd.config import SimulationConfig
from .fdtd.geometry import CbrGeometry
from .fdtd.io import config_from_dict, geometry_from_dict
from .utils import safe_get

logger = logging.getLogger(__name__)

SECTION_KEYS: Dict[str, Tuple[str, ...]] = {
    "fano": ("window",),
    "lifetime": ("model", "tau_ref", "tau_ref_err", "bin_width_ps"),
    "g2": ("window_ns", "rep_period_ns", "align", "diagnostics"),
    "michelson": ("wavelength_nm", "tau_ps"),
    "etch": ("exclude_cycles", "column", "sensitivity", "sensitivity_err", "target_eV"),
    "sweep": ("steps", "step_nm", "extraction", "na"),
}
STRUCTURED_SECTIONS = ("geometry", "simulation")


@dataclass(frozen=True)
class RunConfig:
    """
    Effective settings of one command invocation.

    Attributes
    ----------
    command : str
        Subcommand name.
    inputs : tuple of str
        Input paths as given.
    output_dir : str
        Directory receiving every artifact.
    seed : int
        Random seed, recorded in every report.
    jobs : int
        Parallel workers for sweeps.
    document : dict
        Validated configuration document.
    overrides : dict
        Values set on the command line, by dotted key.
    """

    command: str
    inputs: Tuple[str, ...] = ()
    output_dir: str = "."
    seed: int = 0
    jobs: int = 1
    document: Dict[str, Any] = field(default_factory=dict)
    overrides: Dict[str, Any] = field(default_factory=dict)

    def get(self, path: str, default: Any = None) -> Any:
        """Command-line override first, then the document, then ``default``."""
        if path in self.overrides and self.overrides[path] is not None:
            return self.overrides[path]
        return safe_get(self.document, path, default)

    def section(self, name: str) -> Dict[str, Any]:
        values = dict(self.document.get(name, {}))
        prefix = f"{name}."
        values.update({k[len(prefix):]: v for k, v in self.overrides.items() if k.startswith(prefix) and v is not None})
        return values

    def geometry(self) -> CbrGeometry:
        return geometry_from_dict(self.section("geometry"))

    def simulation(self) -> SimulationConfig:
        return config_from_dict(self.section("simulation"))

    def effective(self) -> Dict[str, Any]:
        """Settings to record in a report: the command's section with overrides applied."""
        return {name: self.section(name) for name in sorted(set(self.document) | _override_sections(self.overrides))}


def _override_sections(overrides: Dict[str, Any]) -> set:
    return {key.split(".", 1)[0] for key, value in overrides.items() if "." in key and value is not None}


def validate_document(document: Dict[str, Any]) -> Dict[str, Any]:
    """
    Check a configuration document for unknown sections and keys.

    Raises
    ------
    ValidationError
        On an unknown section or key, or a section that is not an object.
    """
    if not isinstance(document, dict):
        raise ValidationError("configuration document must be a JSON object")
    known = set(SECTION_KEYS) | set(STRUCTURED_SECTIONS)
    unknown = sorted(set(document) - known)
    if unknown:
        raise ValidationError(f"unknown configuration sections: {unknown}")
    for name, values in document.items():
        if not isinstance(values, dict):
            raise ValidationError(f"configuration section {name!r} must be an object")
        if name in SECTION_KEYS:
            extra = sorted(set(values) - set(SECTION_KEYS[name]))
            if extra:
                raise ValidationError(f"unknown {name} keys: {extra}")
    if "geometry" in document:
        geometry_from_dict(document["geometry"])
    if "simulation" in document:
        config_from_dict(document["simulation"])
    return document


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Read and validate a configuration document; ``None`` gives an empty one.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ParseError
        If the file is not valid JSON.
    ValidationError
        If it holds unknown sections or keys.
    """
    if path is None:
        return {}
    file_path = os.path.abspath(os.fspath(path))
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"configuration file not found: {file_path}")
    logger.info("Loading configuration from: %s", file_path)
    with open(file_path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in {file_path}: {e.msg}", line=e.lineno)
    return validate_document(document)
