"""
Persistence for the FDTD engine: geometry and solver settings as JSON,
field snapshots as flat little-endian float64 grids with a JSON sidecar.

Usage
-----
    from cbr_tuning.fdtd.io import save_run_config, load_run_config

    save_run_config("run.json", geometry, config)
    geometry, config = load_run_config("run.json")
"""

import json
import logging
import os
from dataclasses import asdict, fields
from typing import Any, Dict, Tuple

import numpy as np

from ..exceptions import ParseError, ValidationError
from ..utils import dumps
from .config import PmlConfig, SimulationConfig
from .geometry import CbrGeometry, SimulationGrid
from .materials import GoldDrude

logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"


def _known(cls, data: Dict[str, Any], what: str) -> Dict[str, Any]:
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValidationError(f"unknown {what} keys: {unknown}")
    return dict(data)


def geometry_to_dict(geometry: CbrGeometry) -> Dict[str, Any]:
    return asdict(geometry)


def geometry_from_dict(data: Dict[str, Any]) -> CbrGeometry:
    """
    Build a :class:`CbrGeometry` from a JSON object.

    Raises
    ------
    ValidationError
        If the object holds unknown keys.
    """
    values = _known(CbrGeometry, data or {}, "geometry")
    if isinstance(values.get("gold"), dict):
        values["gold"] = GoldDrude(**_known(GoldDrude, values["gold"], "gold"))
    return CbrGeometry(**values)


def config_to_dict(config: SimulationConfig) -> Dict[str, Any]:
    values = asdict(config)
    values["boundary"] = config.boundary.value
    values["frequency_samples"] = list(config.frequency_samples)
    return values


def config_from_dict(data: Dict[str, Any]) -> SimulationConfig:
    """Build a :class:`SimulationConfig` from a JSON object; unknown keys are rejected."""
    values = _known(SimulationConfig, data or {}, "simulation")
    if isinstance(values.get("pml"), dict):
        values["pml"] = PmlConfig(**_known(PmlConfig, values["pml"], "pml"))
    if "frequency_samples" in values:
        values["frequency_samples"] = tuple(values["frequency_samples"])
    return SimulationConfig(**values)


def save_run_config(path, geometry: CbrGeometry, config: SimulationConfig) -> str:
    """Write ``{"geometry": ..., "simulation": ...}`` as JSON."""
    file_path = os.path.abspath(os.fspath(path))
    os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
    with open(file_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps({"geometry": geometry_to_dict(geometry), "simulation": config_to_dict(config)}))
    return file_path


def load_run_config(path) -> Tuple[CbrGeometry, SimulationConfig]:
    """
    Read a geometry + simulation JSON document.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ParseError
        If the file is not valid JSON.
    """
    file_path = os.path.abspath(os.fspath(path))
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"run configuration not found: {file_path}")
    logger.info("Loading run configuration from: %s", file_path)
    with open(file_path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in {file_path}: {e.msg}", line=e.lineno)
    return geometry_from_dict(document.get("geometry", {})), config_from_dict(document.get("simulation", {}))


# ===================== SNAPSHOTS =====================


def dump_snapshot(directory, name: str, values: np.ndarray, grid: SimulationGrid, step: int, time: float) -> str:
    """
    Write ``values`` as ``<name>.bin`` (C order, little-endian float64) plus
    ``<name>.json`` describing shape, spacing and origin.

    Returns
    -------
    str
        Path of the binary file.
    """
    directory = os.path.abspath(os.fspath(directory))
    os.makedirs(directory, exist_ok=True)
    data = np.ascontiguousarray(values, dtype=SNAPSHOT_DTYPE)
    binary = os.path.join(directory, f"{name}.bin")
    data.tofile(binary)
    sidecar = {
        "name": name,
        "shape": list(data.shape),
        "order": "C",
        "dtype": "float64",
        "endianness": "little",
        "dx_nm": grid.dx,
        "dz_nm": grid.dx,
        "x0_nm": grid.x0,
        "z0_nm": grid.z0,
        "mirror": grid.mirror,
        "step": int(step),
        "time": float(time),
    }
    with open(os.path.join(directory, f"{name}.json"), "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps(sidecar))
    logger.debug("Snapshot %s written to: %s", name, binary)
    return binary


def load_snapshot(path) -> Tuple[np.ndarray, Dict[str, Any]]:
    """Read a snapshot written by :func:`dump_snapshot` (either file of the pair)."""
    stem = os.path.splitext(os.path.abspath(os.fspath(path)))[0]
    with open(f"{stem}.json", encoding="utf-8") as handle:
        meta = json.load(handle)
    values = np.fromfile(f"{stem}.bin", dtype=SNAPSHOT_DTYPE)
    expected = int(np.prod(meta["shape"]))
    if values.size != expected:
        raise ValidationError(f"snapshot {stem}.bin holds {values.size} values, sidecar expects {expected}")
    return values.reshape(meta["shape"]), meta
