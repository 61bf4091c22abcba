"""
Report and table writers for command outputs.

JSON reports use :func:`cbr_tuning.utils.dumps` (sorted keys, fixed
indentation) and CSV tables a fixed float format and ``\\n`` line endings,
so repeated runs produce byte-identical files.
"""

import logging
import os
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from .spectra import Spectrum
from .utils import dumps

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.10g"


class OutputDirectory:
    """
    Confines every artifact of a command to one directory.

    Parameters
    ----------
    path : str
        Target directory, created on first write.
    """

    def __init__(self, path: str = "."):
        self.directory = os.path.abspath(os.fspath(path))
        self.written = []

    def _target(self, name: str) -> str:
        if os.path.isabs(name) or os.path.normpath(name).startswith(".."):
            raise ValueError(f"artifact name must be relative to the output directory, got {name!r}")
        os.makedirs(self.directory, exist_ok=True)
        target = os.path.join(self.directory, name)
        self.written.append(target)
        return target

    def write_json(self, name: str, record: Dict[str, Any]) -> str:
        target = self._target(name)
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps(record))
        logger.info("Report written to: %s", target)
        return target

    def write_csv(self, name: str, frame: pd.DataFrame) -> str:
        target = self._target(name)
        frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        logger.info("Table with %d rows written to: %s", len(frame), target)
        return target

    def write_table(self, name: str, frame: pd.DataFrame, headers: Optional[Dict[str, Any]] = None) -> str:
        """CSV preceded by ``# key=value`` comment lines, in the format the loaders read."""
        target = self._target(name)
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            for key, value in (headers or {}).items():
                handle.write(f"# {key}={value}\n")
            frame.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        logger.info("Table with %d rows written to: %s", len(frame), target)
        return target

    def path(self, name: str) -> str:
        """Registered path for an artifact written by another writer (SVG, spectra)."""
        return self._target(name)

    def __str__(self) -> str:
        return f"{self.directory} ({len(self.written)} artifacts)"


def command_report(command: str, seed: Optional[int], settings: Dict[str, Any], results: Dict[str, Any]) -> Dict[str, Any]:
    """
    Wrap command results with the effective settings and the seed.

    Examples
    --------
    >>> command_report("g2", 0, {"window_ns": 2.0}, {"g2_0": 0.03})["seed"]
    0
    """
    return {"command": command, "seed": seed, "settings": settings, "results": results}


def spectrum_frame(spectrum: Spectrum, value: str = "intensity") -> pd.DataFrame:
    """Two-column table of a spectrum, named after its axis unit."""
    axis = f"{spectrum.axis_kind.value}_{spectrum.axis_kind.unit}"
    return pd.DataFrame({axis: np.asarray(spectrum.axis), value: np.asarray(spectrum.intensity)})
