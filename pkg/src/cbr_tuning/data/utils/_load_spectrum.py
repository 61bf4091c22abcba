import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from ...exceptions import ParseError, ValidationError
from ...spectra import AxisKind, Spectrum
from ._read_table import _read_table

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("axis", "intensity")

# Column names accepted for the axis, mapped to the axis kind they imply
_AXIS_NAMES = {
    "axis": None,
    "wavelength": AxisKind.WAVELENGTH,
    "wavelength_nm": AxisKind.WAVELENGTH,
    "energy": AxisKind.ENERGY,
    "energy_eV": AxisKind.ENERGY,
    "energy_ev": AxisKind.ENERGY,
}


@dataclass(frozen=True)
class SpectrumFormat:
    """
    Format descriptor for spectrum files.

    Parameters
    ----------
    axis_kind : AxisKind or str, optional
        Forces the axis quantity; otherwise taken from the ``# axis=`` header
        or the axis column name.
    delimiter : str
        Field separator.
    label : str, optional
        Overrides the ``label=`` header.
    """

    axis_kind: Optional[AxisKind] = None
    delimiter: str = ","
    label: Optional[str] = None


def _axis_kind(fmt: SpectrumFormat, headers: dict) -> AxisKind:
    if fmt.axis_kind is not None:
        return AxisKind.parse(fmt.axis_kind) if isinstance(fmt.axis_kind, str) else fmt.axis_kind
    if "axis" in headers:
        return AxisKind.parse(headers["axis"])
    first = headers.get("columns", "").split(",")[0].strip()
    implied = _AXIS_NAMES.get(first)
    if implied is None:
        raise ParseError("cannot tell whether the spectrum axis is wavelength or energy; add '# axis=wavelength_nm' or '# axis=energy_eV'", line=1)
    return implied


def _load_spectrum(path, fmt: Optional[SpectrumFormat] = None) -> Spectrum:
    """
    Load a two-column spectrum file.

    Parameters
    ----------
    path : str or os.PathLike
        CSV file with a ``# axis=... label=...`` comment header and columns
        ``axis,intensity`` (the axis column may also be named
        ``wavelength_nm`` or ``energy_eV``).
    fmt : SpectrumFormat, optional
        Format overrides.

    Returns
    -------
    Spectrum
        Validated spectrum with the axis sorted ascending.

    Raises
    ------
    ParseError
        If a row is malformed; the message names the line.
    ValidationError
        If an intensity is NaN or the axis is not strictly monotone.

    Examples
    --------
    >>> s = _load_spectrum("reflectance_cycle3.csv")
    >>> s.axis_kind, len(s)
    (<AxisKind.WAVELENGTH: 'wavelength'>, 1340)
    """
    fmt = fmt or SpectrumFormat()
    aliases = {name: "axis" for name in _AXIS_NAMES}
    headers, df = _read_table(path, SPECTRUM_COLUMNS, "spectrum", delimiter=fmt.delimiter, aliases=aliases)
    kind = _axis_kind(fmt, headers)
    label = fmt.label if fmt.label is not None else headers.get("label", os.path.basename(os.fspath(path)))

    axis = df["axis"].to_numpy(dtype=float)
    steps = np.diff(axis)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        bad = int(np.flatnonzero(steps <= 0)[0] if steps[0] > 0 else np.flatnonzero(steps >= 0)[0])
        raise ValidationError(f"line {int(df['_line'].iloc[bad + 1])}: spectrum axis is not strictly monotone")

    spectrum = Spectrum(axis, df["intensity"].to_numpy(dtype=float), kind, label, metadata=dict(headers))
    return spectrum.sorted()


def _save_spectrum(path, spectrum: Spectrum) -> str:
    """
    Write ``spectrum`` in the format :func:`_load_spectrum` reads.

    Returns
    -------
    str
        Absolute path of the written file.
    """
    file_path = os.path.abspath(os.fspath(path))
    os.makedirs(os.path.dirname(file_path) or ".", exist_ok=True)
    label = " ".join(str(spectrum.label).split())
    frame = pd.DataFrame({"axis": spectrum.axis, "intensity": spectrum.intensity})
    with open(file_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# axis={spectrum.axis_kind.value}_{spectrum.axis_kind.unit} label={label}\n")
        frame.to_csv(handle, index=False, float_format="%.15g", lineterminator="\n")
    logger.info("Saved spectrum with %d samples to: %s", len(spectrum), file_path)
    return file_path
