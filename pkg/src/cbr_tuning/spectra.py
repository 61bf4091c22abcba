"""
Spectrum containers and elementary spectral arithmetic.

Usage
-----
Quick start example:

    from cbr_tuning.spectra import Spectrum, AxisKind, relative_reflectance

    cbr = Spectrum(wavelengths, counts_cbr, AxisKind.WAVELENGTH, "CBR after cycle 3")
    membrane = Spectrum(wavelengths, counts_ref, AxisKind.WAVELENGTH, "un-etched membrane")

    rel = relative_reflectance(cbr, membrane).to_energy()
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .constants import HC_EV_NM
from .conversion import PhotonEnergy
from .exceptions import DomainError, ReferenceDivisionError, ShapeError, ValidationError

logger = logging.getLogger(__name__)


class AxisKind(str, Enum):
    """Physical quantity on the spectral axis."""

    WAVELENGTH = "wavelength"
    ENERGY = "energy"

    @property
    def unit(self) -> str:
        return "nm" if self is AxisKind.WAVELENGTH else "eV"

    @classmethod
    def parse(cls, text: str) -> "AxisKind":
        """Accept ``wavelength``, ``wavelength_nm``, ``energy`` or ``energy_eV``."""
        key = str(text).strip().lower()
        if key in ("wavelength", "wavelength_nm", "nm", "lambda"):
            return cls.WAVELENGTH
        if key in ("energy", "energy_ev", "ev", "e"):
            return cls.ENERGY
        raise ValidationError(f"unknown axis kind: {text!r}")


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Sampled intensity versus photon wavelength or energy.

    Parameters
    ----------
    axis : array_like
        Strictly monotone wavelength (nm) or energy (eV) samples.
    intensity : array_like
        Finite, non-negative intensities, same length as ``axis``.
    axis_kind : AxisKind
        Quantity on the axis.
    label : str
        Free text.

    Raises
    ------
    ValidationError
        If the invariants above are violated.

    Notes
    -----
    Arrays are copied and frozen on construction, so a ``Spectrum`` can be
    shared between threads.
    """

    axis: np.ndarray
    intensity: np.ndarray
    axis_kind: AxisKind = AxisKind.ENERGY
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        axis = _readonly(self.axis)
        intensity = _readonly(self.intensity)
        if axis.ndim != 1 or intensity.ndim != 1:
            raise ValidationError("spectrum axis and intensity must be one-dimensional")
        if axis.size != intensity.size:
            raise ValidationError(
                f"axis and intensity lengths differ: {axis.size} != {intensity.size}"
            )
        if axis.size < 2:
            raise ValidationError("a spectrum needs at least two samples")
        if not np.all(np.isfinite(axis)):
            raise ValidationError("spectrum axis contains non-finite values")
        steps = np.diff(axis)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValidationError("spectrum axis is not strictly monotone")
        if not np.all(np.isfinite(intensity)):
            raise ValidationError("spectrum intensity contains non-finite values")
        if np.any(intensity < 0):
            raise ValidationError("spectrum intensity contains negative values")
        kind = self.axis_kind if isinstance(self.axis_kind, AxisKind) else AxisKind.parse(self.axis_kind)
        if np.any(axis <= 0):
            raise ValidationError(f"{kind.value} axis must be positive")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "axis_kind", kind)

    def __len__(self) -> int:
        return int(self.axis.size)

    @property
    def ascending(self) -> bool:
        return bool(self.axis[-1] > self.axis[0])

    @property
    def bounds(self) -> Tuple[float, float]:
        return float(self.axis.min()), float(self.axis.max())

    def sorted(self) -> "Spectrum":
        """Return the spectrum with an ascending axis."""
        if self.ascending:
            return self
        return Spectrum(self.axis[::-1], self.intensity[::-1], self.axis_kind, self.label, dict(self.metadata))

    def to_energy(self) -> "Spectrum":
        """Return the spectrum on an ascending energy axis (eV)."""
        if self.axis_kind is AxisKind.ENERGY:
            return self.sorted()
        converted = Spectrum(HC_EV_NM / self.axis, self.intensity, AxisKind.ENERGY, self.label, dict(self.metadata))
        return converted.sorted()

    def to_wavelength(self) -> "Spectrum":
        """Return the spectrum on an ascending wavelength axis (nm)."""
        if self.axis_kind is AxisKind.WAVELENGTH:
            return self.sorted()
        converted = Spectrum(HC_EV_NM / self.axis, self.intensity, AxisKind.WAVELENGTH, self.label, dict(self.metadata))
        return converted.sorted()

    def to_kind(self, kind: AxisKind) -> "Spectrum":
        return self.to_energy() if kind is AxisKind.ENERGY else self.to_wavelength()

    def crop(self, lower: float, upper: float) -> "Spectrum":
        """Keep samples with ``lower <= axis <= upper``."""
        mask = (self.axis >= lower) & (self.axis <= upper)
        if mask.sum() < 2:
            raise ShapeError(f"crop range [{lower}, {upper}] keeps fewer than two samples")
        return Spectrum(self.axis[mask], self.intensity[mask], self.axis_kind, self.label, dict(self.metadata))

    def resample(self, axis: np.ndarray) -> "Spectrum":
        """
        Linearly interpolate onto ``axis`` (same axis kind).

        Raises
        ------
        ShapeError
            If ``axis`` reaches outside the sampled range.
        """
        target = np.asarray(axis, dtype=float)
        lo, hi = self.bounds
        span = hi - lo
        if target.min() < lo - 1e-12 * span or target.max() > hi + 1e-12 * span:
            raise ShapeError(
                f"resampling axis [{target.min()}, {target.max()}] leaves the sampled range [{lo}, {hi}]"
            )
        base = self.sorted()
        values = np.interp(target, base.axis, base.intensity)
        return Spectrum(target, values, self.axis_kind, self.label, dict(self.metadata))

    def same_grid(self, other: "Spectrum", rtol: float = 1e-12) -> bool:
        return (
            self.axis_kind is other.axis_kind
            and len(self) == len(other)
            and bool(np.allclose(self.axis, other.axis, rtol=rtol, atol=0.0))
        )

    def __str__(self) -> str:
        lo, hi = self.bounds
        return f"Spectrum '{self.label}' : {len(self)} samples, {lo:g}-{hi:g} {self.axis_kind.unit}"


def relative_reflectance(cbr: Spectrum, reference: Spectrum, resample: bool = True) -> Spectrum:
    """
    Pointwise ratio of a CBR spectrum to a reference spectrum.

    Parameters
    ----------
    cbr : Spectrum
        Reflectance measured on the resonator.
    reference : Spectrum
        Reflectance of the un-etched membrane (or planar stack).
    resample : bool, optional
        When the grids differ, interpolate the reference onto the overlap of
        the CBR grid. With ``False`` differing grids raise ``ShapeError``.

    Returns
    -------
    Spectrum
        ``cbr / reference`` on the CBR axis.

    Raises
    ------
    ShapeError
        If the grids differ (and ``resample`` is off) or do not overlap.
    ReferenceDivisionError
        If a reference sample used in the ratio is zero or negative; the
        offending index refers to the reference spectrum.

    Examples
    --------
    >>> s = Spectrum([780.0, 790.0, 800.0], [2.0, 3.0, 4.0], AxisKind.WAVELENGTH)
    >>> relative_reflectance(s, s).intensity
    array([1., 1., 1.])
    """
    if reference.axis_kind is not cbr.axis_kind:
        reference = reference.to_kind(cbr.axis_kind)
        if not cbr.ascending:
            reference = Spectrum(reference.axis[::-1], reference.intensity[::-1], reference.axis_kind, reference.label)

    if cbr.same_grid(reference):
        zero = np.flatnonzero(reference.intensity <= 0)
        if zero.size:
            raise ReferenceDivisionError(
                f"reference intensity is zero at index {int(zero[0])}", index=int(zero[0])
            )
        ratio = cbr.intensity / reference.intensity
        return Spectrum(cbr.axis, ratio, cbr.axis_kind, f"{cbr.label} / {reference.label}".strip(" /"))

    if not resample:
        raise ShapeError("spectra are sampled on different grids")

    zero = np.flatnonzero(reference.intensity <= 0)
    if zero.size:
        raise ReferenceDivisionError(
            f"reference intensity is zero at index {int(zero[0])}", index=int(zero[0])
        )
    lo = max(cbr.bounds[0], reference.bounds[0])
    hi = min(cbr.bounds[1], reference.bounds[1])
    if hi <= lo:
        raise ShapeError("spectral ranges of measurement and reference do not overlap")
    overlap = cbr.crop(lo, hi)
    logger.info(
        "Resampling reference '%s' onto %d samples of '%s'", reference.label, len(overlap), cbr.label
    )
    ref_values = reference.resample(overlap.axis).intensity
    ratio = overlap.intensity / ref_values
    return Spectrum(overlap.axis, ratio, cbr.axis_kind, f"{cbr.label} / {reference.label}".strip(" /"))


def tpe_laser_energy(exciton_energy: float, binding_energy: float) -> PhotonEnergy:
    """
    Laser photon energy for resonant two-photon excitation of the biexciton.

    ``E_L = E_XX / 2 = E_X - E_b / 2``.

    Parameters
    ----------
    exciton_energy : float
        Exciton transition energy in eV, positive.
    binding_energy : float
        Biexciton binding energy in eV, non-negative.

    Raises
    ------
    DomainError
        If the inputs or the result are out of range.

    Examples
    --------
    >>> round(tpe_laser_energy(1.581, 3.8e-3), 4)
    1.5791
    """
    e_x = float(exciton_energy)
    e_b = float(binding_energy)
    if not np.isfinite(e_x) or e_x <= 0:
        raise DomainError(f"exciton energy must be positive, got {e_x}")
    if not np.isfinite(e_b) or e_b < 0:
        raise DomainError(f"binding energy must be non-negative, got {e_b}")
    laser = e_x - e_b / 2.0
    if laser <= 0:
        raise DomainError(f"two-photon laser energy is not positive: {laser}")
    return PhotonEnergy(laser)


def sample_function(function, lower: float, upper: float, samples: int, kind: AxisKind = AxisKind.ENERGY, label: str = "") -> Spectrum:
    """Evaluate ``function`` on a uniform axis and wrap it as a :class:`Spectrum`."""
    axis = np.linspace(lower, upper, int(samples))
    return Spectrum(axis, function(axis), kind, label)


__all__ = [
    "AxisKind",
    "Spectrum",
    "relative_reflectance",
    "tpe_laser_energy",
    "sample_function",
]
