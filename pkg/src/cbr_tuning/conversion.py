"""
Unit conversions between photon wavelength, energy, time and linewidth.

Usage
-----
Quick start example:

    from cbr_tuning.conversion import nm_to_ev, ev_to_nm

    energy = nm_to_ev(784.0)          # PhotonEnergy(1.58143...)
    wavelength = ev_to_nm(energy)     # 784.0

    # Arrays are converted element-wise
    energies = nm_to_ev(np.array([780.0, 800.0]))
"""

from typing import Union

import numpy as np

from .constants import C_M_PER_S, HBAR_EV_PS, HC_EV_NM
from .exceptions import DomainError

ArrayLike = Union[float, np.ndarray]


class PhotonEnergy(float):
    """
    Photon energy in eV.

    A ``float`` that refuses non-positive or non-finite values, so any
    arithmetic result falls back to a plain ``float``.

    Examples
    --------
    >>> PhotonEnergy(1.55)
    PhotonEnergy(1.55)
    >>> PhotonEnergy(-1.0)
    Traceback (most recent call last):
    ...
    cbr_tuning.exceptions.DomainError: photon energy must be positive, got -1.0
    """

    def __new__(cls, value: float) -> "PhotonEnergy":
        value = float(value)
        if not np.isfinite(value) or value <= 0:
            raise DomainError(f"photon energy must be positive, got {value}")
        return super().__new__(cls, value)

    @property
    def value(self) -> float:
        return float(self)

    @property
    def wavelength_nm(self) -> float:
        return HC_EV_NM / float(self)

    def __repr__(self) -> str:
        return f"PhotonEnergy({float(self)!r})"


def _check_positive(values: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise DomainError(f"{name} must be positive and finite")


def nm_to_ev(wavelength: ArrayLike) -> Union[PhotonEnergy, np.ndarray]:
    """
    Convert a vacuum wavelength in nm to photon energy in eV.

    Parameters
    ----------
    wavelength : float or ndarray
        Wavelength(s) in nm, strictly positive.

    Returns
    -------
    PhotonEnergy or ndarray
        ``hc / wavelength``. Scalars return a :class:`PhotonEnergy`.

    Raises
    ------
    DomainError
        If any wavelength is non-positive or non-finite.

    Examples
    --------
    >>> round(nm_to_ev(800.0), 5)
    1.54981
    """
    values = np.asarray(wavelength, dtype=float)
    _check_positive(values, "wavelength")
    energy = HC_EV_NM / values
    if energy.ndim == 0:
        return PhotonEnergy(float(energy))
    return energy


def ev_to_nm(energy: ArrayLike) -> Union[float, np.ndarray]:
    """
    Convert photon energy in eV to vacuum wavelength in nm.

    Exact inverse of :func:`nm_to_ev`.

    Raises
    ------
    DomainError
        If any energy is non-positive or non-finite.
    """
    values = np.asarray(energy, dtype=float)
    _check_positive(values, "energy")
    wavelength = HC_EV_NM / values
    if wavelength.ndim == 0:
        return float(wavelength)
    return wavelength


def energy_width_to_nm(center_ev: float, width_ev: ArrayLike) -> ArrayLike:
    """
    Convert a small energy interval at ``center_ev`` to a wavelength interval.

    Uses the local derivative ``|dλ/dE| = hc / E²`` so that, for example, a
    5.1 meV shift near 1.55 eV maps to about 2.6 nm.
    """
    center = float(center_ev)
    if center <= 0:
        raise DomainError(f"center energy must be positive, got {center}")
    width = np.asarray(width_ev, dtype=float) * HC_EV_NM / center**2
    return float(width) if width.ndim == 0 else width


def natural_linewidth(tau_ps: float) -> float:
    """
    Fourier-limited linewidth ``ħ/τ`` in eV for a lifetime in ps.

    Examples
    --------
    >>> round(natural_linewidth(53.0) * 1e6, 2)
    12.42
    """
    tau = float(tau_ps)
    if not np.isfinite(tau) or tau <= 0:
        raise DomainError(f"lifetime must be positive, got {tau}")
    return HBAR_EV_PS / tau


def stage_delay(displacement_nm: ArrayLike) -> ArrayLike:
    """
    Interferometer delay in ps for a retroreflector displacement in nm.

    The beam passes the displaced arm twice, so ``t = 2 Δx / c``.
    """
    delay = 2.0 * np.asarray(displacement_nm, dtype=float) * 1e-9 / C_M_PER_S * 1e12
    return float(delay) if delay.ndim == 0 else delay
