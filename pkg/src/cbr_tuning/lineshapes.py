"""
Analytic lineshapes and resonance fitting.

Fano, Lorentzian, Gaussian and Voigt profiles, the Fano fit used for cavity
mode reflectance dips, quality factors and the Voigt width approximation.

Usage
-----
Quick start example:

    from cbr_tuning.lineshapes import FanoParams, fano_value, fit_fano, quality_factor

    params, result = fit_fano(spectrum)             # spectrum in eV or nm
    q_factor = quality_factor(params.E_c, params.gamma_c)
    report = fano_report(params, result)
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import wofz

from .constants import HC_EV_NM, Q_FIT_RANGE_SYSTEMATIC
from .exceptions import DomainError, FitError, FitInitError, ParameterError
from .fitting import FitData, FitModel, FitResult, least_squares_fit, parameter_uncertainties
from .spectra import Spectrum

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
GAUSS_FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Default fit window half-width in units of the initial linewidth estimate
FANO_WINDOW_WIDTHS = 5.0


@dataclass(frozen=True)
class FanoParams:
    """
    Parameters of the Fano lineshape ``B + A (q + Ω)² / (1 + Ω²)``.

    Attributes
    ----------
    A : float
        Amplitude (intensity units).
    B : float
        Baseline (intensity units).
    q : float
        Asymmetry parameter.
    E_c : float
        Resonance energy in eV.
    gamma_c : float
        Linewidth (FWHM) in eV, positive.
    """

    A: float
    B: float
    q: float
    E_c: float
    gamma_c: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.A) and np.isfinite(self.B) and np.isfinite(self.q)):
            raise ParameterError("Fano A, B and q must be finite")
        if not np.isfinite(self.E_c):
            raise ParameterError("Fano E_c must be finite")
        if not np.isfinite(self.gamma_c) or self.gamma_c <= 0:
            raise ParameterError(f"Fano linewidth must be positive, got {self.gamma_c}")

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.q, self.E_c, self.gamma_c])

    @classmethod
    def from_array(cls, values) -> "FanoParams":
        return cls(*(float(v) for v in values))

    @property
    def quality_factor(self) -> float:
        return quality_factor(self.E_c, self.gamma_c)


@dataclass(frozen=True)
class VoigtParams:
    """Gaussian standard deviation ``sigma`` and Lorentzian half-width ``gamma`` in eV."""

    sigma: float
    gamma: float

    def __post_init__(self) -> None:
        if self.sigma < 0 or self.gamma < 0:
            raise ParameterError("Voigt widths must be non-negative")
        if self.sigma == 0 and self.gamma == 0:
            raise ParameterError("Voigt widths cannot both be zero")

    @property
    def f_G(self) -> float:
        return gaussian_fwhm(self.sigma)

    @property
    def f_L(self) -> float:
        return lorentzian_fwhm(self.gamma)


# ===================== PROFILES =====================

def fano_value(energy, params: FanoParams):
    """
    Evaluate the Fano lineshape.

    ``Ω = 2 (E - E_c) / Γ_c`` and ``I(E) = B + A (q + Ω)² / (1 + Ω²)``.

    Examples
    --------
    >>> p = FanoParams(A=0.5, B=1.0, q=0.0, E_c=1.55, gamma_c=0.01)
    >>> float(fano_value(1.55, p))
    1.0
    """
    omega = 2.0 * (np.asarray(energy, dtype=float) - params.E_c) / params.gamma_c
    return params.B + params.A * (params.q + omega) ** 2 / (1.0 + omega**2)


def _fano_curve(energy: np.ndarray, p: np.ndarray) -> np.ndarray:
    amplitude, baseline, q, center, width = p
    omega = 2.0 * (energy - center) / width
    return baseline + amplitude * (q + omega) ** 2 / (1.0 + omega**2)


def fano_jacobian(energy, params) -> np.ndarray:
    """
    Analytic derivatives of the Fano lineshape.

    Columns are ordered ``(A, B, q, E_c, Γ_c)``.
    """
    amplitude, _, q, center, width = params.as_array() if isinstance(params, FanoParams) else params
    energy = np.asarray(energy, dtype=float)
    omega = 2.0 * (energy - center) / width
    denom = 1.0 + omega**2
    shape = (q + omega) ** 2 / denom
    d_omega = 2.0 * amplitude * (q + omega) * (1.0 - q * omega) / denom**2
    return np.column_stack(
        [
            shape,
            np.ones_like(energy),
            2.0 * amplitude * (q + omega) / denom,
            d_omega * (-2.0 / width),
            d_omega * (-omega / width),
        ]
    )


def lorentzian_value(x, center: float, fwhm: float, peak: float = 1.0, baseline: float = 0.0):
    """Peak-normalised Lorentzian ``baseline + peak (Γ/2)² / ((x - c)² + (Γ/2)²)``."""
    half = 0.5 * fwhm
    return baseline + peak * half**2 / ((np.asarray(x, dtype=float) - center) ** 2 + half**2)


def lorentzian_density(x, center: float, gamma: float):
    """Unit-area Lorentzian with half-width ``gamma``."""
    return gamma / (math.pi * ((np.asarray(x, dtype=float) - center) ** 2 + gamma**2))


def gaussian_density(x, center: float, sigma: float):
    """Unit-area Gaussian with standard deviation ``sigma``."""
    u = (np.asarray(x, dtype=float) - center) / sigma
    return np.exp(-0.5 * u * u) / (sigma * SQRT_2PI)


def gaussian_fwhm(sigma: float) -> float:
    """``f_G = 2 σ √(2 ln 2)``."""
    return GAUSS_FWHM_FACTOR * float(sigma)


def lorentzian_fwhm(gamma: float) -> float:
    """``f_L = 2 γ``."""
    return 2.0 * float(gamma)


def voigt_value(energy, center: float, params: VoigtParams):
    """
    Voigt density, the convolution of a unit-area Gaussian and Lorentzian.

    Evaluated through the Faddeeva function ``w(z)`` as
    ``Re w((x + iγ) / (σ√2)) / (σ√(2π))``; the pure Gaussian and pure
    Lorentzian limits are evaluated in closed form.
    """
    x = np.asarray(energy, dtype=float) - float(center)
    if params.sigma == 0:
        return lorentzian_density(x, 0.0, params.gamma)
    if params.gamma == 0:
        return gaussian_density(x, 0.0, params.sigma)
    z = (x + 1j * params.gamma) / (params.sigma * math.sqrt(2.0))
    return np.real(wofz(z)) / (params.sigma * SQRT_2PI)


def voigt_fwhm(f_G: float, f_L: float) -> float:
    """
    Approximate Voigt FWHM ``0.5346 f_L + √(0.2166 f_L² + f_G²)``.

    Parameters
    ----------
    f_G, f_L : float
        Gaussian and Lorentzian FWHM (same unit), non-negative.

    Raises
    ------
    DomainError
        If a width is negative or both are zero.

    Examples
    --------
    >>> voigt_fwhm(1.0, 0.0)
    1.0
    """
    f_g = float(f_G)
    f_l = float(f_L)
    if f_g < 0 or f_l < 0 or not (np.isfinite(f_g) and np.isfinite(f_l)):
        raise DomainError("Voigt component widths must be finite and non-negative")
    if f_g == 0 and f_l == 0:
        raise DomainError("Voigt component widths cannot both be zero")
    return 0.5346 * f_l + math.sqrt(0.2166 * f_l * f_l + f_g * f_g)


def voigt_fwhm_numeric(params: VoigtParams) -> float:
    """Full width at half maximum of :func:`voigt_value` located by root finding."""
    half = 0.5 * float(voigt_value(0.0, 0.0, params))
    upper = params.f_G + params.f_L
    while float(voigt_value(upper, 0.0, params)) > half:
        upper *= 2.0
    root = brentq(lambda x: float(voigt_value(x, 0.0, params)) - half, 0.0, upper, xtol=1e-15 * upper, rtol=1e-14)
    return 2.0 * root


# ===================== QUALITY FACTOR =====================

def quality_factor(E_c: float, gamma_c: float) -> float:
    """
    Quality factor ``Q = E_c / Γ_c``.

    Raises
    ------
    DomainError
        If ``Γ_c <= 0``.

    Examples
    --------
    >>> round(quality_factor(1.55, 0.010), 6)
    155.0
    """
    if not np.isfinite(gamma_c) or gamma_c <= 0:
        raise DomainError(f"linewidth must be positive, got {gamma_c}")
    return float(E_c) / float(gamma_c)


def quality_factor_with_systematics(
    q_value: float, q_error: float, systematic: float = Q_FIT_RANGE_SYSTEMATIC
) -> Tuple[float, float]:
    """Combine the statistical Q error with the fit-range systematic in quadrature."""
    return float(q_value), math.hypot(float(q_error), float(systematic))


def quality_factor_error(params: FanoParams, result: FitResult) -> float:
    """Propagated one-sigma error of Q from the Fano fit covariance."""
    errors = parameter_uncertainties(result)
    cov = result.covariance * result.reduced_chi2
    grad = np.zeros(5)
    grad[3] = 1.0 / params.gamma_c
    grad[4] = -params.E_c / params.gamma_c**2
    variance = float(grad @ cov @ grad)
    if variance < 0:
        variance = (grad[3] * errors[3]) ** 2 + (grad[4] * errors[4]) ** 2
    return math.sqrt(variance)


# ===================== FANO FIT =====================

def _half_depth_width(energy: np.ndarray, intensity: np.ndarray, index: int, level: float) -> Optional[float]:
    """Width of the dip around ``index`` where the intensity crosses ``level``."""

    def crossing(direction: int) -> Optional[float]:
        i = index
        while 0 <= i + direction < energy.size:
            j = i + direction
            if intensity[j] >= level:
                span = intensity[j] - intensity[i]
                frac = 0.0 if span == 0 else (level - intensity[i]) / span
                return float(energy[i] + frac * (energy[j] - energy[i]))
            i = j
        return None

    left = crossing(-1)
    right = crossing(+1)
    center = float(energy[index])
    if left is not None and right is not None:
        return right - left
    if left is not None:
        return 2.0 * (center - left)
    if right is not None:
        return 2.0 * (right - center)
    return None


def _edge_mean(intensity: np.ndarray) -> float:
    n_edge = max(1, intensity.size // 20)
    return float(np.mean(np.concatenate([intensity[:n_edge], intensity[-n_edge:]])))


def fano_initial_guess(energy: np.ndarray, intensity: np.ndarray) -> FanoParams:
    """
    Initial Fano parameters for a dip.

    ``E_c`` at the intensity minimum, ``Γ_c`` from the dip width at half
    depth, ``q = 0``, ``B + A`` from the window-edge mean and ``B`` at the
    minimum (the ``q = 0`` dip bottom).

    Raises
    ------
    FitInitError
        If the minimum lies on the window edge or the dip has no depth.
    """
    index = int(np.argmin(intensity))
    if index == 0 or index == intensity.size - 1:
        raise FitInitError("no local minimum inside the fit window")
    bottom = float(intensity[index])
    edge = _edge_mean(intensity)
    depth = edge - bottom
    if depth <= 0:
        raise FitInitError("spectrum shows no dip inside the fit window")
    width = _half_depth_width(energy, intensity, index, bottom + 0.5 * depth)
    if width is None or width <= 0:
        width = 0.25 * float(energy[-1] - energy[0])
    return FanoParams(A=depth, B=bottom, q=0.0, E_c=float(energy[index]), gamma_c=width)


def fit_fano(
    spectrum: Spectrum,
    window: Optional[Tuple[float, float]] = None,
    weights: Optional[np.ndarray] = None,
) -> Tuple[FanoParams, FitResult]:
    """
    Fit a Fano lineshape to a reflectance dip.

    Parameters
    ----------
    spectrum : Spectrum
        Reflectance spectrum on a wavelength or energy axis; wavelength data
        are converted to energy first.
    window : tuple of float, optional
        Energy range ``(lower, upper)`` in eV. Defaults to ±5 initial
        linewidths around the dip minimum, clipped to the axis.
    weights : ndarray, optional
        Per-sample weights on the energy axis; unweighted by default.

    Returns
    -------
    FanoParams
        Best-fit parameters.
    FitResult
        Fit diagnostics; ``metadata["window"]`` holds the energy window used.

    Raises
    ------
    ParameterError
        If ``window`` is empty or outside the spectral axis.
    FitInitError
        If no dip minimum lies inside the window.
    FitError
        If the fit does not converge or ends on the window edge; the
        partial result is attached as ``diagnostics``.

    Examples
    --------
    >>> params, result = fit_fano(spectrum)                 # doctest: +SKIP
    >>> params.E_c, params.quality_factor                   # doctest: +SKIP
    (1.5478, 151.2)
    """
    data = spectrum.to_energy()
    energy = data.axis
    intensity = data.intensity
    all_weights = None if weights is None else np.asarray(weights, dtype=float)
    if all_weights is not None:
        if all_weights.size != energy.size:
            raise ParameterError("weights must match the spectrum length")
        first = spectrum.axis[0] if spectrum.axis_kind is data.axis_kind else HC_EV_NM / spectrum.axis[0]
        if first > energy[0]:
            all_weights = all_weights[::-1]
    lo_axis, hi_axis = float(energy[0]), float(energy[-1])

    if window is not None:
        lower, upper = float(window[0]), float(window[1])
        if not lower < upper:
            raise ParameterError(f"fit window [{lower}, {upper}] is empty")
        if lower < lo_axis or upper > hi_axis:
            raise ParameterError(
                f"fit window [{lower}, {upper}] eV lies outside the spectral axis [{lo_axis}, {hi_axis}] eV"
            )
        mask = (energy >= lower) & (energy <= upper)
        if mask.sum() < 6:
            raise FitInitError("fit window contains fewer than six samples")
        guess = fano_initial_guess(energy[mask], intensity[mask])
    else:
        guess = fano_initial_guess(energy, intensity)
        lower = max(lo_axis, guess.E_c - FANO_WINDOW_WIDTHS * guess.gamma_c)
        upper = min(hi_axis, guess.E_c + FANO_WINDOW_WIDTHS * guess.gamma_c)
        mask = (energy >= lower) & (energy <= upper)
        if mask.sum() < 6:
            raise FitInitError("default fit window contains fewer than six samples")
        windowed = intensity[mask]
        edge = _edge_mean(windowed)
        guess = FanoParams(A=max(edge - guess.B, 1e-12), B=guess.B, q=0.0, E_c=guess.E_c, gamma_c=guess.gamma_c)

    logger.info("Fano fit window: %.6f - %.6f eV (%d samples)", lower, upper, int(mask.sum()))

    fit_data = FitData(energy[mask], intensity[mask], None if all_weights is None else all_weights[mask])
    model = FitModel.from_function(
        _fano_curve,
        names=("A", "B", "q", "E_c", "gamma_c"),
        lower=[-np.inf, -np.inf, -np.inf, lower, 1e-9 * guess.gamma_c],
        upper=[np.inf, np.inf, np.inf, upper, 100.0 * (upper - lower)],
        jacobian=fano_jacobian,
    )
    init = guess.as_array()
    init[4] = min(init[4], 100.0 * (upper - lower))
    result = least_squares_fit(model, fit_data, init)
    result.metadata["window"] = (float(lower), float(upper))
    if not result.converged:
        raise FitError(f"Fano fit did not converge: {result.message}", diagnostics=result)
    params = FanoParams.from_array(result.params)
    if params.E_c <= lower or params.E_c >= upper:
        raise FitError("fitted resonance energy lies on the fit window edge", diagnostics=result)
    return params, result


def fano_report(params: FanoParams, result: FitResult) -> Dict[str, Any]:
    """
    JSON-ready record of a Fano fit.

    Keys: ``model``, ``params``, ``uncertainties``, ``reduced_chi2``,
    ``window``, ``E_c_eV``, ``E_c_nm``, ``Q`` (plus ``Q_err`` and the
    linewidth in nm).
    """
    errors = parameter_uncertainties(result)
    q_value = params.quality_factor
    q_err = quality_factor_error(params, result)
    _, q_total = quality_factor_with_systematics(q_value, q_err)
    window = result.metadata.get("window")
    return {
        "model": "fano",
        "params": asdict(params),
        "uncertainties": {name: float(err) for name, err in zip(result.names, errors)},
        "reduced_chi2": float(result.reduced_chi2),
        "window": None if window is None else [float(window[0]), float(window[1])],
        "E_c_eV": float(params.E_c),
        "E_c_nm": float(HC_EV_NM / params.E_c),
        "gamma_c_nm": float(HC_EV_NM * params.gamma_c / params.E_c**2),
        "Q": float(q_value),
        "Q_err": float(q_err),
        "Q_err_total": float(q_total),
    }
