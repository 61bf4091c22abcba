"""
First-order coherence from Michelson interferometry.

Piezo scans at fixed stage delay give one fringe visibility each; the
visibility decay versus delay is the Fourier transform of a Voigt line,
``exp(-t²/(2 t_G²)) · exp(-|t|/t_L)``, from which the Gaussian and
Lorentzian widths ``σ = ħ/t_G`` and ``γ = ħ/t_L`` follow.

Usage
-----
Quick start example:

    from cbr_tuning.coherence import fringe_visibility, visibility_trace_from_scans, fit_coherence

    trace = visibility_trace_from_scans(scans, wavelength_nm=784.0)
    coherence, result = fit_coherence(trace, tau_ps=53.0)
    print(coherence.f_V * 1e6, "ueV,", coherence.fourier_ratio, "x Fourier limit")
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from uncertainties import correlated_values

from .constants import HBAR_EV_PS, PIEZO_STEP_NM
from .conversion import natural_linewidth
from .exceptions import DataError, DomainError, FitError, ModelError, ValidationError
from .fitting import FitData, FitModel, FitResult, fit_linear, least_squares_fit, parameter_uncertainties
from .lineshapes import GAUSS_FWHM_FACTOR, voigt_fwhm

logger = logging.getLogger(__name__)

MIN_SCAN_SAMPLES = 8
MIN_TRACE_POINTS = 6
PERIOD_MISMATCH = 0.20
# Visibility below which the fringe period is not checked
PERIOD_CHECK_VISIBILITY = 0.05


@dataclass(frozen=True, eq=False)
class FringeScan:
    """
    Intensity versus piezo position at one coarse stage delay.

    Parameters
    ----------
    positions : array_like
        Piezo positions in nm (typically 20 nm steps).
    intensities : array_like
        Detected counts, non-negative.
    stage_delay : float
        Delay of the linear stage in ps.
    """

    positions: np.ndarray
    intensities: np.ndarray
    stage_delay: float = 0.0

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions, dtype=float)
        intensities = np.asarray(self.intensities, dtype=float)
        if positions.shape != intensities.shape or positions.ndim != 1:
            raise ValidationError("positions and intensities must be 1-D arrays of equal length")
        if positions.size < MIN_SCAN_SAMPLES:
            raise ValidationError(f"a fringe scan needs at least {MIN_SCAN_SAMPLES} samples, got {positions.size}")
        if not np.all(np.isfinite(intensities)) or np.any(intensities < 0):
            raise ValidationError("fringe intensities must be finite and non-negative")
        if not np.all(np.isfinite(positions)):
            raise ValidationError("piezo positions must be finite")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "intensities", intensities)
        object.__setattr__(self, "stage_delay", float(self.stage_delay))

    @property
    def coverage(self) -> float:
        """Scanned length including one step, in nm."""
        ordered = np.sort(self.positions)
        step = float(np.median(np.diff(ordered)))
        return float(ordered[-1] - ordered[0] + step)


@dataclass(frozen=True, eq=False)
class VisibilityTrace:
    """Fringe visibility ``ν ∈ [0, 1]`` versus delay in ps."""

    delays: np.ndarray
    visibilities: np.ndarray
    uncertainties: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        delays = np.asarray(self.delays, dtype=float)
        values = np.asarray(self.visibilities, dtype=float)
        errors = np.zeros_like(values) if self.uncertainties is None else np.asarray(self.uncertainties, dtype=float)
        if not (delays.shape == values.shape == errors.shape) or delays.ndim != 1:
            raise ValidationError("delays, visibilities and uncertainties must have equal length")
        if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
            raise ValidationError("visibilities must lie in [0, 1]")
        if np.any(errors < 0) or not np.all(np.isfinite(delays)):
            raise ValidationError("uncertainties must be non-negative and delays finite")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "visibilities", values)
        object.__setattr__(self, "uncertainties", errors)

    def __len__(self) -> int:
        return int(self.delays.size)


@dataclass(frozen=True)
class CoherenceResult:
    """
    Coherence times and the matching Voigt linewidths.

    Attributes
    ----------
    t_G, t_L : float
        Gaussian and Lorentzian coherence times in ps (``inf`` for a
        vanishing component).
    sigma, gamma : float
        ``ħ/t_G`` and ``ħ/t_L`` in eV.
    f_V : float
        Voigt FWHM in eV.
    fourier_ratio : float or None
        ``f_V / (ħ/τ)`` when a lifetime was supplied.
    errors : dict
        One-sigma errors keyed by field name.
    """

    t_G: float
    t_L: float
    sigma: float
    gamma: float
    f_V: float
    fourier_ratio: Optional[float] = None
    errors: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (self.t_G > 0 and self.t_L > 0):
            raise DomainError("coherence times must be positive")
        if not self.f_V > 0:
            raise DomainError("Voigt linewidth must be positive")

    @classmethod
    def from_times(cls, t_G: float, t_L: float, tau_ps: Optional[float] = None) -> "CoherenceResult":
        if not (t_G > 0 and t_L > 0):
            raise DomainError(f"coherence times must be positive, got {t_G} and {t_L}")
        sigma = HBAR_EV_PS / t_G
        gamma = HBAR_EV_PS / t_L
        f_v = voigt_fwhm(GAUSS_FWHM_FACTOR * sigma, 2.0 * gamma)
        ratio = None if tau_ps is None else fourier_limit_ratio(f_v, tau_ps)
        return cls(float(t_G), float(t_L), sigma, gamma, f_v, ratio)

    @classmethod
    def from_widths(cls, sigma: float, gamma: float, tau_ps: Optional[float] = None) -> "CoherenceResult":
        if sigma < 0 or gamma < 0:
            raise DomainError("Voigt widths must be non-negative")
        t_g = HBAR_EV_PS / sigma if sigma > 0 else math.inf
        t_l = HBAR_EV_PS / gamma if gamma > 0 else math.inf
        return cls.from_times(t_g, t_l, tau_ps)

    def to_widths(self) -> Tuple[float, float]:
        return self.sigma, self.gamma

    @property
    def f_G(self) -> float:
        return GAUSS_FWHM_FACTOR * self.sigma

    @property
    def f_L(self) -> float:
        return 2.0 * self.gamma

    def as_dict(self) -> Dict[str, Any]:
        return {
            "t_G_ps": self.t_G,
            "t_L_ps": self.t_L,
            "sigma_eV": self.sigma,
            "gamma_eV": self.gamma,
            "f_G_eV": self.f_G,
            "f_L_eV": self.f_L,
            "f_V_eV": self.f_V,
            "fourier_ratio": self.fourier_ratio,
            "errors": dict(self.errors),
        }


# ===================== FRINGE VISIBILITY =====================

def _harmonic_design(positions: np.ndarray, wavenumber: float) -> np.ndarray:
    phase = wavenumber * positions
    return np.column_stack([np.ones_like(positions), np.cos(phase), np.sin(phase)])


def _harmonic_curve(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return p[0] + p[1] * np.cos(p[3] * x) + p[2] * np.sin(p[3] * x)


def _fitted_wavenumber(positions: np.ndarray, intensities: np.ndarray, nominal: float) -> float:
    """Fringe wavenumber with a free period, from a coarse scan then a local fit."""
    trial = np.linspace(0.5 * nominal, 1.5 * nominal, 201)
    costs = []
    for k in trial:
        design = _harmonic_design(positions, k)
        coef, *_ = np.linalg.lstsq(design, intensities, rcond=None)
        costs.append(float(np.sum((design @ coef - intensities) ** 2)))
    best = float(trial[int(np.argmin(costs))])
    coef, *_ = np.linalg.lstsq(_harmonic_design(positions, best), intensities, rcond=None)
    model = FitModel.from_function(_harmonic_curve, names=("c0", "a", "b", "k"), lower=[-np.inf, -np.inf, -np.inf, 0.25 * nominal])
    try:
        result = least_squares_fit(model, FitData(positions, intensities), list(coef) + [best])
    except FitError:
        return best
    return float(result.params[3]) if result.converged else best


def fringe_visibility(scan: FringeScan, wavelength: float) -> Tuple[float, float]:
    """
    Visibility of one piezo scan from a cosine fit.

    ``I(x) = I0 (1 + ν cos(4πx/λ + φ))`` is fitted in its linear form
    ``c0 + a cos(4πx/λ) + b sin(4πx/λ)`` and ``ν = sqrt(a² + b²)/c0``,
    clamped to ``[0, 1]``.

    Parameters
    ----------
    scan : FringeScan
        Scan covering one to two fringe periods (``λ/2`` to ``λ``).
    wavelength : float
        Emission wavelength in nm.

    Returns
    -------
    tuple of float
        ``(ν, σ_ν)``.

    Raises
    ------
    DataError
        If ``I0 <= 0`` or the scan is shorter than one or longer than two
        fringe periods.
    ModelError
        If the fringe period in the data differs from ``λ/2`` by more than
        20 %.

    Examples
    --------
    >>> x = np.arange(30) * 20.0
    >>> nu, err = fringe_visibility(FringeScan(x, 1 + 0.5 * np.cos(4 * np.pi * x / 800)), 800.0)
    >>> round(nu, 6)
    0.5
    """
    if wavelength <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    period = 0.5 * wavelength
    coverage = scan.coverage
    if coverage < period * (1.0 - 1e-9):
        raise DataError(f"scan covers {coverage:.1f} nm, less than one fringe period ({period:.1f} nm)")
    if coverage > 2.0 * period * (1.0 + 1e-9):
        raise DataError(f"scan covers {coverage:.1f} nm, more than two fringe periods ({2 * period:.1f} nm)")

    wavenumber = 4.0 * math.pi / wavelength
    positions = scan.positions - scan.positions.min()
    design = _harmonic_design(positions, wavenumber)
    result = fit_linear(design, scan.intensities, names=("c0", "a", "b"))
    c0, a, b = (float(v) for v in result.params)
    if c0 <= 0:
        raise DataError(f"mean fringe intensity is not positive ({c0:.4g})")

    amplitude = math.hypot(a, b)
    visibility = amplitude / c0
    if visibility > PERIOD_CHECK_VISIBILITY:
        fitted = _fitted_wavenumber(positions, scan.intensities, wavenumber)
        if abs(fitted / wavenumber - 1.0) > PERIOD_MISMATCH:
            raise ModelError(
                f"fringe period {2 * math.pi / fitted:.1f} nm differs from lambda/2 = {period:.1f} nm by more than 20%"
            )

    covariance = result.covariance * result.reduced_chi2
    if amplitude > 0:
        c0_u, a_u, b_u = correlated_values([c0, a, b], covariance)
        error = float(((a_u**2 + b_u**2) ** 0.5 / c0_u).std_dev)
    else:
        error = math.sqrt(max(covariance[1, 1] + covariance[2, 2], 0.0)) / c0
    return float(min(max(visibility, 0.0), 1.0)), error


def visibility_trace_from_scans(scans: Sequence[FringeScan], wavelength: float) -> VisibilityTrace:
    """Visibility of each scan, ordered by stage delay."""
    ordered = sorted(scans, key=lambda s: s.stage_delay)
    values = [fringe_visibility(scan, wavelength) for scan in ordered]
    logger.info("Extracted visibilities from %d fringe scans", len(values))
    return VisibilityTrace(
        [scan.stage_delay for scan in ordered],
        [v for v, _ in values],
        [e for _, e in values],
    )


# ===================== COHERENCE FIT =====================

def visibility_model(t, t_G: float, t_L: float):
    """
    Fourier transform of a unit-area Voigt line.

    ``exp(-t²/(2 t_G²)) · exp(-|t|/t_L)``; either time may be ``inf``.

    Examples
    --------
    >>> float(visibility_model(0.0, 80.0, 150.0))
    1.0
    >>> round(float(visibility_model(80.0, np.inf, 80.0)), 6)
    0.367879
    """
    if not (t_G > 0 and t_L > 0):
        raise DomainError(f"coherence times must be positive, got {t_G} and {t_L}")
    t = np.asarray(t, dtype=float)
    return np.exp(-0.5 * (t / t_G) ** 2 - np.abs(t) / t_L)


def _rate_curve(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * p[0] * t * t - p[1] * np.abs(t))


def _rate_jacobian(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    value = _rate_curve(t, p)
    return np.column_stack([-0.5 * t * t * value, -np.abs(t) * value])


def fit_coherence(trace: VisibilityTrace, tau_ps: Optional[float] = None) -> Tuple[CoherenceResult, FitResult]:
    """
    Fit the Voigt transform to a visibility trace.

    The fit runs on the rates ``a = 1/t_G²`` and ``b = 1/t_L`` (both
    ``>= 0``) so that a pure Gaussian or pure Lorentzian line stays regular.
    Points are weighted by ``1/err²`` when errors are given.

    Parameters
    ----------
    trace : VisibilityTrace
        At least six delays including small delays and visibilities below 0.3.
    tau_ps : float, optional
        Radiative lifetime; sets ``fourier_ratio``.

    Raises
    ------
    DataError
        With fewer than six points.
    FitError
        If the trace carries no decay (all ``ν ≈ 1`` or all ``ν ≈ 0``) or
        the fit does not converge.
    """
    if len(trace) < MIN_TRACE_POINTS:
        raise DataError(f"a coherence fit needs at least {MIN_TRACE_POINTS} delays, got {len(trace)}")
    t = trace.delays
    nu = trace.visibilities
    if np.all(nu > 0.98) or np.all(nu < 0.02):
        raise FitError("visibility trace shows no decay")
    weights = None
    if np.all(trace.uncertainties > 0):
        weights = 1.0 / trace.uncertainties**2

    usable = (nu > 0.01) & (np.abs(t) > 0)
    design = np.column_stack([0.5 * t[usable] ** 2, np.abs(t[usable])])
    if usable.sum() >= 2:
        rates, *_ = np.linalg.lstsq(design, -np.log(nu[usable]), rcond=None)
    else:
        rates = np.array([0.0, 1.0 / np.ptp(t)])
    scale = 1.0 / max(np.max(np.abs(t)), 1e-12)
    init = np.maximum(rates, [1e-6 * scale**2, 1e-6 * scale])

    model = FitModel.from_function(_rate_curve, names=("inv_tG2", "inv_tL"), lower=[0.0, 0.0], jacobian=_rate_jacobian)
    result = least_squares_fit(model, FitData(t, nu, weights), init)
    if not result.converged:
        raise FitError(f"coherence fit did not converge: {result.message}", diagnostics=result)

    a, b = (float(v) for v in result.params)
    if a <= 0 and b <= 0:
        raise FitError("coherence fit found no decay", diagnostics=result)
    t_g = 1.0 / math.sqrt(a) if a > 0 else math.inf
    t_l = 1.0 / b if b > 0 else math.inf
    base = CoherenceResult.from_times(t_g, t_l, tau_ps)

    err_a, err_b = parameter_uncertainties(result)
    errors = {"gamma": HBAR_EV_PS * err_b}
    if a > 0:
        a_u, b_u = correlated_values([a, b], result.covariance * result.reduced_chi2)
        sigma_u = HBAR_EV_PS * a_u**0.5
        f_v_u = 0.5346 * 2.0 * HBAR_EV_PS * b_u + ((0.2166 * (2.0 * HBAR_EV_PS * b_u) ** 2) + (GAUSS_FWHM_FACTOR * sigma_u) ** 2) ** 0.5
        errors["sigma"] = float(sigma_u.std_dev)
        errors["t_G"] = 0.5 * err_a / a**1.5
        errors["f_V"] = float(f_v_u.std_dev)
    else:
        errors["sigma"] = HBAR_EV_PS * math.sqrt(err_a)
        errors["t_G"] = math.inf
        errors["f_V"] = 0.5346 * 2.0 * HBAR_EV_PS * err_b + math.sqrt(0.2166) * 2.0 * HBAR_EV_PS * err_b
    errors["t_L"] = err_b / b**2 if b > 0 else math.inf
    if tau_ps is not None:
        errors["fourier_ratio"] = errors["f_V"] / natural_linewidth(tau_ps)

    coherence = CoherenceResult(base.t_G, base.t_L, base.sigma, base.gamma, base.f_V, base.fourier_ratio, errors)
    logger.info("Coherence fit: t_G = %.1f ps, t_L = %.1f ps, f_V = %.2f ueV", t_g, t_l, base.f_V * 1e6)
    return coherence, result


def fourier_limit_ratio(f_V: float, tau_ps: float) -> float:
    """
    Linewidth in units of the natural linewidth ``ħ/τ``.

    Examples
    --------
    >>> round(fourier_limit_ratio(27.3e-6, 53.0), 2)
    2.2
    """
    if not np.isfinite(f_V) or f_V <= 0:
        raise DomainError(f"linewidth must be positive, got {f_V}")
    return float(f_V) / natural_linewidth(tau_ps)


# ===================== SYNTHETIC DATA =====================

def simulate_fringe_scan(
    visibility: float,
    wavelength: float,
    stage_delay: float = 0.0,
    n_steps: int = 30,
    step: float = PIEZO_STEP_NM,
    mean_counts: float = 1000.0,
    phase: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> FringeScan:
    """Piezo scan ``I0 (1 + ν cos(4πx/λ + φ))``, Poisson sampled when ``rng`` is given."""
    positions = step * np.arange(n_steps)
    expected = mean_counts * (1.0 + visibility * np.cos(4.0 * math.pi * positions / wavelength + phase))
    counts = expected if rng is None else rng.poisson(np.maximum(expected, 0.0)).astype(float)
    return FringeScan(positions, counts, stage_delay)


def simulate_visibility_trace(
    t_G: float,
    t_L: float,
    delays,
    noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> VisibilityTrace:
    """Visibilities from :func:`visibility_model` with additive Gaussian noise ``noise``."""
    delays = np.asarray(delays, dtype=float)
    values = visibility_model(delays, t_G, t_L)
    if rng is not None and noise > 0:
        values = values + rng.normal(0.0, noise, size=values.size)
    errors = np.full(delays.size, noise) if noise > 0 else None
    return VisibilityTrace(delays, np.clip(values, 0.0, 1.0), errors)
