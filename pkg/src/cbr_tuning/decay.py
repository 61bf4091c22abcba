"""
Lifetime analysis of time-correlated single-photon-counting histograms.

Exponential decay models are convolved with a measured instrument response
function (IRF) and fitted with Poisson weights. Lifetimes feed the Purcell
factor ``F_P = τ_ref / τ_cav`` and its Lorentzian dependence on detuning.

Usage
-----
Quick start example:

    from cbr_tuning.decay import DecayKind, fit_lifetime, purcell_factor

    model, result = fit_lifetime(histogram, irf, DecayKind.SINGLE_EXP)
    tau = model.taus[0]
    f_p, f_p_err = purcell_factor(230.0, tau, tau_cav_err=result.uncertainties()[1])

Model conventions
-----------------
Amplitudes are onset rates in counts/ps, so the area of one component is
``amplitude * tau``. Model counts are integrated over each histogram bin. The
IRF is stored as per-bin weights with unit sum and its lag is measured from
its peak bin; ``t0`` is therefore the onset as seen through the IRF peak.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import convolve
from scipy.special import erf
from uncertainties import ufloat

from .constants import BULK_TAU_X_PS
from .conversion import natural_linewidth
from .exceptions import (
    DataError,
    DomainError,
    FitError,
    FitInitError,
    ParameterError,
    ShapeError,
    ValidationError,
)
from .fitting import FitData, FitModel, FitResult, least_squares_fit, parameter_uncertainties
from .lineshapes import lorentzian_value
from .utils import uniform_spacing

logger = logging.getLogger(__name__)

# Oversampling of the time grid when a lifetime is shorter than this many bins
OVERSAMPLE_BELOW_BINS = 3.0
OVERSAMPLE_FACTOR = 4


class DecayKind(str, Enum):
    """Decay model family."""

    SINGLE_EXP = "single_exp"
    BI_EXP = "bi_exp"

    @property
    def n_components(self) -> int:
        return 1 if self is DecayKind.SINGLE_EXP else 2

    @classmethod
    def parse(cls, text: str) -> "DecayKind":
        """
        Accept ``single_exp``/``single``/``x`` or ``bi_exp``/``bi``/``xx``.

        ``x`` selects the single exponential, ``xx`` the two-lifetime model
        of the biexciton-exciton cascade.
        """
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        if key in ("single_exp", "single", "x", "exp"):
            return cls.SINGLE_EXP
        if key in ("bi_exp", "bi", "xx", "biexp"):
            return cls.BI_EXP
        raise ParameterError(f"unknown decay model: {text!r}")


@dataclass(frozen=True, eq=False)
class DecayHistogram:
    """
    Photon arrival-time histogram.

    Parameters
    ----------
    bin_centers : array_like
        Uniformly spaced bin centres in ps.
    counts : array_like
        Non-negative counts per bin. Files hold integers; synthetic expected
        counts may be fractional.
    bin_width : float, optional
        Bin width in ps; derived from the centres when omitted.
    """

    bin_centers: np.ndarray
    counts: np.ndarray
    bin_width: Optional[float] = None
    label: str = ""

    def __post_init__(self) -> None:
        centers = np.asarray(self.bin_centers, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if centers.shape != counts.shape:
            raise ValidationError("bin centres and counts differ in length")
        width = uniform_spacing(centers, "histogram")
        if self.bin_width is not None and not math.isclose(float(self.bin_width), width, rel_tol=1e-6):
            raise ValidationError(f"declared bin width {self.bin_width} ps differs from bin spacing {width} ps")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValidationError("counts must be finite and non-negative")
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "bin_width", float(self.bin_width) if self.bin_width is not None else width)

    def __len__(self) -> int:
        return int(self.counts.size)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def span(self) -> float:
        return float(self.bin_centers[-1] - self.bin_centers[0] + self.bin_width)

    def shifted(self, dt: float) -> "DecayHistogram":
        return DecayHistogram(self.bin_centers + dt, self.counts, self.bin_width, self.label)


@dataclass(frozen=True, eq=False)
class Irf:
    """
    Instrument response function as per-bin weights with unit sum.

    Raises
    ------
    ValidationError
        If the weights are negative or sum to zero.
    """

    bin_centers: np.ndarray
    weights: np.ndarray
    bin_width: Optional[float] = None

    def __post_init__(self) -> None:
        centers = np.asarray(self.bin_centers, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if centers.shape != weights.shape:
            raise ValidationError("IRF bin centres and weights differ in length")
        width = uniform_spacing(centers, "IRF")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValidationError("IRF weights must be finite and non-negative")
        total = float(weights.sum())
        if total <= 0:
            raise ValidationError("IRF is empty")
        object.__setattr__(self, "bin_centers", centers)
        object.__setattr__(self, "weights", weights / total)
        object.__setattr__(self, "bin_width", float(self.bin_width) if self.bin_width is not None else width)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.weights))

    @property
    def peak_time(self) -> float:
        return float(self.bin_centers[self.peak_index])

    def fwhm(self) -> float:
        """Width of the weights above half their maximum, in ps."""
        above = np.flatnonzero(self.weights >= 0.5 * self.weights.max())
        return float((above[-1] - above[0] + 1) * self.bin_width)

    def shifted(self, dt: float) -> "Irf":
        return Irf(self.bin_centers + dt, self.weights, self.bin_width)

    @classmethod
    def from_counts(cls, bin_centers, counts) -> "Irf":
        """Normalise a measured IRF histogram."""
        return cls(bin_centers, counts)

    @classmethod
    def gaussian(cls, fwhm: float, bin_centers, center: Optional[float] = None) -> "Irf":
        """
        Gaussian IRF integrated over each bin.

        The weights are truncated at ±7σ; ``center`` defaults to the bin
        centre nearest the middle of the grid.
        """
        centers = np.asarray(bin_centers, dtype=float)
        width = uniform_spacing(centers, "IRF")
        if fwhm <= 0:
            raise ParameterError(f"IRF FWHM must be positive, got {fwhm}")
        if center is None:
            center = float(centers[centers.size // 2])
        sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        upper = erf((centers + 0.5 * width - center) / (sigma * math.sqrt(2.0)))
        lower = erf((centers - 0.5 * width - center) / (sigma * math.sqrt(2.0)))
        weights = 0.5 * (upper - lower)
        weights[np.abs(centers - center) > 7.0 * sigma + width] = 0.0
        return cls(centers, weights, width)

    @classmethod
    def delta(cls, bin_centers, index: Optional[int] = None) -> "Irf":
        centers = np.asarray(bin_centers, dtype=float)
        weights = np.zeros_like(centers)
        weights[centers.size // 2 if index is None else int(index)] = 1.0
        return cls(centers, weights)


@dataclass(frozen=True)
class DecayModel:
    """
    Causal exponential decay with a shared onset and constant background.

    ``single_exp``: ``A exp(-(t - t0)/τ)``;
    ``bi_exp``: ``B exp(-(t - t0)/τ_X) + C exp(-(t - t0)/τ_XX)``.
    """

    kind: DecayKind
    amplitudes: Tuple[float, ...]
    taus: Tuple[float, ...]
    t0: float = 0.0
    background: float = 0.0

    def __post_init__(self) -> None:
        kind = DecayKind.parse(self.kind)
        amplitudes = tuple(float(a) for a in self.amplitudes)
        taus = tuple(float(t) for t in self.taus)
        if len(amplitudes) != kind.n_components or len(taus) != kind.n_components:
            raise ParameterError(f"{kind.value} needs {kind.n_components} amplitude/lifetime pairs")
        if any(not np.isfinite(t) or t <= 0 for t in taus):
            raise ParameterError(f"lifetimes must be positive, got {taus}")
        if any(not np.isfinite(a) or a < 0 for a in amplitudes):
            raise ParameterError(f"amplitudes must be non-negative, got {amplitudes}")
        if self.background < 0:
            raise ParameterError("background must be non-negative")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "taus", taus)

    @classmethod
    def single(cls, amplitude: float, tau: float, t0: float = 0.0, background: float = 0.0) -> "DecayModel":
        return cls(DecayKind.SINGLE_EXP, (amplitude,), (tau,), t0, background)

    @classmethod
    def bi(cls, b: float, tau_x: float, c: float, tau_xx: float, t0: float = 0.0, background: float = 0.0) -> "DecayModel":
        return cls(DecayKind.BI_EXP, (b, c), (tau_x, tau_xx), t0, background)

    @property
    def area(self) -> float:
        """Total decay counts ``Σ a τ`` (background excluded)."""
        return float(sum(a * t for a, t in zip(self.amplitudes, self.taus)))

    def as_vector(self) -> np.ndarray:
        pairs = [value for pair in zip(self.amplitudes, self.taus) for value in pair]
        return np.array(pairs + [self.t0, self.background])

    @classmethod
    def from_vector(cls, kind: DecayKind, values: Sequence[float]) -> "DecayModel":
        values = [float(v) for v in values]
        n = DecayKind.parse(kind).n_components
        amplitudes = tuple(values[0 : 2 * n : 2])
        taus = tuple(values[1 : 2 * n : 2])
        return cls(kind, amplitudes, taus, values[2 * n], values[2 * n + 1])

    def rate(self, t) -> np.ndarray:
        """Continuous decay rate in counts/ps (without background)."""
        dt = np.asarray(t, dtype=float) - self.t0
        out = np.zeros_like(dt)
        causal = dt >= 0
        for amplitude, tau in zip(self.amplitudes, self.taus):
            out[causal] += amplitude * np.exp(-dt[causal] / tau)
        return out

    def bin_counts(self, bin_centers, bin_width: float) -> np.ndarray:
        """Decay counts integrated over each bin (without background)."""
        return _integrated_decay(self.amplitudes, self.taus, self.t0, np.asarray(bin_centers, dtype=float), bin_width)


def _integrated_decay(amplitudes, taus, t0: float, centers: np.ndarray, width: float) -> np.ndarray:
    start = np.maximum(centers - 0.5 * width, t0) - t0
    stop = centers + 0.5 * width - t0
    active = stop > 0
    out = np.zeros_like(centers)
    for amplitude, tau in zip(amplitudes, taus):
        out[active] += amplitude * tau * (np.exp(-start[active] / tau) - np.exp(-stop[active] / tau))
    return out


def _trimmed_irf(irf: Irf) -> Tuple[np.ndarray, int]:
    nonzero = np.flatnonzero(irf.weights > 0)
    lo, hi = int(nonzero[0]), int(nonzero[-1])
    return irf.weights[lo : hi + 1], irf.peak_index - lo


def _convolve_on_grid(
    amplitudes, taus, t0: float, centers: np.ndarray, width: float, weights: np.ndarray, peak: int
) -> np.ndarray:
    n_weights = weights.size
    before = n_weights - 1 - peak
    extended = centers[0] + width * np.arange(-before, centers.size + peak)
    model = _integrated_decay(amplitudes, taus, t0, extended, width)
    return convolve(model, weights, mode="valid", method="auto")


def _oversampled_irf(weights: np.ndarray, peak: int, factor: int) -> Tuple[np.ndarray, int]:
    lags = np.arange(weights.size) - peak
    lo = lags[0] * factor - (factor - 1)
    hi = lags[-1] * factor + (factor - 1)
    fine_lags = np.arange(lo, hi + 1) / factor
    fine = np.interp(fine_lags, lags, weights, left=0.0, right=0.0)
    if fine.sum() <= 0:
        fine = np.zeros_like(fine_lags)
        fine[-lo] = 1.0
    return fine / fine.sum(), int(-lo)


def convolve_model_with_irf(model: DecayModel, irf: Irf, grid) -> np.ndarray:
    """
    Expected counts of an IRF-broadened decay on a histogram grid.

    Parameters
    ----------
    model : DecayModel
        Decay model; its background is added per bin after convolution.
    irf : Irf
        Instrument response with the same bin width as ``grid``.
    grid : array_like or DecayHistogram
        Uniform bin centres in ps.

    Returns
    -------
    ndarray
        Expected counts per bin. With a unit-sum IRF the decay area is
        conserved whenever the grid holds the whole decay.

    Raises
    ------
    ShapeError
        If the IRF bin width differs from the grid's.

    Notes
    -----
    The convolution runs at histogram resolution. When a lifetime is shorter
    than three bins the grid is oversampled four times and the IRF linearly
    interpolated onto the fine lags.
    """
    centers = grid.bin_centers if isinstance(grid, DecayHistogram) else np.asarray(grid, dtype=float)
    width = uniform_spacing(centers, "grid")
    if not math.isclose(width, irf.bin_width, rel_tol=1e-6):
        raise ShapeError(f"IRF bin width {irf.bin_width} ps differs from histogram bin width {width} ps")
    if min(model.taus) < OVERSAMPLE_BELOW_BINS * width:
        logger.warning("lifetime below %.0f bins; oversampling the convolution x%d", OVERSAMPLE_BELOW_BINS, OVERSAMPLE_FACTOR)
    return _expected_counts(model.amplitudes, model.taus, model.t0, model.background, irf, centers, width)


def _expected_counts(amplitudes, taus, t0: float, background: float, irf: Irf, centers: np.ndarray, width: float) -> np.ndarray:
    weights, peak = _trimmed_irf(irf)
    if min(taus) < OVERSAMPLE_BELOW_BINS * width:
        factor = OVERSAMPLE_FACTOR
        fine_width = width / factor
        offsets = (np.arange(factor) - 0.5 * (factor - 1)) * fine_width
        fine_centers = (centers[:, None] + offsets[None, :]).ravel()
        fine_weights, fine_peak = _oversampled_irf(weights, peak, factor)
        fine = _convolve_on_grid(amplitudes, taus, t0, fine_centers, fine_width, fine_weights, fine_peak)
        decay = fine.reshape(centers.size, factor).sum(axis=1)
    else:
        decay = _convolve_on_grid(amplitudes, taus, t0, centers, width, weights, peak)
    return decay + background


# ===================== LIFETIME FIT =====================

def _initial_model(hist: DecayHistogram, irf: Irf, kind: DecayKind) -> DecayModel:
    counts = hist.counts
    times = hist.bin_centers
    width = hist.bin_width
    peak_index = int(np.argmax(counts))
    peak = float(counts[peak_index])
    if peak <= 0:
        raise FitInitError("histogram is empty")

    irf_bins = max(1, int(round(irf.fwhm() / width)))
    pre_rise = counts[: max(0, peak_index - 2 * irf_bins)]
    background = float(np.mean(pre_rise)) if pre_rise.size else 0.0
    if peak - background <= 3.0 * math.sqrt(max(background, 1.0)):
        raise FitInitError("decay peak does not rise above the background")

    tail_start = min(counts.size - 1, peak_index + irf_bins)
    tail = np.arange(tail_start, counts.size)
    signal = counts[tail] - background
    usable = tail[signal > max(3.0 * math.sqrt(max(background, 1.0)), 0.02 * (peak - background))]
    tau = 0.1 * hist.span
    if usable.size >= 3:
        y = np.log(counts[usable] - background)
        slope, _ = np.polyfit(times[usable], y, 1, w=np.sqrt(counts[usable] - background))
        if slope < 0:
            tau = -1.0 / slope
    tau = float(np.clip(tau, width, 10.0 * hist.span))

    if kind is DecayKind.SINGLE_EXP:
        unit = DecayModel.single(1.0, tau, float(times[peak_index]), 0.0)
    else:
        unit = DecayModel.bi(0.5, tau, 0.5, 0.5 * tau, float(times[peak_index]), 0.0)
    shape = convolve_model_with_irf(unit, irf, times)
    scale = (peak - background) / max(float(shape.max()), 1e-300)
    amplitudes = tuple(a * scale for a in unit.amplitudes)
    return DecayModel(kind, amplitudes, unit.taus, unit.t0, max(background, 0.0))


def fit_lifetime(hist: DecayHistogram, irf: Irf, kind="single_exp") -> Tuple[DecayModel, FitResult]:
    """
    Fit an IRF-convolved decay model to a photon arrival histogram.

    Parameters
    ----------
    hist : DecayHistogram
        Measured histogram.
    irf : Irf
        Instrument response with the histogram's bin width.
    kind : DecayKind or str
        ``single_exp`` or ``bi_exp``.

    Returns
    -------
    DecayModel
        Best-fit model; for ``bi_exp`` the longer lifetime is ``τ_X``.
    FitResult
        Fit diagnostics with parameters ordered like
        :meth:`DecayModel.as_vector`.

    Raises
    ------
    FitInitError
        If the histogram has no decay above the background.
    FitError
        If the fit does not converge or a lifetime ends on its bound.

    Notes
    -----
    Residuals are weighted by ``1/max(count, 1)``. Starting values: onset at
    the histogram maximum, background from the bins before the rise,
    lifetime from a log-linear regression of the tail and amplitudes scaled
    to the peak height.
    """
    kind = DecayKind.parse(kind)
    if not math.isclose(hist.bin_width, irf.bin_width, rel_tol=1e-6):
        raise ShapeError(f"IRF bin width {irf.bin_width} ps differs from histogram bin width {hist.bin_width} ps")
    guess = _initial_model(hist, irf, kind)
    times = hist.bin_centers
    width = hist.bin_width
    tau_min = 0.1 * width
    tau_max = 100.0 * hist.span

    n = kind.n_components
    lower = []
    upper = []
    for _ in range(n):
        lower += [0.0, tau_min]
        upper += [np.inf, tau_max]
    lower += [float(times[0]) - hist.span, 0.0]
    upper += [float(times[-1]), np.inf]
    names = ("A", "tau") if n == 1 else ("B", "tau_X", "C", "tau_XX")

    def curve(x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return _expected_counts(p[0 : 2 * n : 2], p[1 : 2 * n : 2], p[2 * n], p[2 * n + 1], irf, x, width)

    model = FitModel.from_function(curve, names=names + ("t0", "background"), lower=lower, upper=upper)
    data = FitData(times, hist.counts, 1.0 / np.maximum(hist.counts, 1.0))
    result = least_squares_fit(model, data, guess.as_vector())
    if not result.converged:
        raise FitError(f"lifetime fit did not converge: {result.message}", diagnostics=result)
    taus = result.params[1 : 2 * n : 2]
    if np.any(np.isclose(taus, tau_min, rtol=1e-9)) or np.any(np.isclose(taus, tau_max, rtol=1e-9)):
        raise FitError("a fitted lifetime ended on its bound", diagnostics=result)

    fitted = DecayModel.from_vector(kind, result.params)
    if kind is DecayKind.BI_EXP and fitted.taus[0] < fitted.taus[1]:
        order = [2, 3, 0, 1, 4, 5]
        result.params = result.params[order]
        result.covariance = result.covariance[np.ix_(order, order)]
        fitted = DecayModel.from_vector(kind, result.params)
    logger.info(
        "Lifetime fit (%s): tau = %s ps, reduced chi2 = %.3f",
        kind.value,
        ", ".join(f"{t:.1f}" for t in fitted.taus),
        result.reduced_chi2,
    )
    return fitted, result


def lifetime_report(model: DecayModel, result: FitResult) -> Dict[str, Any]:
    """JSON-ready record ``{kind, tau_ps, tau_err_ps, t0_ps, background, reduced_chi2}``."""
    errors = parameter_uncertainties(result)
    n = model.kind.n_components
    tau_err = [float(e) for e in errors[1 : 2 * n : 2]]
    taus = [float(t) for t in model.taus]
    return {
        "kind": model.kind.value,
        "tau_ps": taus[0] if n == 1 else taus,
        "tau_err_ps": tau_err[0] if n == 1 else tau_err,
        "amplitudes": [float(a) for a in model.amplitudes],
        "t0_ps": float(model.t0),
        "background": float(model.background),
        "reduced_chi2": float(result.reduced_chi2),
        "natural_linewidth_ueV": [natural_linewidth(t) * 1e6 for t in taus],
    }


# ===================== PURCELL =====================

def purcell_factor(
    tau_ref: float,
    tau_cav: float,
    tau_ref_err: float = 0.0,
    tau_cav_err: float = 0.0,
) -> Tuple[float, float]:
    """
    Purcell factor from a lifetime ratio.

    Parameters
    ----------
    tau_ref : float
        Reference (bulk) lifetime in ps; the bulk exciton value is 230 ps.
    tau_cav : float
        Lifetime in the cavity in ps.
    tau_ref_err, tau_cav_err : float, optional
        One-sigma lifetime errors, combined in quadrature.

    Returns
    -------
    tuple of float
        ``(F_P, σ_F)``.

    Raises
    ------
    DomainError
        If a lifetime is not positive.

    Examples
    --------
    >>> f, err = purcell_factor(230.0, 53.0, tau_cav_err=2.0)
    >>> round(f, 2), round(err, 2)
    (4.34, 0.16)
    """
    if not (np.isfinite(tau_ref) and np.isfinite(tau_cav)) or tau_ref <= 0 or tau_cav <= 0:
        raise DomainError(f"lifetimes must be positive, got {tau_ref} and {tau_cav}")
    ratio = ufloat(float(tau_ref), abs(float(tau_ref_err))) / ufloat(float(tau_cav), abs(float(tau_cav_err)))
    return float(tau_ref) / float(tau_cav), float(ratio.std_dev)


def bulk_purcell_factor(tau_cav: float, tau_cav_err: float = 0.0, tau_ref: float = BULK_TAU_X_PS) -> Tuple[float, float]:
    """Purcell factor against the bulk reference lifetime."""
    return purcell_factor(tau_ref, tau_cav, 0.0, tau_cav_err)


@dataclass(frozen=True)
class PurcellResonance:
    """Lorentzian ``baseline + peak (Γ/2)² / ((δ - center)² + (Γ/2)²)`` of F_P vs detuning (eV)."""

    center: float
    fwhm: float
    peak: float
    baseline: float


def _purcell_curve(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return lorentzian_value(x, p[0], p[1], p[2], p[3])


def fit_purcell_vs_detuning(detuning, f_p, f_p_err) -> Tuple[PurcellResonance, FitResult]:
    """
    Weighted Lorentzian fit of Purcell factors against cavity detuning.

    Parameters
    ----------
    detuning : array_like
        ``E_c - E_transition`` in eV.
    f_p, f_p_err : array_like
        Purcell factors and their one-sigma errors (weights ``1/σ²``).

    Raises
    ------
    DataError
        With fewer than five points.
    FitError
        If the detunings have no spread or the fit does not converge.
    """
    x = np.asarray(detuning, dtype=float)
    y = np.asarray(f_p, dtype=float)
    sigma = np.asarray(f_p_err, dtype=float)
    if x.size < 5:
        raise DataError(f"a Purcell resonance fit needs at least 5 points, got {x.size}")
    if np.any(sigma <= 0):
        raise ParameterError("Purcell factor errors must be positive")
    spread = float(np.ptp(x))
    if spread <= 0:
        raise FitError("detunings have no spread")
    top = int(np.argmax(y))
    baseline = max(float(y.min()), 0.0)
    height = float(y[top]) - baseline
    above = x[y >= baseline + 0.5 * height]
    fwhm = float(np.ptp(above)) if above.size > 1 else spread / 3.0
    init = [float(x[top]), max(fwhm, spread / 50.0), max(height, 1e-6), baseline]
    model = FitModel.from_function(
        _purcell_curve,
        names=("center", "fwhm", "peak", "baseline"),
        lower=[-np.inf, 1e-9 * spread, 0.0, 0.0],
        upper=[np.inf, np.inf, np.inf, np.inf],
    )
    result = least_squares_fit(model, FitData(x, y, 1.0 / sigma**2), init)
    if not result.converged:
        raise FitError(f"Purcell resonance fit did not converge: {result.message}", diagnostics=result)
    center, width, peak, base = (float(v) for v in result.params)
    return PurcellResonance(center, width, peak, base), result


# ===================== SYNTHETIC DATA =====================

def simulate_histogram(
    model: DecayModel,
    irf: Irf,
    bin_centers,
    rng: Optional[np.random.Generator] = None,
    total_counts: Optional[float] = None,
) -> DecayHistogram:
    """
    Poisson-sampled histogram of an IRF-convolved decay.

    With ``total_counts`` the decay part is rescaled to that many expected
    counts before sampling; with ``rng=None`` the expected counts are
    returned unsampled.
    """
    centers = np.asarray(bin_centers, dtype=float)
    decay = convolve_model_with_irf(DecayModel(model.kind, model.amplitudes, model.taus, model.t0, 0.0), irf, centers)
    if total_counts is not None:
        decay = decay * float(total_counts) / decay.sum()
    expected = decay + model.background
    counts = expected if rng is None else rng.poisson(expected).astype(float)
    return DecayHistogram(centers, counts)
