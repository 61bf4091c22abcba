"""
Second-order autocorrelation g²(0) from pulsed coincidence histograms.

The zero-delay peak is integrated over a window and divided by the mean of
the two nearest side peaks integrated over the same window. Peaks further
out are left out of the normalisation because blinking raises them; they are
only reported as a diagnostic envelope.

Usage
-----
Quick start example:

    from cbr_tuning.correlation import CoincidenceHistogram, g2_zero

    hist = CoincidenceHistogram(delays_ns, counts, rep_period=12.5)
    result = g2_zero(hist, window=2.0)
    print(f"g2(0) = {result.g2_0:.3f} +/- {result.uncertainty:.3f}")

Window rule
-----------
A bin belongs to a window when its centre satisfies ``|t - c| <= w/2``;
no fractional bins are taken.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from uncertainties import ufloat

from .constants import G2_WINDOW_NS, REP_PERIOD_NS
from .exceptions import DataError, DetectionError, NormalizationError, ParameterError, ValidationError
from .utils import uniform_spacing

logger = logging.getLogger(__name__)

# Peak search half-width as a fraction of the repetition period
PEAK_SEARCH_FRACTION = 0.25
# A comb peak weaker than this fraction of the strongest one counts as missing
MISSING_PEAK_FRACTION = 0.10
PERIOD_TOLERANCE = 0.10


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """
    Start-stop coincidences versus delay.

    Parameters
    ----------
    delays : array_like
        Uniform bin centres in ns.
    counts : array_like
        Non-negative coincidence counts.
    rep_period : float, optional
        Laser repetition period in ns (12.5 ns for 80 MHz).
    """

    delays: np.ndarray
    counts: np.ndarray
    rep_period: float = REP_PERIOD_NS
    label: str = ""

    def __post_init__(self) -> None:
        delays = np.asarray(self.delays, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if delays.shape != counts.shape:
            raise ValidationError("delays and counts differ in length")
        uniform_spacing(delays, "coincidence histogram")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValidationError("coincidence counts must be finite and non-negative")
        if not np.isfinite(self.rep_period) or self.rep_period <= 0:
            raise ValidationError(f"repetition period must be positive, got {self.rep_period}")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "rep_period", float(self.rep_period))

    @property
    def bin_width(self) -> float:
        return float(self.delays[1] - self.delays[0])

    @property
    def extent(self) -> Tuple[float, float]:
        half = 0.5 * self.bin_width
        return float(self.delays[0] - half), float(self.delays[-1] + half)

    def window_sum(self, center: float, window: float) -> float:
        """Counts of the bins whose centres lie within ``|t - center| <= window/2``."""
        tolerance = 1e-9 * self.bin_width
        inside = np.abs(self.delays - center) <= 0.5 * window + tolerance
        return float(self.counts[inside].sum())

    def __len__(self) -> int:
        return int(self.counts.size)


@dataclass
class G2Result:
    """
    g²(0) with its Poisson uncertainty and the integrated counts.

    ``side_counts`` holds the peaks at ``-T`` and ``+T``.
    """

    g2_0: float
    uncertainty: float
    window_ns: float
    rep_period_ns: float
    central_counts: float
    side_counts: Tuple[float, float]
    offset_ns: float = 0.0
    envelope: Optional[pd.DataFrame] = field(default=None, repr=False)

    def as_dict(self) -> Dict[str, Any]:
        record = {
            "g2_0": float(self.g2_0),
            "err": float(self.uncertainty),
            "window_ns": float(self.window_ns),
            "rep_period_ns": float(self.rep_period_ns),
            "central_counts": float(self.central_counts),
            "side_counts": [float(c) for c in self.side_counts],
            "offset_ns": float(self.offset_ns),
        }
        if self.envelope is not None:
            record["envelope"] = self.envelope.to_dict(orient="list")
        return record

    def __str__(self) -> str:
        return f"g2(0) = {self.g2_0:.4f} +/- {self.uncertainty:.4f}"


def _comb_indices(hist: CoincidenceHistogram, period: float, half_width: float) -> List[int]:
    lo, hi = hist.extent
    k_lo = math.ceil((lo + half_width) / period)
    k_hi = math.floor((hi - half_width) / period)
    return [k for k in range(k_lo, k_hi + 1) if k != 0]


def locate_peaks(hist: CoincidenceHistogram, rep_period: Optional[float] = None) -> List[float]:
    """
    Centroids of the side peaks of the pulsed comb.

    Each centroid is taken within ``±T/4`` of its nominal position ``k·T``
    (``k != 0``); only peaks whose search window lies inside the histogram
    are used.

    Returns
    -------
    list of float
        Peak centres in ns, ordered by ``k``.

    Raises
    ------
    DetectionError
        If fewer than three peaks are covered, a peak is missing or the
        peak spacing differs from ``rep_period`` by more than 10 %.
    """
    return [center for _, center in _locate_comb(hist, rep_period)]


def _locate_comb(hist: CoincidenceHistogram, rep_period: Optional[float]) -> List[Tuple[int, float]]:
    period = hist.rep_period if rep_period is None else float(rep_period)
    half_width = PEAK_SEARCH_FRACTION * period
    indices = _comb_indices(hist, period, half_width)
    if len(indices) < 3:
        raise DetectionError(f"histogram covers only {len(indices)} side peaks, at least 3 are needed")

    areas = []
    centers = []
    for k in indices:
        inside = np.abs(hist.delays - k * period) <= half_width
        weights = hist.counts[inside]
        area = float(weights.sum())
        areas.append(area)
        centers.append(float(np.sum(hist.delays[inside] * weights) / area) if area > 0 else float("nan"))
    areas = np.asarray(areas)
    strongest = float(areas.max())
    if strongest <= 0:
        raise DetectionError("no coincidence peaks found")
    missing = [k for k, area in zip(indices, areas) if area < MISSING_PEAK_FRACTION * strongest]
    if missing:
        raise DetectionError(f"expected peaks missing at k = {missing} (period {period} ns)")

    ks = np.asarray(indices, dtype=float)
    slope, _ = np.polyfit(ks, np.asarray(centers), 1)
    if abs(slope / period - 1.0) > PERIOD_TOLERANCE:
        raise DetectionError(f"peak spacing {slope:.3f} ns does not match repetition period {period} ns")
    return list(zip(indices, centers))


def comb_offset(hist: CoincidenceHistogram, rep_period: Optional[float] = None) -> float:
    """Offset of the measured comb from ``k·T`` in ns (mean centroid residual)."""
    period = hist.rep_period if rep_period is None else float(rep_period)
    comb = _locate_comb(hist, period)
    residuals = [center - k * period for k, center in comb]
    return float(np.mean(residuals))


def peak_envelope(
    hist: CoincidenceHistogram,
    window: float = G2_WINDOW_NS,
    rep_period: Optional[float] = None,
    offset: float = 0.0,
) -> pd.DataFrame:
    """
    Integrated counts of every comb peak, normalised to the first neighbours.

    Columns: ``k``, ``delay_ns``, ``counts``, ``normalized``. Used to inspect
    blinking bunching; it never changes g²(0).
    """
    period = hist.rep_period if rep_period is None else float(rep_period)
    lo, hi = hist.extent
    k_lo = math.ceil((lo + 0.5 * window - offset) / period)
    k_hi = math.floor((hi - 0.5 * window - offset) / period)
    ks = np.arange(k_lo, k_hi + 1)
    counts = np.array([hist.window_sum(k * period + offset, window) for k in ks])
    reference = 0.5 * (hist.window_sum(-period + offset, window) + hist.window_sum(period + offset, window))
    normalized = counts / reference if reference > 0 else np.full(ks.size, np.nan)
    return pd.DataFrame({"k": ks, "delay_ns": ks * period + offset, "counts": counts, "normalized": normalized})


def g2_zero(
    hist: CoincidenceHistogram,
    window: float = G2_WINDOW_NS,
    rep_period: Optional[float] = None,
    align: bool = True,
    diagnostics: bool = False,
) -> G2Result:
    """
    Zero-delay second-order correlation of a pulsed HBT histogram.

    Parameters
    ----------
    hist : CoincidenceHistogram
        Coincidence histogram spanning at least ``±1.5 T``.
    window : float, optional
        Integration window in ns (default 2).
    rep_period : float, optional
        Repetition period in ns; defaults to the histogram's.
    align : bool, optional
        Shift the windows by the measured comb offset. If the comb cannot be
        detected the nominal positions are used and a warning is logged.
    diagnostics : bool, optional
        Attach the full peak envelope to the result.

    Returns
    -------
    G2Result
        ``g2_0 = N0 / mean(N-, N+)`` with Poisson errors propagated
        (``sqrt(N)``, with a unit error for an empty centre).

    Raises
    ------
    ParameterError
        If the window is not positive or reaches the side peaks.
    DataError
        If the histogram does not span ``±1.5 T``.
    NormalizationError
        If both side peaks are empty.

    Examples
    --------
    >>> result = g2_zero(hist)                 # doctest: +SKIP
    >>> round(result.g2_0, 3)                  # doctest: +SKIP
    0.03
    """
    period = hist.rep_period if rep_period is None else float(rep_period)
    window = float(window)
    if window <= 0:
        raise ParameterError(f"integration window must be positive, got {window}")
    if window >= period:
        raise ParameterError(f"integration window {window} ns reaches the side peaks (period {period} ns)")
    lo, hi = hist.extent
    if lo > -1.5 * period or hi < 1.5 * period:
        raise DataError(f"histogram spans [{lo}, {hi}] ns, at least +/-{1.5 * period} ns is required")

    offset = 0.0
    if align:
        try:
            offset = comb_offset(hist, period)
        except DetectionError as exc:
            logger.warning("Peak alignment skipped: %s", exc)
            offset = 0.0
        if abs(offset) > PEAK_SEARCH_FRACTION * period:
            logger.warning("Peak alignment skipped: offset %.3f ns is implausible", offset)
            offset = 0.0

    central = hist.window_sum(offset, window)
    left = hist.window_sum(offset - period, window)
    right = hist.window_sum(offset + period, window)
    if left + right <= 0:
        raise NormalizationError("both neighbouring peaks are empty")

    numerator = ufloat(central, math.sqrt(max(central, 1.0)))
    sides = (ufloat(left, math.sqrt(max(left, 1.0))) + ufloat(right, math.sqrt(max(right, 1.0)))) / 2.0
    ratio = numerator / sides
    g2 = central / (0.5 * (left + right))
    logger.info("g2(0) = %.4f +/- %.4f (window %.2f ns, offset %.3f ns)", g2, ratio.std_dev, window, offset)

    envelope = peak_envelope(hist, window, period, offset) if diagnostics else None
    return G2Result(
        g2_0=float(g2),
        uncertainty=float(ratio.std_dev),
        window_ns=window,
        rep_period_ns=period,
        central_counts=central,
        side_counts=(left, right),
        offset_ns=float(offset),
        envelope=envelope,
    )


def _laplace_cdf(x: np.ndarray, tau: float) -> np.ndarray:
    return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0) / tau), 1.0 - 0.5 * np.exp(-np.maximum(x, 0.0) / tau))


def simulate_coincidences(
    g2_0: float,
    side_counts: float,
    rep_period: float = REP_PERIOD_NS,
    n_peaks: int = 4,
    bin_width: float = 0.1,
    tau_ns: float = 0.23,
    offset: float = 0.0,
    background: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> CoincidenceHistogram:
    """
    Pulsed coincidence comb with two-sided exponential peaks.

    Every side peak holds ``side_counts`` expected coincidences and the
    zero-delay peak ``g2_0 * side_counts``. With ``rng`` the counts are
    Poisson sampled.
    """
    if g2_0 < 0 or side_counts < 0:
        raise ParameterError("g2_0 and side_counts must be non-negative")
    n_half = int(round((n_peaks + 0.5) * rep_period / bin_width))
    delays = bin_width * np.arange(-n_half, n_half + 1)
    lower = delays - 0.5 * bin_width
    upper = delays + 0.5 * bin_width
    expected = np.full(delays.size, float(background))
    for k in range(-n_peaks, n_peaks + 1):
        area = side_counts * (g2_0 if k == 0 else 1.0)
        center = k * rep_period + offset
        expected += area * (_laplace_cdf(upper - center, tau_ns) - _laplace_cdf(lower - center, tau_ns))
    counts = expected if rng is None else rng.poisson(expected).astype(float)
    return CoincidenceHistogram(delays, counts, rep_period)
