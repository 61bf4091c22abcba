"""
Static SVG figures for the command outputs.

Figures are drawn on the non-interactive Agg backend through the
object-oriented ``Figure`` API, with a fixed SVG hash salt and no date
stamp so the files do not change between identical runs.
"""

import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .coherence import CoherenceResult, VisibilityTrace, visibility_model  # noqa: E402
from .conversion import ev_to_nm  # noqa: E402
from .correlation import CoincidenceHistogram, G2Result  # noqa: E402
from .decay import DecayHistogram, DecayModel, Irf, convolve_model_with_irf  # noqa: E402
from .etch import EtchSeries, TuningModel  # noqa: E402
from .lineshapes import FanoParams, fano_value  # noqa: E402
from .spectra import Spectrum  # noqa: E402

logger = logging.getLogger(__name__)

FIGSIZE = (6.4, 4.0)
STYLE = {
    "svg.hashsalt": "cbr-tuning",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _figure(width: float = FIGSIZE[0], height: float = FIGSIZE[1]) -> Figure:
    return Figure(figsize=(width, height), facecolor="w")


def _save(fig: Figure, path: str) -> str:
    with matplotlib.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info("Figure written to: %s", path)
    return path


def plot_fano(path: str, spectrum: Spectrum, params: FanoParams, window=None) -> str:
    """Data, fitted Fano curve and an arrow at ``E_c``."""
    data = spectrum.to_energy()
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        ax.plot(data.axis, data.intensity, ".", ms=3, color="0.4", label="data")
        lo, hi = window if window is not None else (data.axis[0], data.axis[-1])
        energy = np.linspace(lo, hi, 800)
        ax.plot(energy, fano_value(energy, params), "-", color="C3", label="Fano fit")
        level = float(fano_value(params.E_c, params))
        ax.annotate(
            f"$E_c$ = {params.E_c:.4f} eV ({ev_to_nm(params.E_c):.1f} nm)",
            xy=(params.E_c, level),
            xytext=(params.E_c, level + 0.15 * np.ptp(data.intensity)),
            arrowprops={"arrowstyle": "->", "color": "C3"},
            ha="center",
        )
        ax.set_xlabel("Photon energy (eV)")
        ax.set_ylabel("Relative reflectance")
        ax.legend(loc="best")
    return _save(fig, path)


def plot_decay(path: str, hist: DecayHistogram, irf: Irf, model: DecayModel) -> str:
    """Histogram, scaled IRF and the convolved fit on a log scale."""
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        t = hist.bin_centers
        ax.semilogy(t, np.maximum(hist.counts, 0.5), ".", ms=2, color="0.4", label="data")
        ax.semilogy(irf.bin_centers, np.maximum(irf.weights * hist.counts.max(), 0.5), "-", color="0.7", label="IRF")
        ax.semilogy(t, np.maximum(convolve_model_with_irf(model, irf, t), 0.5), "-", color="C0", label="fit")
        taus = ", ".join(f"{tau:.1f}" for tau in model.taus)
        ax.set_title(f"{model.kind.value}: tau = {taus} ps")
        ax.set_xlabel("Time (ps)")
        ax.set_ylabel("Counts")
        ax.legend(loc="best")
    return _save(fig, path)


def plot_g2(path: str, hist: CoincidenceHistogram, result: G2Result) -> str:
    """Coincidence comb with the integration windows shaded."""
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        ax.step(hist.delays, hist.counts, where="mid", color="0.3", lw=0.8)
        for k in (-1, 0, 1):
            center = result.offset_ns + k * result.rep_period_ns
            ax.axvspan(center - 0.5 * result.window_ns, center + 0.5 * result.window_ns, color="C1", alpha=0.2)
        ax.set_title(f"g2(0) = {result.g2_0:.3f} ± {result.uncertainty:.3f}")
        ax.set_xlabel("Delay (ns)")
        ax.set_ylabel("Coincidences")
    return _save(fig, path)


def plot_visibility(path: str, trace: VisibilityTrace, result: CoherenceResult) -> str:
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        ax.errorbar(trace.delays, trace.visibilities, yerr=trace.uncertainties, fmt="o", ms=3, color="0.3")
        t = np.linspace(min(0.0, trace.delays.min()), trace.delays.max(), 400)
        ax.plot(t, visibility_model(t, result.t_G, result.t_L), "-", color="C2")
        ax.set_title(f"$t_G$ = {result.t_G:.1f} ps, $t_L$ = {result.t_L:.1f} ps")
        ax.set_xlabel("Delay (ps)")
        ax.set_ylabel("Visibility")
    return _save(fig, path)


def plot_etch(path: str, series: EtchSeries, model: TuningModel, column: str = "Ec_RT_eV") -> str:
    """Mode energy per device and etch cycle."""
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        for device, rows in series.frame.groupby("device_id", sort=True):
            ax.plot(rows["cycle"], rows[column], "o-", ms=3, lw=0.8, label=str(device))
        ax.set_title(f"shift {model.shift_per_cycle * 1e3:.2f} ± {model.shift_per_cycle_err * 1e3:.2f} meV/cycle")
        ax.set_xlabel("Etch cycle")
        ax.set_ylabel("$E_c$ (eV)")
        if series.frame["device_id"].nunique() <= 12:
            ax.legend(loc="best", fontsize=7, ncol=2)
    return _save(fig, path)


def plot_spectrum(path: str, spectrum: Spectrum, ylabel: str = "Intensity", marker: Optional[float] = None) -> str:
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        ax.plot(spectrum.axis, spectrum.intensity, "-", color="C0")
        if marker is not None:
            ax.axvline(marker, color="C3", ls="--", lw=0.8)
        ax.set_xlabel("Photon energy (eV)" if spectrum.axis_kind.unit == "eV" else "Wavelength (nm)")
        ax.set_ylabel(ylabel)
        if spectrum.label:
            ax.set_title(spectrum.label)
    return _save(fig, path)


def plot_heatmap(path: str, frame: pd.DataFrame, label: str) -> str:
    """Etch depth versus photon energy map of a swept quantity."""
    with matplotlib.rc_context(STYLE):
        fig = _figure()
        ax = fig.add_subplot(111)
        energies = np.asarray(frame.columns, dtype=float)
        deltas = np.asarray(frame.index, dtype=float)
        mesh = ax.pcolormesh(energies, deltas, frame.to_numpy(), shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=label)
        ax.set_xlabel("Photon energy (eV)")
        ax.set_ylabel("Removed material (nm)")
    return _save(fig, path)
