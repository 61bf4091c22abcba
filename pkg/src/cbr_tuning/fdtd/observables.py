"""
Derived spectra of the resonator: Purcell factor, relative reflectance and
collection efficiency.

Every spectrum is a ratio of two runs with identical sources, so the source
spectrum cancels:

- Purcell factor: power leaving a small box around the dipole, divided by
  the same quantity in unbounded membrane material.
- Relative reflectance: up-going power inside the collection aperture above
  the resonator, divided by the same for the unpatterned layer stack.
- Extraction efficiency: the fraction of the far field inside the aperture
  times the power through the top monitor over the power leaving the box.

Usage
-----
    from cbr_tuning.fdtd import CbrGeometry, SimulationConfig
    from cbr_tuning.fdtd.observables import compute_purcell_spectrum

    result = compute_purcell_spectrum(CbrGeometry(), SimulationConfig())
    result.spectrum.intensity.max()
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..constants import COLLECTION_NA
from ..exceptions import NormalizationError, TransformError, ValidationError
from ..spectra import AxisKind, Spectrum
from .config import SimulationConfig
from .geometry import CbrGeometry, Layout
from .monitors import directional_power, fourier_lines
from .solver import FdtdSolver, SimulationResult
from .sources import SourceKind, SourceSpec

logger = logging.getLogger(__name__)

# A reference flux below this fraction of its maximum counts as zero
ZERO_FLUX = 1e-12
FAR_FIELD_ANGLES = 721

BOX = "box"
TOP = "top"
BOTTOM = "bottom"
SIDE = "side"
REFLECTED = "reflected"


@dataclass(eq=False)
class SpectrumResult:
    """
    A simulated spectrum with its normalisation provenance.

    Attributes
    ----------
    spectrum : Spectrum
        Values on an ascending energy axis (eV).
    run_id : str
        Identifier of the resonator run.
    reference_id : str
        Identifier of the normalisation run.
    extra : dict
        Intermediate spectra (raw powers, angular ratio, ...).
    """

    spectrum: Spectrum
    run_id: str
    reference_id: str
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return self.spectrum.axis

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.intensity

    def peak(self) -> Tuple[float, float]:
        """Energy and value of the maximum."""
        index = int(np.argmax(self.values))
        return float(self.energies[index]), float(self.values[index])


# ===================== RUNS =====================


def run_dipole(
    geometry: CbrGeometry,
    config: SimulationConfig,
    source: Optional[SourceSpec] = None,
    layout: Layout = Layout.CBR,
    far_monitors: bool = False,
) -> SimulationResult:
    """
    Dipole run with a flux box around the emitter.

    With ``far_monitors`` the run also records lines just below the top
    PML, just above the gold (or the bottom PML) and just inside the side
    PML; together they enclose everything but the gold.
    """
    source = source or SourceSpec.dipole()
    if source.kind is not SourceKind.DIPOLE:
        raise ValidationError("a dipole run needs a dipole source")
    solver = FdtdSolver(geometry, config, source, layout)
    solver.add_box(BOX)
    grid = solver.grid
    r0, r1 = grid.interior_rows
    z_top = grid.z[r1 - 1]
    solver.add_line(TOP, "h", z_top)
    if far_monitors:
        c0, c1 = grid.interior_columns
        if Layout.parse(layout) in (Layout.CBR, Layout.PLANAR):
            z_bottom = geometry.gold_thickness + grid.dx
        else:
            z_bottom = grid.z[r0 + 1]
        k_bottom = grid.row(z_bottom)
        solver.add_line(BOTTOM, "h", grid.z[k_bottom - 1])
        solver.add_line(SIDE, "v", grid.x[c1 - 1], grid.z[k_bottom], grid.z[r1 - 1])
    return solver.run()


def run_beam(
    geometry: CbrGeometry,
    config: SimulationConfig,
    beam: Optional[SourceSpec] = None,
    layout: Layout = Layout.CBR,
) -> SimulationResult:
    """Beam run with a horizontal line between the source and the membrane."""
    beam = beam or SourceSpec.beam()
    if beam.kind is not SourceKind.BEAM:
        raise ValidationError("a reflectance run needs a beam source")
    solver = FdtdSolver(geometry, config, beam, layout)
    solver.add_line(REFLECTED, "h", geometry.membrane_top + 0.25 * config.air_gap_nm)
    return solver.run()


def _ratio(numerator: np.ndarray, denominator: np.ndarray, what: str) -> np.ndarray:
    scale = float(np.max(np.abs(denominator))) if denominator.size else 0.0
    small = np.abs(denominator) <= ZERO_FLUX * max(scale, np.finfo(float).tiny)
    if scale == 0.0 or np.any(small):
        index = int(np.flatnonzero(small)[0]) if np.any(small) else 0
        raise NormalizationError(f"{what} reference flux vanishes at sample {index}")
    return numerator / denominator


def _spectrum(energies: np.ndarray, values: np.ndarray, label: str, what: str) -> Spectrum:
    negative = values < 0
    if np.any(negative):
        logger.warning("%s: %d negative samples clipped to zero", what, int(negative.sum()))
        values = np.clip(values, 0.0, None)
    return Spectrum(energies, values, AxisKind.ENERGY, label)


# ===================== OBSERVABLES =====================


def compute_purcell_spectrum(
    geometry: CbrGeometry,
    config: SimulationConfig,
    source: Optional[SourceSpec] = None,
    reference: Optional[SimulationResult] = None,
    layout: Layout = Layout.CBR,
    run: Optional[SimulationResult] = None,
) -> SpectrumResult:
    """
    Purcell factor ``F_P(E) = P(E) / P0(E)``.

    Parameters
    ----------
    geometry : CbrGeometry
        Resonator; the dipole sits at the membrane centre unless ``source``
        says otherwise.
    config : SimulationConfig
        Solver settings.
    source : SourceSpec, optional
        Dipole source (default 780 nm ± 80 nm on the axis).
    reference : SimulationResult, optional
        Bulk reference run; computed when omitted.
    layout : Layout
        Domain content of the resonator run.
    run : SimulationResult, optional
        Reuse an existing dipole run.

    Raises
    ------
    NormalizationError
        If the reference power vanishes at a sample energy.
    """
    source = source or SourceSpec.dipole()
    run = run or run_dipole(geometry, config, source, layout)
    reference = reference or run_dipole(geometry, config, source, Layout.BULK)
    power = run.flux(BOX)
    reference_power = reference.flux(BOX)
    purcell = _ratio(power, reference_power, "Purcell")
    spectrum = _spectrum(run.energies, purcell, f"Purcell factor {run.run_id}", "Purcell")
    return SpectrumResult(spectrum, run.run_id, reference.run_id, {"power": power, "reference_power": reference_power})


def compute_reflectance_spectrum(
    geometry: CbrGeometry,
    config: SimulationConfig,
    beam: Optional[SourceSpec] = None,
    reference: Optional[SimulationResult] = None,
    na: float = COLLECTION_NA,
    layout: Layout = Layout.CBR,
) -> SpectrumResult:
    """
    Reflectance relative to the unpatterned layer stack, inside the
    collection aperture ``na``.

    Raises
    ------
    NormalizationError
        If the planar reference reflects no power at a sample energy.
    """
    beam = beam or SourceSpec.beam(na=na)
    run = run_beam(geometry, config, beam, layout)
    reference = reference or run_beam(geometry, config, beam, Layout.PLANAR)
    up, _ = directional_power(run.lines[REFLECTED], run.grid, run.omega, na)
    up_ref, _ = directional_power(reference.lines[REFLECTED], reference.grid, reference.omega, na)
    relative = _ratio(up, up_ref, "reflectance")
    spectrum = _spectrum(run.energies, relative, f"relative reflectance {run.run_id}", "reflectance")
    return SpectrumResult(spectrum, run.run_id, reference.run_id, {"reflected": up, "reference_reflected": up_ref})


def far_field(run: SimulationResult, line: str = TOP, angles: int = FAR_FIELD_ANGLES) -> Tuple[np.ndarray, np.ndarray]:
    """
    2D far-field intensity above a horizontal line monitor.

    In two dimensions the stationary-phase far field in direction ``θ`` is
    proportional to ``cos θ · Ẽ(k0 sin θ)``, so the intensity is
    ``cos²θ |Ẽ(k0 sin θ)|²``.

    Returns
    -------
    theta : ndarray
        Angles from the normal, ``[-π/2, π/2]``.
    intensity : ndarray, shape (n_energies, n_angles)
    """
    monitor = run.lines[line]
    kx, e_k, _ = fourier_lines(monitor, run.grid)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, angles)
    intensity = np.empty((run.omega.size, theta.size))
    for j, k0 in enumerate(run.omega):
        samples = k0 * np.sin(theta)
        amplitude = np.interp(samples, kx, np.abs(e_k[j]) ** 2)
        intensity[j] = np.cos(theta) ** 2 * amplitude
    return theta, intensity


def angular_ratio(theta: np.ndarray, intensity: np.ndarray, na: float = COLLECTION_NA) -> np.ndarray:
    """
    Fraction of the upper half-plane far field inside ``|θ| ≤ asin(NA)``.

    Parameters
    ----------
    theta : ndarray
        Ascending angles covering ``[-π/2, π/2]``.
    intensity : ndarray
        Far-field intensity, last axis along ``theta``.
    na : float
        Numerical aperture in ``(0, 1]``.

    Raises
    ------
    TransformError
        If the far field integrates to zero.

    Examples
    --------
    >>> theta = np.linspace(-np.pi / 2, np.pi / 2, 181)
    >>> float(angular_ratio(theta, np.ones_like(theta), 1.0))
    1.0
    """
    if not 0 < na <= 1:
        raise ValidationError(f"numerical aperture must lie in (0, 1], got {na}")
    theta = np.asarray(theta, dtype=float)
    intensity = np.atleast_2d(np.asarray(intensity, dtype=float))
    cumulative = cumulative_trapezoid(intensity, theta, axis=-1, initial=0.0)
    total = cumulative[:, -1]
    if np.any(np.abs(total) <= np.finfo(float).tiny):
        raise TransformError("far-field intensity integrates to zero")
    limit = math.asin(na)
    inside = np.array([np.interp(limit, theta, row) - np.interp(-limit, theta, row) for row in cumulative])
    ratio = inside / total
    return ratio if ratio.size > 1 else ratio[0]


def compute_extraction_efficiency(
    geometry: CbrGeometry,
    config: SimulationConfig,
    source: Optional[SourceSpec] = None,
    na: float = COLLECTION_NA,
    reference: Optional[SimulationResult] = None,
    run: Optional[SimulationResult] = None,
) -> SpectrumResult:
    """
    Collection efficiency ``η = ratio(NA) · T / F_P``.

    ``T`` is the power through the top monitor over the bulk dipole power and
    ``F_P`` the Purcell factor, so ``T / F_P`` is the fraction of the emitted
    power leaving through the top; ``ratio`` is the share of the far field
    inside the aperture.

    Raises
    ------
    TransformError
        If the far field vanishes.
    NormalizationError
        If the bulk reference power vanishes.
    """
    source = source or SourceSpec.dipole()
    run = run or run_dipole(geometry, config, source, Layout.CBR)
    reference = reference or run_dipole(geometry, config, source, Layout.BULK)
    reference_power = reference.flux(BOX)
    purcell = _ratio(run.flux(BOX), reference_power, "Purcell")
    transmittance = _ratio(run.flux(TOP), reference_power, "transmittance")
    theta, intensity = far_field(run, TOP)
    ratio = np.atleast_1d(angular_ratio(theta, intensity, na))
    efficiency = ratio * transmittance / purcell
    spectrum = _spectrum(run.energies, efficiency, f"extraction efficiency {run.run_id}", "extraction")
    return SpectrumResult(
        spectrum,
        run.run_id,
        reference.run_id,
        {"angular_ratio": ratio, "transmittance": transmittance, "purcell": purcell},
    )
