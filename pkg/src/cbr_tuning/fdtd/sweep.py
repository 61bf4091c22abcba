"""
Etch sweep: simulate the resonator after repeated uniform etch steps.

Each member geometry is simulated twice (dipole for the Purcell spectrum,
beam for the relative reflectance); the reflectance dip is fitted with a
Fano lineshape to obtain the mode energy, linewidth and quality factor.
Members are independent and run through ``joblib``.

Usage
-----
    from cbr_tuning.fdtd import CbrGeometry, SimulationConfig
    from cbr_tuning.fdtd.sweep import etch_sweep

    sweep = etch_sweep(CbrGeometry(), SimulationConfig(), steps=14, jobs=4)
    sweep.table.to_csv("sweep.csv", index=False)
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..constants import COLLECTION_NA, ETCH_STEP_NM, ETCH_SWEEP_STEPS, HC_EV_NM
from ..exceptions import CbrError, ParameterError, SweepError
from ..fitting import fit_linear, parameter_uncertainties
from ..lineshapes import fit_fano
from .config import SimulationConfig
from .geometry import CbrGeometry, Layout, build_geometry
from .observables import (
    compute_extraction_efficiency,
    compute_purcell_spectrum,
    compute_reflectance_spectrum,
    run_dipole,
)
from .solver import SimulationResult
from .sources import SourceSpec

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("delta_nm", "Ec_eV", "Gamma_eV", "Q", "Fp_peak")


@dataclass(eq=False)
class SweepResult:
    """
    Outcome of an etch sweep.

    Attributes
    ----------
    table : DataFrame
        One row per member with columns ``delta_nm, Ec_eV, Gamma_eV, Q, Fp_peak``.
    purcell, reflectance : DataFrame
        Heatmaps indexed by ``delta_nm`` with one column per DFT energy (eV).
    extraction : DataFrame or None
        Extraction-efficiency heatmap when requested.
    sensitivity, sensitivity_err : float
        Mode wavelength shift per nm of removed material (nm/nm, positive
        for a blue shift) from a linear regression over the members.
    """

    table: pd.DataFrame
    purcell: pd.DataFrame
    reflectance: pd.DataFrame
    extraction: Optional[pd.DataFrame]
    sensitivity: float
    sensitivity_err: float

    def as_dict(self) -> Dict[str, Any]:
        return {
            "rows": self.table.to_dict(orient="records"),
            "sensitivity_nm_per_nm": self.sensitivity,
            "sensitivity_err": self.sensitivity_err,
        }


def sweep_deltas(steps: int = ETCH_SWEEP_STEPS, step_nm: float = ETCH_STEP_NM) -> np.ndarray:
    """Etch depths ``0, step, …, steps·step`` (``steps + 1`` members)."""
    if steps < 2:
        raise ParameterError(f"an etch sweep needs at least 2 steps, got {steps}")
    return step_nm * np.arange(steps + 1)


def _sweep_member(
    base: CbrGeometry,
    config: SimulationConfig,
    delta: float,
    bulk: SimulationResult,
    source: SourceSpec,
    beam: SourceSpec,
    na: float,
    extraction: bool,
) -> Dict[str, Any]:
    try:
        geometry = build_geometry(base, delta)
        run = run_dipole(geometry, config, source, Layout.CBR)
        purcell = compute_purcell_spectrum(geometry, config, source, reference=bulk, run=run)
        reflectance = compute_reflectance_spectrum(geometry, config, beam, na=na)
        params, _ = fit_fano(reflectance.spectrum)
        member: Dict[str, Any] = {
            "row": {
                "delta_nm": float(delta),
                "Ec_eV": float(params.E_c),
                "Gamma_eV": float(params.gamma_c),
                "Q": float(params.quality_factor),
                "Fp_peak": float(purcell.values.max()),
            },
            "purcell": purcell.values,
            "reflectance": reflectance.values,
        }
        if extraction:
            member["extraction"] = compute_extraction_efficiency(
                geometry, config, source, na, reference=bulk, run=run
            ).values
        logger.info("Sweep member delta=%.2f nm finished: Ec=%.5f eV, Q=%.1f", delta, params.E_c, member["row"]["Q"])
        return member
    except CbrError as e:
        logger.error("Sweep member delta=%.2f nm failed: %s", delta, e)
        return {"delta_nm": float(delta), "error": f"{type(e).__name__}: {e}"}


def _sensitivity(table: pd.DataFrame):
    wavelength = HC_EV_NM / table["Ec_eV"].to_numpy()
    deltas = table["delta_nm"].to_numpy()
    design = np.column_stack([np.ones_like(deltas), deltas])
    result = fit_linear(design, wavelength, ("intercept", "slope"))
    slope = float(result.params[1])
    return -slope, float(parameter_uncertainties(result)[1])


def etch_sweep(
    base: CbrGeometry,
    config: SimulationConfig,
    steps: int = ETCH_SWEEP_STEPS,
    step_nm: float = ETCH_STEP_NM,
    deltas: Optional[Sequence[float]] = None,
    jobs: int = 1,
    extraction: bool = False,
    source: Optional[SourceSpec] = None,
    na: float = COLLECTION_NA,
) -> SweepResult:
    """
    Simulate ``steps`` etch steps of ``step_nm`` and tabulate the mode.

    Parameters
    ----------
    base : CbrGeometry
        Un-etched geometry.
    config : SimulationConfig
        Solver settings shared by every member.
    steps, step_nm : int, float
        Number and size of the etch steps; ignored when ``deltas`` is given.
    deltas : sequence of float, optional
        Explicit etch depths in nm.
    jobs : int
        Parallel member simulations.
    extraction : bool
        Also compute the extraction-efficiency heatmap.

    Raises
    ------
    ParameterError
        If fewer than two steps (or depths) are requested.
    SweepError
        If any member fails; ``completed`` holds the rows that succeeded.
    """
    values = sweep_deltas(steps, step_nm) if deltas is None else np.asarray(deltas, dtype=float)
    if values.size < 2:
        raise ParameterError(f"an etch sweep needs at least 2 members, got {values.size}")
    source = source or SourceSpec.dipole()
    beam = SourceSpec.beam(na=na)

    logger.info("Starting etch sweep over %d members (jobs=%d)", values.size, jobs)
    bulk = run_dipole(base, config, source, Layout.BULK)
    members = Parallel(n_jobs=jobs)(
        delayed(_sweep_member)(base, config, float(delta), bulk, source, beam, na, extraction) for delta in values
    )

    rows: List[Dict[str, float]] = [m["row"] for m in members if "row" in m]
    failed = [m for m in members if "error" in m]
    if failed:
        details = "; ".join(f"delta={m['delta_nm']:.2f} nm: {m['error']}" for m in failed)
        raise SweepError(f"{len(failed)} of {values.size} sweep members failed ({details})", completed=rows)

    energies = np.round(config.energies, 10)
    index = pd.Index(values, name="delta_nm")
    table = pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))
    purcell = pd.DataFrame(np.vstack([m["purcell"] for m in members]), index=index, columns=energies)
    reflectance = pd.DataFrame(np.vstack([m["reflectance"] for m in members]), index=index, columns=energies)
    extraction_map = None
    if extraction:
        extraction_map = pd.DataFrame(np.vstack([m["extraction"] for m in members]), index=index, columns=energies)
    sensitivity, sensitivity_err = _sensitivity(table)
    logger.info("Successfully processed %d sweep members; sensitivity %.3f(%.3f) nm/nm", len(rows), sensitivity, sensitivity_err)
    return SweepResult(table, purcell, reflectance, extraction_map, sensitivity, sensitivity_err)


def heatmap_long(frame: pd.DataFrame, value: str) -> pd.DataFrame:
    """Reshape a heatmap into ``delta_nm, energy_eV, <value>`` rows for CSV output."""
    long = frame.stack().reset_index()
    long.columns = ["delta_nm", "energy_eV", value]
    return long
