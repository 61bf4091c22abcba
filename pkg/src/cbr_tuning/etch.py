"""
Statistical model of cavity-mode tuning by repeated etch cycles.

An :class:`EtchSeries` holds the cavity mode energy (room and low
temperature) and quality factor of several devices after each etch cycle.
From it the module derives the blue shift per cycle, the material removed
per cycle (against a simulated sensitivity), the RT/LT offset, the Q trend
and the number of cycles needed to reach a target energy.

Usage
-----
Quick start example:

    from cbr_tuning.etch import EtchSeries, build_tuning_model, predict_cycles_to_target

    series = EtchSeries.from_frame(frame)
    model = build_tuning_model(series, sensitivity=2.9, exclude_cycles={1})
    plan = predict_cycles_to_target(1.5478, 1.5631, model.shift_per_cycle)
    print(plan.cycles, plan.residual)

Sign convention
---------------
Blue shifts raise the energy, so a positive slope in eV/cycle is a blue
shift. Wavelength slopes are derived locally at the mean mode energy.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from uncertainties import ufloat

from .constants import DESIGN_LABELS
from .conversion import energy_width_to_nm
from .exceptions import DataError, DomainError, PlanningError, ValidationError
from .fitting import FitResult, fit_linear, parameter_uncertainties

logger = logging.getLogger(__name__)

ETCH_COLUMNS = ("device_id", "design", "cycle", "Ec_RT_eV", "Ec_LT_eV", "Q", "flag")
ENERGY_COLUMNS = {"RT": "Ec_RT_eV", "LT": "Ec_LT_eV"}


class EtchSeries:
    """
    Per-device etch-cycle records.

    Parameters
    ----------
    frame : pandas.DataFrame
        Columns ``device_id, design, cycle, Ec_RT_eV, Ec_LT_eV, Q, flag``
        and optionally ``note``. Missing energies and Q values are NaN; a
        non-empty ``flag`` marks a record whose LT value is unreliable (for
        example gas condensation on the sample).

    Raises
    ------
    ValidationError
        If a cycle is negative or not an integer, cycles do not increase
        strictly per device, a record has no mode energy or the design
        label is unknown.
    """

    def __init__(self, frame: pd.DataFrame):
        missing = {"device_id", "cycle"} - set(frame.columns)
        if missing:
            raise ValidationError(f"Missing required columns: {sorted(missing)}")
        data = frame.copy()
        for column in ("Ec_RT_eV", "Ec_LT_eV", "Q"):
            data[column] = pd.to_numeric(data[column], errors="coerce") if column in data else np.nan
        if "design" not in data:
            data["design"] = "other"
        if "flag" not in data:
            data["flag"] = ""
        if "note" not in data:
            data["note"] = ""
        data["device_id"] = data["device_id"].astype(str)
        data["design"] = data["design"].fillna("other").astype(str).str.strip()
        data["flag"] = data["flag"].fillna("").astype(str).str.strip()
        data["note"] = data["note"].fillna("").astype(str)

        cycles = pd.to_numeric(data["cycle"], errors="coerce")
        if cycles.isna().any() or (cycles < 0).any() or not np.all(np.equal(np.mod(cycles, 1), 0)):
            raise ValidationError("etch cycles must be non-negative integers")
        data["cycle"] = cycles.astype(int)

        unknown = sorted(set(data["design"]) - set(DESIGN_LABELS))
        if unknown:
            raise ValidationError(f"unknown design labels: {unknown}")
        empty = data["Ec_RT_eV"].isna() & data["Ec_LT_eV"].isna()
        if empty.any():
            rows = [int(i) for i in np.flatnonzero(empty.to_numpy())]
            raise ValidationError(f"records {rows} carry no mode energy")
        for device, group in data.groupby("device_id", sort=False):
            if not np.all(np.diff(group["cycle"].to_numpy()) > 0):
                raise ValidationError(f"cycles of device {device} are not strictly increasing")

        self._frame = data.reset_index(drop=True)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "EtchSeries":
        return cls(frame)

    @classmethod
    def from_records(cls, records: Iterable[Dict[str, Any]]) -> "EtchSeries":
        return cls(pd.DataFrame(list(records)))

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame.copy()

    @property
    def devices(self) -> List[str]:
        return list(dict.fromkeys(self._frame["device_id"]))

    def __len__(self) -> int:
        return len(self._frame)

    def __str__(self) -> str:
        return f"Etch series : {len(self.devices)} devices, {len(self)} records, cycles {self._frame['cycle'].min()}-{self._frame['cycle'].max()}"


def _energy_column(column: str) -> str:
    key = str(column).upper()
    if key in ENERGY_COLUMNS:
        return ENERGY_COLUMNS[key]
    if column in ENERGY_COLUMNS.values():
        return column
    raise ValidationError(f"unknown energy column: {column!r}")


def _panel_design(frame: pd.DataFrame, exclude_cycles: Iterable[int]) -> Tuple[np.ndarray, List[str]]:
    """Design matrix with one intercept per device, the cycle slope and step terms."""
    devices = list(dict.fromkeys(frame["device_id"]))
    codes = frame["device_id"].map({d: i for i, d in enumerate(devices)}).to_numpy()
    cycles = frame["cycle"].to_numpy(dtype=float)
    columns = [(codes == i).astype(float) for i in range(len(devices))]
    names = [f"offset[{d}]" for d in devices]
    columns.append(cycles)
    names.append("slope")
    for cycle in sorted(set(int(c) for c in exclude_cycles)):
        step = (cycles >= cycle).astype(float)
        within = pd.Series(step).groupby(codes).nunique()
        if within.max() < 2:
            logger.debug("step term for cycle %d is constant within every device; dropped", cycle)
            continue
        columns.append(step)
        names.append(f"step[{cycle}]")
    return np.column_stack(columns), names


def _panel_slope(frame: pd.DataFrame, value: str, exclude_cycles, weights=None) -> Tuple[float, FitResult]:
    design, names = _panel_design(frame, exclude_cycles)
    result = fit_linear(design, frame[value].to_numpy(dtype=float), names=names, weights=weights)
    return float(result.params[names.index("slope")]), result


def fit_shift_per_cycle(
    series: EtchSeries,
    exclude_cycles: Iterable[int] = (),
    column: str = "RT",
    weights: Optional[Sequence[float]] = None,
) -> Tuple[float, FitResult]:
    """
    Mode energy shift per etch cycle.

    Linear regression of ``E_c`` against the cycle index with one intercept
    per device. Each excluded cycle ``c`` adds a free step term
    ``[cycle >= c]`` so that the anomalous transition into ``c`` does not
    enter the slope.

    Parameters
    ----------
    series : EtchSeries
        Etch records.
    exclude_cycles : iterable of int, optional
        Cycles whose incoming shift is anomalous.
    column : {"RT", "LT"}
        Which mode energy to regress.
    weights : sequence of float, optional
        Per-record weights of the records that carry the chosen energy.

    Returns
    -------
    tuple
        ``(slope, FitResult)`` with the slope in eV/cycle, blue shift
        positive. The result names its parameters (``slope``, per-device
        ``offset[...]`` and ``step[...]``).

    Raises
    ------
    DataError
        With fewer than three records.

    Examples
    --------
    >>> slope, result = fit_shift_per_cycle(series, exclude_cycles={1})  # doctest: +SKIP
    >>> round(slope * 1e3, 1)                                             # doctest: +SKIP
    5.1
    """
    value = _energy_column(column)
    frame = series.frame
    frame = frame[frame[value].notna()]
    if len(frame) < 3:
        raise DataError(f"shift regression needs at least 3 records with {value}, got {len(frame)}")
    w = None if weights is None else np.asarray(weights, dtype=float)
    slope, result = _panel_slope(frame, value, exclude_cycles, w)
    logger.info("Shift per cycle (%s): %.3f meV/cycle from %d records", column, slope * 1e3, len(frame))
    return slope, result


def mean_step_shift(series: EtchSeries, exclude_cycles: Iterable[int] = (), column: str = "RT") -> Tuple[float, float]:
    """
    Total shift divided by the number of cycles, averaged over devices.

    Transitions into an excluded cycle are left out of both sums. Returns
    ``(mean, standard error)``; the error is NaN for a single device.
    """
    value = _energy_column(column)
    excluded = set(int(c) for c in exclude_cycles)
    per_device = []
    for _, group in series.frame[lambda f: f[value].notna()].groupby("device_id", sort=False):
        cycles = group["cycle"].to_numpy()
        energies = group[value].to_numpy(dtype=float)
        keep = np.array([c not in excluded for c in cycles[1:]], dtype=bool)
        gaps = np.diff(cycles)[keep]
        if gaps.sum() == 0:
            continue
        per_device.append(float(np.diff(energies)[keep].sum() / gaps.sum()))
    if not per_device:
        raise DataError("no device has two records with a mode energy")
    mean = float(np.mean(per_device))
    error = float(np.std(per_device, ddof=1) / math.sqrt(len(per_device))) if len(per_device) > 1 else math.nan
    return mean, error


def estimate_removal_depth(
    measured_slope: float,
    sensitivity: float,
    measured_err: float = 0.0,
    sensitivity_err: float = 0.0,
) -> Tuple[float, float]:
    """
    Material removed per cycle from the measured shift and the simulated sensitivity.

    Parameters
    ----------
    measured_slope : float
        Measured mode shift in nm/cycle.
    sensitivity : float
        Simulated mode shift per nm of removed material (nm/nm), positive.
    measured_err, sensitivity_err : float, optional
        One-sigma errors propagated to first order.

    Returns
    -------
    tuple of float
        ``(depth nm/cycle, error)``.

    Raises
    ------
    DomainError
        If ``sensitivity <= 0``.

    Examples
    --------
    >>> depth, _ = estimate_removal_depth(2.6, 2.9)
    >>> round(depth, 2)
    0.9
    """
    if not np.isfinite(sensitivity) or sensitivity <= 0:
        raise DomainError(f"sensitivity must be positive, got {sensitivity}")
    ratio = ufloat(float(measured_slope), abs(float(measured_err))) / ufloat(float(sensitivity), abs(float(sensitivity_err)))
    return float(measured_slope) / float(sensitivity), float(ratio.std_dev)


def temperature_offset(series: EtchSeries) -> Tuple[float, float]:
    """
    Mean shift of the mode between room and low temperature.

    Averages ``E_c_LT - E_c_RT`` over records that carry both values and no
    quality flag. Returns ``(offset eV, standard error)``; the error is NaN
    when only one pair exists.

    Raises
    ------
    DataError
        If no usable pair exists.
    """
    frame = series.frame
    paired = frame[frame["Ec_RT_eV"].notna() & frame["Ec_LT_eV"].notna()]
    flagged = paired["flag"] != ""
    if flagged.any():
        logger.warning("Excluding %d flagged records from the temperature offset", int(flagged.sum()))
    paired = paired[~flagged]
    if paired.empty:
        raise DataError("no records carry both RT and LT mode energies")
    differences = (paired["Ec_LT_eV"] - paired["Ec_RT_eV"]).to_numpy(dtype=float)
    offset = float(differences.mean())
    if differences.size == 1:
        logger.warning("Temperature offset from a single pair; its uncertainty is undefined")
        return offset, math.nan
    return offset, float(differences.std(ddof=1) / math.sqrt(differences.size))


def fit_q_trend(series: EtchSeries, exclude_cycles: Iterable[int] = ()) -> Tuple[float, FitResult]:
    """
    Change of Q per etch cycle (per-device intercepts).

    Raises
    ------
    DataError
        With fewer than three Q records.
    """
    frame = series.frame
    frame = frame[frame["Q"].notna()]
    if len(frame) < 3:
        raise DataError(f"Q trend needs at least 3 records with Q, got {len(frame)}")
    slope, result = _panel_slope(frame, "Q", exclude_cycles)
    logger.info("Q trend: %.3f per cycle from %d records", slope, len(frame))
    return slope, result


class CyclePlan(NamedTuple):
    """Etch cycles to reach a target and the detuning left afterwards (eV)."""

    cycles: int
    residual: float
    predicted: float


def predict_cycles_to_target(E_now: float, E_target: float, slope: float) -> CyclePlan:
    """
    Number of etch cycles that brings the mode closest to a target energy.

    ``n = round((E_target - E_now) / slope)`` with halves rounded up, and
    ``residual = E_target - (E_now + n·slope)``.

    Raises
    ------
    PlanningError
        If ``slope <= 0`` or the target lies red of the current mode by
        more than half a step.

    Examples
    --------
    >>> plan = predict_cycles_to_target(1.5400, 1.5530, 0.0051)
    >>> plan.cycles, round(plan.residual * 1e3, 1)
    (3, -2.3)
    """
    if not np.isfinite(slope) or slope <= 0:
        raise PlanningError(f"etching shifts the mode by {slope} eV/cycle; a positive blue shift is required")
    detuning = float(E_target) - float(E_now)
    if detuning < -0.5 * slope:
        raise PlanningError(
            f"target {E_target:.5f} eV lies red of the mode at {E_now:.5f} eV; etching only blue-shifts"
        )
    cycles = max(0, int(math.floor(detuning / slope + 0.5)))
    predicted = float(E_now) + cycles * float(slope)
    return CyclePlan(cycles, float(E_target) - predicted, predicted)


@dataclass
class TuningModel:
    """
    Summary of an etch series.

    ``shift_per_cycle`` excludes the anomalous cycles and
    ``shift_per_cycle_all`` includes them; energies in eV, lengths in nm.
    """

    shift_per_cycle: float
    shift_per_cycle_err: float
    shift_per_cycle_all: float
    shift_per_cycle_all_err: float
    shift_per_cycle_nm: float
    shift_per_cycle_nm_err: float
    mean_step_shift: float
    mean_step_shift_err: float
    removal_per_cycle: Optional[float] = None
    removal_per_cycle_err: Optional[float] = None
    temperature_offset: Optional[float] = None
    temperature_offset_err: Optional[float] = None
    q_slope: Optional[float] = None
    q_slope_err: Optional[float] = None
    reference_energy: float = math.nan
    exclude_cycles: List[int] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def build_tuning_model(
    series: EtchSeries,
    sensitivity: Optional[float] = None,
    sensitivity_err: float = 0.0,
    exclude_cycles: Iterable[int] = (),
    column: str = "RT",
) -> TuningModel:
    """
    Assemble every etch statistic into a :class:`TuningModel`.

    Statistics that lack data (no LT pairs, fewer than three Q values) are
    left as ``None`` with a warning.
    """
    excluded = sorted(set(int(c) for c in exclude_cycles))
    value = _energy_column(column)
    slope, result = fit_shift_per_cycle(series, excluded, column)
    slope_err = float(parameter_uncertainties(result)[result.names.index("slope")])
    slope_all, result_all = fit_shift_per_cycle(series, (), column)
    slope_all_err = float(parameter_uncertainties(result_all)[result_all.names.index("slope")])
    mean_shift, mean_shift_err = mean_step_shift(series, excluded, column)

    reference = float(series.frame[value].mean())
    slope_nm = energy_width_to_nm(reference, slope)
    slope_nm_err = energy_width_to_nm(reference, slope_err)

    model = TuningModel(
        shift_per_cycle=slope,
        shift_per_cycle_err=slope_err,
        shift_per_cycle_all=slope_all,
        shift_per_cycle_all_err=slope_all_err,
        shift_per_cycle_nm=slope_nm,
        shift_per_cycle_nm_err=slope_nm_err,
        mean_step_shift=mean_shift,
        mean_step_shift_err=mean_shift_err,
        reference_energy=reference,
        exclude_cycles=excluded,
    )
    if sensitivity is not None:
        model.removal_per_cycle, model.removal_per_cycle_err = estimate_removal_depth(
            slope_nm, sensitivity, slope_nm_err, sensitivity_err
        )
    try:
        model.temperature_offset, model.temperature_offset_err = temperature_offset(series)
    except DataError as exc:
        logger.warning("Temperature offset not available: %s", exc)
    try:
        q_slope, q_result = fit_q_trend(series, excluded)
        model.q_slope = q_slope
        model.q_slope_err = float(parameter_uncertainties(q_result)[q_result.names.index("slope")])
    except DataError as exc:
        logger.warning("Q trend not available: %s", exc)
    return model


def simulate_etch_series(
    n_devices: int = 10,
    n_cycles: int = 6,
    slope: float = 5.1e-3,
    first_cycle_extra: float = 0.0,
    energy_noise: float = 0.5e-3,
    start_energy: float = 1.548,
    lt_offset: float = 16.4e-3,
    lt_noise: float = 0.5e-3,
    q_start: float = 150.0,
    q_slope: float = -2.6,
    q_noise: float = 1.0,
    rng: Optional[np.random.Generator] = None,
) -> EtchSeries:
    """
    Synthetic etch series: linear blue shift plus an optional extra jump at cycle 1.

    Devices cycle through the design labels d1, d2, d3 with starting energies
    spread by a few meV.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    records = []
    for device in range(n_devices):
        design = DESIGN_LABELS[device % 3]
        base = start_energy + 2e-3 * (device % 3) + rng.normal(0.0, 1e-3)
        for cycle in range(n_cycles):
            rt = base + slope * cycle + (first_cycle_extra if cycle >= 1 else 0.0) + rng.normal(0.0, energy_noise)
            records.append(
                {
                    "device_id": f"cbr{device:02d}",
                    "design": design,
                    "cycle": cycle,
                    "Ec_RT_eV": rt,
                    "Ec_LT_eV": rt + lt_offset + rng.normal(0.0, lt_noise),
                    "Q": q_start + q_slope * cycle + rng.normal(0.0, q_noise),
                    "flag": "",
                }
            )
    return EtchSeries.from_records(records)
