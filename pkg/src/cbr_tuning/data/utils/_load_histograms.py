import os
from typing import Optional

import numpy as np

from ...constants import REP_PERIOD_NS
from ...correlation import CoincidenceHistogram
from ...decay import DecayHistogram, Irf
from ...exceptions import ValidationError
from ._read_table import _header_float, _read_table

DECAY_COLUMNS = ("time_ps", "counts")
COINCIDENCE_COLUMNS = ("delay_ns", "counts")


def _integer_counts(df, what: str) -> np.ndarray:
    counts = df["counts"].to_numpy(dtype=float)
    bad = (counts < 0) | (counts != np.round(counts))
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise ValidationError(
            f"line {int(df['_line'].iloc[index])}: {what} counts must be non-negative integers, got {counts[index]}"
        )
    return counts


def _load_decay_histogram(path, bin_width: Optional[float] = None) -> DecayHistogram:
    """
    Load a time-resolved photoluminescence histogram.

    The file holds ``time_ps,counts`` rows and may declare
    ``# bin_width_ps=...``; a declared width must match the bin spacing.

    Parameters
    ----------
    path : str or os.PathLike
        CSV file.
    bin_width : float, optional
        Overrides the header bin width (ps).

    Returns
    -------
    DecayHistogram

    Raises
    ------
    ParseError
        If a row is malformed.
    ValidationError
        If counts are negative or fractional or the bins are not uniform.
    """
    headers, df = _read_table(path, DECAY_COLUMNS, "decay histogram")
    width = bin_width if bin_width is not None else _header_float(headers, "bin_width_ps")
    counts = _integer_counts(df, "decay histogram")
    label = headers.get("label", os.path.basename(os.fspath(path)))
    return DecayHistogram(df["time_ps"].to_numpy(dtype=float), counts, width, label)


def _load_irf(path) -> Irf:
    """Load an instrument response histogram (same schema as decay files) as unit-sum weights."""
    headers, df = _read_table(path, DECAY_COLUMNS, "IRF histogram")
    counts = _integer_counts(df, "IRF histogram")
    return Irf(df["time_ps"].to_numpy(dtype=float), counts, _header_float(headers, "bin_width_ps"))


def _load_coincidence_histogram(path, rep_period: Optional[float] = None) -> CoincidenceHistogram:
    """
    Load a start-stop coincidence histogram with ``delay_ns,counts`` rows.

    The repetition period is taken from ``rep_period``, then from a
    ``# rep_period_ns=`` header, then defaults to 12.5 ns.
    """
    headers, df = _read_table(path, COINCIDENCE_COLUMNS, "coincidence histogram")
    period = rep_period if rep_period is not None else _header_float(headers, "rep_period_ns", REP_PERIOD_NS)
    counts = _integer_counts(df, "coincidence histogram")
    label = headers.get("label", os.path.basename(os.fspath(path)))
    return CoincidenceHistogram(df["delay_ns"].to_numpy(dtype=float), counts, period, label)
