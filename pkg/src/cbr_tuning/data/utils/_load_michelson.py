from typing import Optional

import numpy as np

from ...coherence import FringeScan, VisibilityTrace
from ...exceptions import ParseError
from ._read_table import _header_float, _read_table

FRINGE_COLUMNS = ("position_nm", "intensity")
VISIBILITY_COLUMNS = ("delay_ps", "visibility", "err")


def _load_fringe_scan(path, stage_delay: Optional[float] = None) -> FringeScan:
    """
    Load one piezo scan ``position_nm,intensity`` taken at a fixed stage delay.

    Raises
    ------
    ParseError
        If neither ``stage_delay`` nor a ``# stage_delay_ps=`` header gives
        the coarse delay.
    """
    headers, df = _read_table(path, FRINGE_COLUMNS, "fringe scan")
    delay = stage_delay if stage_delay is not None else _header_float(headers, "stage_delay_ps")
    if delay is None:
        raise ParseError(f"fringe scan {path} has no '# stage_delay_ps=' header", line=1)
    return FringeScan(df["position_nm"].to_numpy(dtype=float), df["intensity"].to_numpy(dtype=float), delay)


def _load_visibility_trace(path) -> VisibilityTrace:
    """Load ``delay_ps,visibility,err`` rows; a missing ``err`` column means unweighted points."""
    _, df = _read_table(path, VISIBILITY_COLUMNS, "visibility trace", optional=("err",))
    errors = df["err"].to_numpy(dtype=float)
    errors = None if np.all(np.isnan(errors)) else np.nan_to_num(errors, nan=0.0)
    order = np.argsort(df["delay_ps"].to_numpy(dtype=float), kind="stable")
    return VisibilityTrace(
        df["delay_ps"].to_numpy(dtype=float)[order],
        df["visibility"].to_numpy(dtype=float)[order],
        None if errors is None else errors[order],
    )
