# ===================== UTILITY FUNCTIONS =====================

import json
from typing import Any

import numpy as np

from .exceptions import ValidationError

UNIFORM_RTOL = 1e-6


def safe_get(data, path, default=None):
    """
    Safely extract nested dictionary values with dot notation.

    Navigates through nested dictionaries using a dot-separated path string.
    Returns the default value if any key in the path doesn't exist or if
    the data structure is invalid.

    Parameters
    ----------
    data : dict
        The dictionary to extract from
    path : str
        Dot-separated path to the value (e.g., 'fano.window')
    default : any, optional
        Default value to return if path doesn't exist, by default None

    Returns
    -------
    any
        The value at the specified path, or default if not found

    Examples
    --------
    >>> config = {'geometry': {'period_nm': 380.0}}
    >>> safe_get(config, 'geometry.period_nm', 0.0)
    380.0
    >>> safe_get(config, 'geometry.n_rings', 6)
    6
    >>> safe_get(None, 'any.path', 'fallback')
    'fallback'
    """
    try:
        result = data
        for key in path.split('.'):
            result = result[key]
        return result if result is not None else default
    except (KeyError, TypeError, AttributeError, IndexError):
        return default


def uniform_spacing(values: np.ndarray, what: str = "axis") -> float:
    """
    Spacing of a uniformly increasing grid.

    Raises
    ------
    ValidationError
        If the grid has fewer than two points or is not uniform.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValidationError(f"{what} needs at least two bins")
    steps = np.diff(values)
    width = float(np.mean(steps))
    if width <= 0 or not np.allclose(steps, width, rtol=UNIFORM_RTOL, atol=0.0):
        raise ValidationError(f"{what} bins are not uniform and increasing")
    return width


def to_builtin(value: Any) -> Any:
    """Recursively convert numpy scalars and arrays into JSON-compatible objects."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    if hasattr(value, "value") and hasattr(value, "name"):
        return value.value
    return value


def dumps(record: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_builtin(record), sort_keys=True, indent=2) + "\n"
