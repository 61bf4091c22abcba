from .measurement_loader import (
    MeasurementLoader,
    load_coincidence_histogram,
    load_decay_histogram,
    load_etch_series,
    load_fringe_scan,
    load_irf,
    load_spectrum,
    load_visibility_trace,
)
from .utils import SpectrumFormat
from .utils import _save_spectrum as save_spectrum

__all__ = [
    "MeasurementLoader",
    "SpectrumFormat",
    "load_spectrum",
    "save_spectrum",
    "load_decay_histogram",
    "load_irf",
    "load_coincidence_histogram",
    "load_fringe_scan",
    "load_visibility_trace",
    "load_etch_series",
]
