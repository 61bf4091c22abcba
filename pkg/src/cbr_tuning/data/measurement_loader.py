import logging
import os
from typing import Any, Callable, Dict, Hashable, Optional, Tuple

from .utils import (
    SpectrumFormat,
    _load_coincidence_histogram,
    _load_decay_histogram,
    _load_etch_series,
    _load_fringe_scan,
    _load_irf,
    _load_spectrum,
    _load_visibility_trace,
)

logger = logging.getLogger(__name__)


def load_spectrum(path, fmt: Optional[SpectrumFormat] = None):
    """Load a spectrum CSV; see :func:`cbr_tuning.data.utils._load_spectrum`."""
    return _load_spectrum(path, fmt)


def load_decay_histogram(path, bin_width: Optional[float] = None):
    return _load_decay_histogram(path, bin_width)


def load_irf(path):
    return _load_irf(path)


def load_coincidence_histogram(path, rep_period: Optional[float] = None):
    return _load_coincidence_histogram(path, rep_period)


def load_fringe_scan(path, stage_delay: Optional[float] = None):
    return _load_fringe_scan(path, stage_delay)


def load_visibility_trace(path):
    return _load_visibility_trace(path)


def load_etch_series(path):
    return _load_etch_series(path)


_READERS: Dict[str, Callable[..., Any]] = {
    "spectrum": load_spectrum,
    "decay": load_decay_histogram,
    "irf": load_irf,
    "coincidence": load_coincidence_histogram,
    "fringe": load_fringe_scan,
    "visibility": load_visibility_trace,
    "etch": load_etch_series,
}


class MeasurementLoader:
    """
    Measurement file loader with caching.

    Every input kind has its own reader; the loader keys results on the
    kind, the absolute path and the reader options, so repeated analyses
    of the same file (for example a reference spectrum shared by every
    etch cycle) parse it once.

    Parameters
    ----------
    base_dir : str, optional
        Directory relative paths are resolved against. Defaults to the
        current working directory at call time.

    Examples
    --------
    >>> loader = MeasurementLoader()
    >>> ref = loader.load("spectrum", "membrane.csv")
    >>> ref2 = loader.load("spectrum", "membrane.csv")  # Returns cached data
    >>> assert ref is ref2  # Same object reference

    >>> hist = loader.load("coincidence", "g2.csv", rep_period=12.5)
    >>> print(loader)
    Measurement cache : 2 entries (spectrum=1, coincidence=1)
    """

    kinds = tuple(_READERS)

    def __init__(self, base_dir: Optional[str] = None):
        self.base_dir = base_dir
        self._data: Dict[Tuple[str, str, Hashable], Any] = {}

    def _key(self, kind: str, path, options: Dict[str, Any]) -> Tuple[str, str, Hashable]:
        if kind not in _READERS:
            raise ValueError(f"unknown measurement kind {kind!r}; expected one of {', '.join(self.kinds)}")
        path = os.fspath(path)
        if self.base_dir is not None and not os.path.isabs(path):
            path = os.path.join(self.base_dir, path)
        return kind, os.path.abspath(path), tuple(sorted(options.items()))

    def load(self, kind: str, path, **options):
        """
        Load and return one measurement file, using the cache.

        Parameters
        ----------
        kind : str
            One of ``spectrum, decay, irf, coincidence, fringe, visibility,
            etch``.
        path : str or os.PathLike
            File to read.
        **options
            Passed to the reader (``fmt``, ``bin_width``, ``rep_period``,
            ``stage_delay``).

        Raises
        ------
        ValueError
            If ``kind`` is unknown.
        """
        key = self._key(kind, path, options)
        if key not in self._data:
            self._data[key] = _READERS[kind](key[1], **options)
        else:
            logger.debug("Using cached %s from: %s", kind, key[1])
        return self._data[key]

    def reload(self, kind: str, path, **options):
        """Force a reload from disk, bypassing the cache."""
        key = self._key(kind, path, options)
        self._data.pop(key, None)
        return self.load(kind, path, **options)

    def clear(self) -> None:
        self._data.clear()

    def __len__(self) -> int:
        return len(self._data)

    def __str__(self):
        counts: Dict[str, int] = {}
        for kind, _, _ in self._data:
            counts[kind] = counts.get(kind, 0) + 1
        detail = ", ".join(f"{k}={n}" for k, n in counts.items())
        return f"Measurement cache : {len(self._data)} entries ({detail})"
