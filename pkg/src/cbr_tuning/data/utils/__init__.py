from ._load_etch_series import _load_etch_series
from ._load_histograms import _load_coincidence_histogram, _load_decay_histogram, _load_irf
from ._load_michelson import _load_fringe_scan, _load_visibility_trace
from ._load_spectrum import SpectrumFormat, _load_spectrum, _save_spectrum
