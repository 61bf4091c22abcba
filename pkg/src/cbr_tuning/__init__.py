"""
cbr-tuning: etch-tuning toolkit for circular Bragg resonators.

Spectroscopy analysis (Fano fits, lifetimes, g²(0), coherence, etch
statistics) and a 2D FDTD model of the resonator cross-section.
"""

# Version management with fallback
try:
    from ._version import __version__
except ImportError:
    # Fallback version when setuptools_scm hasn't run yet
    try:
        from importlib.metadata import version
        __version__ = version("cbr-tuning")
    except Exception:
        # Ultimate fallback
        __version__ = "unknown"

# Main exports
from .conversion import (
    PhotonEnergy,
    ev_to_nm,
    nm_to_ev,
    natural_linewidth,
)

from .spectra import (
    AxisKind,
    Spectrum,
    relative_reflectance,
    tpe_laser_energy,
)

from .fitting import (
    FitData,
    FitModel,
    FitResult,
    least_squares_fit,
    parameter_uncertainties,
)

from .lineshapes import (
    FanoParams,
    VoigtParams,
    fano_value,
    fit_fano,
    quality_factor,
    voigt_fwhm,
    voigt_value,
)

from .decay import (
    DecayHistogram,
    DecayKind,
    DecayModel,
    Irf,
    convolve_model_with_irf,
    fit_lifetime,
    fit_purcell_vs_detuning,
    purcell_factor,
)

from .correlation import (
    CoincidenceHistogram,
    G2Result,
    g2_zero,
    locate_peaks,
)

from .coherence import (
    CoherenceResult,
    FringeScan,
    VisibilityTrace,
    fit_coherence,
    fringe_visibility,
)

from .etch import (
    EtchSeries,
    TuningModel,
    build_tuning_model,
    estimate_removal_depth,
    fit_q_trend,
    fit_shift_per_cycle,
    predict_cycles_to_target,
)

from .exceptions import (
    CbrError,
    DomainError,
    FitError,
    ParseError,
    ValidationError,
)

# Convenience imports
from .constants import (
    CONSTANTS,
    HC_EV_NM,
    HBAR_EV_S,
)

__all__ = [
    "__version__",
    # Units and spectra
    "PhotonEnergy",
    "ev_to_nm",
    "nm_to_ev",
    "natural_linewidth",
    "AxisKind",
    "Spectrum",
    "relative_reflectance",
    "tpe_laser_energy",
    # Fitting
    "FitData",
    "FitModel",
    "FitResult",
    "least_squares_fit",
    "parameter_uncertainties",
    "FanoParams",
    "VoigtParams",
    "fano_value",
    "fit_fano",
    "quality_factor",
    "voigt_fwhm",
    "voigt_value",
    # Time-resolved analysis
    "DecayHistogram",
    "DecayKind",
    "DecayModel",
    "Irf",
    "convolve_model_with_irf",
    "fit_lifetime",
    "fit_purcell_vs_detuning",
    "purcell_factor",
    "CoincidenceHistogram",
    "G2Result",
    "g2_zero",
    "locate_peaks",
    "CoherenceResult",
    "FringeScan",
    "VisibilityTrace",
    "fit_coherence",
    "fringe_visibility",
    # Etch model
    "EtchSeries",
    "TuningModel",
    "build_tuning_model",
    "estimate_removal_depth",
    "fit_q_trend",
    "fit_shift_per_cycle",
    "predict_cycles_to_target",
    # Exceptions
    "CbrError",
    "DomainError",
    "FitError",
    "ParseError",
    "ValidationError",
    # Constants
    "CONSTANTS",
    "HC_EV_NM",
    "HBAR_EV_S",
]
