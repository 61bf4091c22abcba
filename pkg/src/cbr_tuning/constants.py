"""Constants for cbr-tuning."""

from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Physical constants used throughout the toolkit.

    Attributes
    ----------
    hc : float
        Planck constant times speed of light in eV·nm.
    hbar : float
        Reduced Planck constant in eV·s.
    c : float
        Speed of light in vacuum in m/s.
    eps0 : float
        Vacuum permittivity in F/m.
    mu0 : float
        Vacuum permeability in H/m.
    """

    hc: float = 1239.84198
    hbar: float = 6.582119569e-16
    c: float = 299792458.0
    eps0: float = 8.8541878128e-12
    mu0: float = 1.25663706212e-6


CONSTANTS = PhysicalConstants()

# Convenience aliases
HC_EV_NM = CONSTANTS.hc
HBAR_EV_S = CONSTANTS.hbar
HBAR_EV_PS = CONSTANTS.hbar * 1e12
C_M_PER_S = CONSTANTS.c
EPS0 = CONSTANTS.eps0
MU0 = CONSTANTS.mu0
ETA0 = (MU0 / EPS0) ** 0.5

# Bulk lifetimes used as Purcell references (ps)
BULK_TAU_X_PS = 230.0
BULK_TAU_XX_PS = 120.0

# Photon correlation defaults (ns)
REP_PERIOD_NS = 12.5
G2_WINDOW_NS = 2.0

# Michelson piezo step (nm)
PIEZO_STEP_NM = 20.0

# Collection optics
COLLECTION_NA = 0.65

# Etch step of the simulated sweep (nm) and number of steps
ETCH_STEP_NM = 1.5
ETCH_SWEEP_STEPS = 14

# Systematic error of Q from the choice of fit range
Q_FIT_RANGE_SYSTEMATIC = 2.0

# Gold optical constants in the 700-900 nm band: (energy eV, n, k)
GOLD_OPTICAL_CONSTANTS: Tuple[Tuple[float, float, float], ...] = (
    (1.39, 0.17, 5.663),
    (1.51, 0.16, 5.083),
    (1.64, 0.14, 4.542),
    (1.76, 0.13, 4.103),
    (1.88, 0.14, 3.697),
)

# Etch-series design labels
DESIGN_LABELS = ("d1", "d2", "d3", "other")
