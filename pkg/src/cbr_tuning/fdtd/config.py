"""
Numerical settings of the FDTD engine.

Units
-----
The solver works in normalised units: ``c = ε0 = μ0 = 1`` and lengths in
nm, so times are in nm of light travel and a photon energy ``E`` (eV)
corresponds to ``ω = 2πE/hc`` (rad/nm).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from ..constants import HC_EV_NM
from ..exceptions import ValidationError

logger = logging.getLogger(__name__)

# Default DFT band (eV) and number of samples
DEFAULT_BAND_EV = (1.45, 1.70)
DEFAULT_FREQUENCY_SAMPLES = 161
MIN_PML_CELLS = 8
COURANT_LIMIT_2D = 1.0 / math.sqrt(2.0)


def default_frequencies(lower: float = DEFAULT_BAND_EV[0], upper: float = DEFAULT_BAND_EV[1], samples: int = DEFAULT_FREQUENCY_SAMPLES) -> Tuple[float, ...]:
    """Uniform photon energies (eV) for the DFT monitors."""
    return tuple(float(e) for e in np.linspace(lower, upper, samples))


class Boundary(str, Enum):
    """Outer boundary of the domain."""

    OPEN = "open"  # CPML on every open side
    CLOSED = "closed"  # perfect conductor on every side, no CPML

    @classmethod
    def parse(cls, text) -> "Boundary":
        try:
            return text if isinstance(text, cls) else cls(str(text).lower())
        except ValueError:
            raise ValidationError(f"unknown boundary {text!r}; expected 'open' or 'closed'")


@dataclass(frozen=True)
class PmlConfig:
    """
    Convolutional PML grading.

    ``σ`` and ``κ`` are graded as ``ρ^order`` from the interior interface
    (``ρ = 0``) to the outer wall (``ρ = 1``); ``α`` falls linearly to zero.
    ``alpha_max`` is in S/m and converted with ε0.
    """

    cells: int = 12
    order: float = 3.0
    kappa_max: float = 5.0
    alpha_max: float = 0.05
    reflection: float = 1e-8

    def __post_init__(self) -> None:
        if self.cells < MIN_PML_CELLS:
            raise ValidationError(f"PML needs at least {MIN_PML_CELLS} cells, got {self.cells}")
        if self.order < 1 or self.kappa_max < 1 or self.alpha_max < 0:
            raise ValidationError("PML grading order and kappa_max must be >= 1, alpha_max >= 0")
        if not 0 < self.reflection < 1:
            raise ValidationError(f"PML reflection target must lie in (0, 1), got {self.reflection}")


@dataclass(frozen=True)
class SimulationConfig:
    """
    Solver settings.

    Parameters
    ----------
    grid_resolution : int
        Cells per wavelength at the highest sampled energy in the densest
        dielectric (default 20).
    courant_factor : float
        Fraction of the 2D Courant limit (default 0.95). Values ``>= 1``
        are rejected unless ``strict_courant`` is False.
    runtime : float
        Run cap in optical periods of the source centre frequency.
    pml : PmlConfig
        Absorbing boundary settings.
    frequency_samples : tuple of float
        DFT photon energies in eV (default 161 over 1.45-1.70 eV).
    decay_threshold : float
        The run stops once the field energy falls below this fraction of
        its peak after the source has switched off.
    dft_stride : int
        DFT accumulation interval in steps.
    air_gap_nm, margin_nm : float
        Air above the membrane and lateral padding beyond the outermost
        ring, both up to the PML.
    mirror : bool
        Exploit the mirror plane on the resonator axis (half domain).
    boundary : Boundary
        ``open`` (CPML) or ``closed`` (perfect conductor everywhere).
    stripes : int
        Number of horizontal stripes updated in parallel threads.
    box_half_cells : int
        Half size of the flux box around a dipole, in cells.
    check_interval : int
        Steps between energy checks.
    """

    grid_resolution: int = 20
    courant_factor: float = 0.95
    runtime: float = 600.0
    pml: PmlConfig = field(default_factory=PmlConfig)
    frequency_samples: Tuple[float, ...] = field(default_factory=default_frequencies)
    decay_threshold: float = 1e-5
    dft_stride: int = 10
    air_gap_nm: float = 400.0
    margin_nm: float = 300.0
    mirror: bool = True
    boundary: Boundary = Boundary.OPEN
    stripes: int = 1
    box_half_cells: int = 2
    check_interval: int = 10
    strict_courant: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "boundary", Boundary.parse(self.boundary))
        object.__setattr__(self, "frequency_samples", tuple(float(e) for e in self.frequency_samples))
        if int(self.grid_resolution) < 4:
            raise ValidationError(f"grid resolution must be at least 4 cells per wavelength, got {self.grid_resolution}")
        if self.courant_factor <= 0:
            raise ValidationError(f"Courant factor must be positive, got {self.courant_factor}")
        if self.courant_factor >= 1.0:
            if self.strict_courant:
                raise ValidationError(f"Courant factor must be below 1, got {self.courant_factor}")
            logger.warning("Courant factor %.3f exceeds the 2D stability limit", self.courant_factor)
        if not self.frequency_samples or min(self.frequency_samples) <= 0:
            raise ValidationError("frequency samples must be a non-empty list of positive energies")
        if self.runtime <= 0 or not 0 < self.decay_threshold < 1:
            raise ValidationError("runtime must be positive and decay_threshold in (0, 1)")
        if self.dft_stride < 1 or self.stripes < 1 or self.check_interval < 1 or self.box_half_cells < 1:
            raise ValidationError("dft_stride, stripes, check_interval and box_half_cells must be >= 1")
        if self.air_gap_nm <= 0 or self.margin_nm < 0:
            raise ValidationError("air gap must be positive and margin non-negative")

    @property
    def energies(self) -> np.ndarray:
        return np.asarray(self.frequency_samples, dtype=float)

    def cell_size(self, n_max: float) -> float:
        """Grid spacing in nm for a domain whose densest dielectric has index ``n_max``."""
        shortest = HC_EV_NM / max(self.frequency_samples)
        return shortest / (max(n_max, 1.0) * self.grid_resolution)

    def time_step(self, dx: float) -> float:
        return self.courant_factor * COURANT_LIMIT_2D * dx
