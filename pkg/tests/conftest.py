"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from cbr_tuning.decay import DecayModel, Irf
from cbr_tuning.fdtd import CbrGeometry, PmlConfig, SimulationConfig, default_frequencies
from cbr_tuning.lineshapes import FanoParams, fano_value
from cbr_tuning.spectra import AxisKind, sample_function


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def fano_params():
    """Fano dip close to the measured resonances."""
    return FanoParams(A=0.25, B=0.75, q=-0.3, E_c=1.548, gamma_c=0.0102)


@pytest.fixture
def fano_spectrum(fano_params):
    """Noiseless Fano reflectance dip on an energy axis."""
    return sample_function(lambda e: fano_value(e, fano_params), 1.50, 1.60, 401, AxisKind.ENERGY, "synthetic dip")


@pytest.fixture
def decay_grid():
    """4 ps bins over 2 ns."""
    return 4.0 * np.arange(500)


@pytest.fixture
def gaussian_irf(decay_grid):
    """100 ps FWHM Gaussian IRF peaked at 200 ps."""
    return Irf.gaussian(100.0, decay_grid, center=200.0)


@pytest.fixture
def single_decay():
    """230 ps exciton decay starting at 200 ps."""
    return DecayModel.single(1.0, 230.0, t0=200.0, background=0.0)


@pytest.fixture
def small_geometry():
    """Two-ring resonator for quick solver runs."""
    return CbrGeometry(n_rings=2)


@pytest.fixture
def small_config():
    """Coarse, short solver settings for property tests."""
    return SimulationConfig(
        grid_resolution=8,
        runtime=60,
        pml=PmlConfig(cells=8),
        frequency_samples=default_frequencies(1.50, 1.65, 7),
        air_gap_nm=300.0,
        margin_nm=200.0,
        decay_threshold=1e-3,
    )
