"""Unit tests for wavelength, energy and time conversions."""

import numpy as np
import pytest

from cbr_tuning.constants import HC_EV_NM
from cbr_tuning.conversion import (
    PhotonEnergy,
    energy_width_to_nm,
    ev_to_nm,
    natural_linewidth,
    nm_to_ev,
    stage_delay,
)
from cbr_tuning.exceptions import DomainError


class TestPhotonEnergy:
    """Test cases for PhotonEnergy."""

    def test_initialization(self):
        """Test PhotonEnergy keeps the value and derives the wavelength."""
        energy = PhotonEnergy(1.55)
        assert energy.value == 1.55
        assert energy.wavelength_nm == pytest.approx(HC_EV_NM / 1.55)
        assert repr(energy) == "PhotonEnergy(1.55)"

    @pytest.mark.parametrize("value", [0.0, -1.0, float("nan"), float("inf")])
    def test_invalid_initialization(self, value):
        """Test PhotonEnergy rejects non-positive and non-finite values."""
        with pytest.raises(DomainError):
            PhotonEnergy(value)

    def test_arithmetic_gives_float(self):
        """Test arithmetic falls back to a plain float."""
        difference = PhotonEnergy(1.55) - PhotonEnergy(1.60)
        assert type(difference) is float
        assert difference == pytest.approx(-0.05)


class TestConversions:
    """Test cases for the conversion functions."""

    def test_nm_to_ev_scalar(self):
        """Test 800 nm is 1.54981 eV."""
        energy = nm_to_ev(800.0)
        assert isinstance(energy, PhotonEnergy)
        assert energy == pytest.approx(1.54981, abs=1e-5)

    def test_nm_to_ev_array(self):
        """Test arrays are converted element-wise."""
        energies = nm_to_ev(np.array([780.0, 800.0]))
        assert isinstance(energies, np.ndarray)
        np.testing.assert_allclose(energies, HC_EV_NM / np.array([780.0, 800.0]))

    def test_inverse(self):
        """Test ev_to_nm undoes nm_to_ev."""
        wavelengths = np.linspace(700.0, 900.0, 11)
        np.testing.assert_allclose(ev_to_nm(nm_to_ev(wavelengths)), wavelengths, rtol=1e-12)
        assert ev_to_nm(nm_to_ev(784.0)) == pytest.approx(784.0)

    @pytest.mark.parametrize("function", [nm_to_ev, ev_to_nm])
    def test_domain(self, function):
        """Test non-positive inputs raise DomainError."""
        with pytest.raises(DomainError):
            function(0.0)
        with pytest.raises(DomainError):
            function(np.array([780.0, -1.0]))

    def test_energy_width_to_nm(self):
        """Test a 5.1 meV shift near 1.55 eV is about 2.6 nm."""
        assert energy_width_to_nm(1.55, 5.1e-3) == pytest.approx(2.63, abs=0.01)
        with pytest.raises(DomainError):
            energy_width_to_nm(0.0, 1e-3)

    def test_natural_linewidth(self):
        """Test a 53 ps lifetime gives 12.42 µeV."""
        assert natural_linewidth(53.0) * 1e6 == pytest.approx(12.42, abs=0.01)
        with pytest.raises(DomainError):
            natural_linewidth(0.0)

    def test_stage_delay(self):
        """Test the double-pass delay of a piezo step."""
        # 20 nm displacement, 40 nm path difference
        assert stage_delay(20.0) == pytest.approx(40e-9 / 299792458.0 * 1e12)
        np.testing.assert_allclose(stage_delay(np.array([0.0, 150e3])), [0.0, 1.0006922], rtol=1e-6)
