"""Unit tests for spectra and relative reflectance."""

import numpy as np
import pytest

from cbr_tuning.constants import HC_EV_NM
from cbr_tuning.exceptions import (
    DomainError,
    ReferenceDivisionError,
    ShapeError,
    ValidationError,
)
from cbr_tuning.spectra import (
    AxisKind,
    Spectrum,
    relative_reflectance,
    sample_function,
    tpe_laser_energy,
)


@pytest.fixture
def wavelength_spectrum():
    return Spectrum([780.0, 790.0, 800.0, 810.0], [1.0, 2.0, 3.0, 4.0], AxisKind.WAVELENGTH, "cbr")


class TestAxisKind:
    """Test cases for AxisKind."""

    def test_parse(self):
        """Test parsing of axis kind names."""
        assert AxisKind.parse("energy") is AxisKind.ENERGY
        assert AxisKind.parse("WAVELENGTH") is AxisKind.WAVELENGTH
        assert AxisKind.ENERGY.unit == "eV"
        assert AxisKind.WAVELENGTH.unit == "nm"

    def test_parse_unknown(self):
        """Test unknown names raise ValidationError."""
        with pytest.raises(ValidationError):
            AxisKind.parse("frequency")


class TestSpectrum:
    """Test cases for Spectrum."""

    def test_initialization(self, wavelength_spectrum):
        """Test Spectrum stores read-only arrays."""
        assert len(wavelength_spectrum) == 4
        assert wavelength_spectrum.bounds == (780.0, 810.0)
        with pytest.raises(ValueError):
            wavelength_spectrum.intensity[0] = 5.0

    @pytest.mark.parametrize(
        "axis, intensity",
        [
            ([1.0, 1.0, 2.0], [1.0, 1.0, 1.0]),  # not monotone
            ([1.0, 2.0, 3.0], [1.0, -0.1, 1.0]),  # negative
            ([1.0, 2.0, 3.0], [1.0, np.nan, 1.0]),  # non-finite
            ([1.0], [1.0]),  # single sample
            ([-1.0, 1.0, 2.0], [1.0, 1.0, 1.0]),  # non-positive axis
            ([1.0, 2.0], [1.0, 1.0, 1.0]),  # length mismatch
        ],
    )
    def test_invalid_initialization(self, axis, intensity):
        """Test invalid spectra raise ValidationError."""
        with pytest.raises(ValidationError):
            Spectrum(axis, intensity, AxisKind.ENERGY)

    def test_descending_axis_allowed(self):
        """Test a strictly decreasing axis is accepted and sorted on request."""
        spectrum = Spectrum([3.0, 2.0, 1.0], [1.0, 2.0, 3.0])
        assert not spectrum.ascending
        np.testing.assert_array_equal(spectrum.sorted().intensity, [3.0, 2.0, 1.0])

    def test_to_energy(self, wavelength_spectrum):
        """Test conversion to an ascending energy axis."""
        energy = wavelength_spectrum.to_energy()
        assert energy.axis_kind is AxisKind.ENERGY
        assert energy.ascending
        np.testing.assert_allclose(energy.axis, HC_EV_NM / np.array([810.0, 800.0, 790.0, 780.0]))
        np.testing.assert_array_equal(energy.intensity, [4.0, 3.0, 2.0, 1.0])
        np.testing.assert_allclose(energy.to_wavelength().axis, wavelength_spectrum.axis)

    def test_crop(self, wavelength_spectrum):
        """Test cropping keeps the inclusive range."""
        cropped = wavelength_spectrum.crop(790.0, 800.0)
        np.testing.assert_array_equal(cropped.axis, [790.0, 800.0])
        with pytest.raises(ShapeError):
            wavelength_spectrum.crop(791.0, 799.0)

    def test_resample(self, wavelength_spectrum):
        """Test linear interpolation inside the sampled range."""
        resampled = wavelength_spectrum.resample([785.0, 805.0])
        np.testing.assert_allclose(resampled.intensity, [1.5, 3.5])
        with pytest.raises(ShapeError):
            wavelength_spectrum.resample([770.0, 790.0])

    def test_string_representation(self, wavelength_spectrum):
        """Test the summary string."""
        assert str(wavelength_spectrum) == "Spectrum 'cbr' : 4 samples, 780-810 nm"

    def test_sample_function(self):
        """Test sampling a function on a uniform axis."""
        spectrum = sample_function(lambda e: e**2, 1.0, 2.0, 11)
        assert len(spectrum) == 11
        assert spectrum.intensity[-1] == pytest.approx(4.0)


class TestRelativeReflectance:
    """Test cases for relative_reflectance."""

    def test_identity(self, wavelength_spectrum):
        """Test a spectrum over itself is unity."""
        ratio = relative_reflectance(wavelength_spectrum, wavelength_spectrum)
        np.testing.assert_allclose(ratio.intensity, 1.0)

    def test_ratio(self, wavelength_spectrum):
        """Test the pointwise ratio on a common grid."""
        reference = Spectrum(wavelength_spectrum.axis, [2.0, 2.0, 2.0, 2.0], AxisKind.WAVELENGTH, "ref")
        ratio = relative_reflectance(wavelength_spectrum, reference)
        np.testing.assert_allclose(ratio.intensity, [0.5, 1.0, 1.5, 2.0])
        assert ratio.label == "cbr / ref"

    def test_zero_reference(self, wavelength_spectrum):
        """Test a zero reference sample reports its index."""
        reference = Spectrum(wavelength_spectrum.axis, [2.0, 2.0, 0.0, 2.0], AxisKind.WAVELENGTH)
        with pytest.raises(ReferenceDivisionError) as info:
            relative_reflectance(wavelength_spectrum, reference)
        assert info.value.index == 2

    def test_resampled_reference(self, wavelength_spectrum):
        """Test a reference on another grid is interpolated onto the overlap."""
        reference = Spectrum([775.0, 795.0, 805.0], [2.0, 2.0, 2.0], AxisKind.WAVELENGTH)
        ratio = relative_reflectance(wavelength_spectrum, reference)
        np.testing.assert_array_equal(ratio.axis, [780.0, 790.0, 800.0])
        np.testing.assert_allclose(ratio.intensity, [0.5, 1.0, 1.5])
        with pytest.raises(ShapeError):
            relative_reflectance(wavelength_spectrum, reference, resample=False)

    def test_no_overlap(self, wavelength_spectrum):
        """Test disjoint ranges raise ShapeError."""
        reference = Spectrum([900.0, 910.0], [1.0, 1.0], AxisKind.WAVELENGTH)
        with pytest.raises(ShapeError):
            relative_reflectance(wavelength_spectrum, reference)

    def test_mixed_axis_kinds(self, wavelength_spectrum):
        """Test an energy-axis reference is converted to the measurement axis."""
        reference = wavelength_spectrum.to_energy()
        ratio = relative_reflectance(wavelength_spectrum, reference)
        np.testing.assert_allclose(ratio.intensity, 1.0)


class TestTpeLaserEnergy:
    """Test cases for tpe_laser_energy."""

    def test_value(self):
        """Test the laser sits half the binding energy below the exciton."""
        assert tpe_laser_energy(1.581, 3.8e-3) == pytest.approx(1.5791)

    def test_domain(self):
        """Test invalid inputs raise DomainError."""
        with pytest.raises(DomainError):
            tpe_laser_energy(0.0, 1e-3)
        with pytest.raises(DomainError):
            tpe_laser_energy(1.58, -1e-3)
