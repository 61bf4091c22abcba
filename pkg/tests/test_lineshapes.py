"""Unit tests for lineshapes and the Fano fit."""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from cbr_tuning.constants import HC_EV_NM
from cbr_tuning.exceptions import DomainError, FitInitError, ParameterError
from cbr_tuning.fitting import FitModel, FitData, numerical_jacobian
from cbr_tuning.lineshapes import (
    FanoParams,
    VoigtParams,
    fano_jacobian,
    fano_report,
    fano_value,
    fit_fano,
    gaussian_fwhm,
    lorentzian_value,
    quality_factor,
    quality_factor_with_systematics,
    voigt_fwhm,
    voigt_fwhm_numeric,
    voigt_value,
)
from cbr_tuning.spectra import AxisKind, Spectrum


class TestFanoParams:
    """Test cases for FanoParams."""

    def test_round_trip_array(self, fano_params):
        """Test conversion to and from a parameter vector."""
        assert FanoParams.from_array(fano_params.as_array()) == fano_params

    @pytest.mark.parametrize("gamma", [0.0, -0.01, float("nan")])
    def test_invalid_linewidth(self, gamma):
        """Test non-positive linewidths raise ParameterError."""
        with pytest.raises(ParameterError):
            FanoParams(A=1.0, B=0.0, q=0.0, E_c=1.55, gamma_c=gamma)

    def test_quality_factor(self, fano_params):
        """Test Q = E_c / Γ_c."""
        assert fano_params.quality_factor == pytest.approx(1.548 / 0.0102)


class TestFanoValue:
    """Test cases for the Fano profile."""

    def test_symmetric_dip(self):
        """Test q = 0 gives a Lorentzian dip to the baseline."""
        params = FanoParams(A=0.5, B=1.0, q=0.0, E_c=1.55, gamma_c=0.01)
        assert float(fano_value(1.55, params)) == pytest.approx(1.0)
        assert float(fano_value(1.555, params)) == pytest.approx(1.25)
        assert float(fano_value(100.0, params)) == pytest.approx(1.5, rel=1e-6)

    def test_asymmetric_minimum(self, fano_params):
        """Test the minimum of the profile sits at Ω = -q."""
        energy = np.linspace(1.52, 1.58, 60001)
        values = fano_value(energy, fano_params)
        expected = fano_params.E_c - fano_params.q * fano_params.gamma_c / 2.0
        assert energy[np.argmin(values)] == pytest.approx(expected, abs=2e-6)
        assert values.min() == pytest.approx(fano_params.B, abs=1e-9)

    def test_jacobian(self, fano_params):
        """Test the analytic Jacobian against central differences."""
        energy = np.linspace(1.53, 1.57, 41)
        model = FitModel.from_function(lambda e, p: fano_value(e, FanoParams.from_array(p)), names=tuple("ABqEg"))
        numeric = numerical_jacobian(model, fano_params.as_array(), FitData(energy, np.zeros_like(energy)))
        np.testing.assert_allclose(fano_jacobian(energy, fano_params), numeric, rtol=1e-4, atol=1e-6)


class TestFitFano:
    """Test cases for fit_fano."""

    def test_noiseless(self, fano_spectrum, fano_params):
        """Test exact data are fitted to the generating parameters."""
        params, result = fit_fano(fano_spectrum)
        assert params.E_c == pytest.approx(fano_params.E_c, abs=1e-6)
        assert params.gamma_c == pytest.approx(fano_params.gamma_c, rel=1e-4)
        assert params.q == pytest.approx(fano_params.q, abs=1e-3)
        lower, upper = result.metadata["window"]
        assert lower < params.E_c < upper

    def test_noisy(self, fano_spectrum, fano_params, rng):
        """Test a noisy dip gives Q within a few percent."""
        noisy = fano_spectrum.intensity + rng.normal(0.0, 0.003, len(fano_spectrum))
        spectrum = Spectrum(fano_spectrum.axis, np.clip(noisy, 0.0, None), AxisKind.ENERGY)
        params, result = fit_fano(spectrum, window=(1.52, 1.58))
        assert params.E_c == pytest.approx(fano_params.E_c, abs=3e-4)
        assert params.quality_factor == pytest.approx(fano_params.quality_factor, rel=0.05)
        assert result.metadata["window"] == (1.52, 1.58)

    def test_wavelength_axis(self, fano_spectrum, fano_params):
        """Test a spectrum on a wavelength axis is fitted in energy."""
        params, _ = fit_fano(fano_spectrum.to_wavelength())
        assert params.E_c == pytest.approx(fano_params.E_c, abs=1e-6)

    def test_window_outside_axis(self, fano_spectrum):
        """Test a window beyond the axis raises ParameterError."""
        with pytest.raises(ParameterError):
            fit_fano(fano_spectrum, window=(1.45, 1.58))
        with pytest.raises(ParameterError):
            fit_fano(fano_spectrum, window=(1.56, 1.55))

    def test_window_too_narrow(self, fano_spectrum):
        """Test fewer than six samples raise FitInitError."""
        with pytest.raises(FitInitError):
            fit_fano(fano_spectrum, window=(1.548, 1.549))

    def test_no_dip(self):
        """Test a flat spectrum raises FitInitError."""
        flat = Spectrum(np.linspace(1.5, 1.6, 101), np.ones(101), AxisKind.ENERGY)
        with pytest.raises(FitInitError):
            fit_fano(flat)

    def test_report(self, fano_spectrum, rng):
        """Test the report carries energy, wavelength and Q."""
        noisy = Spectrum(fano_spectrum.axis, fano_spectrum.intensity + rng.normal(0.0, 0.002, len(fano_spectrum)))
        params, result = fit_fano(noisy)
        report = fano_report(params, result)
        assert report["model"] == "fano"
        assert report["E_c_nm"] == pytest.approx(HC_EV_NM / report["E_c_eV"])
        assert report["Q"] == pytest.approx(params.quality_factor)
        assert report["Q_err"] > 0
        assert report["Q_err_total"] >= 2.0
        assert set(report["params"]) == {"A", "B", "q", "E_c", "gamma_c"}


class TestQualityFactor:
    """Test cases for the quality factor helpers."""

    def test_value(self):
        """Test Q = E / Γ."""
        assert quality_factor(1.55, 0.010) == pytest.approx(155.0)
        with pytest.raises(DomainError):
            quality_factor(1.55, 0.0)

    def test_systematics(self):
        """Test statistical and systematic errors add in quadrature."""
        assert quality_factor_with_systematics(150.0, 1.5) == pytest.approx((150.0, 2.5))


class TestVoigt:
    """Test cases for the Voigt profile."""

    def test_fwhm_limits(self):
        """Test the FWHM approximation in its pure limits."""
        assert voigt_fwhm(1.0, 0.0) == pytest.approx(1.0)
        assert voigt_fwhm(0.0, 1.0) == pytest.approx(1.0000030, abs=1e-6)
        assert voigt_fwhm(1.0, 1.0) == pytest.approx(1.637596, abs=1e-6)

    def test_fwhm_domain(self):
        """Test invalid widths raise DomainError."""
        with pytest.raises(DomainError):
            voigt_fwhm(0.0, 0.0)
        with pytest.raises(DomainError):
            voigt_fwhm(-1.0, 1.0)

    @pytest.mark.parametrize("sigma, gamma", [(1.0, 0.0), (0.0, 1.0), (1.0 / gaussian_fwhm(1.0), 0.5), (0.3, 1.2)])
    def test_fwhm_against_profile(self, sigma, gamma):
        """Test the approximation agrees with the profile width."""
        params = VoigtParams(sigma, gamma)
        assert voigt_fwhm_numeric(params) == pytest.approx(voigt_fwhm(params.f_G, params.f_L), rel=3e-4)

    def test_unit_area(self):
        """Test the profile integrates to one."""
        x = np.linspace(-200.0, 200.0, 400001)
        area = trapezoid(voigt_value(x, 0.0, VoigtParams(0.5, 0.05)), x)
        assert area == pytest.approx(1.0, abs=1e-3)

    def test_limits_match_components(self):
        """Test the pure limits reduce to Gaussian and Lorentzian densities."""
        x = np.linspace(-3.0, 3.0, 13)
        gaussian = voigt_value(x, 0.0, VoigtParams(1.0, 0.0))
        np.testing.assert_allclose(gaussian, np.exp(-0.5 * x**2) / math.sqrt(2.0 * math.pi))
        lorentzian = voigt_value(x, 0.0, VoigtParams(0.0, 1.0))
        np.testing.assert_allclose(lorentzian, 1.0 / (math.pi * (1.0 + x**2)))
        near = voigt_value(x, 0.0, VoigtParams(1e-6, 1.0))
        np.testing.assert_allclose(near, lorentzian, rtol=1e-4)

    def test_invalid_params(self):
        """Test negative or all-zero widths raise ParameterError."""
        with pytest.raises(ParameterError):
            VoigtParams(-1.0, 1.0)
        with pytest.raises(ParameterError):
            VoigtParams(0.0, 0.0)

    def test_lorentzian_value(self):
        """Test the peak-normalised Lorentzian at its half width."""
        assert float(lorentzian_value(1.0, 0.0, 2.0, peak=2.0, baseline=0.5)) == pytest.approx(1.5)
