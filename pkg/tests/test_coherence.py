"""Unit tests for fringe visibility and coherence fits."""

import math

import numpy as np
import pytest

from cbr_tuning.coherence import (
    CoherenceResult,
    FringeScan,
    VisibilityTrace,
    fit_coherence,
    fourier_limit_ratio,
    fringe_visibility,
    simulate_fringe_scan,
    simulate_visibility_trace,
    visibility_model,
    visibility_trace_from_scans,
)
from cbr_tuning.constants import HBAR_EV_PS
from cbr_tuning.exceptions import DataError, DomainError, FitError, ModelError, ValidationError

WAVELENGTH = 784.0


class TestContainers:
    """Test cases for FringeScan and VisibilityTrace."""

    def test_scan_coverage(self):
        """Test the scanned length includes one step."""
        scan = simulate_fringe_scan(0.5, WAVELENGTH)
        assert scan.coverage == pytest.approx(600.0)

    def test_scan_invalid(self):
        """Test short or negative scans raise ValidationError."""
        with pytest.raises(ValidationError):
            FringeScan(np.arange(5) * 20.0, np.ones(5))
        with pytest.raises(ValidationError):
            FringeScan(np.arange(10) * 20.0, -np.ones(10))

    def test_trace_invalid(self):
        """Test visibilities outside [0, 1] raise ValidationError."""
        with pytest.raises(ValidationError):
            VisibilityTrace([0.0, 10.0], [1.2, 0.5])
        with pytest.raises(ValidationError):
            VisibilityTrace([0.0, 10.0], [0.9, 0.5], [0.1])


class TestFringeVisibility:
    """Test cases for fringe_visibility."""

    @pytest.mark.parametrize("visibility", [0.0, 0.2, 0.5, 0.95])
    def test_noiseless(self, visibility):
        """Test the cosine fit returns the generating visibility."""
        nu, err = fringe_visibility(simulate_fringe_scan(visibility, WAVELENGTH, phase=0.7), WAVELENGTH)
        assert nu == pytest.approx(visibility, abs=1e-9)
        assert err >= 0

    def test_poisson(self, rng):
        """Test a sampled scan agrees within its error."""
        nu, err = fringe_visibility(simulate_fringe_scan(0.6, WAVELENGTH, rng=rng), WAVELENGTH)
        assert abs(nu - 0.6) < 4 * err
        assert 0.0 < err < 0.05

    def test_coverage_limits(self):
        """Test scans outside one to two fringe periods raise DataError."""
        with pytest.raises(DataError):
            fringe_visibility(simulate_fringe_scan(0.5, WAVELENGTH, n_steps=10), WAVELENGTH)
        with pytest.raises(DataError):
            fringe_visibility(simulate_fringe_scan(0.5, WAVELENGTH, n_steps=50), WAVELENGTH)

    def test_period_mismatch(self):
        """Test fringes far from λ/2 raise ModelError."""
        scan = simulate_fringe_scan(0.5, WAVELENGTH, n_steps=28)
        with pytest.raises(ModelError):
            fringe_visibility(scan, 600.0)

    def test_wavelength_domain(self):
        """Test a non-positive wavelength raises DomainError."""
        with pytest.raises(DomainError):
            fringe_visibility(simulate_fringe_scan(0.5, WAVELENGTH), 0.0)

    def test_trace_from_scans(self):
        """Test scans are ordered by stage delay."""
        scans = [simulate_fringe_scan(visibility_model(t, 80.0, 150.0), WAVELENGTH, stage_delay=t) for t in (60.0, 0.0, 30.0)]
        trace = visibility_trace_from_scans(scans, WAVELENGTH)
        np.testing.assert_array_equal(trace.delays, [0.0, 30.0, 60.0])
        np.testing.assert_allclose(trace.visibilities, visibility_model(trace.delays, 80.0, 150.0), atol=1e-9)


class TestFitCoherence:
    """Test cases for fit_coherence."""

    def test_noiseless(self):
        """Test both coherence times are recovered."""
        trace = simulate_visibility_trace(80.0, 150.0, np.arange(0.0, 301.0, 30.0))
        coherence, result = fit_coherence(trace, tau_ps=53.0)
        assert coherence.t_G == pytest.approx(80.0, rel=1e-4)
        assert coherence.t_L == pytest.approx(150.0, rel=1e-4)
        assert coherence.fourier_ratio == pytest.approx(fourier_limit_ratio(coherence.f_V, 53.0))
        assert result.converged

    def test_noisy(self, rng):
        """Test a noisy trace gives the linewidth within its propagated uncertainty."""
        trace = simulate_visibility_trace(80.0, 150.0, np.arange(0.0, 301.0, 20.0), noise=0.01, rng=rng)
        coherence, _ = fit_coherence(trace)
        truth = CoherenceResult.from_times(80.0, 150.0)
        assert coherence.f_V == pytest.approx(truth.f_V, rel=0.15)
        assert coherence.errors["f_V"] > 0
        assert coherence.fourier_ratio is None

    def test_pure_lorentzian(self):
        """Test an exponential trace leaves the Gaussian time unbounded."""
        trace = simulate_visibility_trace(math.inf, 80.0, np.arange(0.0, 301.0, 30.0))
        coherence, _ = fit_coherence(trace)
        assert coherence.t_L == pytest.approx(80.0, rel=1e-3)
        assert coherence.t_G > 1e3

    def test_too_few_points(self):
        """Test fewer than six delays raise DataError."""
        trace = simulate_visibility_trace(80.0, 150.0, [0.0, 50.0, 100.0, 150.0, 200.0])
        with pytest.raises(DataError):
            fit_coherence(trace)

    def test_no_decay(self):
        """Test a flat trace raises FitError."""
        trace = VisibilityTrace(np.arange(8) * 10.0, np.full(8, 0.99))
        with pytest.raises(FitError):
            fit_coherence(trace)


class TestCoherenceResult:
    """Test cases for CoherenceResult."""

    def test_widths(self):
        """Test σ = ħ/t_G and γ = ħ/t_L."""
        result = CoherenceResult.from_times(80.0, 150.0)
        sigma, gamma = result.to_widths()
        assert sigma == pytest.approx(HBAR_EV_PS / 80.0)
        assert gamma == pytest.approx(HBAR_EV_PS / 150.0)
        again = CoherenceResult.from_widths(sigma, gamma)
        assert again.t_G == pytest.approx(80.0)
        assert again.t_L == pytest.approx(150.0)

    def test_zero_width(self):
        """Test a zero Gaussian width maps to an infinite coherence time."""
        result = CoherenceResult.from_widths(0.0, 5e-6)
        assert math.isinf(result.t_G)
        assert result.f_V == pytest.approx(1e-5 * 1.0000030, rel=1e-6)

    def test_invalid(self):
        """Test non-positive times raise DomainError."""
        with pytest.raises(DomainError):
            CoherenceResult.from_times(0.0, 10.0)

    def test_as_dict(self):
        """Test the report record."""
        record = CoherenceResult.from_times(80.0, 150.0, tau_ps=53.0).as_dict()
        assert record["f_V_eV"] > 0
        assert record["fourier_ratio"] > 1


class TestFourierLimit:
    """Test cases for fourier_limit_ratio and visibility_model."""

    def test_ratio(self):
        """Test 27.3 µeV against a 53 ps lifetime."""
        assert fourier_limit_ratio(27.3e-6, 53.0) == pytest.approx(2.2, abs=0.01)
        with pytest.raises(DomainError):
            fourier_limit_ratio(0.0, 53.0)

    def test_model(self):
        """Test the model at zero delay and the pure Lorentzian limit."""
        assert float(visibility_model(0.0, 80.0, 150.0)) == 1.0
        assert float(visibility_model(80.0, np.inf, 80.0)) == pytest.approx(math.exp(-1.0))
        assert float(visibility_model(-80.0, 80.0, np.inf)) == pytest.approx(math.exp(-0.5))
