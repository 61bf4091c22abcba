"""Unit tests for lifetime analysis and Purcell factors."""

import numpy as np
import pytest

from cbr_tuning.conversion import natural_linewidth
from cbr_tuning.decay import (
    DecayHistogram,
    DecayKind,
    DecayModel,
    Irf,
    bulk_purcell_factor,
    convolve_model_with_irf,
    fit_lifetime,
    fit_purcell_vs_detuning,
    lifetime_report,
    purcell_factor,
    simulate_histogram,
)
from cbr_tuning.exceptions import (
    DataError,
    DomainError,
    FitInitError,
    ParameterError,
    ShapeError,
    ValidationError,
)
from cbr_tuning.lineshapes import lorentzian_value


class TestDecayKind:
    """Test cases for DecayKind."""

    @pytest.mark.parametrize("text, kind", [("x", DecayKind.SINGLE_EXP), ("single", DecayKind.SINGLE_EXP),
                                            ("XX", DecayKind.BI_EXP), ("bi_exp", DecayKind.BI_EXP)])
    def test_parse(self, text, kind):
        """Test accepted model names."""
        assert DecayKind.parse(text) is kind

    def test_parse_unknown(self):
        """Test unknown names raise ParameterError."""
        with pytest.raises(ParameterError):
            DecayKind.parse("triple")


class TestContainers:
    """Test cases for histograms, IRFs and models."""

    def test_histogram(self, decay_grid):
        """Test the bin width is derived from the centres."""
        hist = DecayHistogram(decay_grid, np.ones(decay_grid.size))
        assert hist.bin_width == pytest.approx(4.0)
        assert hist.span == pytest.approx(2000.0)
        assert hist.total == 500.0

    def test_histogram_invalid(self, decay_grid):
        """Test invalid histograms raise ValidationError."""
        with pytest.raises(ValidationError):
            DecayHistogram(decay_grid, np.ones(decay_grid.size), bin_width=8.0)
        with pytest.raises(ValidationError):
            DecayHistogram(decay_grid, -np.ones(decay_grid.size))
        with pytest.raises(ValidationError):
            DecayHistogram(decay_grid, np.ones(3))

    def test_irf_normalised(self, gaussian_irf):
        """Test the IRF weights sum to one and keep their width."""
        assert gaussian_irf.weights.sum() == pytest.approx(1.0)
        assert gaussian_irf.peak_time == pytest.approx(200.0, abs=4.0)
        assert gaussian_irf.fwhm() == pytest.approx(100.0, abs=8.0)

    def test_irf_invalid(self, decay_grid):
        """Test an empty IRF raises ValidationError."""
        with pytest.raises(ValidationError):
            Irf(decay_grid, np.zeros(decay_grid.size))
        with pytest.raises(ParameterError):
            Irf.gaussian(0.0, decay_grid)

    def test_model_invalid(self):
        """Test non-positive lifetimes and negative amplitudes raise ParameterError."""
        with pytest.raises(ParameterError):
            DecayModel.single(1.0, 0.0)
        with pytest.raises(ParameterError):
            DecayModel.single(-1.0, 10.0)
        with pytest.raises(ParameterError):
            DecayModel(DecayKind.BI_EXP, (1.0,), (10.0,))

    def test_vector_round_trip(self):
        """Test models convert to and from parameter vectors."""
        model = DecayModel.bi(1.0, 230.0, 0.5, 120.0, t0=50.0, background=2.0)
        assert DecayModel.from_vector(DecayKind.BI_EXP, model.as_vector()) == model
        assert model.area == pytest.approx(290.0)


class TestConvolution:
    """Test cases for convolve_model_with_irf."""

    def test_delta_irf(self, decay_grid, single_decay):
        """Test a delta IRF at the grid start leaves the binned decay unchanged."""
        irf = Irf.delta(decay_grid, index=0)
        expected = single_decay.bin_counts(decay_grid, 4.0)
        np.testing.assert_allclose(convolve_model_with_irf(single_decay, irf, decay_grid), expected, atol=1e-12)

    def test_area_conserved(self, decay_grid, gaussian_irf, single_decay):
        """Test a unit-sum IRF conserves the decay area."""
        counts = convolve_model_with_irf(single_decay, gaussian_irf, decay_grid)
        assert counts.sum() == pytest.approx(single_decay.area, rel=1e-3)
        assert np.all(counts >= 0)

    def test_background_added(self, decay_grid, gaussian_irf):
        """Test the background is added to every bin."""
        model = DecayModel.single(1.0, 230.0, t0=200.0, background=3.0)
        counts = convolve_model_with_irf(model, gaussian_irf, decay_grid)
        assert counts[0] == pytest.approx(3.0, abs=1e-9)

    def test_oversampled_short_lifetime(self, decay_grid, gaussian_irf):
        """Test a lifetime below three bins still conserves the area."""
        model = DecayModel.single(1.0, 6.0, t0=400.0)
        counts = convolve_model_with_irf(model, gaussian_irf, decay_grid)
        assert counts.sum() == pytest.approx(6.0, rel=1e-2)

    def test_bin_width_mismatch(self, decay_grid, single_decay):
        """Test an IRF on another bin width raises ShapeError."""
        irf = Irf.gaussian(100.0, 8.0 * np.arange(250))
        with pytest.raises(ShapeError):
            convolve_model_with_irf(single_decay, irf, decay_grid)


class TestFitLifetime:
    """Test cases for fit_lifetime."""

    @pytest.mark.parametrize("tau", [230.0, 53.0])
    def test_single_exponential(self, decay_grid, gaussian_irf, rng, tau):
        """Test a single lifetime is recovered from a Poisson histogram."""
        truth = DecayModel.single(1.0, tau, t0=200.0, background=2.0)
        hist = simulate_histogram(truth, gaussian_irf, decay_grid, rng, total_counts=1e5)
        model, result = fit_lifetime(hist, gaussian_irf, "x")
        assert model.kind is DecayKind.SINGLE_EXP
        assert model.taus[0] == pytest.approx(tau, rel=0.03)
        assert model.t0 == pytest.approx(200.0, abs=5.0)
        assert 0.8 < result.reduced_chi2 < 1.25
        assert result.uncertainties()[1] > 0

    def test_bi_exponential(self, decay_grid, gaussian_irf, rng):
        """Test the cascade model orders the longer lifetime first."""
        truth = DecayModel.bi(1.0, 230.0, 1.0, 60.0, t0=200.0, background=1.0)
        hist = simulate_histogram(truth, gaussian_irf, decay_grid, rng, total_counts=1e6)
        model, _ = fit_lifetime(hist, gaussian_irf, DecayKind.BI_EXP)
        assert model.taus[0] > model.taus[1]
        assert model.taus[0] == pytest.approx(230.0, rel=0.1)
        assert model.taus[1] == pytest.approx(60.0, rel=0.1)

    def test_empty_histogram(self, decay_grid, gaussian_irf):
        """Test an empty histogram raises FitInitError."""
        with pytest.raises(FitInitError):
            fit_lifetime(DecayHistogram(decay_grid, np.zeros(decay_grid.size)), gaussian_irf)

    def test_bin_width_mismatch(self, decay_grid, gaussian_irf):
        """Test differing bin widths raise ShapeError."""
        hist = DecayHistogram(2.0 * np.arange(100), np.ones(100))
        with pytest.raises(ShapeError):
            fit_lifetime(hist, gaussian_irf)

    def test_report(self, decay_grid, gaussian_irf, rng):
        """Test the lifetime report keys and linewidth."""
        truth = DecayModel.single(1.0, 53.0, t0=200.0, background=1.0)
        hist = simulate_histogram(truth, gaussian_irf, decay_grid, rng, total_counts=1e5)
        report = lifetime_report(*fit_lifetime(hist, gaussian_irf))
        assert report["kind"] == "single_exp"
        assert report["tau_err_ps"] > 0
        assert report["natural_linewidth_ueV"][0] == pytest.approx(natural_linewidth(report["tau_ps"]) * 1e6)


class TestPurcell:
    """Test cases for Purcell factors."""

    def test_purcell_factor(self):
        """Test 230 ps over 53 ± 2 ps."""
        f_p, err = purcell_factor(230.0, 53.0, tau_cav_err=2.0)
        assert f_p == pytest.approx(4.34, abs=0.005)
        assert err == pytest.approx(0.16, abs=0.005)

    def test_errors_in_quadrature(self):
        """Test both lifetime errors propagate."""
        f_p, err = purcell_factor(100.0, 50.0, 3.0, 4.0)
        assert f_p == pytest.approx(2.0)
        assert err == pytest.approx(2.0 * np.hypot(0.03, 0.08))

    def test_bulk_reference(self):
        """Test the bulk exciton reference lifetime."""
        assert bulk_purcell_factor(53.0)[0] == pytest.approx(230.0 / 53.0)

    def test_domain(self):
        """Test non-positive lifetimes raise DomainError."""
        with pytest.raises(DomainError):
            purcell_factor(230.0, 0.0)

    def test_detuning_fit(self):
        """Test a Lorentzian Purcell resonance is recovered."""
        detuning = np.linspace(-4e-3, 4e-3, 17)
        f_p = lorentzian_value(detuning, 2e-4, 2.5e-3, peak=4.0, baseline=1.0)
        resonance, result = fit_purcell_vs_detuning(detuning, f_p, np.full(detuning.size, 0.1))
        assert resonance.center == pytest.approx(2e-4, abs=1e-6)
        assert resonance.fwhm == pytest.approx(2.5e-3, rel=1e-3)
        assert resonance.peak == pytest.approx(4.0, rel=1e-3)
        assert result.converged

    def test_detuning_fit_too_few(self):
        """Test fewer than five points raise DataError."""
        with pytest.raises(DataError):
            fit_purcell_vs_detuning([0.0, 1e-3, 2e-3, 3e-3], [1.0, 2.0, 1.5, 1.0], [0.1] * 4)
