"""Unit tests for g²(0) from coincidence histograms."""

import numpy as np
import pytest

from cbr_tuning.correlation import (
    CoincidenceHistogram,
    comb_offset,
    g2_zero,
    locate_peaks,
    peak_envelope,
    simulate_coincidences,
)
from cbr_tuning.exceptions import (
    DataError,
    DetectionError,
    NormalizationError,
    ParameterError,
    ValidationError,
)


@pytest.fixture
def clean_comb():
    """Noiseless comb with g2(0) = 0.03."""
    return simulate_coincidences(0.03, 20000.0)


class TestCoincidenceHistogram:
    """Test cases for CoincidenceHistogram."""

    def test_initialization(self, clean_comb):
        """Test bin width, extent and the default repetition period."""
        assert clean_comb.bin_width == pytest.approx(0.1)
        assert clean_comb.rep_period == 12.5
        lo, hi = clean_comb.extent
        assert lo == pytest.approx(-56.25)
        assert hi == pytest.approx(56.25)

    def test_invalid(self):
        """Test invalid histograms raise ValidationError."""
        with pytest.raises(ValidationError):
            CoincidenceHistogram([0.0, 0.1, 0.2], [1.0, 2.0])
        with pytest.raises(ValidationError):
            CoincidenceHistogram([0.0, 0.1, 0.2], [1.0, -2.0, 1.0])
        with pytest.raises(ValidationError):
            CoincidenceHistogram([0.0, 0.1, 0.2], [1.0, 2.0, 1.0], rep_period=0.0)

    def test_window_sum_rule(self):
        """Test a bin counts when its centre lies within half a window."""
        hist = CoincidenceHistogram(np.arange(-5, 6) * 1.0, np.ones(11))
        assert hist.window_sum(0.0, 2.0) == 3.0
        assert hist.window_sum(0.5, 2.0) == 2.0


class TestG2Zero:
    """Test cases for g2_zero."""

    def test_noiseless(self, clean_comb):
        """Test the ratio of central to side peak areas."""
        result = g2_zero(clean_comb)
        assert result.g2_0 == pytest.approx(0.03, rel=1e-9)
        assert result.window_ns == 2.0
        assert result.side_counts[0] == pytest.approx(result.side_counts[1])
        assert result.uncertainty > 0

    def test_poisson(self, rng):
        """Test a sampled comb agrees within its uncertainty."""
        hist = simulate_coincidences(0.03, 20000.0, rng=rng)
        result = g2_zero(hist)
        assert abs(result.g2_0 - 0.03) < 4 * result.uncertainty
        assert result.uncertainty == pytest.approx(0.0012, abs=3e-4)

    def test_alignment(self):
        """Test a shifted comb is found and integrated around its peaks."""
        hist = simulate_coincidences(0.1, 20000.0, offset=0.6)
        assert comb_offset(hist) == pytest.approx(0.6, abs=0.02)
        aligned = g2_zero(hist)
        assert aligned.offset_ns == pytest.approx(0.6, abs=0.02)
        assert aligned.g2_0 == pytest.approx(0.1, rel=1e-3)
        assert g2_zero(hist, align=False).offset_ns == 0.0

    def test_wider_window_collects_more(self, clean_comb):
        """Test a wider window integrates more counts at the same ratio."""
        narrow = g2_zero(clean_comb, window=1.0)
        wide = g2_zero(clean_comb, window=4.0)
        assert wide.central_counts > narrow.central_counts
        assert wide.g2_0 == pytest.approx(narrow.g2_0, rel=1e-9)

    @pytest.mark.parametrize("window", [0.0, -1.0, 12.5, 20.0])
    def test_invalid_window(self, clean_comb, window):
        """Test non-positive windows and windows reaching the side peaks."""
        with pytest.raises(ParameterError):
            g2_zero(clean_comb, window=window)

    def test_short_span(self):
        """Test a histogram narrower than ±1.5 periods raises DataError."""
        delays = np.arange(-100, 101) * 0.1
        with pytest.raises(DataError):
            g2_zero(CoincidenceHistogram(delays, np.ones(delays.size)))

    def test_empty_sides(self):
        """Test empty side peaks raise NormalizationError."""
        delays = np.arange(-300, 301) * 0.1
        with pytest.raises(NormalizationError):
            g2_zero(CoincidenceHistogram(delays, np.zeros(delays.size)))

    def test_diagnostics(self, clean_comb):
        """Test the peak envelope is attached on request."""
        result = g2_zero(clean_comb, diagnostics=True)
        envelope = result.envelope
        assert list(envelope.columns) == ["k", "delay_ns", "counts", "normalized"]
        assert list(envelope["k"]) == list(range(-4, 5))
        assert envelope.loc[envelope["k"] == 0, "normalized"].item() == pytest.approx(0.03)
        np.testing.assert_allclose(envelope.loc[envelope["k"] != 0, "normalized"], 1.0)
        assert "envelope" in result.as_dict()

    def test_as_dict(self, clean_comb):
        """Test the report record."""
        record = g2_zero(clean_comb).as_dict()
        assert {"g2_0", "err", "window_ns", "rep_period_ns", "central_counts", "side_counts"} <= set(record)
        assert "envelope" not in record


class TestPeaks:
    """Test cases for comb peak detection."""

    def test_locate_peaks(self, clean_comb):
        """Test side peak centroids lie on multiples of the period."""
        centers = locate_peaks(clean_comb)
        expected = [k * 12.5 for k in (-4, -3, -2, -1, 1, 2, 3, 4)]
        np.testing.assert_allclose(centers, expected, atol=0.01)

    def test_missing_peak(self, clean_comb):
        """Test a missing comb peak raises DetectionError."""
        counts = clean_comb.counts.copy()
        counts[np.abs(clean_comb.delays - 25.0) < 3.0] = 0.0
        with pytest.raises(DetectionError):
            locate_peaks(CoincidenceHistogram(clean_comb.delays, counts))

    def test_envelope_normalised(self, clean_comb):
        """Test the envelope is normalised to the first neighbours."""
        envelope = peak_envelope(clean_comb)
        assert envelope["normalized"].max() == pytest.approx(1.0)
