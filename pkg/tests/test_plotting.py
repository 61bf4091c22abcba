"""Unit tests for SVG figures."""

import numpy as np
import pandas as pd

from cbr_tuning.plotting import plot_fano, plot_heatmap, plot_spectrum


class TestPlotting:
    """Test cases for figure writers."""

    def test_spectrum(self, tmp_path, fano_spectrum):
        """Test a spectrum figure is written as SVG."""
        path = plot_spectrum(str(tmp_path / "s.svg"), fano_spectrum, "Reflectance", marker=1.548)
        text = open(path, encoding="utf-8").read()
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text

    def test_repeatable(self, tmp_path, fano_spectrum, fano_params):
        """Test identical inputs give identical files."""
        first = plot_fano(str(tmp_path / "a.svg"), fano_spectrum, fano_params, (1.52, 1.58))
        second = plot_fano(str(tmp_path / "b.svg"), fano_spectrum, fano_params, (1.52, 1.58))
        assert open(first, "rb").read() == open(second, "rb").read()

    def test_heatmap(self, tmp_path):
        """Test a sweep heatmap figure."""
        frame = pd.DataFrame(
            np.arange(12, dtype=float).reshape(3, 4),
            index=pd.Index([0.0, 1.5, 3.0], name="delta_nm"),
            columns=[1.50, 1.55, 1.60, 1.65],
        )
        path = plot_heatmap(str(tmp_path / "h.svg"), frame, "purcell")
        assert (tmp_path / "h.svg").exists()
        assert path.endswith("h.svg")
