"""Tests for the FDTD solver, derived spectra and the etch sweep."""

import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from scipy.optimize import brentq
from scipy.special import hankel1

from cbr_tuning.constants import HC_EV_NM
from cbr_tuning.exceptions import ParameterError, StabilityError, SweepError, TransformError, ValidationError
from cbr_tuning.fdtd import (
    CbrGeometry,
    FdtdSolver,
    Layout,
    PmlConfig,
    SimulationConfig,
    SourceSpec,
    SpectrumResult,
    angular_ratio,
    compute_extraction_efficiency,
    compute_purcell_spectrum,
    compute_reflectance_spectrum,
    default_frequencies,
    etch_sweep,
    heatmap_long,
    load_snapshot,
    run_dipole,
    run_simulation,
    sweep_deltas,
)
from cbr_tuning.lineshapes import fit_fano
from cbr_tuning.spectra import AxisKind, Spectrum


@pytest.fixture
def closed_config():
    """Coarse closed box without absorbing layers."""
    return SimulationConfig(
        grid_resolution=8,
        runtime=20,
        frequency_samples=default_frequencies(1.50, 1.65, 7),
        air_gap_nm=300.0,
        margin_nm=200.0,
        boundary="closed",
    )


# Wide band for the sweep checks: the coarse two-ring resonator's mode must land
# inside it with room for the fit window on either side.
SWEEP_BAND = (1.40, 1.80, 81)
# Three members 3 nm apart instead of 1.5 nm steps: each step then moves the
# mode by several DFT samples, which the 8-cell grid needs to resolve it. The
# Q trend is not checked at this resolution.
SWEEP_DELTAS = (0.0, 3.0, 6.0)


@pytest.fixture(scope="module")
def sweep_pair():
    """The same coarse etch sweep run serially and on two workers."""
    geometry = CbrGeometry(n_rings=2)
    config = SimulationConfig(
        grid_resolution=8,
        runtime=60,
        pml=PmlConfig(cells=8),
        frequency_samples=default_frequencies(*SWEEP_BAND),
        air_gap_nm=300.0,
        margin_nm=200.0,
        decay_threshold=1e-3,
    )
    serial = etch_sweep(geometry, config, deltas=SWEEP_DELTAS, jobs=1)
    parallel = etch_sweep(geometry, config, deltas=SWEEP_DELTAS, jobs=2)
    return serial, parallel


class TestAngularRatio:
    """Test cases for angular_ratio."""

    def test_isotropic(self):
        """Test a flat far field gives the angular fraction of the aperture."""
        theta = np.linspace(-math.pi / 2, math.pi / 2, 721)
        ratio = angular_ratio(theta, np.ones_like(theta), 0.65)
        assert float(ratio) == pytest.approx(math.asin(0.65) / (math.pi / 2), rel=1e-9)

    def test_full_aperture(self):
        """Test NA = 1 collects the whole half-plane."""
        theta = np.linspace(-math.pi / 2, math.pi / 2, 181)
        assert float(angular_ratio(theta, np.cos(theta) ** 2, 1.0)) == pytest.approx(1.0)

    def test_rows(self):
        """Test one ratio per energy."""
        theta = np.linspace(-math.pi / 2, math.pi / 2, 181)
        intensity = np.vstack([np.ones_like(theta), np.exp(-(theta / 0.1) ** 2)])
        ratio = angular_ratio(theta, intensity, 0.65)
        assert ratio.shape == (2,)
        assert ratio[1] == pytest.approx(1.0, abs=1e-9)

    def test_errors(self):
        """Test a dark far field and invalid apertures."""
        theta = np.linspace(-math.pi / 2, math.pi / 2, 181)
        with pytest.raises(TransformError):
            angular_ratio(theta, np.zeros_like(theta))
        with pytest.raises(ValidationError):
            angular_ratio(theta, np.ones_like(theta), 0.0)


class TestSpectrumResult:
    """Test cases for SpectrumResult."""

    def test_peak(self):
        """Test the maximum and its energy."""
        spectrum = Spectrum([1.50, 1.55, 1.60], [1.0, 5.0, 2.0], AxisKind.ENERGY)
        result = SpectrumResult(spectrum, "cbr:dipole", "bulk:dipole")
        assert result.peak() == (1.55, 5.0)
        np.testing.assert_array_equal(result.energies, [1.50, 1.55, 1.60])


class TestSweepHelpers:
    """Test cases for sweep depths, heatmaps and member bookkeeping."""

    def test_deltas(self):
        """Test fourteen 1.5 nm steps give fifteen members."""
        deltas = sweep_deltas()
        assert deltas.size == 15
        assert deltas[-1] == pytest.approx(21.0)
        with pytest.raises(ParameterError):
            sweep_deltas(1)

    def test_heatmap_long(self):
        """Test a heatmap reshapes to one row per depth and energy."""
        frame = pd.DataFrame([[1.0, 2.0], [3.0, 4.0]], index=pd.Index([0.0, 1.5], name="delta_nm"), columns=[1.5, 1.6])
        long = heatmap_long(frame, "purcell")
        assert list(long.columns) == ["delta_nm", "energy_eV", "purcell"]
        assert len(long) == 4
        assert long.iloc[3].tolist() == [1.5, 1.6, 4.0]

    @staticmethod
    def fake_member(base, config, delta, bulk, source, beam, na, extraction):
        wavelength = 800.0 - 2.9 * delta
        energies = config.energies
        return {
            "row": {"delta_nm": delta, "Ec_eV": HC_EV_NM / wavelength, "Gamma_eV": 0.01, "Q": 150.0, "Fp_peak": 4.0},
            "purcell": np.full(energies.size, 4.0),
            "reflectance": np.full(energies.size, 0.5),
        }

    def test_sensitivity(self, mocker, small_geometry, small_config):
        """Test the mode shift per removed nm from the member table."""
        mocker.patch("cbr_tuning.fdtd.sweep.run_dipole", return_value=None)
        mocker.patch("cbr_tuning.fdtd.sweep._sweep_member", side_effect=self.fake_member)
        sweep = etch_sweep(small_geometry, small_config, steps=4)
        assert sweep.sensitivity == pytest.approx(2.9, rel=1e-9)
        assert list(sweep.table["delta_nm"]) == [0.0, 1.5, 3.0, 4.5, 6.0]
        assert sweep.purcell.shape == (5, 7)
        assert sweep.extraction is None
        assert sweep.as_dict()["sensitivity_nm_per_nm"] == pytest.approx(2.9)

    def test_failed_member(self, mocker, small_geometry, small_config):
        """Test a failing member raises SweepError carrying the finished rows."""

        def member(base, config, delta, *args):
            if delta > 2.0:
                return {"delta_nm": delta, "error": "FitInitError: no dip"}
            return self.fake_member(base, config, delta, *args)

        mocker.patch("cbr_tuning.fdtd.sweep.run_dipole", return_value=None)
        mocker.patch("cbr_tuning.fdtd.sweep._sweep_member", side_effect=member)
        with pytest.raises(SweepError) as info:
            etch_sweep(small_geometry, small_config, deltas=[0.0, 1.5, 3.0])
        assert [row["delta_nm"] for row in info.value.completed] == [0.0, 1.5]

    def test_too_few_members(self, small_geometry, small_config):
        """Test a single explicit depth raises ParameterError."""
        with pytest.raises(ParameterError):
            etch_sweep(small_geometry, small_config, deltas=[0.0])


class TestSolverSetup:
    """Test cases for solver construction and stepping."""

    def test_source_band(self, small_geometry, small_config):
        """Test DFT energies outside the source band are rejected."""
        config = replace(small_config, frequency_samples=(1.55, 2.5))
        with pytest.raises(ValidationError):
            FdtdSolver(small_geometry, config, SourceSpec.dipole())

    def test_source_outside(self, small_geometry, small_config):
        """Test a dipole in the absorbing layer is rejected."""
        solver_grid_top = small_geometry.membrane_top + small_config.air_gap_nm
        with pytest.raises(ValidationError):
            FdtdSolver(small_geometry, small_config, SourceSpec.dipole(z_nm=solver_grid_top + 150.0))

    def test_energy_invariant(self, small_geometry, closed_config):
        """Test the discrete energy is conserved in a closed box once the source is off."""
        solver = FdtdSolver(small_geometry, closed_config, SourceSpec.dipole(), Layout.VACUUM)
        while solver.n * solver.dt <= solver.switch_off:
            solver.step()
        values = np.array([solver.step(track_invariant=True) for _ in range(200)])
        assert values[0] > 0
        np.testing.assert_allclose(values, values[0], rtol=1e-9)

    def test_stripes_identical(self, small_geometry, closed_config):
        """Test threaded stripes give the same fields as a single stripe."""
        fields = []
        for stripes in (1, 3):
            solver = FdtdSolver(small_geometry, replace(closed_config, stripes=stripes), SourceSpec.dipole(), Layout.CBR)
            for _ in range(60):
                solver.step()
            fields.append(solver.ey.copy())
        np.testing.assert_allclose(fields[1], fields[0], rtol=1e-12, atol=0.0)
        assert np.abs(fields[0]).max() > 0

    def test_unstable_courant(self, small_geometry, closed_config):
        """Test growth is caught while the source is still on just above the Courant limit."""
        config = replace(closed_config, courant_factor=1.05, strict_courant=False)
        solver = FdtdSolver(small_geometry, config, SourceSpec.dipole(), Layout.VACUUM)
        with np.errstate(all="ignore"), pytest.raises(StabilityError, match="field energy"):
            solver.run()
        assert solver.n * solver.dt < solver.switch_off

    def test_stable_closed_box(self, small_geometry, closed_config):
        """Test a lossless box below the Courant limit runs to the cap without tripping the growth check."""
        solver = FdtdSolver(small_geometry, closed_config, SourceSpec.dipole(), Layout.VACUUM)
        result = solver.run()
        assert result.termination == "runtime"
        assert np.isfinite(result.final_energy)
        assert result.final_energy > 0.25 * result.peak_energy

    def test_mirror_symmetry(self, small_geometry, small_config):
        """Test a full-width run keeps an on-axis dipole's field mirror symmetric."""
        config = replace(small_config, mirror=False)
        solver = FdtdSolver(small_geometry, config, SourceSpec.dipole(), Layout.CBR)
        assert solver.grid.nx % 2 == 1
        for _ in range(300):
            solver.step()
        ey = solver.ey
        scale = np.abs(ey).max()
        assert scale > 0
        assert np.abs(ey - ey[:, ::-1]).max() / scale < 1e-10


@pytest.mark.slow
class TestSolverRuns:
    """Test cases for complete solver runs on a coarse grid."""

    def test_run_simulation(self, tmp_path, small_geometry, small_config):
        """Test monitors, point traces and snapshots of one run."""
        result = run_simulation(
            small_geometry,
            small_config,
            SourceSpec.dipole(),
            Layout.CBR,
            boxes={"box": (0.0, small_geometry.membrane_center)},
            lines={"top": ("h", small_geometry.membrane_top + 200.0)},
            probes={"probe": (0.0, small_geometry.membrane_top + 100.0)},
            snapshot_dir=str(tmp_path),
            snapshot_steps=(20,),
        )
        assert result.termination in ("decayed", "runtime")
        assert result.traces["probe"].size == result.steps
        assert np.all(result.flux("box") > 0)
        assert np.all(np.isfinite(result.flux("top")))
        with pytest.raises(ValidationError):
            result.flux("missing")
        values, meta = load_snapshot(tmp_path / "ey_0000020.bin")
        assert values.shape == (result.grid.nz, result.grid.nx)
        assert meta["step"] == 20

    def test_purcell_homogeneous(self, small_geometry, small_config):
        """Test a full-width bulk run in a larger domain against the half-domain bulk reference."""
        reference = run_dipole(small_geometry, small_config, layout=Layout.BULK)
        config = replace(small_config, mirror=False, air_gap_nm=600.0, margin_nm=600.0)
        result = compute_purcell_spectrum(small_geometry, config, reference=reference, layout=Layout.BULK)
        np.testing.assert_allclose(result.values, 1.0, atol=0.05)

    def test_purcell(self, small_geometry, small_config):
        """Test the resonator Purcell spectrum and its provenance."""
        result = compute_purcell_spectrum(small_geometry, small_config)
        assert result.run_id.startswith("cbr:dipole")
        assert result.reference_id.startswith("bulk:dipole")
        assert np.all(np.isfinite(result.values))
        assert result.values.max() > 0
        assert result.spectrum.axis_kind is AxisKind.ENERGY

    def test_reflectance(self, small_geometry, small_config):
        """Test the planar stack relative to itself and the resonator ratio."""
        planar = compute_reflectance_spectrum(small_geometry, small_config, layout=Layout.PLANAR)
        np.testing.assert_allclose(planar.values, 1.0, rtol=1e-12)
        result = compute_reflectance_spectrum(small_geometry, small_config)
        assert result.reference_id.startswith("planar:beam")
        assert np.all(result.values >= 0)
        assert np.all(np.isfinite(result.values))

    def test_extraction(self, small_geometry, small_config):
        """Test the extraction efficiency and its intermediate spectra."""
        result = compute_extraction_efficiency(small_geometry, small_config)
        ratio = result.extra["angular_ratio"]
        assert np.all((ratio > 0) & (ratio <= 1.0 + 1e-9))
        assert np.all(result.values >= 0)
        assert np.all(np.isfinite(result.values))
        assert set(result.extra) == {"angular_ratio", "transmittance", "purcell"}


@pytest.mark.slow
class TestSolverProperties:
    """Physical checks of the solver on coarse grids."""

    def test_vacuum_dispersion(self, small_geometry, small_config):
        """Test the phase velocity along a grid axis at 20 cells per wavelength."""
        config = replace(small_config, grid_resolution=20, pml=PmlConfig(), dft_stride=1)
        z = small_geometry.membrane_center
        result = run_simulation(
            small_geometry, config, SourceSpec.dipole(), Layout.VACUUM, probes={"near": (450.0, z), "far": (750.0, z)}
        )
        near, far = result.probes["near"], result.probes["far"]
        assert near.row == far.row
        r_near, r_far = result.grid.x[near.col], result.grid.x[far.col]
        index = int(np.argmax(result.energies))
        k0 = float(result.omega[index])
        # points 8 cells apart keep the phase difference below pi
        measured = abs(np.angle(far.e[index] / near.e[index]))

        def mismatch(k):
            return abs(np.angle(hankel1(0, k * r_far) / hankel1(0, k * r_near))) - measured

        k = brentq(mismatch, 0.9 * k0, 1.1 * k0)
        assert abs(k / k0 - 1.0) < 5e-3

    def test_cpml_reflection(self, small_geometry, small_config):
        """Test echoes off the absorbing layer stay 50 dB below the direct field."""
        config = replace(small_config, grid_resolution=20, pml=PmlConfig())
        large = replace(config, air_gap_nm=2000.0, margin_nm=2000.0)
        point = {"p": (0.0, small_geometry.membrane_top + 200.0)}
        runs = [run_simulation(small_geometry, c, SourceSpec.dipole(), Layout.VACUUM, probes=point) for c in (config, large)]
        small, reference = runs
        # both lattices share dx and start on a multiple of it
        assert small.grid.z[small.probes["p"].row] == pytest.approx(reference.grid.z[reference.probes["p"].row])
        direct = np.abs(reference.probes["p"].e)
        echo = np.abs(small.probes["p"].e - reference.probes["p"].e)
        assert 20.0 * np.log10(np.max(echo / direct)) < -50.0

    def test_monotone_blue_shift(self, sweep_pair):
        """Test every etch step raises the fitted mode energy."""
        _, sweep = sweep_pair
        energies = sweep.table["Ec_eV"].to_numpy()
        assert np.all(np.diff(energies) > 0)
        assert sweep.sensitivity > 0

    def test_sweep_jobs_independent(self, sweep_pair):
        """Test worker processes reproduce the serial sweep."""
        serial, parallel = sweep_pair
        np.testing.assert_allclose(parallel.table.to_numpy(), serial.table.to_numpy(), rtol=1e-12, atol=0.0)
        np.testing.assert_allclose(parallel.purcell.to_numpy(), serial.purcell.to_numpy(), rtol=1e-12, atol=0.0)
        np.testing.assert_allclose(parallel.reflectance.to_numpy(), serial.reflectance.to_numpy(), rtol=1e-12, atol=0.0)

    def test_dip_matches_purcell_peak(self, sweep_pair):
        """Test the reflectance resonance sits within half a linewidth of the Purcell maximum."""
        serial, _ = sweep_pair
        row = serial.table.iloc[0]
        centre, width = float(row["Ec_eV"]), float(row["Gamma_eV"])
        energies = serial.purcell.columns.to_numpy(dtype=float)
        purcell = serial.purcell.iloc[0].to_numpy()
        near = np.abs(energies - centre) <= 3.0 * width
        assert near.sum() >= 3
        top = int(np.argmax(purcell[near]))
        assert 0 < top < near.sum() - 1
        peak = energies[near][top]
        assert abs(peak - centre) < 0.5 * width

    def test_grid_convergence(self, small_geometry, small_config):
        """Test the fitted mode energy moves less than 0.2 % from 20 to 30 cells per wavelength."""
        centres = []
        for resolution in (20, 30):
            config = replace(small_config, grid_resolution=resolution, frequency_samples=default_frequencies(*SWEEP_BAND))
            params, _ = fit_fano(compute_reflectance_spectrum(small_geometry, config).spectrum)
            centres.append(params.E_c)
        assert abs(centres[1] - centres[0]) / centres[1] < 2e-3
