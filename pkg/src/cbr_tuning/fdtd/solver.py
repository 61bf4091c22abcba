"""
Leapfrog Yee solver for the 2D TM cross-section.

Fields: ``Ey`` (out of plane) on nodes, ``Hx`` on ``(k+½, i)``, ``Hz`` on
``(k, i+½)``. One step advances

    Hx += Δt (∂z Ey / κz + ψ)
    Hz −= Δt (∂x Ey / κx + ψ)
    ε∞ ∂t Ey = ∂z Hx / κz + ψ − ∂x Hz / κx − ψ − J_drude − J_source

with the gold polarisation current ``J' + γJ = ωp² E`` advanced
semi-implicitly. Outer walls are perfect conductors; with ``mirror`` the
axis column is a symmetry plane (``Hz`` odd, ``Ey`` even).

Time stepping is split into horizontal stripes updated by a thread pool,
with all magnetic stripes finished before any electric stripe starts. Every
node is computed by the same element-wise operations whatever the stripe
count, so results do not depend on it.

Usage
-----
    from cbr_tuning.fdtd import CbrGeometry, SimulationConfig, SourceSpec, FdtdSolver, Layout

    solver = FdtdSolver(CbrGeometry(), SimulationConfig(), SourceSpec.dipole(), Layout.CBR)
    solver.add_box("box", x_nm=0.0, z_nm=None)
    result = solver.run()
    power = result.flux("box")
"""

import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import StabilityError, ValidationError
from .config import Boundary, SimulationConfig
from .cpml import axis_profile, no_profile
from .geometry import CbrGeometry, Layout, SimulationGrid, make_grid, material_maps
from .io import dump_snapshot
from .materials import energy_to_omega
from .monitors import BoxMonitor, LineMonitor, PointProbe
from .sources import SourceKind, SourceSpec, beam_profile

logger = logging.getLogger(__name__)

# Past the source maximum a driven field can at most quadruple its energy;
# a tenfold rise within the window, or above the energy at the source
# maximum, means instability
GROWTH_WINDOW = 100
GROWTH_LIMIT = 10.0


@dataclass(eq=False)
class SimulationResult:
    """
    Monitor records of one run.

    Attributes
    ----------
    run_id : str
        Deterministic identifier of layout, geometry and resolution.
    energies : ndarray
        DFT photon energies in eV.
    lines, boxes, probes : dict
        Monitors by name.
    traces : dict
        ``Ey`` time trace of every probe.
    steps : int
        Number of time steps taken.
    termination : str
        ``"decayed"`` or ``"runtime"``.
    """

    run_id: str
    layout: Layout
    grid: SimulationGrid
    dt: float
    energies: np.ndarray
    lines: Dict[str, LineMonitor]
    boxes: Dict[str, BoxMonitor]
    probes: Dict[str, PointProbe]
    traces: Dict[str, np.ndarray]
    steps: int
    termination: str
    peak_energy: float
    final_energy: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def omega(self) -> np.ndarray:
        return energy_to_omega(self.energies)

    def flux(self, name: str) -> np.ndarray:
        """Power through a line (towards +z/+x) or out of a box, per energy."""
        if name in self.boxes:
            return self.boxes[name].flux(self.grid)
        if name in self.lines:
            return self.lines[name].flux(self.grid)
        raise ValidationError(f"no flux monitor named {name!r}")


def run_identifier(geometry: CbrGeometry, config: SimulationConfig, layout: Layout, source: SourceSpec) -> str:
    return (
        f"{layout.value}:{source.kind.value}:r{geometry.r:.3f}:d{geometry.d:.3f}:t{geometry.t:.3f}"
        f":res{config.grid_resolution}:n{geometry.n_rings}"
    )


def _stripes(lo: int, hi: int, count: int) -> List[Tuple[int, int]]:
    """Split ``[lo, hi)`` into ``count`` contiguous ranges."""
    edges = np.linspace(lo, hi, min(count, max(hi - lo, 1)) + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _intersect(slabs: Sequence[Tuple[int, int]], a: int, b: int):
    for lo, hi in slabs:
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo:
            yield lo, hi


class FdtdSolver:
    """
    Time-domain solver for one geometry, layout and source.

    Parameters
    ----------
    geometry : CbrGeometry
        Resonator dimensions.
    config : SimulationConfig
        Numerical settings.
    source : SourceSpec
        Dipole or beam.
    layout : Layout
        Material content of the domain.

    Raises
    ------
    ValidationError
        If the source band does not cover the DFT energies or the source
        lies outside the interior.
    """

    def __init__(self, geometry: CbrGeometry, config: SimulationConfig, source: SourceSpec, layout: Layout = Layout.CBR):
        self.geometry = geometry
        self.config = config
        self.source = source
        self.layout = Layout.parse(layout)
        source.check_band(config.energies)

        grid = make_grid(geometry, config, self.layout)
        self.grid = grid
        self.dx = grid.dx
        self.dt = config.time_step(grid.dx)
        self.omega = energy_to_omega(config.energies)

        eps, gold = material_maps(geometry, self.layout, grid)
        self.eps = eps
        self._setup_drude(eps, gold)
        self._setup_pml(eps)
        self._setup_source()

        nz, nx = grid.nz, grid.nx
        self.ey = np.zeros((nz, nx))
        self.hx = np.zeros((nz - 1, nx))
        self.hz = np.zeros((nz, nx - 1))
        self.psi_ey_z = np.zeros((nz, nx))
        self.psi_ey_x = np.zeros((nz, nx))
        self.psi_hx = np.zeros((nz - 1, nx))
        self.psi_hz = np.zeros((nz, nx - 1))
        self.n = 0

        self.lines: Dict[str, LineMonitor] = {}
        self.boxes: Dict[str, BoxMonitor] = {}
        self.probes: Dict[str, PointProbe] = {}
        self._traces: Dict[str, List[float]] = {}

        self._e_stripes = _stripes(1, nz - 1, config.stripes)
        self._h_stripes = _stripes(0, nz, config.stripes)
        self._pool = ThreadPoolExecutor(max_workers=config.stripes) if config.stripes > 1 else None

        weights = np.ones(nx)
        if grid.mirror:
            weights[0] = 0.5
        self._weights = weights

    # ===================== SETUP =====================

    def _setup_drude(self, eps: np.ndarray, gold: np.ndarray) -> None:
        rows = np.flatnonzero(gold.max(axis=1) > 0)
        dt = self.dt
        if rows.size:
            self._gold_rows = (int(rows[0]), int(rows[-1]) + 1)
            kj, bj = self.geometry.gold.update_coefficients(dt)
            g0, g1 = self._gold_rows
            self._kj = kj
            self._bj = bj * gold[g0:g1]
            self.j = np.zeros((g1 - g0, self.grid.nx))
        else:
            self._gold_rows = None
            self._kj = 0.0
            self._bj = None
            self.j = None
        bj_full = np.zeros_like(eps)
        if self._gold_rows is not None:
            g0, g1 = self._gold_rows
            bj_full[g0:g1] = self._bj
        denominator = eps / dt + 0.5 * bj_full
        self.ca = (eps / dt - 0.5 * bj_full) / denominator
        self.cb = 1.0 / denominator

    def _setup_pml(self, eps: np.ndarray) -> None:
        grid, cfg = self.grid, self.config
        if cfg.boundary is Boundary.CLOSED:
            self.pz, self.px = no_profile(grid.nz), no_profile(grid.nx)
            return
        top_eps = float(eps[-1].mean())
        bottom_eps = float(eps[0].mean())
        side_eps = float(eps[:, -1].mean())
        self.pz = axis_profile(grid.nz, cfg.pml, grid.dx, self.dt, grid.pml_bottom, True, bottom_eps, top_eps)
        self.px = axis_profile(grid.nx, cfg.pml, grid.dx, self.dt, grid.pml_left, True, side_eps, side_eps)

    def _inside(self, row: int, col: int) -> None:
        (r0, r1), (c0, c1) = self.grid.interior_rows, self.grid.interior_columns
        if not (r0 <= row <= r1 and c0 <= col <= c1):
            raise ValidationError(f"node ({row}, {col}) lies outside the interior of the domain")

    def _setup_source(self) -> None:
        grid, src = self.grid, self.source
        area = grid.dx * grid.dx
        if src.kind is SourceKind.DIPOLE:
            z = self.geometry.membrane_center if src.z_nm is None else src.z_nm
            row, col = grid.row(z), grid.column(src.x_nm)
            self._inside(row, col)
            self._src_rows = (row, row + 1)
            self._src_cols = np.array([col])
            self._src_weights = np.array([1.0 / area])
            self._src_delays = np.zeros(1)
        else:
            z = self.geometry.membrane_top + 0.6 * self.config.air_gap_nm if src.z_nm is None else src.z_nm
            row = grid.row(z)
            c0, c1 = grid.interior_columns
            cols = np.arange(c0, c1 + 1)
            self._inside(row, c0)
            height = grid.z[row] - self.geometry.membrane_top
            if height <= 0:
                raise ValidationError("the beam source line must lie above the membrane")
            weights, delays = beam_profile(grid.x[cols], height, src.na)
            self._src_rows = (row, row + 1)
            self._src_cols = cols
            self._src_weights = weights / grid.dx
            self._src_delays = delays
        delay = float(self._src_delays.max(initial=0.0))
        self.source_peak = src.t0 + delay
        self.switch_off = src.switch_off_time(delay)

    # ===================== MONITORS =====================

    def add_line(self, name: str, orientation: str, position_nm: float, start_nm: Optional[float] = None, stop_nm: Optional[float] = None) -> LineMonitor:
        """
        Add a flux line at height ``position_nm`` (``"h"``) or radius
        ``position_nm`` (``"v"``), spanning the interior unless bounded.
        """
        grid = self.grid
        if orientation == "h":
            index = grid.row(position_nm)
            lo, hi = grid.interior_columns
            start = lo if start_nm is None else grid.column(start_nm)
            stop = hi + 1 if stop_nm is None else grid.column(stop_nm) + 1
        else:
            index = grid.column(position_nm)
            lo, hi = grid.interior_rows
            start = lo if start_nm is None else grid.row(start_nm)
            stop = hi + 1 if stop_nm is None else grid.row(stop_nm) + 1
        monitor = LineMonitor(name, orientation, index, start, stop, self.omega)
        self.lines[name] = monitor
        return monitor

    def add_box(self, name: str, x_nm: Optional[float] = None, z_nm: Optional[float] = None, half_cells: Optional[int] = None) -> BoxMonitor:
        """Add a flux box of ``2·half_cells + 1`` nodes around a point (default: the dipole)."""
        grid = self.grid
        half = self.config.box_half_cells if half_cells is None else half_cells
        if x_nm is None and z_nm is None and self.source.kind is SourceKind.DIPOLE:
            row, col = self._src_rows[0], int(self._src_cols[0])
        else:
            row = grid.row(self.geometry.membrane_center if z_nm is None else z_nm)
            col = grid.column(0.0 if x_nm is None else x_nm)
        c0 = max(col - half, 0) if grid.mirror else col - half
        box = BoxMonitor(name, (row - half, row + half), (c0, col + half), self.omega, grid.mirror)
        self._inside(row - half - 1, max(c0 - (0 if grid.mirror and c0 == 0 else 1), 0))
        self._inside(row + half + 1, col + half + 1)
        self.boxes[name] = box
        return box

    def add_probe(self, name: str, x_nm: float, z_nm: float) -> PointProbe:
        row, col = self.grid.row(z_nm), self.grid.column(x_nm)
        self._inside(row, col)
        probe = PointProbe(name, row, col, self.omega)
        self.probes[name] = probe
        self._traces[name] = []
        return probe

    # ===================== TIME STEPPING =====================

    def _update_h(self, a: int, b: int) -> None:
        pz, px = self.pz, self.px
        ey = self.ey
        nz = self.grid.nz
        # Hx rows [a, min(b, nz-1))
        hb = min(b, nz - 1)
        if hb > a:
            dez = (ey[a + 1:hb + 1] - ey[a:hb]) / self.dx
            curl = dez * pz.inv_kappa_h[a:hb, None]
            for lo, hi in _intersect(pz.slabs_h, a, hb):
                self.psi_hx[lo:hi] = pz.b_h[lo:hi, None] * self.psi_hx[lo:hi] + pz.c_h[lo:hi, None] * dez[lo - a:hi - a]
                curl[lo - a:hi - a] += self.psi_hx[lo:hi]
            self.hx[a:hb] += self.dt * curl
        dex = (ey[a:b, 1:] - ey[a:b, :-1]) / self.dx
        curl = dex * px.inv_kappa_h[None, :]
        for lo, hi in px.slabs_h:
            self.psi_hz[a:b, lo:hi] = px.b_h[lo:hi] * self.psi_hz[a:b, lo:hi] + px.c_h[lo:hi] * dex[:, lo:hi]
            curl[:, lo:hi] += self.psi_hz[a:b, lo:hi]
        self.hz[a:b] -= self.dt * curl

    def _update_e(self, a: int, b: int, source_value: np.ndarray) -> None:
        pz, px = self.pz, self.px
        nx = self.grid.nx
        dhx = (self.hx[a:b] - self.hx[a - 1:b - 1]) / self.dx
        dhz = np.zeros((b - a, nx))
        dhz[:, 1:nx - 1] = (self.hz[a:b, 1:] - self.hz[a:b, :-1]) / self.dx
        if self.grid.mirror:
            dhz[:, 0] = 2.0 * self.hz[a:b, 0] / self.dx
        curl = dhx * pz.inv_kappa_e[a:b, None] - dhz * px.inv_kappa_e[None, :]
        for lo, hi in _intersect(pz.slabs_e, a, b):
            self.psi_ey_z[lo:hi] = pz.b_e[lo:hi, None] * self.psi_ey_z[lo:hi] + pz.c_e[lo:hi, None] * dhx[lo - a:hi - a]
            curl[lo - a:hi - a] += self.psi_ey_z[lo:hi]
        for lo, hi in px.slabs_e:
            self.psi_ey_x[a:b, lo:hi] = px.b_e[lo:hi] * self.psi_ey_x[a:b, lo:hi] + px.c_e[lo:hi] * dhz[:, lo:hi]
            curl[:, lo:hi] -= self.psi_ey_x[a:b, lo:hi]

        gold = None
        if self._gold_rows is not None:
            g0, g1 = self._gold_rows
            lo, hi = max(a, g0), min(b, g1)
            if hi > lo:
                gold = (lo, hi)
                curl[lo - a:hi - a] -= 0.5 * (1.0 + self._kj) * self.j[lo - g0:hi - g0]
                e_old = self.ey[lo:hi].copy()

        r0 = self._src_rows[0]
        if a <= r0 < b:
            curl[r0 - a, self._src_cols] -= source_value

        self.ey[a:b] = self.ca[a:b] * self.ey[a:b] + self.cb[a:b] * curl
        self.ey[a:b, nx - 1] = 0.0
        if not self.grid.mirror:
            self.ey[a:b, 0] = 0.0

        if gold is not None:
            lo, hi = gold
            g0 = self._gold_rows[0]
            self.j[lo - g0:hi - g0] = self._kj * self.j[lo - g0:hi - g0] + self._bj[lo - g0:hi - g0] * (self.ey[lo:hi] + e_old)

    def _run_stripes(self, function, stripes, *args) -> None:
        if self._pool is None:
            for a, b in stripes:
                function(a, b, *args)
            return
        for future in [self._pool.submit(function, a, b, *args) for a, b in stripes]:
            future.result()

    def source_current(self, t: float) -> np.ndarray:
        return self.source.waveform(t + self._src_delays) * self._src_weights

    def step(self, track_invariant: bool = False) -> Optional[float]:
        """
        Advance one time step.

        Returns
        -------
        float or None
            With ``track_invariant``, the conserved discrete energy
            ``½Σ ε E(n)² + ½Σ H(n−½)·H(n+½)`` evaluated during the step.
        """
        if track_invariant:
            hx_old, hz_old = self.hx.copy(), self.hz.copy()
        self._run_stripes(self._update_h, self._h_stripes)
        invariant = self._invariant(hx_old, hz_old) if track_invariant else None
        source_value = self.source_current((self.n + 0.5) * self.dt)
        self._run_stripes(self._update_e, self._e_stripes, source_value)
        self.n += 1
        return invariant

    def _invariant(self, hx_old: np.ndarray, hz_old: np.ndarray) -> float:
        area = self.dx * self.dx
        electric = np.sum(self.eps * self.ey**2 * self._weights[None, :])
        magnetic = np.sum(self.hx * hx_old * self._weights[None, :]) + np.sum(self.hz * hz_old)
        return 0.5 * area * (electric + magnetic)

    def field_energy(self) -> float:
        """Electromagnetic energy ``½Σ(εE² + H²)`` in the half or full domain."""
        area = self.dx * self.dx
        electric = np.sum(self.eps * self.ey**2 * self._weights[None, :])
        magnetic = np.sum(self.hx**2 * self._weights[None, :]) + np.sum(self.hz**2)
        return 0.5 * area * float(electric + magnetic)

    def _accumulate(self) -> None:
        stride_dt = self.config.dft_stride * self.dt
        t_e = self.n * self.dt
        t_h = (self.n - 0.5) * self.dt
        phase_e = np.exp(1j * self.omega * t_e) * stride_dt
        phase_h = np.exp(1j * self.omega * t_h) * stride_dt
        for monitor in (*self.lines.values(), *self.boxes.values(), *self.probes.values()):
            monitor.accumulate(self.ey, self.hx, self.hz, phase_e, phase_h)

    def _check_growth(self, history: deque, reference: float, energy: float) -> None:
        """Raise StabilityError on energy growth past the source maximum."""
        courant = self.config.courant_factor
        if reference > 0 and energy > GROWTH_LIMIT * reference:
            raise StabilityError(
                f"field energy reached {energy / reference:.3g}x its value at the source maximum at step {self.n}; "
                f"check the Courant factor ({courant}) and the PML grading"
            )
        if not history:
            return
        _, start_energy = history[0]
        if start_energy > 0 and energy > GROWTH_LIMIT * start_energy:
            raise StabilityError(
                f"field energy grew {energy / start_energy:.3g}x within {GROWTH_WINDOW} steps at step {self.n}; "
                f"check the Courant factor ({courant}) and the PML grading"
            )

    def run(self, snapshot_dir: Optional[str] = None, snapshot_steps: Sequence[int] = ()) -> SimulationResult:
        """
        Step until the field energy has decayed or the runtime cap is hit.

        Raises
        ------
        StabilityError
            If the fields become non-finite or, once the source envelope has
            peaked, the energy grows more than tenfold within 100 steps or
            beyond ten times its value at the envelope maximum.
        """
        cfg = self.config
        period = 2.0 * math.pi / self.source.omega0
        max_steps = int(math.ceil(max(cfg.runtime * period, self.switch_off) / self.dt))
        history: deque = deque(maxlen=GROWTH_WINDOW // cfg.check_interval + 1)
        reference = 0.0
        peak = 0.0
        energy = 0.0
        termination = "runtime"
        wanted = set(int(s) for s in snapshot_steps)
        run_id = run_identifier(self.geometry, cfg, self.layout, self.source)
        logger.info(
            "Starting %s run: %d x %d nodes, dx=%.3f nm, dt=%.3f, up to %d steps",
            run_id, self.grid.nz, self.grid.nx, self.dx, self.dt, max_steps,
        )
        try:
            while self.n < max_steps:
                self.step()
                for name, probe in self.probes.items():
                    self._traces[name].append(float(self.ey[probe.row, probe.col]))
                if self.n % cfg.dft_stride == 0:
                    self._accumulate()
                if snapshot_dir is not None and self.n in wanted:
                    dump_snapshot(snapshot_dir, f"ey_{self.n:07d}", self.ey, self.grid, self.n, self.n * self.dt)
                if self.n % cfg.check_interval:
                    continue
                energy = self.field_energy()
                if not math.isfinite(energy):
                    raise StabilityError(
                        f"fields became non-finite at step {self.n}; check the Courant factor "
                        f"({cfg.courant_factor}) and the PML grading"
                    )
                peak = max(peak, energy)
                self._check_growth(history, reference, energy)
                if self.n * self.dt >= self.source_peak:
                    history.append((self.n, energy))
                    if reference == 0.0:
                        reference = energy
                past_source = self.n * self.dt > self.switch_off
                if past_source and peak > 0 and energy < cfg.decay_threshold * peak:
                    termination = "decayed"
                    break
        finally:
            if self._pool is not None:
                self._pool.shutdown(wait=True)
                self._pool = None
        logger.info("Finished %s after %d steps (%s, energy %.3g of peak)", run_id, self.n, termination, energy / peak if peak else 0.0)
        if termination == "runtime":
            logger.warning("Run %s hit the runtime cap of %.0f periods before the field decayed", run_id, cfg.runtime)
        return SimulationResult(
            run_id=run_id,
            layout=self.layout,
            grid=self.grid,
            dt=self.dt,
            energies=self.config.energies.copy(),
            lines=self.lines,
            boxes=self.boxes,
            probes=self.probes,
            traces={name: np.asarray(values) for name, values in self._traces.items()},
            steps=self.n,
            termination=termination,
            peak_energy=peak,
            final_energy=energy,
            metadata={"source": self.source.kind.value, "dx_nm": self.dx},
        )
