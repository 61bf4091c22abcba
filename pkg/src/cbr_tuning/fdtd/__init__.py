"""
2D finite-difference time-domain engine for the resonator cross-section.
"""

from .config import (
    Boundary,
    PmlConfig,
    SimulationConfig,
    default_frequencies,
)

from .geometry import (
    CbrGeometry,
    Layout,
    SimulationGrid,
    build_geometry,
    make_grid,
    material_maps,
)

from .materials import (
    GoldDrude,
    energy_to_omega,
    omega_to_energy,
)

from .sources import (
    SourceKind,
    SourceSpec,
)

from .solver import (
    FdtdSolver,
    SimulationResult,
)

from .observables import (
    SpectrumResult,
    angular_ratio,
    compute_extraction_efficiency,
    compute_purcell_spectrum,
    compute_reflectance_spectrum,
    far_field,
    run_dipole,
    run_beam,
)

from .sweep import (
    SweepResult,
    etch_sweep,
    heatmap_long,
    sweep_deltas,
)

from .io import (
    load_run_config,
    load_snapshot,
    save_run_config,
)


def run_simulation(geometry, config, source, layout=Layout.CBR, **monitors):
    """
    Run one simulation and return its monitor records.

    ``monitors`` may hold ``lines`` (``{name: (orientation, position_nm)}``),
    ``boxes`` (``{name: (x_nm, z_nm)}``), ``probes`` (``{name: (x_nm, z_nm)}``)
    and ``snapshot_dir`` / ``snapshot_steps``.
    """
    solver = FdtdSolver(geometry, config, source, layout)
    for name, (orientation, position) in monitors.get("lines", {}).items():
        solver.add_line(name, orientation, position)
    for name, (x_nm, z_nm) in monitors.get("boxes", {}).items():
        solver.add_box(name, x_nm, z_nm)
    for name, (x_nm, z_nm) in monitors.get("probes", {}).items():
        solver.add_probe(name, x_nm, z_nm)
    return solver.run(monitors.get("snapshot_dir"), monitors.get("snapshot_steps", ()))


__all__ = [
    # Settings
    "Boundary",
    "PmlConfig",
    "SimulationConfig",
    "default_frequencies",
    # Geometry
    "CbrGeometry",
    "Layout",
    "SimulationGrid",
    "build_geometry",
    "make_grid",
    "material_maps",
    "GoldDrude",
    "energy_to_omega",
    "omega_to_energy",
    # Solver
    "SourceKind",
    "SourceSpec",
    "FdtdSolver",
    "SimulationResult",
    "run_simulation",
    # Observables
    "SpectrumResult",
    "angular_ratio",
    "compute_extraction_efficiency",
    "compute_purcell_spectrum",
    "compute_reflectance_spectrum",
    "far_field",
    "run_dipole",
    "run_beam",
    "SweepResult",
    "etch_sweep",
    "heatmap_long",
    "sweep_deltas",
    # Persistence
    "load_run_config",
    "load_snapshot",
    "save_run_config",
]
