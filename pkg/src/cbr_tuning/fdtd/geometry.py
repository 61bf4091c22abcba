"""
Resonator cross-section, etch transformation and the material grid.

The cross-section is the plane through the resonator axis. ``x`` is the
radial coordinate (``x = 0`` on the axis) and ``z`` the height above the
perfect-conductor cap below the gold. From the bottom the stack is gold,
oxide, membrane and air. In the membrane the central disc of radius ``r``
is followed by ``n_rings`` trenches of width ``t`` at
``[r + j·p, r + j·p + t]``.

Usage
-----
    from cbr_tuning.fdtd.geometry import CbrGeometry, Layout, build_geometry

    base = CbrGeometry()
    etched = build_geometry(base, 1.5)
    etched.r, etched.d, etched.t      # (331.5, 146.5, 101.5)
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Tuple

import numpy as np

from ..exceptions import DomainError, ValidationError
from .config import Boundary, SimulationConfig
from .materials import GoldDrude

logger = logging.getLogger(__name__)


class Layout(str, Enum):
    """What the material grid contains."""

    CBR = "cbr"  # full resonator on the layer stack
    PLANAR = "planar"  # layer stack without trenches
    BULK = "bulk"  # unbounded membrane material
    VACUUM = "vacuum"

    @classmethod
    def parse(cls, text) -> "Layout":
        try:
            return text if isinstance(text, cls) else cls(str(text).lower())
        except ValueError:
            raise ValidationError(f"unknown layout {text!r}; expected one of {[m.value for m in cls]}")


@dataclass(frozen=True)
class CbrGeometry:
    """
    Resonator dimensions in nm.

    Parameters
    ----------
    p, t, r, d : float
        Grating period, trench width, central disc radius, membrane thickness.
    oxide_thickness, gold_thickness : float
        Lower layers of the stack.
    n_membrane, n_oxide : float
        Refractive indices.
    gold : GoldDrude
        Dispersive model of the back mirror.
    n_rings : int
        Number of trenches.
    etch_depth : float
        Material removed so far (bookkeeping, set by :func:`build_geometry`).
    double_sided_trench : bool
        Etching widens each trench by ``2δ`` instead of ``δ``.
    """

    p: float = 380.0
    t: float = 100.0
    r: float = 333.0
    d: float = 148.0
    oxide_thickness: float = 200.0
    gold_thickness: float = 100.0
    n_membrane: float = 3.3
    n_oxide: float = 1.64
    gold: GoldDrude = field(default_factory=GoldDrude)
    n_rings: int = 6
    etch_depth: float = 0.0
    double_sided_trench: bool = False

    def __post_init__(self) -> None:
        lengths = {"p": self.p, "t": self.t, "r": self.r, "d": self.d,
                   "oxide_thickness": self.oxide_thickness, "gold_thickness": self.gold_thickness}
        bad = [name for name, value in lengths.items() if not (math.isfinite(value) and value > 0)]
        if bad:
            raise DomainError(f"geometry lengths must be positive: {bad}")
        if self.t >= self.p:
            raise DomainError(f"trench width {self.t} nm must be smaller than the period {self.p} nm")
        if self.n_membrane < 1 or self.n_oxide < 1:
            raise DomainError("refractive indices must be >= 1")
        if int(self.n_rings) != self.n_rings or self.n_rings < 1:
            raise DomainError(f"n_rings must be a positive integer, got {self.n_rings}")
        if self.etch_depth < 0:
            raise DomainError(f"etch depth must be non-negative, got {self.etch_depth}")
        object.__setattr__(self, "n_rings", int(self.n_rings))

    @property
    def membrane_bottom(self) -> float:
        return self.gold_thickness + self.oxide_thickness

    @property
    def membrane_top(self) -> float:
        return self.membrane_bottom + self.d

    @property
    def membrane_center(self) -> float:
        return self.membrane_bottom + 0.5 * self.d

    @property
    def outer_radius(self) -> float:
        return self.r + self.n_rings * self.p

    def trenches(self) -> List[Tuple[float, float]]:
        """Radial extent ``(start, end)`` of every trench."""
        return [(self.r + j * self.p, self.r + j * self.p + self.t) for j in range(self.n_rings)]

    def max_index(self, layout: "Layout") -> float:
        layout = Layout.parse(layout)
        if layout is Layout.VACUUM:
            return 1.0
        if layout is Layout.BULK:
            return self.n_membrane
        return max(self.n_membrane, self.n_oxide)


def build_geometry(base: CbrGeometry, etch_depth: float) -> CbrGeometry:
    """
    Apply an etch of depth ``δ``: ``r → r − δ``, ``d → d − δ``, ``t → t + δ``.

    With ``base.double_sided_trench`` the trench widens by ``2δ``. Oxide and
    gold are untouched.

    Raises
    ------
    DomainError
        If ``δ`` is negative or would remove the disc, the membrane or a ring.
    """
    delta = float(etch_depth)
    widen = 2.0 * delta if base.double_sided_trench else delta
    if not math.isfinite(delta) or delta < 0:
        raise DomainError(f"etch depth must be non-negative, got {etch_depth}")
    if delta >= base.r or delta >= base.d or widen >= base.p - base.t:
        raise DomainError(
            f"etch depth {delta} nm exceeds the geometry (r={base.r}, d={base.d}, p-t={base.p - base.t})"
        )
    if delta == 0:
        return base
    return replace(
        base,
        r=base.r - delta,
        d=base.d - delta,
        t=base.t + widen,
        etch_depth=base.etch_depth + delta,
    )


# ===================== MATERIAL GRID =====================


@dataclass(frozen=True)
class SimulationGrid:
    """
    Node layout of the Yee grid.

    ``Ey`` lives on nodes ``(k, i)`` at ``(x0 + i·dx, z0 + k·dx)``; ``Hx`` on
    ``(k + ½, i)`` and ``Hz`` on ``(k, i + ½)``. With ``mirror`` the first
    column lies on the resonator axis.
    """

    dx: float
    nx: int
    nz: int
    x0: float
    z0: float
    mirror: bool
    pml_cells: int
    pml_bottom: bool
    pml_left: bool

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def z(self) -> np.ndarray:
        return self.z0 + self.dx * np.arange(self.nz)

    def column(self, x_nm: float) -> int:
        i = int(round((x_nm - self.x0) / self.dx))
        if not 0 <= i < self.nx:
            raise ValidationError(f"x = {x_nm} nm lies outside the grid")
        return i

    def row(self, z_nm: float) -> int:
        k = int(round((z_nm - self.z0) / self.dx))
        if not 0 <= k < self.nz:
            raise ValidationError(f"z = {z_nm} nm lies outside the grid")
        return k

    @property
    def interior_rows(self) -> Tuple[int, int]:
        """First and last row index outside the PML and the outer walls."""
        lo = self.pml_cells + 1 if self.pml_bottom else 1
        hi = self.nz - 2 - self.pml_cells if self.pml_cells else self.nz - 2
        return lo, hi

    @property
    def interior_columns(self) -> Tuple[int, int]:
        lo = self.pml_cells + 1 if self.pml_left else (0 if self.mirror else 1)
        hi = self.nx - 2 - self.pml_cells if self.pml_cells else self.nx - 2
        return lo, hi

    def column_weights(self) -> np.ndarray:
        """Integration weights along ``x`` (half weight on the mirror axis)."""
        weights = np.full(self.nx, self.dx)
        if self.mirror:
            weights[0] *= 0.5
        return weights

    @property
    def symmetry_factor(self) -> float:
        """Factor converting half-domain integrals to the full cross-section."""
        return 2.0 if self.mirror else 1.0


def make_grid(geometry: CbrGeometry, config: SimulationConfig, layout: Layout) -> SimulationGrid:
    """Size the grid for ``geometry`` and ``layout``."""
    layout = Layout.parse(layout)
    dx = config.cell_size(geometry.max_index(layout))
    open_box = config.boundary is Boundary.OPEN
    pml = config.pml.cells if open_box else 0
    unbounded = layout in (Layout.BULK, Layout.VACUUM)

    half_width = geometry.outer_radius + config.margin_nm
    side = int(math.ceil(half_width / dx))
    if config.mirror:
        nx = side + 1 + pml + 1
        x0 = 0.0
    else:
        nx = 2 * (side + pml + 1) + 1
        x0 = -(side + pml + 1) * dx

    top = geometry.membrane_top + config.air_gap_nm
    if unbounded:
        below = int(math.ceil(config.margin_nm / dx)) + pml + 1
        z0 = -below * dx
    else:
        z0 = 0.0
    nz = int(math.ceil((top - z0) / dx)) + 1 + pml + 1
    grid = SimulationGrid(dx, nx, nz, x0, z0, config.mirror, pml, unbounded and pml > 0, (not config.mirror) and pml > 0)
    logger.debug("Grid %s: %d x %d nodes, dx=%.3f nm", layout.value, nz, nx, dx)
    return grid


def _overlap(lo: np.ndarray, hi: np.ndarray, a: float, b: float) -> np.ndarray:
    return np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)


def material_maps(geometry: CbrGeometry, layout: Layout, grid: SimulationGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cell-averaged permittivity and gold fill fraction on the ``Ey`` nodes.

    Each node's cell ``[x ± dx/2] × [z ± dx/2]`` is split by area between the
    materials it overlaps. ``Ey`` is parallel to every interface, so the
    arithmetic mean of ε is the exact effective medium for it; 1.5 nm etch
    steps therefore change the grid well below one cell.

    Returns
    -------
    eps : ndarray, shape (nz, nx)
        Static part of the relative permittivity (gold contributes ``ε∞``).
    gold : ndarray, shape (nz, nx)
        Gold fill fraction, weighting the Drude current.
    """
    layout = Layout.parse(layout)
    shape = (grid.nz, grid.nx)
    if layout is Layout.VACUUM:
        return np.ones(shape), np.zeros(shape)
    eps_mem = geometry.n_membrane**2
    if layout is Layout.BULK:
        return np.full(shape, eps_mem), np.zeros(shape)

    h = 0.5 * grid.dx
    z = grid.z
    x = np.abs(grid.x)
    zl, zh = z - h, z + h
    f_gold = _overlap(zl, zh, 0.0, geometry.gold_thickness) / grid.dx
    f_oxide = _overlap(zl, zh, geometry.gold_thickness, geometry.membrane_bottom) / grid.dx
    f_membrane = _overlap(zl, zh, geometry.membrane_bottom, geometry.membrane_top) / grid.dx
    f_air = np.clip(1.0 - f_gold - f_oxide - f_membrane, 0.0, 1.0)

    # Radial fraction of each cell that is membrane rather than trench
    solid = np.ones(grid.nx)
    if layout is Layout.CBR:
        xl, xh = x - h, x + h
        open_fraction = np.zeros(grid.nx)
        for start, end in geometry.trenches():
            open_fraction += _overlap(xl, xh, start, end) + _overlap(xl, xh, -end, -start)
        solid = 1.0 - open_fraction / grid.dx

    membrane = np.outer(f_membrane, solid)
    eps = (
        np.outer(f_gold * geometry.gold.eps_inf + f_oxide * geometry.n_oxide**2 + f_air, np.ones(grid.nx))
        + membrane * eps_mem
        + np.outer(f_membrane, 1.0 - solid)
    )
    gold = np.outer(f_gold, np.ones(grid.nx))
    return eps, gold
