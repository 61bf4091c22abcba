"""
Running DFT monitors and flux evaluation.

Monitors accumulate ``F(ω) = Σ f(tₙ) exp(iωtₙ) Δt`` while the solver runs,
each field sampled at its own staggered time. Phasors therefore follow the
``exp(−iωt)`` convention and the time-averaged Poynting vector of the TM
fields is

    S_x =  ½ Re(Ey Hz*)
    S_z = −½ Re(Ey Hx*)

Line monitors sit on half-integer positions, where the magnetic field lives;
``Ey`` is averaged from the two neighbouring node rows (columns).
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import ValidationError
from .geometry import SimulationGrid


@dataclass(eq=False)
class LineMonitor:
    """
    DFT of the fields on a horizontal or vertical line.

    A horizontal line at row ``index`` sits at ``z(index) + dx/2`` and spans
    columns ``[start, stop)``; a vertical one at column ``index`` sits at
    ``x(index) + dx/2`` and spans rows ``[start, stop)``.
    """

    name: str
    orientation: str
    index: int
    start: int
    stop: int
    omega: np.ndarray
    e: np.ndarray = field(init=False, repr=False)
    h: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.orientation not in ("h", "v"):
            raise ValidationError(f"line orientation must be 'h' or 'v', got {self.orientation!r}")
        if self.stop <= self.start:
            raise ValidationError(f"monitor {self.name} is empty")
        n = self.stop - self.start
        self.e = np.zeros((self.omega.size, n), dtype=complex)
        self.h = np.zeros((self.omega.size, n), dtype=complex)

    def sample_e(self, ey: np.ndarray) -> np.ndarray:
        if self.orientation == "h":
            return 0.5 * (ey[self.index, self.start:self.stop] + ey[self.index + 1, self.start:self.stop])
        return 0.5 * (ey[self.start:self.stop, self.index] + ey[self.start:self.stop, self.index + 1])

    def sample_h(self, hx: np.ndarray, hz: np.ndarray) -> np.ndarray:
        if self.orientation == "h":
            return hx[self.index, self.start:self.stop]
        return hz[self.start:self.stop, self.index]

    def accumulate(self, ey, hx, hz, phase_e: np.ndarray, phase_h: np.ndarray) -> None:
        self.e += np.outer(phase_e, self.sample_e(ey))
        self.h += np.outer(phase_h, self.sample_h(hx, hz))

    def flux(self, grid: SimulationGrid) -> np.ndarray:
        """
        Power crossing the line per frequency, towards ``+z`` (horizontal)
        or ``+x`` (vertical), scaled to the full cross-section.
        """
        if self.orientation == "h":
            weights = grid.column_weights()[self.start:self.stop]
            density = -0.5 * np.real(self.e * np.conj(self.h))
        else:
            weights = np.full(self.stop - self.start, grid.dx)
            density = 0.5 * np.real(self.e * np.conj(self.h))
        return grid.symmetry_factor * density @ weights


@dataclass(eq=False)
class BoxMonitor:
    """
    Closed contour around the nodes ``rows × cols`` (inclusive bounds).

    The contour runs through the magnetic nodes just outside the node
    block, so its flux is the exact discrete outflow. On the mirror axis
    the left side is omitted.
    """

    name: str
    rows: Tuple[int, int]
    cols: Tuple[int, int]
    omega: np.ndarray
    mirror: bool
    sides: Dict[str, LineMonitor] = field(init=False)

    def __post_init__(self) -> None:
        (k0, k1), (i0, i1) = self.rows, self.cols
        self.sides = {
            "top": LineMonitor(f"{self.name}.top", "h", k1, i0, i1 + 1, self.omega),
            "bottom": LineMonitor(f"{self.name}.bottom", "h", k0 - 1, i0, i1 + 1, self.omega),
            "right": LineMonitor(f"{self.name}.right", "v", i1, k0, k1 + 1, self.omega),
        }
        if not (self.mirror and i0 == 0):
            self.sides["left"] = LineMonitor(f"{self.name}.left", "v", i0 - 1, k0, k1 + 1, self.omega)

    def accumulate(self, ey, hx, hz, phase_e, phase_h) -> None:
        for side in self.sides.values():
            side.accumulate(ey, hx, hz, phase_e, phase_h)

    def flux(self, grid: SimulationGrid) -> np.ndarray:
        """Net power leaving the box per frequency."""
        total = self.sides["top"].flux(grid) - self.sides["bottom"].flux(grid) + self.sides["right"].flux(grid)
        if "left" in self.sides:
            total = total - self.sides["left"].flux(grid)
        return total


@dataclass(eq=False)
class PointProbe:
    """DFT and time trace of ``Ey`` at one node."""

    name: str
    row: int
    col: int
    omega: np.ndarray
    e: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.e = np.zeros(self.omega.size, dtype=complex)

    def accumulate(self, ey, hx, hz, phase_e, phase_h) -> None:
        self.e += phase_e * ey[self.row, self.col]


def fourier_lines(line: LineMonitor, grid: SimulationGrid, padding: int = 8) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Angular spectra of ``Ey`` and ``Hx`` along a horizontal line.

    A half-domain line is unfolded (both fields are even about the axis)
    before the transform; the line is zero-padded to ``padding`` times its
    length.

    Returns
    -------
    kx : ndarray
        Transverse wavenumbers (rad/nm), ascending.
    e_k, h_k : ndarray, shape (n_freq, n_k)
        Angular spectra scaled by ``dx``.
    """
    if line.orientation != "h":
        raise ValidationError("angular spectra need a horizontal line")
    e, h = line.e, line.h
    if grid.mirror and line.start == 0:
        e = np.concatenate([e[:, :0:-1], e], axis=1)
        h = np.concatenate([h[:, :0:-1], h], axis=1)
    n = e.shape[1]
    size = int(2 ** np.ceil(np.log2(max(n * padding, 16))))
    kx = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(size, d=grid.dx))
    e_k = np.fft.fftshift(np.fft.fft(e, n=size, axis=1), axes=1) * grid.dx
    h_k = np.fft.fftshift(np.fft.fft(h, n=size, axis=1), axes=1) * grid.dx
    return kx, e_k, h_k


def directional_power(
    line: LineMonitor, grid: SimulationGrid, omega: np.ndarray, na: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the fields on a horizontal line in air into up- and down-going
    plane waves and return the power of each inside the aperture ``na``.

    For a plane wave ``Hx = ∓(kz/k0) Ey`` (upper sign upwards), hence

        E_up   = (Ey − (k0/kz) Hx) / 2
        E_down = (Ey + (k0/kz) Hx) / 2

    and the power is ``Σ |E|² kz/k0`` over propagating ``|kx| ≤ NA·k0``.
    """
    kx, e_k, h_k = fourier_lines(line, grid)
    up = np.zeros(omega.size)
    down = np.zeros(omega.size)
    aperture = 1.0 if na is None else na
    for j, k0 in enumerate(omega):
        keep = np.abs(kx) < aperture * k0
        if not np.any(keep):
            continue
        kz = np.sqrt(k0**2 - kx[keep] ** 2)
        ratio = k0 / kz
        e_up = 0.5 * (e_k[j, keep] - ratio * h_k[j, keep])
        e_down = 0.5 * (e_k[j, keep] + ratio * h_k[j, keep])
        up[j] = np.sum(np.abs(e_up) ** 2 * kz / k0)
        down[j] = np.sum(np.abs(e_down) ** 2 * kz / k0)
    return up, down
