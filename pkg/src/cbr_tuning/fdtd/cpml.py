"""
Convolutional perfectly matched layer profiles.

Along each axis the stretched coordinate ``s = κ + σ/(α + iω)`` is applied
through auxiliary ``ψ`` fields:

    ψ ← b ψ + c ∂F
    update uses ∂F / κ + ψ

with

    b = exp(−(σ/κ + α) Δt)
    c = σ (b − 1) / (κ (σ + κ α))

``σ`` and ``κ`` grow as ``ρ^m`` from the interior interface (``ρ = 0``) to
the outer wall (``ρ = 1``); ``α`` falls linearly. The peak conductivity is

    σ_max = −(m + 1) ln R / (2 L √εr)

in normalised units, ``L`` being the layer thickness in nm.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..constants import C_M_PER_S, EPS0
from .config import PmlConfig

# S/m → normalised rate (1/nm): divide by ε0 and scale by the nm light-travel time
_SI_RATE_TO_NORM = 1e-9 / (EPS0 * C_M_PER_S)


@dataclass(frozen=True, eq=False)
class AxisProfile:
    """
    CPML coefficients along one axis.

    ``*_e`` arrays sit on integer (``Ey``) nodes, ``*_h`` arrays on half-integer
    nodes. ``inv_kappa`` is ``1/κ`` (one outside the layer) and ``c`` is zero
    outside it, so the update can be written once for the whole axis.
    ``slabs_e`` / ``slabs_h`` list the index ranges where ``ψ`` is non-zero.
    """

    b_e: np.ndarray
    c_e: np.ndarray
    inv_kappa_e: np.ndarray
    b_h: np.ndarray
    c_h: np.ndarray
    inv_kappa_h: np.ndarray
    slabs_e: Tuple[Tuple[int, int], ...]
    slabs_h: Tuple[Tuple[int, int], ...]


def _grade(rho: np.ndarray, cfg: PmlConfig, sigma_max: float, dt: float):
    rho = np.clip(rho, 0.0, 1.0)
    inside = rho > 0
    sigma = np.where(inside, sigma_max * rho**cfg.order, 0.0)
    kappa = np.where(inside, 1.0 + (cfg.kappa_max - 1.0) * rho**cfg.order, 1.0)
    alpha = np.where(inside, cfg.alpha_max * _SI_RATE_TO_NORM * (1.0 - rho), 0.0)
    b = np.exp(-(sigma / kappa + alpha) * dt)
    denominator = kappa * (sigma + kappa * alpha)
    c = np.divide(sigma * (b - 1.0), denominator, out=np.zeros_like(sigma), where=denominator > 0)
    return b, c, 1.0 / kappa


def _slabs(mask: np.ndarray) -> Tuple[Tuple[int, int], ...]:
    ranges: List[Tuple[int, int]] = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            ranges.append((start, i))
            start = None
    if start is not None:
        ranges.append((start, len(mask)))
    return tuple(ranges)


def axis_profile(
    n: int,
    cfg: PmlConfig,
    dx: float,
    dt: float,
    low: bool,
    high: bool,
    eps_low: float = 1.0,
    eps_high: float = 1.0,
) -> AxisProfile:
    """
    Build the CPML profile for an axis with ``n`` integer nodes.

    Parameters
    ----------
    n : int
        Number of ``Ey`` nodes along the axis (walls included).
    cfg : PmlConfig
        Grading settings.
    dx, dt : float
        Cell size and time step in normalised units.
    low, high : bool
        Whether a layer sits at the low / high end.
    eps_low, eps_high : float
        Relative permittivity of the medium entering each layer.
    """
    cells = cfg.cells
    length = cells * dx
    e_pos = np.arange(n, dtype=float)
    h_pos = np.arange(n - 1, dtype=float) + 0.5

    def sigma_max(eps: float) -> float:
        return -(cfg.order + 1.0) * np.log(cfg.reflection) / (2.0 * length * np.sqrt(eps))

    coefficients = []
    for pos in (e_pos, h_pos):
        b = np.ones_like(pos)
        c = np.zeros_like(pos)
        inv_kappa = np.ones_like(pos)
        for enabled, rho, eps in (
            (low, (cells - pos) / cells, eps_low),
            (high, (pos - (n - 1 - cells)) / cells, eps_high),
        ):
            if not enabled:
                continue
            inside = rho > 0
            b_s, c_s, k_s = _grade(rho, cfg, sigma_max(eps), dt)
            b[inside], c[inside], inv_kappa[inside] = b_s[inside], c_s[inside], k_s[inside]
        coefficients.append((b, c, inv_kappa))
    (b_e, c_e, k_e), (b_h, c_h, k_h) = coefficients
    return AxisProfile(b_e, c_e, k_e, b_h, c_h, k_h, _slabs(c_e != 0), _slabs(c_h != 0))


def no_profile(n: int) -> AxisProfile:
    """Profile of an axis without absorbing layers."""
    return AxisProfile(
        np.ones(n), np.zeros(n), np.ones(n), np.ones(n - 1), np.zeros(n - 1), np.ones(n - 1), (), ()
    )
