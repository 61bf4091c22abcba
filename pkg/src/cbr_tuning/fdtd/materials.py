"""
Dispersive gold for the FDTD engine.

Gold is a single-pole Drude medium

    ε(ω) = ε∞ − ωp² / (ω² + iγω)

with ``ħω`` in eV and the ``exp(−iωt)`` time convention, so ``Im ε > 0`` is
loss. :meth:`GoldDrude.fit_tabulated` fits the three parameters to the
tabulated optical constants in the 700-900 nm band.

Usage
-----
    from cbr_tuning.fdtd.materials import GoldDrude

    gold = GoldDrude.fit_tabulated()
    n, k = gold.nk(1.55)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..constants import GOLD_OPTICAL_CONSTANTS, HC_EV_NM
from ..exceptions import FitError, ValidationError
from ..fitting import FitData, FitModel, least_squares_fit

logger = logging.getLogger(__name__)


def energy_to_omega(energy_ev):
    """Angular frequency in the solver's units (rad per nm of light travel)."""
    return 2.0 * np.pi * np.asarray(energy_ev, dtype=float) / HC_EV_NM


def omega_to_energy(omega):
    return np.asarray(omega, dtype=float) * HC_EV_NM / (2.0 * np.pi)


@dataclass(frozen=True)
class GoldDrude:
    """
    Single-pole Drude parameters.

    Parameters
    ----------
    eps_inf : float
        High-frequency permittivity.
    omega_p : float
        Plasma energy ``ħωp`` in eV.
    gamma : float
        Damping energy ``ħγ`` in eV.
    """

    eps_inf: float = 8.5
    omega_p: float = 8.85
    gamma: float = 0.072

    def __post_init__(self) -> None:
        if self.eps_inf < 1.0 or self.omega_p <= 0 or self.gamma < 0:
            raise ValidationError(
                f"invalid Drude parameters: eps_inf={self.eps_inf}, omega_p={self.omega_p}, gamma={self.gamma}"
            )

    def permittivity(self, energy_ev):
        """Complex relative permittivity at photon energy ``energy_ev``."""
        e = np.asarray(energy_ev, dtype=float)
        return self.eps_inf - self.omega_p**2 / (e * (e + 1j * self.gamma))

    def nk(self, energy_ev) -> Tuple[np.ndarray, np.ndarray]:
        """Refractive index ``n`` and extinction ``k`` with ``n + ik = sqrt(ε)``."""
        index = np.sqrt(self.permittivity(energy_ev))
        return np.real(index), np.imag(index)

    @property
    def omega_p_norm(self) -> float:
        return float(energy_to_omega(self.omega_p))

    @property
    def gamma_norm(self) -> float:
        return float(energy_to_omega(self.gamma))

    def update_coefficients(self, dt: float) -> Tuple[float, float]:
        """
        Auxiliary-current coefficients ``(kj, bj)`` for time step ``dt``.

        The polarisation current obeys ``J' + γJ = ωp² E`` and is advanced as
        ``J(n+1) = kj J(n) + bj (E(n+1) + E(n))``.
        """
        half = 0.5 * self.gamma_norm * dt
        kj = (1.0 - half) / (1.0 + half)
        bj = self.omega_p_norm**2 * dt / (2.0 * (1.0 + half))
        return kj, bj

    @classmethod
    def fit_tabulated(cls, table: Optional[Sequence[Tuple[float, float, float]]] = None) -> "GoldDrude":
        """
        Fit the Drude parameters to tabulated ``(energy eV, n, k)`` rows.

        The real and imaginary parts of ``ε = (n + ik)²`` are fitted together,
        each row weighted by ``1/|ε|²``.

        Raises
        ------
        FitError
            If the fit does not converge.
        """
        rows = np.asarray(table if table is not None else GOLD_OPTICAL_CONSTANTS, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] < 2:
            raise ValidationError("optical constant table needs at least two (energy, n, k) rows")
        energy = rows[:, 0]
        eps = (rows[:, 1] + 1j * rows[:, 2]) ** 2
        y = np.concatenate([eps.real, eps.imag])
        weights = np.tile(1.0 / np.abs(eps) ** 2, 2)

        def curve(x: np.ndarray, p: np.ndarray) -> np.ndarray:
            model = p[0] - p[1] ** 2 / (energy * (energy + 1j * p[2]))
            return np.concatenate([model.real, model.imag])

        model = FitModel.from_function(
            curve, names=("eps_inf", "omega_p", "gamma"), lower=[1.0, 0.1, 0.0], upper=[50.0, 50.0, 5.0]
        )
        x = np.concatenate([energy, energy])
        result = least_squares_fit(model, FitData(x, y, weights), init=[cls.eps_inf, cls.omega_p, cls.gamma])
        if not result.converged:
            raise FitError(f"Drude fit did not converge: {result.message}", diagnostics=result)
        fitted = cls(*map(float, result.params))
        logger.info(
            "Drude gold: eps_inf=%.3f omega_p=%.3f eV gamma=%.4f eV (%d rows)",
            fitted.eps_inf, fitted.omega_p, fitted.gamma, len(energy),
        )
        return fitted
