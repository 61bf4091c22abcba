"""
Weighted nonlinear least squares with a Levenberg-Marquardt schedule.

Every fit in the toolkit runs through :func:`least_squares_fit`. Models are
described by a residual function ``r(params, data)``; the engine minimises
``sum(w * r**2)``.

Usage
-----
Quick start example:

    import numpy as np
    from cbr_tuning.fitting import FitData, FitModel, least_squares_fit, parameter_uncertainties

    def line(x, p):
        return p[0] * x + p[1]

    model = FitModel.from_function(line, names=("slope", "offset"))
    data = FitData(x, y)
    result = least_squares_fit(model, data, init=[1.0, 0.0])
    slope, offset = result.params
    errors = parameter_uncertainties(result)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DataError, DomainError, FitStateError, ParameterError, RankDeficiencyError

logger = logging.getLogger(__name__)

ResidualFunction = Callable[[np.ndarray, "FitData"], np.ndarray]
JacobianFunction = Callable[[np.ndarray, "FitData"], np.ndarray]

# Convergence settings
XTOL = 1e-10
FTOL = 1e-12
MAX_ITERATIONS = 500
INITIAL_DAMPING = 1e-3
DAMPING_FACTOR = 10.0
MAX_DAMPING = 1e16
GTOL = 1e-6
# Cost below this fraction of the data's weighted sum of squares is round-off
ROUNDOFF_COST = 1e-24


@dataclass(frozen=True, eq=False)
class FitData:
    """
    Abscissa, ordinate and weights of a fit.

    ``weights`` default to ones. Poisson-counting callers pass
    ``1 / max(count, 1)``.
    """

    x: np.ndarray
    y: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        weights = np.ones_like(y) if self.weights is None else np.asarray(self.weights, dtype=float)
        if weights.shape != y.shape:
            raise ParameterError(f"weights shape {weights.shape} differs from data shape {y.shape}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ParameterError("weights must be finite and non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.y.size)


@dataclass(frozen=True, eq=False)
class FitModel:
    """
    Residual model for :func:`least_squares_fit`.

    Parameters
    ----------
    residual : callable
        ``residual(params, data) -> ndarray`` of length ``len(data)``.
    n_params : int
        Number of parameters.
    jacobian : callable, optional
        Analytic ``d residual / d params`` with shape ``(len(data), n_params)``.
        Central differences are used when omitted.
    lower, upper : sequence of float, optional
        Per-parameter bounds, possibly infinite.
    names : sequence of str, optional
        Parameter names used in reports.
    """

    residual: ResidualFunction
    n_params: int
    jacobian: Optional[JacobianFunction] = None
    lower: Optional[Sequence[float]] = None
    upper: Optional[Sequence[float]] = None
    names: Optional[Sequence[str]] = None

    def __post_init__(self) -> None:
        n = int(self.n_params)
        if n < 1:
            raise ParameterError("a fit model needs at least one parameter")
        lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if lower.shape != (n,) or upper.shape != (n,):
            raise ParameterError("bounds must have one entry per parameter")
        if np.any(lower > upper):
            raise ParameterError("lower bound exceeds upper bound")
        names = tuple(self.names) if self.names is not None else tuple(f"p{i}" for i in range(n))
        if len(names) != n:
            raise ParameterError("one name per parameter is required")
        object.__setattr__(self, "n_params", n)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_function(
        cls,
        function: Callable[[np.ndarray, np.ndarray], np.ndarray],
        names: Sequence[str],
        lower: Optional[Sequence[float]] = None,
        upper: Optional[Sequence[float]] = None,
        jacobian: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
    ) -> "FitModel":
        """
        Build a curve model ``y ≈ function(x, params)``.

        The residual is ``function(x, params) - y``, so an analytic
        ``jacobian(x, params)`` is the derivative of the curve itself.
        """

        def residual(params: np.ndarray, data: FitData) -> np.ndarray:
            return np.asarray(function(data.x, params), dtype=float) - data.y

        analytic = None
        if jacobian is not None:
            def analytic(params: np.ndarray, data: FitData) -> np.ndarray:
                return np.asarray(jacobian(data.x, params), dtype=float)

        return cls(residual, len(names), analytic, lower, upper, names)

    def jacobian_at(self, params: np.ndarray, data: FitData) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(params, data), dtype=float)
        return numerical_jacobian(self, params, data)


@dataclass(eq=False)
class FitResult:
    """
    Outcome of a fit.

    Attributes
    ----------
    params : ndarray
        Best-fit parameters.
    covariance : ndarray
        Unscaled covariance ``(JᵀWJ)⁻¹``.
    reduced_chi2 : float
        Weighted cost divided by the degrees of freedom.
    iterations : int
        Levenberg-Marquardt iterations used.
    converged : bool
        Whether a convergence criterion was met.
    """

    params: np.ndarray
    covariance: np.ndarray
    reduced_chi2: float
    iterations: int = 0
    converged: bool = True
    cost: float = float("nan")
    dof: int = 0
    names: Tuple[str, ...] = ()
    cost_history: List[float] = field(default_factory=list)
    message: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.params = np.asarray(self.params, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        if not self.names:
            self.names = tuple(f"p{i}" for i in range(self.params.size))

    def uncertainties(self) -> np.ndarray:
        return parameter_uncertainties(self)

    def named(self) -> Dict[str, float]:
        """Parameters keyed by name."""
        return {name: float(value) for name, value in zip(self.names, self.params)}

    def as_dict(self) -> Dict[str, Any]:
        errors = self.uncertainties() if self.converged else np.full(self.params.size, np.nan)
        return {
            "params": self.named(),
            "uncertainties": {name: float(err) for name, err in zip(self.names, errors)},
            "reduced_chi2": float(self.reduced_chi2),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    def __str__(self) -> str:
        state = "converged" if self.converged else "not converged"
        return f"FitResult({state}, {self.iterations} iterations, reduced chi2 = {self.reduced_chi2:.4g})"


def numerical_jacobian(model: FitModel, params: Sequence[float], data: FitData) -> np.ndarray:
    """
    Central-difference Jacobian of the residual.

    The step for parameter ``i`` is ``max(1e-8, 1e-8 * |p_i|)``.

    Parameters
    ----------
    model : FitModel
        Model whose residual is differentiated.
    params : sequence of float
        Finite evaluation point.
    data : FitData
        Data passed through to the residual.

    Returns
    -------
    ndarray
        Matrix of shape ``(len(data), n_params)``.

    Raises
    ------
    DomainError
        If ``params`` or any Jacobian entry is non-finite.
    """
    p = np.asarray(params, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError("Jacobian requested at non-finite parameters")
    columns = []
    for i in range(p.size):
        h = max(1e-8, 1e-8 * abs(p[i]))
        forward = p.copy()
        backward = p.copy()
        forward[i] += h
        backward[i] -= h
        columns.append((model.residual(forward, data) - model.residual(backward, data)) / (2.0 * h))
    jac = np.column_stack(columns)
    if not np.all(np.isfinite(jac)):
        raise DomainError("Jacobian contains non-finite entries")
    return jac


def _cost(residual: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * residual * residual))


def _active_mask(params: np.ndarray, gradient: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Parameters pinned at a bound with the descent direction pointing outward."""
    at_lower = (params <= lower) & (gradient > 0)
    at_upper = (params >= upper) & (gradient < 0)
    return at_lower | at_upper


def _gradient_cosine(weighted_jac: np.ndarray, weighted_residual: np.ndarray, free: np.ndarray) -> float:
    """Largest |cos| between the residual and a free Jacobian column."""
    if not free.any():
        return 0.0
    columns = weighted_jac[:, free]
    scale = np.linalg.norm(columns, axis=0) * np.linalg.norm(weighted_residual)
    dots = np.abs(columns.T @ weighted_residual)
    return float(np.max(np.divide(dots, scale, out=np.zeros_like(dots), where=scale > 0)))


def least_squares_fit(
    model: FitModel,
    data: FitData,
    init: Sequence[float],
    max_iterations: int = MAX_ITERATIONS,
    xtol: float = XTOL,
    ftol: float = FTOL,
    gtol: float = GTOL,
) -> FitResult:
    """
    Minimise the weighted sum of squared residuals.

    Damped Gauss-Newton steps solve ``(JᵀWJ + λ diag(JᵀWJ)) δ = -JᵀWr``.
    The damping starts at 1e-3, grows ×10 on a rejected step and shrinks ÷10
    on an accepted one. Parameters are clamped to their bounds and those
    pinned at a bound with an outward gradient are held fixed for the step.

    Parameters
    ----------
    model : FitModel
        Residual model.
    data : FitData
        Data and weights.
    init : sequence of float
        Starting point inside the bounds.
    max_iterations : int, optional
        Iteration cap (default 500).
    xtol, ftol : float, optional
        Converged when the relative parameter step is below ``xtol`` or the
        relative cost decrease is below ``ftol``.
    gtol : float, optional
        When no step decreases the cost even at maximal damping, the fit
        counts as converged only if no free parameter's Jacobian column has
        a cosine above ``gtol`` with the residual, or the residual is at
        round-off level.

    Returns
    -------
    FitResult
        Result with ``converged`` set; callers decide how to treat a
        non-converged result.

    Raises
    ------
    ParameterError
        If ``init`` has the wrong length or lies outside the bounds.
    DataError
        If there are fewer data points than parameters.
    DomainError
        If the residual at ``init`` is not finite.
    RankDeficiencyError
        If the weighted Jacobian at ``init`` is rank deficient.

    Examples
    --------
    >>> x = np.linspace(0, 1, 11)
    >>> model = FitModel.from_function(lambda x, p: p[0] * x + p[1], names=("a", "b"))
    >>> result = least_squares_fit(model, FitData(x, 2 * x + 1), init=[0.0, 0.0])
    >>> np.round(result.params, 10)
    array([2., 1.])
    """
    p = np.asarray(init, dtype=float).copy()
    n_params = model.n_params
    if p.shape != (n_params,):
        raise ParameterError(f"expected {n_params} initial parameters, got {p.size}")
    if np.any(p < model.lower) or np.any(p > model.upper):
        raise ParameterError("initial parameters lie outside the bounds")
    if len(data) < n_params:
        raise DataError(f"{len(data)} data points cannot constrain {n_params} parameters")

    weights = data.weights
    sqrt_w = np.sqrt(weights)

    residual = np.asarray(model.residual(p, data), dtype=float)
    if residual.shape != (len(data),):
        raise ParameterError(f"residual length {residual.size} differs from data length {len(data)}")
    if not np.all(np.isfinite(residual)):
        raise DomainError("residual is not finite at the initial parameters")

    jac = model.jacobian_at(p, data)
    weighted_jac = jac * sqrt_w[:, None]
    if np.linalg.matrix_rank(weighted_jac) < n_params:
        raise RankDeficiencyError("normal matrix is singular at the initial parameters")

    cost = _cost(residual, weights)
    history = [cost]
    damping = INITIAL_DAMPING
    converged = False
    message = "iteration limit reached"
    iteration = 0

    for iteration in range(1, max_iterations + 1):
        if cost == 0.0:
            converged = True
            message = "exact fit"
            break
        normal = weighted_jac.T @ weighted_jac
        gradient = weighted_jac.T @ (sqrt_w * residual)
        free = ~_active_mask(p, gradient, model.lower, model.upper)
        step = np.zeros(n_params)
        if free.any():
            sub = normal[np.ix_(free, free)]
            diag = np.diag(sub).copy()
            diag[diag <= 0] = np.finfo(float).tiny
            try:
                step[free] = np.linalg.solve(sub + damping * np.diag(diag), -gradient[free])
            except np.linalg.LinAlgError as exc:
                raise RankDeficiencyError(f"normal matrix is singular: {exc}")
        trial = np.clip(p + step, model.lower, model.upper)
        trial_residual = np.asarray(model.residual(trial, data), dtype=float)
        trial_cost = _cost(trial_residual, weights) if np.all(np.isfinite(trial_residual)) else np.inf

        if trial_cost <= cost and np.any(trial != p):
            delta = trial - p
            decrease = (cost - trial_cost) / cost
            p, residual, cost = trial, trial_residual, trial_cost
            history.append(cost)
            damping = max(damping / DAMPING_FACTOR, 1e-20)
            logger.debug("iteration %d accepted: cost=%.6e damping=%.1e", iteration, cost, damping)
            small_step = np.linalg.norm(delta) <= xtol * (np.linalg.norm(p) + xtol)
            if small_step or decrease < ftol:
                converged = True
                message = "parameter step below tolerance" if small_step else "cost decrease below tolerance"
                break
            jac = model.jacobian_at(p, data)
            weighted_jac = jac * sqrt_w[:, None]
        else:
            damping *= DAMPING_FACTOR
            logger.debug("iteration %d rejected: damping=%.1e", iteration, damping)
            if damping > MAX_DAMPING:
                message = "no further decrease at maximal damping"
                stationary = _gradient_cosine(weighted_jac, sqrt_w * residual, free) <= gtol
                converged = stationary or cost <= ROUNDOFF_COST * _cost(data.y, weights)
                break

    jac = model.jacobian_at(p, data)
    weighted_jac = jac * sqrt_w[:, None]
    normal = weighted_jac.T @ weighted_jac
    try:
        covariance = np.linalg.inv(normal)
    except np.linalg.LinAlgError:
        logger.warning("normal matrix singular at the solution; using pseudo-inverse")
        covariance = np.linalg.pinv(normal, hermitian=True)
    covariance = 0.5 * (covariance + covariance.T)

    dof = len(data) - n_params
    reduced_chi2 = cost / dof if dof > 0 else 0.0
    if not converged:
        logger.warning("fit did not converge after %d iterations", iteration)
    return FitResult(
        params=p,
        covariance=covariance,
        reduced_chi2=float(reduced_chi2),
        iterations=iteration,
        converged=converged,
        cost=float(cost),
        dof=int(dof),
        names=tuple(model.names),
        cost_history=history,
        message=message,
    )


def parameter_uncertainties(result: FitResult) -> np.ndarray:
    """
    One-sigma parameter uncertainties ``sqrt(diag(cov) · χ²_red)``.

    Raises
    ------
    FitStateError
        If the result did not converge.

    Examples
    --------
    >>> r = FitResult(np.zeros(2), np.diag([4.0, 9.0]), reduced_chi2=1.0)
    >>> parameter_uncertainties(r)
    array([2., 3.])
    """
    if not result.converged:
        raise FitStateError("uncertainties are undefined for a non-converged fit")
    variances = np.clip(np.diag(result.covariance), 0.0, None) * result.reduced_chi2
    return np.sqrt(variances)


def linear_model(design: np.ndarray, names: Sequence[str]) -> FitModel:
    """
    Linear model ``y ≈ design @ params`` with its exact Jacobian.

    ``design`` has one row per data point; the data abscissa is ignored.
    """
    matrix = np.asarray(design, dtype=float)

    def residual(params: np.ndarray, data: FitData) -> np.ndarray:
        return matrix @ params - data.y

    def jacobian(params: np.ndarray, data: FitData) -> np.ndarray:
        return matrix

    return FitModel(residual, matrix.shape[1], jacobian, names=names)


def fit_linear(design: np.ndarray, y: np.ndarray, names: Sequence[str], weights: Optional[np.ndarray] = None) -> FitResult:
    """
    Weighted linear regression through :func:`least_squares_fit`.

    Starts from the ordinary least-squares solution, so the engine only
    confirms convergence and supplies the covariance.
    """
    matrix = np.asarray(design, dtype=float)
    data = FitData(np.arange(len(y), dtype=float), y, weights)
    sqrt_w = np.sqrt(data.weights)
    init, *_ = np.linalg.lstsq(matrix * sqrt_w[:, None], data.y * sqrt_w, rcond=None)
    return least_squares_fit(linear_model(matrix, names), data, init)
