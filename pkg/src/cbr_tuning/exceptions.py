"""Custom exceptions for cbr-tuning package."""

from typing import Any, List, Optional


class CbrError(Exception):
    """Base exception for cbr-tuning package."""
    pass


class DomainError(CbrError, ValueError):
    """Raised when a value lies outside the mathematical domain of an operation."""
    pass


class ShapeError(CbrError, ValueError):
    """Raised when array shapes or sampling grids do not match."""
    pass


class ReferenceDivisionError(CbrError, ZeroDivisionError):
    """Raised when a reference spectrum contains a non-positive sample."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class ParseError(CbrError, ValueError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(CbrError, ValueError):
    """Raised when parsed data violates a container invariant."""
    pass


class DataError(CbrError, ValueError):
    """Raised when a dataset is insufficient or unsuitable for an analysis."""
    pass


class ParameterError(CbrError, ValueError):
    """Raised when an analysis parameter is invalid."""
    pass


class FitError(CbrError, RuntimeError):
    """Raised when a fit does not converge or ends in an unphysical state."""

    def __init__(self, message: str, diagnostics: Any = None):
        super().__init__(message)
        self.diagnostics = diagnostics


class FitInitError(FitError):
    """Raised when no usable initial guess can be derived from the data."""
    pass


class RankDeficiencyError(FitError):
    """Raised when the normal matrix of a fit is singular."""
    pass


class FitStateError(CbrError, RuntimeError):
    """Raised when a fit result is used in a state that does not allow it."""
    pass


class NormalizationError(CbrError, ArithmeticError):
    """Raised when a normalization reference is empty or vanishing."""
    pass


class DetectionError(CbrError, RuntimeError):
    """Raised when an expected feature cannot be located in the data."""
    pass


class ModelError(CbrError, RuntimeError):
    """Raised when data are inconsistent with the assumed measurement model."""
    pass


class PlanningError(CbrError, ValueError):
    """Raised when an etch plan cannot reach its target."""
    pass


class StabilityError(CbrError, RuntimeError):
    """Raised when a time-domain simulation becomes unstable."""
    pass


class TransformError(CbrError, ArithmeticError):
    """Raised when a near-to-far-field transform yields no usable far field."""
    pass


class SweepError(CbrError, RuntimeError):
    """Raised when members of a parameter sweep fail."""

    def __init__(self, message: str, completed: Optional[List[Any]] = None):
        super().__init__(message)
        self.completed = list(completed or [])
