"""Exception types shared across the package."""


class LogSpecTError(Exception):
    """Base class for all package errors."""


class ParameterError(LogSpecTError, ValueError):
    """An argument is outside its admissible range."""


class ShapeError(LogSpecTError, ValueError):
    """Array dimensions are inconsistent."""


class ValidationError(LogSpecTError, ValueError):
    """A matrix violates the adjacency-matrix invariants."""


class GraphParseError(LogSpecTError, ValueError):
    """A graph or signal file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(LogSpecTError, ArithmeticError):
    """A dense linear-algebra routine failed."""


class DivergenceError(NumericalError):
    """An iterative solver produced non-finite iterates."""

    def __init__(self, message, iteration, residuals=()):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration
        self.residuals = list(residuals)


class InfeasibleError(LogSpecTError):
    """The rSpecT constraint set is empty for the requested radius."""

    def __init__(self, delta, delta_min, report=None):
        super().__init__(
            f"rSpecT is infeasible: delta={delta:.6g} < delta_min={delta_min:.6g}"
        )
        self.delta = delta
        self.delta_min = delta_min
        self.report = report


class ManifestError(LogSpecTError):
    """Generated files do not match the hashes recorded in their manifest."""
