"""Exception types shared across the package."""


class SpecnetError(Exception):
    """Base class for every error raised by specnet."""


class ParameterError(SpecnetError, ValueError):
    """An argument is outside its admissible range."""


class NumericalError(SpecnetError, ArithmeticError):
    """A linear-algebra routine failed or produced non-finite output."""


class DivergenceError(NumericalError):
    """The simulated state blew up."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"state diverged at step {step}")


class DataLengthError(SpecnetError, ValueError):
    """Trajectory too short for the requested embedding."""

    def __init__(self, required, available):
        self.required = required
        self.available = available
        super().__init__(
            f"trajectory has {available} samples; the embedding needs a minimum of {required}"
        )


class DegenerateDataError(NumericalError):
    """The regressor has no singular value above the truncation threshold."""


class ExcludedEigenvalueError(NumericalError):
    """mu coincides with an eigenvalue of the unit matrix A."""


class PoleAtInfinityError(NumericalError):
    """The unit transfer value C^T (A - mu I)^-1 B vanishes."""


class DegenerateHullError(SpecnetError, ValueError):
    """Fewer than three non-collinear points, or zero hull area."""


class EdgeListParseError(SpecnetError, ValueError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ScenarioError(SpecnetError, ValueError):
    """Scenario document failed validation."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
