"""Exception hierarchy shared by all spinboson modules."""


class SpinBosonError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(SpinBosonError, ValueError):
    """Parameters violate a documented precondition."""


class DegenerateParameterError(InvalidParameterError):
    """Parameters sit on a removable singularity of a closed form (e.g. gamma == w0)."""


class DomainError(InvalidParameterError):
    """Argument outside the domain of a special function."""


class NumericalError(SpinBosonError, ArithmeticError):
    """A numerical procedure failed to deliver its contract."""


class PoleError(NumericalError):
    """Evaluation at (or within tolerance of) a pole."""


class NumericalOverflowError(NumericalError):
    """A result would overflow double precision."""


class ConvergenceError(NumericalError):
    """A series, quadrature or iteration did not converge."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InstabilityError(NumericalError):
    """Time stepping produced an unbounded solution."""


class StepSizeError(InvalidParameterError):
    """Requested solver step violates the step-size precondition."""


class BranchCutWarning(RuntimeWarning):
    """An argument lies within tolerance of a branch cut."""
