"""Exception types shared across the package."""


class GeometryError(ValueError):
    """A cube, cylinder, or stencil does not fit inside the grid/slab."""


class DomainError(ValueError):
    """An exact solution was evaluated outside its admissible domain."""


class ParameterError(ValueError):
    """An exponent or parameter combination violates its precondition."""


class SolverError(RuntimeError):
    """Newton iteration failed to converge.

    Carries the last residual max-norm and the time level at which the
    step failed, so callers can report or retry with a smaller step.
    """

    def __init__(self, message, residual=None, time=None):
        super().__init__(message)
        self.residual = residual
        self.time = time
