"""Exception types shared by all modules."""


class InvalidInput(ValueError):
    """A precondition on the arguments was violated."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InconsistencyError(RuntimeError):
    """A computed quantity failed an internal consistency check."""
