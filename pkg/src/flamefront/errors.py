"""Exception types shared across the solver modules."""


class ConfigurationError(ValueError):
    """Invalid solver or mesh configuration."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to converge; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class QuenchError(ConvergenceError):
    """Front temperature collapsed below the positivity floor."""
