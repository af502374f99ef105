"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented range or invariant."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot reach its accuracy target."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge; ``achieved`` holds the error estimate."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved
