class GridConvError(Exception):
    """Base class for errors raised by gridconv."""


class SingularSystemError(GridConvError, ArithmeticError):
    """A zero pivot was met while eliminating a tridiagonal system."""


class DivergenceError(GridConvError, ArithmeticError):
    def __init__(self, iteration: int, message: str | None = None):
        self.iteration = iteration
        super().__init__(message or f"non-finite value in field at iteration {iteration}")


class NonConvergenceError(GridConvError, RuntimeError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class UnderdeterminedFitError(GridConvError, ValueError):
    """Not enough distinct abscissae for the requested fit degree."""


class StudyError(GridConvError, RuntimeError):
    def __init__(self, grid_size: int, cause: Exception):
        self.grid_size = grid_size
        self.cause = cause
        super().__init__(f"rung n={grid_size} failed: {cause}")


class ConfigError(GridConvError, ValueError):
    """Malformed or invalid scenario configuration."""
