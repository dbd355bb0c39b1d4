"""Exception hierarchy shared by the solver modules."""


class SbvpError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(SbvpError):
    """A base mesh is malformed or does not contain a required point."""


class QueryError(SbvpError):
    """A path was queried at a time that is not a mesh point."""


class ShapeError(SbvpError):
    """Array arguments have incompatible shapes."""


class ConfigurationError(SbvpError):
    """Invalid solver or experiment parameters."""


class UnsupportedTableauError(SbvpError):
    """The Butcher tableau is not explicit."""


class InitialGuessError(SbvpError):
    """The coarse Euler-Maruyama system could not be solved."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class LinearAlgebraError(SbvpError):
    """A linear system is singular or numerically ill-conditioned."""


class NonConvergenceError(SbvpError):
    """Newton's method hit the iteration limit.

    The best iterate seen so far is kept on ``best`` together with its
    residual norm, so callers can inspect how far the solve got.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations
