"""Exception hierarchy shared by every module."""


class GlataisError(Exception):
    """Base class for all package errors."""


class ParameterError(GlataisError, ValueError):
    """An argument is outside its documented domain or has the wrong shape."""


class DomainError(GlataisError, ValueError):
    """A function was evaluated outside the domain where it is defined."""


class NotPositiveDefiniteError(DomainError):
    """A matrix that must be positive definite failed Cholesky factorization."""


class SingularityError(DomainError):
    """The benchmark mean hit its pole at phi_3 = -1."""


class InfeasibleError(GlataisError, ValueError):
    """The estimation problem has no finite minimizer for this input."""


class ConvergenceError(GlataisError, RuntimeError):
    """An iterative solver ran out of iterations.

    The last iterate is kept on ``last_iterate`` so callers can inspect or
    reuse it.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class DegenerateCloudError(GlataisError, RuntimeError):
    """Every particle has zero posterior density."""


class RunError(GlataisError, RuntimeError):
    """An alternating run failed part way through.

    ``trace`` holds the iterations completed before the failure and
    ``iteration`` the zero-based index of the iteration that failed.
    """

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace
