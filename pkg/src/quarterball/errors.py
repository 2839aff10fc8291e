"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range an operation supports."""


class SingularPointError(DomainError):
    """Evaluation was requested at (or too close to) the kernel singularity."""


class ConvergenceError(RuntimeError):
    """A series or quadrature failed to reach the requested tolerance.

    Attributes
    ----------
    partial : float or None
        The partial sum accumulated before giving up.
    terms : int or None
        How many terms were taken.
    """

    def __init__(self, message, partial=None, terms=None):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


class ExtractionError(RuntimeError):
    """A limit extrapolation did not settle (successive estimates diverge)."""


class ConfigError(ValueError):
    """A run configuration is malformed or violates an invariant."""
