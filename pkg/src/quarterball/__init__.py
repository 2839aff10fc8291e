"""Green's function and boundary-value solver for the perturbed Laplace
operator u_xx + u_yy + u_zz + (2a/x)u_x + (2b/y)u_y in a quarter ball."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ExtractionError,
    SingularPointError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "ExtractionError",
    "SingularPointError",
    "__version__",
]
