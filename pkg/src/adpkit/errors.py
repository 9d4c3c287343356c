"""Exception hierarchy shared across the package."""


class AdpError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(AdpError, ValueError):
    """Two vectors (or a vector and an operator) have incompatible sizes."""


class DomainViolationError(AdpError, ValueError):
    """A value lies outside the domain of an operator or transform."""


class ModelValidationError(AdpError, ValueError):
    """A model's primitives fail their construction-time invariants."""


class FixedPointError(AdpError, ValueError):
    """A vector presented as a fixed point fails the fixed-point check."""


class NonConvergenceError(AdpError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class DivergenceError(AdpError, RuntimeError):
    """Iterates blew up or collapsed out of the domain.

    This is the numerical signal that the program is not well-posed:
    either the iterate sup-norm exceeded the divergence cap, or a
    positivity-constrained iterate approached the boundary of its domain.
    """


class CertificateError(AdpError, RuntimeError):
    """A guess-and-verify certificate exceeded its residual tolerance."""
