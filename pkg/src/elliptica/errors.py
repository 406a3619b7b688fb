"""Exception types shared across the package."""


class EllipticaError(Exception):
    """Base class for all package errors."""


class Degenerate(EllipticaError):
    """Cubic has a double root; the three-root trichotomy fails."""


class ConstructionFailed(EllipticaError):
    """A potential construction could not satisfy its sign constraints."""


class ConstraintViolated(EllipticaError):
    """User-supplied constants break a construction inequality."""


class StepTooLarge(EllipticaError):
    """Embedded error estimate of the ODE integrator exceeded tolerance."""


class QuadratureStall(EllipticaError):
    """Heteroclinic quadrature hit a degenerate well before reaching b."""


class NonPositive(EllipticaError):
    """Log-log fit requested on data with non-positive values."""


class NotSuperharmonic(EllipticaError):
    """Numerical superharmonicity screening failed."""


class RangeError(EllipticaError):
    """Requested radius lies outside the profile grid."""


class OrderingBroken(EllipticaError):
    """Monotone iteration lost the sub <= u <= super ordering (bug trap)."""


class MaxIterExceeded(EllipticaError):
    """Iteration hit its budget before reaching tolerance."""


class StripCheckFailed(EllipticaError):
    """Dumbbell supersolution is not above b on the small-x1 strip."""


class NewtonDiverged(EllipticaError):
    """Damped Newton failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class OutOfMask(EllipticaError):
    """A sample point left the defined region of a field."""
