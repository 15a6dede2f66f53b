"""Exception types shared across the package."""


class NormShiftError(Exception):
    """Base class for all package-specific errors."""


class DegenerateVelocity(NormShiftError):
    """Velocity below the minimum speed; frame-dependent quantities undefined."""


class StepFailure(NormShiftError):
    """Adaptive integrator could not proceed (step underflow or step budget)."""


class SingularCurve(NormShiftError):
    """Curve is not regular at the requested parameter (|r'(s)| ~ 0)."""


class NuBlowup(NormShiftError):
    """Initial-speed ODE left its domain; solution only covers a sub-interval."""


class UnknownCatalogueEntry(NormShiftError):
    """No built-in force field of that name."""


class InvalidParams(NormShiftError):
    """Catalogue parameters violate a family precondition."""


class MissingPartial(NormShiftError):
    """A required partial derivative is unavailable and fallback is disabled."""


class SingularDenominator(NormShiftError):
    """Closed-form expression evaluated where its denominator vanishes."""


class OutOfInterval(NormShiftError):
    """Time outside the interval on which the closed form is valid."""


class SingularQuadrature(NormShiftError):
    """Quadrature integrand is singular on the requested grid."""
