"""Exception types shared across the package."""


class SpinonError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SpinonError):
    """A parameter or configuration value violates a documented invariant."""


class NonHermitianInput(SpinonError):
    """Matrix handed to a Hermitian-only kernel is not Hermitian enough."""


class PoleSingularity(SpinonError):
    """Sphere-chart operation requested too close to theta = 0 or pi."""


class GridTooCoarse(SpinonError):
    """Finite-difference grid does not resolve the requested eigenvalues."""


class ConventionMismatch(SpinonError):
    """Neither candidate reconstruction convention satisfies the operator test."""


class EmptySector(SpinonError):
    """Conserved-quantity sector contains no basis states."""


class QuadratureUnconverged(SpinonError):
    """Doubling the quadrature order moved the result more than the tolerance."""


class StepTooLarge(SpinonError):
    """Integrator step produced an energy drift above the allowed rate."""
