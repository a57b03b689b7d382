"""Exception types raised by the numerical pipeline."""


class VortexError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfig(VortexError, ValueError):
    """Parameters violate a hypothesis (nonzero strengths, ordering of levels...)."""


class NotNormalized(InvalidConfig):
    """Operation needs kappa1 + kappa2 == 1."""


class SingularConfiguration(VortexError):
    """Two vortices collided (separation below the guard radius)."""


class NoConvergence(VortexError):
    pass


class NotPositiveDefinite(VortexError):
    pass


# -- integration ---------------------------------------------------------------

class IntegrationError(VortexError):
    pass


class StepFailure(IntegrationError):
    """Step size underflow, typically close to a collision."""


class BudgetExceeded(IntegrationError):
    pass


class DomainExit(IntegrationError):
    """The state left the admissible set at time ``t``."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"trajectory left the admissible set at t={self.t:.6g}")


class LiftAmbiguity(VortexError):
    """Angle increments could not be bounded below pi/2 by refinement."""


class NonTransversal(VortexError):
    pass


# -- level sets ----------------------------------------------------------------

class RayRootNotBracketed(VortexError):
    def __init__(self, theta, message=None):
        self.theta = float(theta)
        super().__init__(message or f"no level crossing bracketed on the ray at angle {self.theta:.6g}")


class GradientVanishes(VortexError):
    pass


# -- twist / orbits ------------------------------------------------------------

class CannotCertify(VortexError):
    """Twist inequalities could not be established within the search budget."""

    def __init__(self, stage, best_margin, message=None):
        self.stage = stage
        self.best_margin = float(best_margin)
        super().__init__(
            message or f"twist certification failed at stage {stage!r} (best margin {self.best_margin:.4g})"
        )


class SeparationOutOfRange(VortexError):
    pass


class SingularJacobian(VortexError):
    pass


class NoDecrease(VortexError):
    pass


class InsufficientFamily(VortexError):
    pass
