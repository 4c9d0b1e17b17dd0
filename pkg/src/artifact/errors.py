"""Error and warning taxonomy shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or precondition violation (CLI exit code 2)."""


class AdjacentRepeat(ConfigError):
    """Two consecutive bumps mapped to the same component."""


class NotSurjective(ConfigError):
    """Some component index in 1..k never appears in sigma."""


class SolveError(RuntimeError):
    """Numerical failure in a solver stage (CLI exit code 3)."""


class StepFailure(SolveError):
    """ODE integrator could not reach the end of the radial interval."""


class BracketingFailure(SolveError):
    """Amplitude bisection failed to bracket the requested nodal count."""


class NewtonDivergence(SolveError):
    """Damped Newton iteration stalled above its residual tolerance."""


class ZeroField(SolveError):
    """Operation needs a nonzero field (projection of the zero field)."""


class EmptyAnnulus(SolveError):
    """Annulus contains too few interior nodes to host a bump."""


class MaximizerFailure(SolveError):
    """Scaling maximization failed."""


class UnboundedEnergy(MaximizerFailure):
    """Scaled energy grows without bound along some positive direction."""


class NonConvergence(MaximizerFailure):
    """Scaling maximization did not reach its gradient tolerance."""


class DegeneratePulse(MaximizerFailure):
    """A pulse has numerically zero norm; scaling is ill-posed."""


class LeftNeighborhood(UserWarning):
    """Descent iterate drifted outside the trust distance (warning only)."""


class StageFailure(UserWarning):
    """A schedule stage failed; later stages resume from the last good state."""


class NegativityPersistent(UserWarning):
    """A component stayed negative on part of the grid after damping."""
