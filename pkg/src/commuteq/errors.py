"""Exception hierarchy shared across the package."""


class CommuteqError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CommuteqError):
    """Scenario parameters or request options failed validation."""


class OrderingViolation(ValidationError):
    """The schedule-penalty ordering gamma > alpha > beta > 0 does not hold."""


class NonPositiveCapacity(ValidationError):
    """Bottleneck capacity, population or another scale quantity is not positive."""


class FareDominance(ValidationError):
    """Ride-sourcing fixed cost W is at least the worst-case transit cost R + theta*N."""


class ParseError(CommuteqError):
    """A scenario file could not be parsed."""


class DivisionByZeroPopulation(CommuteqError):
    """Search-congested departure rates requested for an empty driver population."""


class PrecondModeMix(CommuteqError):
    """Both road modes are required but W <= W0 makes driving dominated."""


class PrecondViolation(CommuteqError):
    """An operation was called outside its model validity region."""


class NoConsistentPattern(CommuteqError):
    """No candidate commuting pattern satisfies all of its feasibility conditions."""


class AmbiguousPattern(CommuteqError):
    """More than one commuting pattern is feasible away from an exact boundary."""


class InconsistentOutcome(CommuteqError):
    """An equilibrium outcome cannot be turned into a departure profile."""


class VerificationFailed(CommuteqError):
    """The fluid-queue simulator rejected a closed-form equilibrium."""
