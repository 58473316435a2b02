"""Exception and warning types raised across the package."""


class CkrankError(Exception):
    """Base class for all package errors."""


# linear algebra
class NotPositiveDefinite(CkrankError):
    pass


class NoConvergence(CkrankError):
    pass


class NegativeEigenvalue(CkrankError):
    """A pencil eigenvalue fell below the PSD clamping tolerance."""


# model validation
class DimensionMismatch(CkrankError, ValueError):
    pass


class CoherencyViolated(CkrankError):
    pass


class RankDeficient(CkrankError):
    pass


class RankMismatch(CkrankError):
    pass


class SignCondition(CkrankError):
    pass


class JsrOverflow(CkrankError):
    """Requested JSR enumeration exceeds the product budget."""


class StabilityUnverified(UserWarning):
    """JSR upper bound did not certify stability at the maximum depth."""


# simulation
class CoherencyParadox(CkrankError):
    pass


class RetentionExhausted(CkrankError):
    pass


# testing and tables
class DegenerateData(CkrankError):
    pass


class MissingCriticalValue(CkrankError, LookupError):
    pass


class SingularLimit(CkrankError):
    pass


class InsufficientAcceptedDraws(CkrankError):
    pass


# long-run variance
class EmptyRegime(CkrankError):
    pass


class TooFewObservations(CkrankError):
    pass


class ZeroLrv(CkrankError):
    pass
