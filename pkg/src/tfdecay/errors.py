"""Exception types raised across the package."""


class TFDecayError(Exception):
    """Base class for all package errors."""


# weights
class InvalidWeight(TFDecayError):
    pass


class NonConvexPhi(TFDecayError):
    pass


class GridTooSmall(TFDecayError):
    pass


class DivergentRatio(TFDecayError):
    pass


class NotModerate(TFDecayError):
    pass


class IntegralDiverges(TFDecayError):
    pass


class TailNotSettled(TFDecayError):
    pass


class NotAdmissible(TFDecayError):
    pass


class GridBoundaryMinimizer(TFDecayError):
    pass


class InfiniteCoefficient(TFDecayError):
    """Arithmetic was attempted on an estimate that is +inf by detection."""


# hermite / bargmann
class TruncationError(TFDecayError):
    pass


class AliasError(TFDecayError):
    pass


class ConjugateCutoff(TFDecayError):
    pass


# certify
class NoDecay(TFDecayError):
    pass


class UnderDetermined(TFDecayError):
    pass


class ConstantUnavailable(TFDecayError):
    pass


class HypothesisViolated(TFDecayError):
    pass


# constructions
class ParameterOutOfRange(TFDecayError):
    pass


class SearchExhausted(TFDecayError):
    def __init__(self, message: str, best_log_ratio: float = float("nan")):
        super().__init__(message)
        self.best_log_ratio = best_log_ratio


# cli
class UsageError(TFDecayError):
    pass
