"""Exception hierarchy shared by all tscalc modules."""


class TimeScaleError(ValueError):
    """Base class; every precondition failure in tscalc derives from it."""


class PointNotInScale(TimeScaleError):
    pass


class UnsupportedOnContinuousScale(TimeScaleError):
    pass


class ScaleSpecError(TimeScaleError):
    pass


class DensePointWithoutAnalyticDerivative(TimeScaleError):
    pass


class EmptyDerivativeDomain(TimeScaleError):
    pass


class DomainExhausted(TimeScaleError):
    pass


class SignConditionViolated(TimeScaleError):
    pass


class DegenerateInterval(TimeScaleError):
    pass


class ZeroDenominator(TimeScaleError):
    def __init__(self, point):
        super().__init__(f"g(x) equals the endpoint value at x={point}")
        self.point = point


class LimitUnavailable(TimeScaleError):
    pass


class ScaleTooSmall(TimeScaleError):
    pass


class NegativeN(TimeScaleError):
    pass


class MissingDerivativeAtZero(TimeScaleError):
    pass


class OutsideRadiusOfConvergence(TimeScaleError):
    pass


class TailNotCertified(TimeScaleError):
    pass


class InvalidBoundProblem(TimeScaleError):
    pass


class CsvFormatError(TimeScaleError):
    pass
