"""Exception hierarchy shared by all modules."""


class UniversalOrbitsError(Exception):
    pass


class NotMixing(UniversalOrbitsError, ValueError):
    pass


class EmptyRowOrColumn(UniversalOrbitsError, ValueError):
    pass


class GapTooSmall(UniversalOrbitsError, ValueError):
    pass


class InadmissibleWord(UniversalOrbitsError, ValueError):
    pass


class DepthMismatch(UniversalOrbitsError, ValueError):
    pass


class HorizonBeyondPoint(UniversalOrbitsError, ValueError):
    pass


class NotInvariant(UniversalOrbitsError, ValueError):
    pass


class InfeasibleEpsilon(UniversalOrbitsError, ValueError):
    pass


class CoverageFailure(UniversalOrbitsError):
    def __init__(self, message, sample=None, distance=None):
        super().__init__(message)
        self.sample = sample
        self.distance = distance


class ScheduleInfeasible(UniversalOrbitsError):
    pass


class Violation(UniversalOrbitsError):
    """A constructed point fails its shadowing invariant at ``witness``."""

    def __init__(self, message, stage=None, witness=None, position=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness
        self.position = position


class BoundViolated(UniversalOrbitsError):
    def __init__(self, message, stage=None, lhs=None, bound=None):
        super().__init__(message)
        self.stage = stage
        self.lhs = lhs
        self.bound = bound


class PositiveCycleDetected(UniversalOrbitsError):
    pass


class PairNotInTargets(UniversalOrbitsError, ValueError):
    pass


class InconsistentVerdicts(UniversalOrbitsError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
