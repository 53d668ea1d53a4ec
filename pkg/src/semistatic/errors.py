"""Exception hierarchy shared by all modules."""


class SemistaticError(ValueError):
    """Base class for every error raised by this package."""


# probspace
class NonPositiveProbability(SemistaticError):
    pass


class ProbabilitySumNotOne(SemistaticError):
    pass


class PartitionNotRefining(SemistaticError):
    pass


class InvalidPartition(SemistaticError):
    """A partition does not cover the atoms exactly once, or F_T is not discrete."""


class TimeOutOfRange(SemistaticError):
    pass


class UnknownAtom(SemistaticError):
    pass


# market
class SpaceMismatch(SemistaticError):
    pass


class PredictabilityViolation(SemistaticError):
    pass


class AdaptednessViolation(SemistaticError):
    pass


class MissingTerminalValue(SemistaticError):
    pass


# lp
class MalformedProgram(SemistaticError):
    pass


# blocks / pasting
class InvalidParams(SemistaticError):
    pass


class InvalidDepth(SemistaticError):
    pass


class InvalidRange(SemistaticError):
    pass


class IndexOutOfRange(SemistaticError):
    pass


# continuous
class StartOutsideInterval(SemistaticError):
    pass


class GridMismatch(SemistaticError):
    pass


class InsufficientSamples(SemistaticError):
    pass
