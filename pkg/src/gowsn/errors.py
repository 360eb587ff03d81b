"""Exception hierarchy shared by all modules."""


class GowsnError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(GowsnError, ValueError):
    pass


class InvalidConfig(InvalidParams):
    pass


class NonPositivePitch(InvalidParams):
    pass


class PitchExceedsField(InvalidParams):
    pass


class NonSquareField(InvalidParams):
    pass


class DiscExceedsField(InvalidParams):
    pass


class NOutOfRange(InvalidParams):
    pass


class NegativeMass(InvalidParams):
    pass


class AlreadyOccupied(GowsnError):
    pass


class NotAnIntersection(GowsnError, ValueError):
    pass


class IndexOutOfRange(GowsnError, IndexError):
    pass


class NoSolutionWithinBound(GowsnError):
    pass


class BoardExhausted(GowsnError):
    """Every intersection is occupied but the stopping rule still asks for more nodes."""


class IterationCapExceeded(GowsnError):
    pass
