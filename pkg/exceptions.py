class PosBasisError(Exception):
    """Base class for every error raised by posbasis."""


class Singular(PosBasisError, ArithmeticError):
    pass


class NotUnit(PosBasisError, ValueError):
    pass


class NumericalFailure(PosBasisError, ArithmeticError):
    pass


class DimensionError(PosBasisError, ValueError):
    pass


class SizeOutOfRange(PosBasisError, ValueError):
    pass


class NotMinimalPositiveBasis(PosBasisError, ValueError):
    pass


class NotPositiveBasis(PosBasisError, ValueError):
    pass


class InvalidPartition(PosBasisError, ValueError):
    pass


class NotOmegaPlus(PosBasisError, ValueError):
    pass


class InternalConsistencyError(PosBasisError, AssertionError):
    pass


class CompositionError(PosBasisError, ValueError):
    pass


class InvalidBlock(CompositionError):
    pass


class CriticalVectorRejected(CompositionError):
    pass


class CompositionNotPositiveBasis(CompositionError):
    pass


class BasisFileError(PosBasisError, ValueError):
    pass
