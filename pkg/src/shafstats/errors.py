"""Exception hierarchy.

The CLI maps these onto exit codes: usage problems exit 2, data problems
(corrupt or mismatched cache) exit 3, capacity problems exit 4.
"""


class ShafstatsError(Exception):
    exit_code = 1


class InvalidArgument(ShafstatsError, ValueError):
    exit_code = 2


class SingularCurveError(InvalidArgument):
    pass


class BadPrimeError(InvalidArgument):
    pass


class OutOfRangeError(InvalidArgument):
    pass


class EmptyWindowError(InvalidArgument):
    pass


class DegenerateFitError(ShafstatsError, ArithmeticError):
    exit_code = 3


class CapacityError(ShafstatsError, MemoryError):
    exit_code = 4


class DataError(ShafstatsError):
    exit_code = 3


class ChecksumError(DataError):
    pass


class VersionError(DataError):
    pass


class CurveMismatchError(DataError):
    pass


class CacheFormatError(DataError):
    pass


class DisambiguationError(ShafstatsError, RuntimeError):
    """BSGS could not pin down the group order; indicates a bug for p > 457."""
