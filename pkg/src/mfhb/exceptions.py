"""Exception types raised by :mod:`mfhb`."""


class MFHBError(ValueError):
    """Base class for all package errors."""


class EigenDecompositionError(MFHBError):
    """The Hermitian eigensolver failed to converge."""


class DegenerateMatrixError(MFHBError):
    """A matrix that must be inverted is numerically zero."""


class UnstableModelError(MFHBError):
    """A simulated recursion exploded."""


class StatisticUndefinedError(MFHBError):
    """A smooth statistic cannot be evaluated or differentiated at a point."""


class TooManySkipsError(MFHBError):
    """More than the tolerated share of bootstrap replicates was skipped."""
