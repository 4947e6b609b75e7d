"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class FLPError(Exception):
    exit_code = 1


class UsageError(FLPError, ValueError):
    exit_code = 2


class NonIntegerSector(FLPError, ValueError):
    """(L, n, p) do not describe whole numbers of atoms of each species."""

    exit_code = 2


class InfeasiblePoint(FLPError, ValueError):
    exit_code = 3


class IntegrablePointRequired(FLPError, ValueError):
    """The exact solver only holds at delta_g = -t; use the ED engine elsewhere."""

    exit_code = 4


class NoInteriorSolution(FLPError, ArithmeticError):
    exit_code = 5


class UnclassifiablePoint(FLPError, RuntimeError):
    exit_code = 6


class DimensionTooLarge(FLPError, MemoryError):
    exit_code = 7

    def __init__(self, dimension, limit):
        super().__init__(f"sector dimension {dimension} exceeds the limit {limit}")
        self.dimension = dimension
        self.limit = limit


class BasisMismatch(FLPError, ValueError):
    exit_code = 8


class NotConverged(FLPError, RuntimeError):
    exit_code = 9

    def __init__(self, message, e0=None, residual=None):
        super().__init__(message)
        self.e0 = e0
        self.residual = residual


class ImaginaryResidue(FLPError, ArithmeticError):
    exit_code = 10
