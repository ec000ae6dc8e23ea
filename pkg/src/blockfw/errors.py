"""Exception hierarchy shared by every module."""


class BlockFWError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(BlockFWError, ValueError):
    pass


class NotFactorizable(BlockFWError):
    """Raised when a matrix is too far from PSD for a regularized Cholesky."""


class InvalidPartition(BlockFWError, ValueError):
    pass


class ParseError(BlockFWError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFeature(ParseError):
    pass


class SolverFailure(BlockFWError):
    """The interior-point kernel did not reach an optimal point.

    ``trace`` carries whatever iterations completed before the failure
    (set by the iterative drivers).
    """

    def __init__(self, message, status=None, trace=None):
        super().__init__(message)
        self.status = status
        self.trace = trace


class NumericalTrouble(SolverFailure):
    pass


class FirstIterationInfeasible(BlockFWError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class TooLarge(BlockFWError, ValueError):
    pass
