"""Exception types raised across the package."""


class SpdMeansError(Exception):
    """Base class for all package errors."""


class DimMismatch(SpdMeansError, ValueError):
    pass


class DomainError(SpdMeansError, ValueError):
    pass


class NotSymmetric(SpdMeansError, ValueError):
    pass


class NotDefinite(SpdMeansError, ValueError):
    pass


class InvalidT(SpdMeansError, ValueError):
    pass


class InvalidWeights(SpdMeansError, ValueError):
    pass


class InvalidMap(SpdMeansError, ValueError):
    pass


class MatrixFormatError(SpdMeansError, ValueError):
    pass


class HypothesisViolation(SpdMeansError, ValueError):
    """An instance falls outside the hypotheses of the inequality being checked."""


class NoConvergence(SpdMeansError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``result`` carries the last iterate (with a per-element ``converged`` mask
    for batched solvers) so callers can salvage the elements that did converge.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
