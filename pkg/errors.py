"""
Exception hierarchy shared by the engine modules.

Engines raise these; only the command-line front-end catches them and maps
them to exit codes (2 for bad input, 3 for numerical failures).
"""

from typing import Optional

import numpy as np


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""

    exit_code = 3


class InvalidInputError(WorkbenchError, ValueError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class InvalidExponentError(InvalidInputError):
    pass


class DimensionMismatchError(InvalidInputError):
    pass


class GridError(InvalidInputError):
    """Sampling grids that are incompatible, misaligned or too small."""


class DomainError(InvalidInputError):
    """Evaluation point outside the region where the operation is defined."""


class UsageError(InvalidInputError):
    """Command-line parsing failure."""


class NumericalError(WorkbenchError, ArithmeticError):
    """The input was well-formed but the computation could not certify a result."""

    exit_code = 3


class OracleInconsistencyError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class PerturbationTooLargeError(NumericalError):
    pass


class TailUnboundedError(NumericalError):
    pass


class PreconditionError(NumericalError):
    pass


class NotInvertibleError(NumericalError):
    def __init__(self, message: str, angle: Optional[float] = None):
        super().__init__(message)
        self.angle = angle


class BandwidthInsufficientError(NumericalError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


class PositivityViolatedError(NumericalError):
    def __init__(self, message: str, witness: Optional[np.ndarray] = None):
        super().__init__(message)
        self.witness = witness
