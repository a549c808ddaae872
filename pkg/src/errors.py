from typing import Optional

import numpy as np


class SoglassoError(Exception):
    """
    base class for every error raised on purpose by this package
    """


class LayoutError(SoglassoError, ValueError):
    """
    a group collection that can't be turned into a valid GroupLayout
    """


class DimensionError(SoglassoError, ValueError):
    """
    two objects that should share a dimension don't
    """

    def __init__(self, what: str, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"{what}: expected dimension {expected} but found {found}")


class InputFileError(SoglassoError, ValueError):
    """
    a file that couldn't be parsed. carries the path and the offending line number
    """

    def __init__(self, path, message: str, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{location}: {message}")


class ConvergenceError(SoglassoError, RuntimeError):
    """
    an iterative scheme ran out of iterations. carries the best iterate seen and its residual
    """

    def __init__(self, message: str, best: np.ndarray, residual: float):
        self.best = best
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class NonFiniteError(SoglassoError, FloatingPointError):
    """
    NaN or Inf showed up in the data or in an objective value
    """

    def __init__(self, message: str, snapshot: Optional[np.ndarray] = None):
        self.snapshot = snapshot
        super().__init__(message)


class ModelError(SoglassoError, ValueError):
    """
    an observation model used outside of the setting it's defined for
    """


class EnumerationLimitError(SoglassoError, ValueError):
    """
    an exhaustive enumeration would exceed the configured size guard
    """
