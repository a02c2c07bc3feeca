"""Exception types shared across the package."""

from __future__ import annotations


class ShapeMismatch(ValueError):
    """Raised when block arrays disagree in length or shape."""


class NonFiniteEntry(ValueError):
    """Raised when a NaN or Inf would be stored in a block."""


class NotHermitian(ValueError):
    """Raised when a diagonal block is too far from Hermitian to symmetrize."""

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        self.tolerance = tolerance
        super().__init__(
            f"block is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}"
        )


class Indefinite(ArithmeticError):
    """Cholesky breakdown: pivot ``pivot_index`` (0-based) was <= 0 or not finite."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"nonpositive Cholesky pivot at row {pivot_index}")


class NotPositiveDefinite(ArithmeticError):
    """The block system is not positive definite.

    ``level`` is the recursion depth at which the breakdown happened (0 is the
    input system) and ``block_index`` is the 1-based block position within
    that level's node layout.
    """

    def __init__(self, level: int, block_index: int):
        self.level = level
        self.block_index = block_index
        super().__init__(f"NOT_PD level={level} block={block_index}")


class FormatError(ValueError):
    """Base class for malformed BTHP/BTHX payloads."""


class BadMagic(FormatError):
    pass


class BadVersion(FormatError):
    pass


class Truncated(FormatError):
    pass


class SinkFailure(OSError):
    pass


class DenseFactorizationFailed(ArithmeticError):
    pass


class DenseIndefinite(DenseFactorizationFailed):
    def __init__(self, pivot_row: int):
        self.pivot_row = pivot_row
        super().__init__(f"dense Cholesky failed at row {pivot_row}")
