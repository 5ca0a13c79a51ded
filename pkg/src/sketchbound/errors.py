"""Exception hierarchy for sketchbound.

Every error carries the CLI exit code it maps to.
"""
from typing import Optional


class SketchboundError(Exception):
    """Base class for all sketchbound errors."""

    exit_code = 2


class InvalidParameter(SketchboundError, ValueError):
    """A caller-supplied size, rank or count is out of range."""

    exit_code = 1


class InvalidDims(InvalidParameter):
    """Matrix dimensions or (n, k, p) combination violate a precondition."""


class InvalidOversampling(InvalidParameter):
    """Oversampling p too small for the requested formula."""


class DimensionMismatch(InvalidParameter):
    """Inner dimensions of a product disagree."""


class InvalidMatrix(InvalidParameter):
    """Input is not a finite 2-D real matrix."""


class MatrixFormatError(InvalidParameter):
    """Matrix file is malformed (bad magic, truncated payload, ragged CSV)."""


class NumericalFailure(SketchboundError):
    """A numerical kernel could not deliver its postcondition."""

    exit_code = 2


class RankDeficient(NumericalFailure):
    """Numerical rank is below the number of columns."""

    def __init__(self, rank: int, width: int, context: str = ""):
        self.rank = rank
        self.width = width
        self.context = context
        message = f"numerical rank {rank} < {width} columns"
        if context:
            message = f"{context}: {message}"
        super().__init__(message)


class Overflow(NumericalFailure):
    """An unstabilized power product left the float64 range."""

    def __init__(self, product: int, notes: Optional[list] = None):
        self.product = product
        self.notes = list(notes or [])
        super().__init__(
            f"power product {product} overflowed to inf/nan with stabilizer 'none'; "
            "use 'qr' or 'columns' to renormalize between products"
        )


class NoConvergence(NumericalFailure):
    """Power iteration hit its iteration cap before the eigen-residual tolerance."""

    def __init__(
        self,
        estimate: float,
        iterations: int,
        residual: Optional[float] = None,
    ):
        self.estimate = estimate
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(last estimate {estimate:.6g}, relative residual {residual})"
        )
