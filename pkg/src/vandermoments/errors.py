"""Shared exception types."""


class ContractError(ValueError):
    """An argument violates an operation's contract (arity, range, shape)."""


class ShapeMismatchError(ContractError):
    """A word does not have the shape required by the operation."""


class ResourceLimitError(RuntimeError):
    """A guard against combinatorial blowup was hit; pass override to lift it."""


class UnsupportedOrderError(RuntimeError):
    """Cumulant order above 8: no closed formula is available."""


class UnboundedPolytopeError(RuntimeError):
    """Integration was requested over an unbounded region."""


class BreakpointInsideInterval(RuntimeError):
    """Polynomial interpolation failed verification: the target function is
    piecewise on the requested interval and the caller should subdivide."""


class WordSyntaxError(ValueError):
    """Parse failure in the word or polynomial grammar; carries a position."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None
                         else f"{message} (at position {position})")
        self.position = position
