"""Exception hierarchy shared by the engine, builders and CLI."""


class RevlinError(Exception):
    """Base class for every error raised by revlin."""


class ParseError(RevlinError, ValueError):
    pass


class ShapeMismatch(RevlinError, ValueError):
    pass


class OverlapError(RevlinError, ValueError):
    """Output buffer shares cells with an input buffer."""


class CopyOverlap(RevlinError, ValueError):
    """Copy leg of a compute-copy-uncompute block writes into the compute footprint."""


class ReversibleError(RevlinError):
    """Failure while executing a primitive.

    ``path`` and ``labels`` are filled in by the interpreter as the error
    unwinds, outermost node first.
    """

    def __init__(self, message: str = "") -> None:
        super().__init__(message)
        self.message = message
        self.path: list[int] = []
        self.labels: list[str] = []

    def __str__(self) -> str:
        where = ""
        if self.path:
            where = " at node /" + "/".join(str(p) for p in self.path)
        if self.labels:
            where += " [" + " > ".join(self.labels) + "]"
        return self.message + where


class InvalidCell(ReversibleError):
    pass


class AliasViolation(ReversibleError, ValueError):
    pass


class DivideByZero(ReversibleError, ZeroDivisionError):
    pass


class NonInvertible(ReversibleError):
    """Scale/Unscale by a zero multiplier."""


class GarbageLeak(ReversibleError):
    """A cell was released while still holding a nonzero value."""


class BitWidthExceeded(ReversibleError):
    pass


class SingularPivot(NonInvertible):
    """Zero pivot met by the pivot-free elimination."""

    def __init__(self, message: str = "", row: int | None = None) -> None:
        super().__init__(message)
        self.row = row


class Singular(RevlinError, ValueError):
    """Matrix has no inverse."""


class ZeroPivot(RevlinError, ValueError):
    """Pivot-free oracle elimination met a zero pivot."""

    def __init__(self, message: str = "", row: int | None = None) -> None:
        super().__init__(message)
        self.row = row
