"""Exception types shared across the toolkit."""


class VertexPlanError(Exception):
    """Base class for all toolkit errors."""


class GenerationFailed(VertexPlanError):
    """Map generator could not produce a connected map within the retry bound."""


class InsufficientFreeSpace(VertexPlanError):
    """Not enough connected free cells to sample the requested points."""


class ParseError(VertexPlanError):
    """Malformed map or guidance file.

    line/column are 1-based positions into the input where known, else None.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
            message = message + where
        super().__init__(message)


class NoPath(VertexPlanError):
    """Goal is unreachable from start on the grid."""


class AllMasked(VertexPlanError):
    """Masking removed every positive probability from a guidance map."""


class NotSamplable(VertexPlanError):
    """Guidance map has no positive probability mass to sample from."""


class NoValidParent(VertexPlanError):
    """No collision-free connection exists from the tree to the new point."""


class InvalidConfig(VertexPlanError):
    """Planner or generator configuration violates its invariants."""


class DomainError(VertexPlanError):
    """Argument outside the mathematical domain of a function."""


class EmptyInput(VertexPlanError):
    """An operation that needs at least one record received none."""


class GuidanceFileMissing(VertexPlanError):
    """A benchmark algorithm references a guidance file that does not exist."""
