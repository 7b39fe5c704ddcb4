"""
Median Intervals - Exception Hierarchy
======================================

Every error raised by the package derives from MedianIntervalError so callers
(and the CLI) can catch the whole family in one place.
"""

from typing import Optional, Tuple


class MedianIntervalError(Exception):
    """Base class for all package errors"""


class GraphInputError(MedianIntervalError, ValueError):
    """
    Malformed graph input or an unknown vertex label

    Args:
        message: Human readable description
        line: 1-based line number in the source file, when known
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VertexBoundsError(GraphInputError, IndexError):
    """A vertex id outside 0..n-1"""


class EmptyInputError(GraphInputError):
    """An operation that needs at least one vertex got none"""


class PayloadKindError(MedianIntervalError, TypeError):
    """Payload values do not match the semigroup they are combined under"""


class StructureError(MedianIntervalError, ValueError):
    """
    The graph is not a cube-free median graph where one is required

    Args:
        message: Human readable description
        witness: Vertices demonstrating the violation
    """

    def __init__(self, message: str, witness: Tuple[int, ...] = ()):
        self.witness = tuple(witness)
        super().__init__(message)


class NotCubeFreeError(StructureError):
    """A vertex has three lower neighbors, i.e. the graph contains a cube"""


class NotMedianError(StructureError):
    """Some triple has no unique median"""


class ConvexityError(StructureError):
    """A vertex set expected to be convex (hence gated) is not"""


class PreconditionError(MedianIntervalError, ValueError):
    """An operation was called with arguments outside its contract"""


class GenerationError(MedianIntervalError, RuntimeError):
    """
    The instance generator exhausted its rejection budget

    Args:
        message: Human readable description
        witness: Witness reported by the last failed verification
    """

    def __init__(self, message: str, witness: Tuple[int, ...] = ()):
        self.witness = tuple(witness)
        super().__init__(message)


class OracleSizeError(MedianIntervalError, ValueError):
    """A brute-force verifier refused a graph above its size guard"""


class SerializationError(MedianIntervalError, ValueError):
    """A stored index has the wrong magic, version or checksum"""
