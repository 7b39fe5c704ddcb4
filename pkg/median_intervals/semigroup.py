"""
Median Intervals - Semigroups over Vertex Payloads
==================================================

This module provides:
1. SemigroupSpec: a named commutative, associative combine operation
2. Built-in instances: sum (mod 2^64), min, fingerprint
3. Folding helpers and per-vertex payload resolution

Usage:
    from median_intervals.semigroup import get_semigroup, fold
    spec = get_semigroup("sum")
    total = fold(spec, [3, 5, 7])
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .config import MASK64
from .errors import EmptyInputError, PayloadKindError

logger = logging.getLogger(__name__)

MIN_SIGNED64 = -(1 << 63)


# ============================================================================
# COMBINE FUNCTIONS
# ============================================================================
# Module-level so that built indices (which hold a SemigroupSpec) pickle.

def _check_word(value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise PayloadKindError(f"expected a 64-bit integer payload, got {type(value).__name__}")
    value = int(value)
    if not MIN_SIGNED64 <= value <= MASK64:
        raise PayloadKindError(f"payload {value} does not fit in 64 bits")
    return value


def wrapping_sum(a: int, b: int) -> int:
    """Addition modulo 2^64"""
    return (_check_word(a) + _check_word(b)) & MASK64


def minimum(a: int, b: int) -> int:
    """Smaller of two integers"""
    a, b = _check_word(a), _check_word(b)
    return a if a <= b else b


@dataclass(frozen=True)
class SemigroupSpec:
    """
    A commutative semigroup used to aggregate vertex payloads

    Attributes:
        name: Identifier used on the command line and in reports
        combine: Binary operation, commutative and associative
        default_payload: How missing payloads are filled ("one" or "id")
    """

    name: str
    combine: Callable[[int, int], int]
    default_payload: str = "one"

    def __repr__(self) -> str:
        return f"SemigroupSpec({self.name!r})"


SUM = SemigroupSpec("sum", wrapping_sum, "one")
MIN = SemigroupSpec("min", minimum, "id")
FINGERPRINT = SemigroupSpec("fingerprint", wrapping_sum, "one")

BUILTINS: Dict[str, SemigroupSpec] = {s.name: s for s in (SUM, MIN, FINGERPRINT)}


def get_semigroup(name: str) -> SemigroupSpec:
    """
    Look up a built-in semigroup by name

    Args:
        name: One of "sum", "min", "fingerprint"

    Returns:
        The matching SemigroupSpec
    """
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown semigroup {name!r}; choose from {sorted(BUILTINS)}") from None


def combine(spec: SemigroupSpec, a: int, b: int) -> int:
    """Semigroup product of a and b under spec"""
    return spec.combine(a, b)


def fold(spec: SemigroupSpec, values: Iterable[int]) -> int:
    """
    Fold a nonempty collection of payloads

    Raises:
        EmptyInputError: There is no identity element to return for nothing
    """
    values = list(values)
    if not values:
        raise EmptyInputError(f"cannot fold an empty collection under {spec.name}")
    return reduce(spec.combine, values)


def fold_optional(spec: SemigroupSpec, *values: Optional[int]) -> Optional[int]:
    """Fold the values that are not None; None when all are None"""
    present = [v for v in values if v is not None]
    return reduce(spec.combine, present) if present else None


# ============================================================================
# PAYLOAD RESOLUTION
# ============================================================================

def fingerprint_token(seed: int, vertex: int, payload: int) -> int:
    """Random token in [1, 2^64) drawn from a generator keyed by the three arguments"""
    rng = np.random.default_rng([seed & MASK64, vertex, payload & MASK64])
    return int(rng.integers(1, MASK64, dtype=np.uint64, endpoint=True))


def payload_vector(raw: Sequence[Optional[int]], spec: SemigroupSpec, seed: int = 0) -> List[int]:
    """
    Resolve per-vertex values folded by spec

    Missing payloads become 1 (sum, fingerprint) or the vertex id (min). For
    the fingerprint semigroup every vertex draws a nonzero 64-bit token from a
    generator seeded by (seed, vertex, payload), so equal fingerprints stand in
    for equal vertex sets whatever the payloads are.

    Args:
        raw: Stored payload per vertex, None where absent
        spec: Semigroup that will fold the values
        seed: Token seed for the fingerprint semigroup

    Returns:
        One integer per vertex
    """
    values: List[int] = []
    for v, p in enumerate(raw):
        if p is None:
            p = v if spec.default_payload == "id" else 1
        values.append(_check_word(p))

    if spec.name == "sum":
        return [p & MASK64 for p in values]
    if spec.name == "fingerprint":
        return [fingerprint_token(seed, v, p) for v, p in enumerate(values)]
    return values
