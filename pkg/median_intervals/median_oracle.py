"""
Median Intervals - Brute-Force Oracle
=====================================

Reference implementations every fast structure is tested against.

This module provides:
1. All-pairs distances and brute-force intervals / interval sums (single or batched)
2. Structural verifiers: median graph, cube-free, convex set
3. Brute-force median of three
4. Interval grid-embedding check (ok / skipped / failed)
5. Brute-force imprints and staircases for small fixtures

Usage:
    from median_intervals.median_oracle import verify_median_graph
    report = verify_median_graph(g)
    if not report.ok:
        print(report.message, report.witness)
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_ORACLE_LIMIT, MASK64
from .errors import NotMedianError, OracleSizeError
from .graph_core import Graph, distance_rows, gate_bruteforce
from .semigroup import SemigroupSpec, fold, minimum, payload_vector, wrapping_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerificationReport:
    """
    Outcome of one structural check

    Attributes:
        check: Name of the check
        ok: Whether the property holds
        witness: Vertices demonstrating a failure (empty when ok)
        message: Human readable summary
    """

    check: str
    ok: bool
    witness: Tuple[int, ...] = ()
    message: str = ""

    def __post_init__(self):
        if not self.ok and not self.witness:
            raise ValueError("a failed report needs a witness")

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["witness"] = list(self.witness)
        return data


def _guard(g: Graph, limit: Optional[int], force: bool) -> None:
    limit = DEFAULT_ORACLE_LIMIT if limit is None else limit
    if g.n > limit and not force:
        raise OracleSizeError(f"graph has {g.n} vertices, above the oracle limit {limit}; pass force to override")


# ============================================================================
# DISTANCES AND INTERVALS
# ============================================================================

def all_pairs_distances(g: Graph) -> np.ndarray:
    """n x n hop-distance matrix"""
    return distance_rows(g, range(g.n))


def interval_bruteforce(g: Graph, u: int, v: int, D: Optional[np.ndarray] = None) -> FrozenSet[int]:
    """I[u,v] = {w : d(u,w) + d(w,v) = d(u,v)}"""
    u, v = g.check_vertex(u), g.check_vertex(v)
    if D is None:
        du, dv = distance_rows(g, [u, v])
    else:
        du, dv = D[u], D[v]
    return frozenset(np.flatnonzero(du + dv == du[v]).tolist())


def interval_sum_bruteforce(
    g: Graph,
    spec: SemigroupSpec,
    u: int,
    v: int,
    values: Optional[Sequence[int]] = None,
    D: Optional[np.ndarray] = None,
    seed: int = 0,
) -> int:
    """
    Fold of payloads over the brute-force interval

    Args:
        values: Resolved payloads (payload_vector); computed when omitted
        seed: Fingerprint seed used when values are computed here
    """
    if values is None:
        values = payload_vector(g.payload, spec, seed)
    return fold(spec, (values[w] for w in sorted(interval_bruteforce(g, u, v, D))))


def interval_folds_bruteforce(
    g: Graph,
    spec: SemigroupSpec,
    pairs: Sequence[Tuple[int, int]],
    values: Sequence[int],
    D: np.ndarray,
) -> List[int]:
    """
    interval_sum_bruteforce for a batch of pairs, reduced with numpy

    Wrapping sums reduce over uint64 (which wraps modulo 2^64) and minima over
    Python integers; any other semigroup falls back to fold.
    """
    if spec.combine is wrapping_sum:
        table = np.array([v & MASK64 for v in values], dtype=np.uint64)
        reduce = np.add.reduce
    elif spec.combine is minimum:
        table = np.array(values, dtype=object)
        reduce = np.minimum.reduce
    else:
        return [interval_sum_bruteforce(g, spec, u, v, values=values, D=D) for u, v in pairs]

    out = []
    for u, v in pairs:
        u, v = g.check_vertex(u), g.check_vertex(v)
        inside = D[u] + D[v] == D[u, v]
        out.append(int(reduce(table[inside])))
    return out


def _packed_intervals(D: np.ndarray) -> np.ndarray:
    """Bit-packed interval membership: [u, v] -> bits over w"""
    n = D.shape[0]
    packed = np.empty((n, n, (n + 7) // 8), dtype=np.uint8)
    for u in range(n):
        member = (D[u][None, :] + D) == D[u][:, None]
        packed[u] = np.packbits(member, axis=1)
    return packed


# ============================================================================
# VERIFIERS
# ============================================================================

def verify_median_graph(g: Graph, limit: Optional[int] = None, force: bool = False) -> VerificationReport:
    """
    Every triple has exactly one vertex in the triple interval intersection

    Raises:
        OracleSizeError: n above the guard and force not set
    """
    _guard(g, limit, force)
    if g.n == 0:
        return VerificationReport("median", True, message="empty graph")
    D = all_pairs_distances(g)
    P = _packed_intervals(D)
    for u in range(g.n):
        for v in range(u, g.n):
            # P[v][w] = I[v,w], P[u][w] = I[u,w]
            common = np.bitwise_and(np.bitwise_and(P[u, v][None, :], P[v]), P[u])
            counts = np.bitwise_count(common).sum(axis=1)
            bad = np.flatnonzero(counts != 1)
            if bad.size:
                w = int(bad[0])
                return VerificationReport(
                    "median", False, (u, v, w),
                    f"triple ({u}, {v}, {w}) has {int(counts[w])} medians",
                )
    return VerificationReport("median", True, message=f"all triples of {g.n} vertices have one median")


def verify_cube_free(g: Graph, limit: Optional[int] = None, force: bool = False) -> VerificationReport:
    """
    No induced 3-cube

    In a median graph a cube is convex, so it shows up as an interval of a
    distance-3 pair with 8 vertices, 3-regular inside the interval.
    """
    _guard(g, limit, force)
    if g.n == 0:
        return VerificationReport("cube_free", True, message="empty graph")
    D = all_pairs_distances(g)
    for u in range(g.n):
        for v in np.flatnonzero(D[u] == 3).tolist():
            if v < u:
                continue
            members = np.flatnonzero(D[u] + D[v] == 3).tolist()
            if len(members) != 8:
                continue
            inside = set(members)
            if all(sum(1 for w in g.neighbors(x) if w in inside) == 3 for x in members):
                return VerificationReport("cube_free", False, tuple(members), f"cube between {u} and {v}")
    return VerificationReport("cube_free", True, message="no induced cube")


def verify_convex(g: Graph, X: Iterable[int], D: Optional[np.ndarray] = None) -> VerificationReport:
    """I[u,v] is inside X for all u, v in X"""
    X = sorted(set(X))
    if D is None:
        D = all_pairs_distances(g)
    inside = np.zeros(g.n, dtype=bool)
    inside[X] = True
    outside = np.flatnonzero(~inside)
    if outside.size == 0:
        return VerificationReport("convex", True, message="X is the whole graph")
    DX = D[np.ix_(X, outside)]
    for i, u in enumerate(X):
        escapes = (DX[i][None, :] + DX) == D[u, X][:, None]
        hit = np.argwhere(escapes)
        if hit.size:
            j, k = hit[0]
            return VerificationReport(
                "convex", False, (u, X[j], int(outside[k])),
                f"{int(outside[k])} lies between {u} and {X[j]} outside the set",
            )
    return VerificationReport("convex", True, message=f"set of {len(X)} vertices is convex")


def median_of_three_bruteforce(g: Graph, v1: int, v2: int, v3: int, D: Optional[np.ndarray] = None) -> int:
    """
    The unique vertex of I[v1,v2] & I[v2,v3] & I[v3,v1]

    Raises:
        NotMedianError: The intersection does not have exactly one vertex
    """
    common = interval_bruteforce(g, v1, v2, D) & interval_bruteforce(g, v2, v3, D) & interval_bruteforce(g, v3, v1, D)
    if len(common) != 1:
        raise NotMedianError(f"triple {(v1, v2, v3)} has {len(common)} medians", (v1, v2, v3))
    return next(iter(common))


# ============================================================================
# INTERVAL EMBEDDING
# ============================================================================

def interval_grid_embedding(g: Graph, u: int, v: int, D: Optional[np.ndarray] = None) -> str:
    """
    Try to place I[u,v] isometrically in the plane grid

    Edges of the interval are grouped by the split they induce; the splits are
    packed greedily into two nested chains and every vertex gets the number of
    splits it lies beyond in each chain as its coordinates.

    Returns:
        "ok" when the coordinates preserve all distances, "failed" when the
        interval is provably not a grid piece (odd cycle or K_{2,3}), and
        "skipped" when the greedy chain packing is inconclusive
    """
    if D is None:
        D = all_pairs_distances(g)
    members = sorted(interval_bruteforce(g, u, v, D))
    inside = set(members)
    sub = D[np.ix_(members, members)]

    for a in members:
        for b in g.neighbors(a):
            if b in inside and D[u, a] == D[u, b]:
                return "failed"
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if D[a, b] == 2 and sum(1 for w in g.neighbors(a) if w in inside and D[w, b] == 1) > 2:
                return "failed"

    splits: Dict[FrozenSet[int], None] = {}
    for a in members:
        for b in g.neighbors(a):
            if b in inside and D[u, a] < D[u, b]:
                far = frozenset(x for x in members if D[x, b] < D[x, a])
                splits.setdefault(far, None)

    chains: List[List[FrozenSet[int]]] = [[], []]
    for far in sorted(splits, key=len, reverse=True):
        for chain in chains:
            if not chain or far <= chain[-1]:
                chain.append(far)
                break
        else:
            logger.warning(f"WARNING: grid embedding of I[{u},{v}] skipped, splits do not fit two chains")
            return "skipped"

    coords = np.array([[sum(1 for far in chain if x in far) for chain in chains] for x in members])
    manhattan = np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=2)
    return "ok" if np.array_equal(manhattan, sub) else "failed"


# ============================================================================
# IMPRINTS AND STAIRCASES
# ============================================================================

def imprints_bruteforce(g: Graph, tree: Iterable[int], u: int, D: Optional[np.ndarray] = None) -> List[int]:
    """Tree vertices w with I[u,w] meeting the tree only in w"""
    tree = sorted(set(tree))
    if D is None:
        D = all_pairs_distances(g)
    found = []
    for w in tree:
        between = [t for t in tree if t != w and D[u, t] + D[t, w] == D[u, w]]
        if not between:
            found.append(w)
    return found


def staircase_bruteforce(
    g: Graph,
    top: int,
    base: Sequence[int],
    columns: Sequence[Iterable[int]],
    D: Optional[np.ndarray] = None,
) -> FrozenSet[int]:
    """
    Vertex set of the staircases with the given top over a base path

    Column i is I[s_i, base[i]] where s_0 = top and s_{i+1} is the gate of s_i
    in columns[i+1] (the vertex set whose imprint is base[i+1]).
    """
    if D is None:
        D = all_pairs_distances(g)
    found = set()
    s = top
    for i, w in enumerate(base):
        if i > 0:
            s = gate_bruteforce(g, s, columns[i])
        found |= interval_bruteforce(g, s, w, D)
    return frozenset(found)
