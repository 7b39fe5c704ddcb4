"""
Median Intervals - Staircase Index
==================================

Segment trees over base paths for staircases queries.

This module provides:
1. PathSegmentIndex: complete binary tree over one base path storing, per
   node [l, r] and entry vertex z of column l, the end vertex s(z,l,r) and the
   folded value S(z,l,r)
2. staircases_query_path: fold over a column range by canonical nodes
3. TreeStaircaseIndex: forward and reverse path indices on every heavy path
   of a gated tree, chained through successor tables at light edges
4. successor: checked lookup of a gate in the next column
5. QueryStats: node-visit instrumentation

Usage:
    index = build_tree_index(tree, imprints, successors, special, spec)
    end, value = index.query(u, w, v)
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .boundary_forest import GatedBranchTree, ImprintTable, heavy_light
from .errors import PreconditionError, StructureError
from .semigroup import SemigroupSpec

logger = logging.getLogger(__name__)

# (z, w) -> p(I[z, w]) for every vertex z and each of its imprints w
SpecialValues = Dict[Tuple[int, int], int]
SuccessorTables = Dict[Tuple[int, int], Dict[int, int]]


def successor(tables: SuccessorTables, z: int, w: int, w2: int) -> int:
    """
    Gate of z in F(x,w2), for z in F(x,w) and a tree edge (w, w2)

    Raises:
        PreconditionError: (w, w2) is not a tree edge or w is not an imprint of z
    """
    table = tables.get((w, w2))
    if table is None:
        raise PreconditionError(f"({w}, {w2}) is not an edge of the gated tree")
    if z not in table:
        raise PreconditionError(f"{w} is not an imprint of {z}")
    return table[z]


@dataclass
class QueryStats:
    """Counters accumulated while answering queries"""

    node_visits: int = 0
    fibers: int = 0
    depth: int = 0
    max_fibers: int = 0

    def merge(self, other: "QueryStats") -> None:
        self.node_visits += other.node_visits
        self.fibers += other.fibers
        self.depth = max(self.depth, other.depth)
        self.max_fibers = max(self.max_fibers, other.max_fibers)


# ============================================================================
# PATH INDEX
# ============================================================================

class PathSegmentIndex:
    """
    Staircases index over one base path w_0..w_{k-1}

    The path is padded to 2^q columns; padded columns are empty and no stored
    node reaches into them.
    """

    def __init__(
        self,
        path: Sequence[int],
        columns: Sequence[Sequence[int]],
        steps: Sequence[Dict[int, int]],
        base: Callable[[int, int], Optional[int]],
        spec: SemigroupSpec,
    ):
        """
        Build all node entries bottom-up

        Args:
            path: Base vertices w_0..w_{k-1}
            columns: F_i, the entry vertices of column i
            steps: steps[i] maps z in F_i to its successor in F_{i+1}
            base: (z, w_i) -> p(I[z, w_i]), None when unknown
            spec: Semigroup used to fold

        Raises:
            StructureError: A base value is missing
        """
        self.path = tuple(path)
        self.length = len(self.path)
        self.q = max(0, (self.length - 1).bit_length())
        self.width = 1 << self.q
        self.steps = list(steps)
        self.spec = spec
        self.nodes: Dict[int, Dict[int, Tuple[int, int]]] = {}
        self.entries = 0
        self._build(1, 0, self.width - 1, columns, base)

    def _build(self, node: int, l: int, r: int, columns, base) -> None:
        if r >= self.length:
            if l < self.length and l < r:
                mid = (l + r) // 2
                self._build(2 * node, l, mid, columns, base)
                self._build(2 * node + 1, mid + 1, r, columns, base)
            return
        if l == r:
            w = self.path[l]
            entry = {}
            for z in columns[l]:
                value = base(z, w)
                if value is None:
                    raise StructureError(f"missing base value for ({z}, column {l})", (z, w))
                entry[z] = (z, value)
            self.nodes[node] = entry
            self.entries += len(entry)
            return
        mid = (l + r) // 2
        self._build(2 * node, l, mid, columns, base)
        self._build(2 * node + 1, mid + 1, r, columns, base)
        left, right, step = self.nodes[2 * node], self.nodes[2 * node + 1], self.steps[mid]
        entry = {}
        for z, (s1, value1) in left.items():
            s2, value2 = right[step[s1]]
            entry[z] = (s2, self.spec.combine(value1, value2))
        self.nodes[node] = entry
        self.entries += len(entry)

    def _canonical(self, node: int, l: int, r: int, a: int, b: int, out: List[Tuple[int, int, int]], stats: QueryStats) -> None:
        stats.node_visits += 1
        if b < l or r < a:
            return
        if a <= l and r <= b:
            out.append((node, l, r))
            return
        mid = (l + r) // 2
        self._canonical(2 * node, l, mid, a, b, out, stats)
        self._canonical(2 * node + 1, mid + 1, r, a, b, out, stats)

    def query(self, a: int, b: int, x: int, stats: Optional[QueryStats] = None) -> Tuple[int, int]:
        """
        Staircases with top x over columns a..b

        Returns:
            (end vertex in column b, folded value)

        Raises:
            PreconditionError: Bad range or x not in column a
        """
        if not 0 <= a <= b < self.length:
            raise PreconditionError(f"column range [{a}, {b}] outside 0..{self.length - 1}")
        stats = stats if stats is not None else QueryStats()
        parts: List[Tuple[int, int, int]] = []
        self._canonical(1, 0, self.width - 1, a, b, parts, stats)
        cur, total = x, None
        for node, l, _ in parts:
            if l > a:
                cur = self.steps[l - 1][cur]
            try:
                cur, value = self.nodes[node][cur]
            except KeyError:
                raise PreconditionError(f"vertex {cur} is not in column {l}") from None
            total = value if total is None else self.spec.combine(total, value)
        return cur, total

    def audit(self) -> bool:
        """Replay the base-case and merge recurrences on every stored node"""
        for node, entry in self.nodes.items():
            l, r = self._span(node)
            if l == r:
                if any(s != z for z, (s, _) in entry.items()):
                    return False
                continue
            mid = (l + r) // 2
            left, right = self.nodes[2 * node], self.nodes[2 * node + 1]
            for z, (s, value) in entry.items():
                s1, value1 = left[z]
                s2, value2 = right[self.steps[mid][s1]]
                if s != s2 or value != self.spec.combine(value1, value2):
                    return False
        return True

    def _span(self, node: int) -> Tuple[int, int]:
        level = node.bit_length() - 1
        width = self.width >> level
        l = (node - (1 << level)) * width
        return l, l + width - 1


def staircases_query_path(idx: PathSegmentIndex, a: int, b: int, x: int, stats: Optional[QueryStats] = None) -> Tuple[int, int]:
    return idx.query(a, b, x, stats)


def build_path_index(
    path: Sequence[int],
    imprints: ImprintTable,
    successors: SuccessorTables,
    special: SpecialValues,
    spec: SemigroupSpec,
) -> PathSegmentIndex:
    """Index over a tree path whose consecutive vertices are tree neighbors"""
    columns = [imprints.owners[w] for w in path]
    steps = [successors[(path[i], path[i + 1])] for i in range(len(path) - 1)]
    return PathSegmentIndex(path, columns, steps, lambda z, w: special.get((z, w)), spec)


# ============================================================================
# TREE INDEX
# ============================================================================

class TreeStaircaseIndex:
    """
    Staircases queries along vertical paths of a gated tree

    Every heavy path gets a forward (top-down) and a reverse (bottom-up)
    PathSegmentIndex; light edges are crossed with the successor tables.
    """

    def __init__(
        self,
        tree: GatedBranchTree,
        imprints: ImprintTable,
        successors: SuccessorTables,
        special: SpecialValues,
        spec: SemigroupSpec,
    ):
        self.tree = tree
        self.successors = successors
        self.special = special
        self.spec = spec
        self.forward: List[PathSegmentIndex] = []
        self.reverse: List[PathSegmentIndex] = []
        claims: Dict[int, int] = {}
        for path in heavy_light(tree):
            self.forward.append(build_path_index(path, imprints, successors, special, spec))
            self.reverse.append(build_path_index(path[::-1], imprints, successors, special, spec))
            for z in {z for w in path for z in imprints.owners[w]}:
                claims[z] = claims.get(z, 0) + 1
        crowded = [z for z, c in claims.items() if c > 2]
        if crowded:
            raise StructureError(f"vertex {crowded[0]} has imprints on {claims[crowded[0]]} heavy paths", (crowded[0],))

    @property
    def entries(self) -> int:
        return sum(i.entries for i in self.forward) + sum(i.entries for i in self.reverse)

    def _down(self, x: int, w: int, v: int, stats: QueryStats) -> Tuple[int, int]:
        tree = self.tree
        segments = []
        cur = v
        while tree.head[cur] != tree.head[w]:
            segments.append((tree.head[cur], cur))
            cur = tree.parent[tree.head[cur]]
        segments.append((w, cur))
        segments.reverse()

        total, prev_end = None, None
        for top, bottom in segments:
            if prev_end is not None:
                x = successor(self.successors, x, prev_end, top)
            pid = tree.path_id[top]
            x, value = self.forward[pid].query(tree.path_pos[top], tree.path_pos[bottom], x, stats)
            total = value if total is None else self.spec.combine(total, value)
            prev_end = bottom
        return x, total

    def _up(self, x: int, w: int, v: int, stats: QueryStats) -> Tuple[int, int]:
        tree = self.tree
        total = None
        cur = w
        while True:
            pid = tree.path_id[cur]
            last = len(tree.heavy_paths[pid]) - 1
            stop = v if tree.head[cur] == tree.head[v] else tree.head[cur]
            a, b = last - tree.path_pos[cur], last - tree.path_pos[stop]
            x, value = self.reverse[pid].query(a, b, x, stats)
            total = value if total is None else self.spec.combine(total, value)
            if stop == v:
                return x, total
            up = tree.parent[stop]
            x = successor(self.successors, x, stop, up)
            cur = up

    def query(self, u: int, w: int, v: int, stats: Optional[QueryStats] = None) -> Tuple[int, int]:
        """
        Staircases with top u over the tree path from w to v

        Args:
            u: Top vertex, having imprint w
            w: First base vertex
            v: Last base vertex; w and v must be ancestor-related

        Returns:
            (end vertex in the column of v, folded value)

        Raises:
            PreconditionError: w and v are not on one root-leaf path
        """
        stats = stats if stats is not None else QueryStats()
        if w == v:
            value = self.special.get((u, w))
            if value is None:
                raise PreconditionError(f"{w} is not an imprint of {u}")
            return u, value
        if self.tree.is_ancestor(w, v):
            return self._down(u, w, v, stats)
        if self.tree.is_ancestor(v, w):
            return self._up(u, w, v, stats)
        raise PreconditionError(f"{w} and {v} are not on a common root-leaf path")


def build_tree_index(
    tree: GatedBranchTree,
    imprints: ImprintTable,
    successors: SuccessorTables,
    special: SpecialValues,
    spec: SemigroupSpec,
) -> TreeStaircaseIndex:
    return TreeStaircaseIndex(tree, imprints, successors, special, spec)


def staircases_query_tree(index: TreeStaircaseIndex, u: int, w: int, v: int, stats: Optional[QueryStats] = None) -> Tuple[int, int]:
    return index.query(u, w, v, stats)
