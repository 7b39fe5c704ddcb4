"""
Median Intervals - Graph Core
=============================

This module provides:
1. Graph: immutable undirected graph with dense integer ids and input labels
2. Text graph format (read_graph / write_graph)
3. Distances: single-source BFS and the distance-sum median
4. Star of the median with subset coordinates (Star)
5. Square enumeration relative to the median (SquareIndex)
6. Gates and fiber partitions of convex vertex sets

Usage:
    from median_intervals.graph_core import read_graph, compute_median, Star
    g = read_graph("grid.txt")
    m = compute_median(g)
    st = Star.build(g, m)
"""

import logging
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    ConvexityError,
    EmptyInputError,
    GraphInputError,
    NotCubeFreeError,
    NotMedianError,
    VertexBoundsError,
)

logger = logging.getLogger(__name__)

VertexSet = FrozenSet[int]

# Rows of the all-pairs distance matrix computed per scipy call
DISTANCE_CHUNK = 256


# ============================================================================
# GRAPH
# ============================================================================

class Graph:
    """
    Immutable simple undirected graph on vertices 0..n-1

    Build instances with Graph.from_edges (validated) or read_graph.
    """

    __slots__ = ("n", "adjacency", "payload", "labels", "origin", "_label_index", "_csr")

    def __init__(
        self,
        adjacency: Sequence[Sequence[int]],
        payload: Optional[Sequence[Optional[int]]] = None,
        labels: Optional[Sequence[str]] = None,
        origin: Optional[Sequence[int]] = None,
    ):
        """
        Wrap already validated adjacency lists

        Args:
            adjacency: Sorted neighbor list per vertex
            payload: Stored payload per vertex (None where absent)
            labels: Input label per vertex (defaults to the id as text)
            origin: Parent-graph id per vertex for induced subgraphs
        """
        self.n = len(adjacency)
        self.adjacency: Tuple[Tuple[int, ...], ...] = tuple(tuple(a) for a in adjacency)
        self.payload: Tuple[Optional[int], ...] = tuple(payload) if payload is not None else (None,) * self.n
        self.labels: Tuple[str, ...] = tuple(labels) if labels is not None else tuple(str(v) for v in range(self.n))
        self.origin: Optional[Tuple[int, ...]] = tuple(origin) if origin is not None else None
        self._label_index: Optional[Dict[str, int]] = None
        self._csr: Optional[csr_matrix] = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Tuple[int, int]],
        payload: Optional[Sequence[Optional[int]]] = None,
        labels: Optional[Sequence[str]] = None,
    ) -> "Graph":
        """
        Build a validated graph from an edge list

        Args:
            n: Vertex count
            edges: Pairs of vertex ids
            payload: Optional stored payload per vertex
            labels: Optional label per vertex

        Returns:
            Graph with sorted adjacency

        Raises:
            VertexBoundsError: An endpoint is outside 0..n-1
            GraphInputError: Self-loop, parallel edge, or disconnected graph
        """
        if n < 0:
            raise GraphInputError(f"vertex count must be nonnegative, got {n}")
        neighbor_sets: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            for w in (u, v):
                if not 0 <= w < n:
                    raise VertexBoundsError(f"vertex {w} out of range 0..{n - 1}")
            if u == v:
                raise GraphInputError(f"self-loop at vertex {u}")
            if v in neighbor_sets[u]:
                raise GraphInputError(f"parallel edge {u}-{v}")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        if payload is not None and len(payload) != n:
            raise GraphInputError(f"expected {n} payloads, got {len(payload)}")
        if labels is not None:
            if len(labels) != n or len(set(labels)) != n:
                raise GraphInputError("labels must be distinct, one per vertex")

        graph = cls([sorted(s) for s in neighbor_sets], payload, labels)
        if n > 1 and not nx.is_connected(graph.to_networkx()):
            raise GraphInputError("graph is not connected")
        return graph

    # ------------------------------------------------------------------ access

    @property
    def m(self) -> int:
        """Edge count"""
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def edges(self) -> List[Tuple[int, int]]:
        """Edges as (u, v) with u < v, in ascending order"""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def check_vertex(self, v: int) -> int:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < self.n:
            raise VertexBoundsError(f"vertex {v!r} out of range 0..{self.n - 1}")
        return int(v)

    def vertex_of(self, label: str) -> int:
        """Internal id of an input label"""
        if self._label_index is None:
            self._label_index = {lab: v for v, lab in enumerate(self.labels)}
        try:
            return self._label_index[str(label)]
        except KeyError:
            raise GraphInputError(f"unknown vertex label {label!r}") from None

    @property
    def csr(self) -> csr_matrix:
        """Sparse adjacency matrix (cached)"""
        if self._csr is None:
            rows = [u for u in range(self.n) for _ in self.adjacency[u]]
            cols = [v for u in range(self.n) for v in self.adjacency[u]]
            data = np.ones(len(rows), dtype=np.int8)
            index = (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))
            self._csr = csr_matrix((data, index), shape=(self.n, self.n))
        return self._csr

    # ------------------------------------------------------------- derivation

    def subgraph(self, vertices: Iterable[int]) -> "Graph":
        """
        Induced subgraph with dense local ids

        Local id i corresponds to parent id origin[i]; origin is sorted.
        """
        keep = sorted(set(vertices))
        local = {v: i for i, v in enumerate(keep)}
        adjacency = [[local[w] for w in self.adjacency[v] if w in local] for v in keep]
        return Graph(
            adjacency,
            payload=[self.payload[v] for v in keep],
            labels=[self.labels[v] for v in keep],
            origin=keep,
        )

    def to_networkx(self) -> nx.Graph:
        """Export as a networkx graph with label and payload node attributes"""
        graph = nx.Graph()
        for v in range(self.n):
            graph.add_node(v, label=self.labels[v], payload=self.payload[v])
        graph.add_edges_from(self.edges())
        return graph

    def __getstate__(self):
        return (self.adjacency, self.payload, self.labels, self.origin)

    def __setstate__(self, state):
        adjacency, payload, labels, origin = state
        self.__init__(adjacency, payload, labels, origin)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


# ============================================================================
# TEXT FORMAT
# ============================================================================

PAYLOAD_HEADER = "#payloads"


def parse_graph(text: str) -> Graph:
    """
    Parse the text graph format

    Line 1 holds "n m"; the next m lines hold "u v" label pairs; an optional
    "#payloads" section follows with "label value" lines. Labels that are all
    integers are ordered numerically, other labels by first appearance.

    Raises:
        GraphInputError: With the offending 1-based line number
    """
    lines = [(i + 1, line.strip()) for i, line in enumerate(text.splitlines())]
    lines = [(no, line) for no, line in lines if line]
    if not lines:
        raise EmptyInputError("empty graph file", line=1)

    header_no, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise GraphInputError(f"expected 'n m', got {header!r}", line=header_no)
    try:
        n, m_edges = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphInputError(f"expected integers 'n m', got {header!r}", line=header_no) from None
    if n < 0 or m_edges < 0:
        raise GraphInputError("counts must be nonnegative", line=header_no)

    body = lines[1:]
    if len(body) < m_edges:
        raise GraphInputError(f"expected {m_edges} edge lines, found {len(body)}", line=header_no)

    order: List[str] = []
    seen = set()

    def note(label: str) -> None:
        if label not in seen:
            seen.add(label)
            order.append(label)

    raw_edges: List[Tuple[str, str, int]] = []
    for no, line in body[:m_edges]:
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphInputError(f"expected 'u v', got {line!r}", line=no)
        note(tokens[0])
        note(tokens[1])
        raw_edges.append((tokens[0], tokens[1], no))

    raw_payloads: List[Tuple[str, int, int]] = []
    rest = body[m_edges:]
    if rest:
        no, line = rest[0]
        if line != PAYLOAD_HEADER:
            raise GraphInputError(f"unexpected content {line!r}", line=no)
        for no, line in rest[1:]:
            tokens = line.split()
            if len(tokens) != 2:
                raise GraphInputError(f"expected 'vertex value', got {line!r}", line=no)
            try:
                value = int(tokens[1])
            except ValueError:
                raise GraphInputError(f"payload {tokens[1]!r} is not an integer", line=no) from None
            note(tokens[0])
            raw_payloads.append((tokens[0], value, no))

    labels = _order_labels(order, n, header_no)
    index = {lab: v for v, lab in enumerate(labels)}
    payload: List[Optional[int]] = [None] * n
    for label, value, no in raw_payloads:
        payload[index[label]] = value

    edges = []
    seen_edges = set()
    for a, b, no in raw_edges:
        u, v = index[a], index[b]
        if u == v:
            raise GraphInputError(f"self-loop at {a}", line=no)
        key = (min(u, v), max(u, v))
        if key in seen_edges:
            raise GraphInputError(f"parallel edge {a}-{b}", line=no)
        seen_edges.add(key)
        edges.append(key)

    return Graph.from_edges(n, edges, payload=payload, labels=labels)


def _order_labels(order: List[str], n: int, line: int) -> List[str]:
    numeric = all(_is_int(lab) for lab in order)
    if numeric:
        values = sorted({int(lab) for lab in order})
        if len(values) != len(order):
            raise GraphInputError("labels differ only in formatting", line=line)
        if len(values) < n and all(0 <= x < n for x in values):
            values = list(range(n))
        labels = [str(x) for x in values]
    else:
        labels = list(order)
    if len(labels) != n:
        raise GraphInputError(f"header declares {n} vertices but {len(labels)} labels appear", line=line)
    return labels


def _is_int(token: str) -> bool:
    try:
        int(token)
    except ValueError:
        return False
    return True


def read_graph(path: Union[str, Path]) -> Graph:
    """Read a graph file"""
    path = Path(path)
    logger.info(f"Loading graph from {path}...")
    graph = parse_graph(path.read_text())
    logger.info(f"✓ Loaded {graph.n} vertices, {graph.m} edges")
    return graph


def format_graph(graph: Graph) -> str:
    """Render a graph in the text format (payload section only when set)"""
    out = [f"{graph.n} {graph.m}"]
    out.extend(f"{graph.labels[u]} {graph.labels[v]}" for u, v in graph.edges())
    if any(p is not None for p in graph.payload):
        out.append(PAYLOAD_HEADER)
        out.extend(f"{graph.labels[v]} {p}" for v, p in enumerate(graph.payload) if p is not None)
    return "\n".join(out) + "\n"


def write_graph(graph: Graph, path: Union[str, Path]) -> None:
    """Write a graph file"""
    Path(path).write_text(format_graph(graph))
    logger.info(f"✓ Saved graph ({graph.n} vertices) to {path}")


# ============================================================================
# DISTANCES AND MEDIAN
# ============================================================================

def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """
    Hop distances from source to every vertex

    Returns:
        int64 array of length n
    """
    source = g.check_vertex(source)
    dist = shortest_path(g.csr, directed=False, unweighted=True, indices=source)
    return dist.astype(np.int64)


def distance_rows(g: Graph, sources: Sequence[int]) -> np.ndarray:
    """Distance rows for several sources, computed in chunks"""
    rows = []
    sources = list(sources)
    for start in range(0, len(sources), DISTANCE_CHUNK):
        chunk = sources[start:start + DISTANCE_CHUNK]
        rows.append(shortest_path(g.csr, directed=False, unweighted=True, indices=chunk))
    if not rows:
        return np.zeros((0, g.n), dtype=np.int64)
    return np.vstack(rows).astype(np.int64)


def compute_median(g: Graph) -> int:
    """
    Vertex minimizing the sum of distances to all vertices

    Ties go to the smallest id. Walks downhill from vertex 0, one BFS per
    neighbor examined, then collects the plateau of equal sums. In a median
    graph every local minimum of the distance sum is global and the median set
    is convex, so the plateau is the whole median set.

    Raises:
        EmptyInputError: The graph has no vertices
    """
    if g.n == 0:
        raise EmptyInputError("median of an empty graph")
    sums: Dict[int, int] = {}

    def total(vertices: Iterable[int]) -> None:
        todo = [v for v in vertices if v not in sums]
        if todo:
            for v, s in zip(todo, distance_rows(g, todo).sum(axis=1).tolist()):
                sums[v] = int(s)

    current = 0
    total([current])
    while True:
        total(g.neighbors(current))
        best = min(g.neighbors(current), key=lambda w: (sums[w], w), default=None)
        if best is None or sums[best] >= sums[current]:
            break
        current = best

    low = sums[current]
    plateau = {current}
    frontier = [current]
    while frontier:
        v = frontier.pop()
        total(g.neighbors(v))
        for w in g.neighbors(v):
            if w not in plateau and sums[w] == low:
                plateau.add(w)
                frontier.append(w)
    return min(plateau)


# ============================================================================
# STAR
# ============================================================================

class Star:
    """
    St(m) with subset coordinates

    Every star vertex is coded by the set of median neighbors below it: the
    empty set for m, {a} for a neighbor a, {a, b} for the far corner of the
    square m-a-?-b. Distances inside the star are symmetric differences.
    """

    def __init__(self, m: int, code: Dict[int, FrozenSet[int]]):
        """
        Args:
            m: The center vertex
            code: Star vertex -> set of median neighbors below it
        """
        self.m = m
        self.code = code
        self.by_code: Dict[FrozenSet[int], int] = {c: v for v, c in code.items()}
        self.members: Tuple[int, ...] = tuple(sorted(code))

    @classmethod
    def build(cls, g: Graph, m: int, dist_from_m: Optional[np.ndarray] = None) -> "Star":
        """
        Extract the star of m

        Raises:
            NotMedianError: Two square corners share the same pair of median
                neighbors, or a corner sees three of them
        """
        m = g.check_vertex(m)
        if dist_from_m is None:
            dist_from_m = bfs_distances(g, m)
        code: Dict[int, FrozenSet[int]] = {m: frozenset()}
        for a in g.neighbors(m):
            code[a] = frozenset((a,))
        by_pair: Dict[FrozenSet[int], int] = {}
        for a in g.neighbors(m):
            for v in g.neighbors(a):
                if dist_from_m[v] != 2 or v in code:
                    continue
                lower = frozenset(w for w in g.neighbors(v) if dist_from_m[w] == 1)
                if len(lower) < 2:
                    continue
                if len(lower) > 2:
                    raise NotMedianError(f"vertex {v} has {len(lower)} neighbors next to {m}", (m, v, *sorted(lower)))
                if lower in by_pair:
                    raise NotMedianError(f"vertices {by_pair[lower]} and {v} close the same square corner", (m, by_pair[lower], v))
                by_pair[lower] = v
                code[v] = lower
        return cls(m, code)

    def __contains__(self, v: int) -> bool:
        return v in self.code

    def __len__(self) -> int:
        return len(self.code)

    def distance(self, x: int, y: int) -> int:
        return len(self.code[x] ^ self.code[y])

    def adjacent(self, x: int, y: int) -> bool:
        return self.distance(x, y) == 1

    def interval(self, x: int, y: int) -> List[int]:
        """I[x,y] restricted to the star, sorted"""
        cx, cy = self.code[x], self.code[y]
        d = len(cx ^ cy)
        pool = sorted(cx | cy)
        found = []
        for size in range(3):
            for combo in combinations(pool, size):
                c = frozenset(combo)
                v = self.by_code.get(c)
                if v is not None and len(cx ^ c) + len(c ^ cy) == d:
                    found.append(v)
        return sorted(found)

    def median(self, x: int, y: int, z: int) -> int:
        """Median of three star vertices"""
        common = set(self.interval(x, y)) & set(self.interval(y, z)) & set(self.interval(z, x))
        if len(common) != 1:
            raise NotMedianError(f"star triple {(x, y, z)} has {len(common)} medians", (x, y, z))
        return common.pop()

    def neighbors(self, x: int) -> List[int]:
        """Star vertices adjacent to x"""
        cx = self.code[x]
        return sorted(v for v, c in self.code.items() if len(c ^ cx) == 1)


def star(g: Graph, m: int) -> VertexSet:
    """St(m) as a vertex set"""
    return frozenset(Star.build(g, m).members)


# ============================================================================
# SQUARES
# ============================================================================

@dataclass(frozen=True, order=True)
class Square:
    """
    A 4-cycle x-y1-z-y2 with x farthest from the reference vertex

    y1 < y2; d(m,y1) = d(m,y2) = d(m,x) - 1 and d(m,z) = d(m,x) - 2.
    """

    x: int
    y1: int
    z: int
    y2: int

    def vertices(self) -> Tuple[int, int, int, int]:
        return (self.x, self.y1, self.z, self.y2)


def enumerate_squares(g: Graph, dist_from_m: np.ndarray) -> List[Square]:
    """
    Every 4-cycle once, normalized to its far corner

    Raises:
        NotCubeFreeError: A vertex has three neighbors closer to m
        NotMedianError: Two lower neighbors without exactly one common
            lower neighbor
    """
    squares = []
    for x in range(g.n):
        lower = [y for y in g.neighbors(x) if dist_from_m[y] == dist_from_m[x] - 1]
        if len(lower) >= 3:
            raise NotCubeFreeError(f"vertex {x} has {len(lower)} lower neighbors", (x, *lower))
        if len(lower) < 2:
            continue
        y1, y2 = lower
        below = set(w for w in g.neighbors(y1) if dist_from_m[w] == dist_from_m[y1] - 1)
        common = sorted(w for w in g.neighbors(y2) if w in below)
        if len(common) != 1:
            raise NotMedianError(f"lower neighbors {y1}, {y2} of {x} have {len(common)} common lower neighbors", (x, y1, y2, *common))
        squares.append(Square(x, y1, common[0], y2))
    squares.sort(key=lambda s: (s.y1, s.y2))
    return squares


class SquareIndex:
    """
    Lookup of squares by far corner and by diagonal pair

    Diagonals are kept as sorted key lists and searched with bisect.
    """

    def __init__(self, squares: List[Square]):
        """
        Args:
            squares: Output of enumerate_squares
        """
        self.squares = squares
        self.by_far_corner: Dict[int, Square] = {s.x: s for s in squares}
        side = sorted(((s.y1, s.y2), i) for i, s in enumerate(squares))
        apex = sorted(((min(s.x, s.z), max(s.x, s.z)), i) for i, s in enumerate(squares))
        self._side_keys = [k for k, _ in side]
        self._side_ids = [i for _, i in side]
        self._apex_keys = [k for k, _ in apex]
        self._apex_ids = [i for _, i in apex]

    @staticmethod
    def _find(keys, ids, squares, a: int, b: int) -> Optional[Square]:
        key = (min(a, b), max(a, b))
        pos = bisect_left(keys, key)
        if pos < len(keys) and keys[pos] == key:
            return squares[ids[pos]]
        return None

    def by_diagonal(self, a: int, b: int) -> Optional[Square]:
        """Square having a and b as opposite corners, if any"""
        found = self._find(self._side_keys, self._side_ids, self.squares, a, b)
        if found is None:
            found = self._find(self._apex_keys, self._apex_ids, self.squares, a, b)
        return found

    def closes(self, z: int, y: int, p: int) -> bool:
        """
        Whether z and p (both adjacent to y) share a common neighbor besides y

        Holds for a path p-y-z climbing away from m exactly when some square
        has far corner z, contains y and has bottom corner p.
        """
        s = self.by_far_corner.get(z)
        return s is not None and s.z == p and y in (s.y1, s.y2)

    def __len__(self) -> int:
        return len(self.squares)


# ============================================================================
# GATES AND FIBERS
# ============================================================================

def gate_bruteforce(g: Graph, z: int, X: Iterable[int]) -> Optional[int]:
    """
    The gate of z in X by direct check of the gate property

    Returns:
        The gate, or None when X has no gate for z
    """
    z = g.check_vertex(z)
    X = sorted(set(X))
    if not X:
        raise EmptyInputError("gate in an empty set")
    dz = bfs_distances(g, z)
    rows = distance_rows(g, X)
    order = sorted(range(len(X)), key=lambda i: (dz[X[i]], X[i]))
    for i in order:
        x = X[i]
        if all(dz[x] + rows[i][w] == dz[w] for w in X):
            return x
    return None


def fiber_layers(g: Graph, X: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Multi-source BFS from X passing gate labels down the layers

    Returns:
        (gate per vertex, distance to X per vertex)

    Raises:
        ConvexityError: Two lower neighbors of a vertex carry different gates
    """
    sources = sorted(set(X))
    if not sources:
        raise EmptyInputError("fiber partition of an empty set")
    gate = np.full(g.n, -1, dtype=np.int64)
    dist = np.full(g.n, -1, dtype=np.int64)
    queue = deque()
    for x in sources:
        g.check_vertex(x)
        gate[x] = x
        dist[x] = 0
        queue.append(x)
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if dist[w] == -1:
                dist[w] = dist[u] + 1
                gate[w] = gate[u]
                queue.append(w)
            elif dist[w] == dist[u] + 1 and gate[w] != gate[u]:
                raise ConvexityError(f"vertex {w} has no gate", (w, int(gate[w]), int(gate[u])))
    return gate, dist


def fiber_partition(g: Graph, X: Iterable[int]) -> np.ndarray:
    """Gate in X of every vertex; the fiber of x is the preimage of x"""
    return fiber_layers(g, X)[0]
