"""
Median Intervals - Boundary Forest
==================================

Per-fiber tree machinery.

This module provides:
1. GatedBranchTree: rooted tree with Euler tour, LCA and heavy-light paths
2. NearestAncestorIndex: deepest ancestor inside a connected subtree
3. total_boundary / maximal_gated_tree: the boundary tree of a fiber and its
   greedy extension to a maximal tree with gated branches
4. compute_imprints: the one or two imprints of every fiber vertex
5. Relative boundaries, successor tables and entrance sets built on top

Usage:
    from median_intervals.boundary_forest import FiberView, total_boundary
    view = FiberView.build(g, x, members, dist)
    boundary = total_boundary(view, fiber_of)
"""

import logging
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConvexityError, PreconditionError, StructureError
from .graph_core import Graph, SquareIndex

logger = logging.getLogger(__name__)


# ============================================================================
# FIBER VIEW
# ============================================================================

@dataclass(frozen=True)
class FiberView:
    """
    A fiber F(x) inside one recursion level

    Attributes:
        graph: The level graph
        root: The star vertex x
        members: Fiber vertices, sorted
        member_set: Same, for membership tests
        depth: d(x, v) for every fiber vertex (fibers are convex, so this is
            also the distance inside the fiber)
    """

    graph: Graph
    root: int
    members: Tuple[int, ...]
    member_set: FrozenSet[int]
    depth: Dict[int, int]

    @classmethod
    def build(cls, graph: Graph, root: int, members: Iterable[int], dist_to_star: np.ndarray) -> "FiberView":
        members = tuple(sorted(members))
        return cls(graph, root, members, frozenset(members), {v: int(dist_to_star[v]) for v in members})

    def neighbors(self, v: int) -> List[int]:
        return [w for w in self.graph.neighbors(v) if w in self.member_set]

    def lower_neighbors(self, v: int) -> List[int]:
        """Fiber neighbors one step closer to the root"""
        d = self.depth[v]
        return [w for w in self.neighbors(v) if self.depth[w] == d - 1]

    def by_depth(self) -> List[int]:
        return sorted(self.members, key=lambda v: (self.depth[v], v))


# ============================================================================
# EULER TOUR AND LCA
# ============================================================================

class EulerLCA:
    """Euler tour (walk form) with a sparse table over tour depths"""

    __slots__ = ("tour", "first", "last", "tour_depth", "table", "log")

    def __init__(self, root: int, children: Dict[int, List[int]], depth: Dict[int, int]):
        """
        Args:
            root: Tree root
            children: Children per vertex, visited in the given order
            depth: Depth per vertex
        """
        self.tour: List[int] = []
        self.first: Dict[int, int] = {}
        self.last: Dict[int, int] = {}

        stack = [(root, 0)]
        while stack:
            u, k = stack.pop()
            self.first.setdefault(u, len(self.tour))
            self.last[u] = len(self.tour)
            self.tour.append(u)
            kids = children.get(u, [])
            if k < len(kids):
                stack.append((u, k + 1))
                stack.append((kids[k], 0))

        m = len(self.tour)
        self.tour_depth = np.array([depth[u] for u in self.tour], dtype=np.int64)
        self.log = np.zeros(m + 1, dtype=np.int64)
        if m > 1:
            self.log[2:] = np.floor(np.log2(np.arange(2, m + 1))).astype(np.int64)
        levels = int(self.log[m]) + 1
        table = np.empty((levels, m), dtype=np.int64)
        table[0] = np.arange(m)
        for k in range(1, levels):
            span = 1 << k
            half = span >> 1
            count = m - span + 1
            left = table[k - 1, :count]
            right = table[k - 1, half:half + count]
            table[k, :count] = np.where(self.tour_depth[left] <= self.tour_depth[right], left, right)
        self.table = table

    def lca(self, u: int, v: int) -> int:
        l, r = self.first[u], self.first[v]
        if l > r:
            l, r = r, l
        j = self.log[r - l + 1]
        left = self.table[j, l]
        right = self.table[j, r - (1 << j) + 1]
        return self.tour[left] if self.tour_depth[left] <= self.tour_depth[right] else self.tour[right]


# ============================================================================
# ROOTED TREE
# ============================================================================

class GatedBranchTree:
    """
    Rooted tree inside a fiber

    Holds parent/children/depth maps, an Euler-tour LCA structure and the
    heavy-light decomposition. Children are ordered by ascending id.
    """

    def __init__(self, root: int, parent: Dict[int, Optional[int]]):
        """
        Args:
            root: Root vertex
            parent: Parent per tree vertex (None for the root)
        """
        self.root = root
        self.parent: Dict[int, Optional[int]] = dict(parent)
        self.vertices: Tuple[int, ...] = tuple(sorted(self.parent))
        self.children: Dict[int, List[int]] = {v: [] for v in self.vertices}
        for v, p in self.parent.items():
            if p is not None:
                self.children[p].append(v)
        for kids in self.children.values():
            kids.sort()

        self.depth: Dict[int, int] = {root: 0}
        order = [root]
        for u in order:
            for c in self.children[u]:
                self.depth[c] = self.depth[u] + 1
                order.append(c)
        if len(order) != len(self.vertices):
            raise StructureError(f"tree rooted at {root} does not reach all its vertices", (root,))

        self.size: Dict[int, int] = {v: 1 for v in self.vertices}
        for u in reversed(order):
            p = self.parent[u]
            if p is not None:
                self.size[p] += self.size[u]

        self.euler = EulerLCA(root, self.children, self.depth)
        self._decompose(order)

    # ----------------------------------------------------------- heavy-light

    def _decompose(self, order: List[int]) -> None:
        self.heavy_child: Dict[int, Optional[int]] = {}
        for u in self.vertices:
            heavy = [c for c in self.children[u] if self.size[u] <= 2 * self.size[c]]
            if len(heavy) > 1:
                logger.warning(f"WARNING: vertex {u} has {len(heavy)} heavy children, keeping {heavy[0]}")
            self.heavy_child[u] = heavy[0] if heavy else None

        self.heavy_paths: List[Tuple[int, ...]] = []
        self.path_id: Dict[int, int] = {}
        self.path_pos: Dict[int, int] = {}
        self.head: Dict[int, int] = {}
        for u in order:
            p = self.parent[u]
            if p is not None and self.heavy_child[p] == u:
                continue
            path = [u]
            while self.heavy_child[path[-1]] is not None:
                path.append(self.heavy_child[path[-1]])
            pid = len(self.heavy_paths)
            for i, v in enumerate(path):
                self.path_id[v] = pid
                self.path_pos[v] = i
                self.head[v] = u
            self.heavy_paths.append(tuple(path))

    # --------------------------------------------------------------- queries

    def __contains__(self, v: int) -> bool:
        return v in self.parent

    def __len__(self) -> int:
        return len(self.vertices)

    def lca(self, u: int, v: int) -> int:
        return self.euler.lca(u, v)

    def is_ancestor(self, a: int, b: int) -> bool:
        """Whether a is an ancestor of b (a vertex is its own ancestor)"""
        first, last = self.euler.first, self.euler.last
        return first[a] <= first[b] and last[b] <= last[a]

    def distance(self, a: int, b: int) -> int:
        return self.depth[a] + self.depth[b] - 2 * self.depth[self.lca(a, b)]

    def neighbors(self, v: int) -> List[int]:
        p = self.parent[v]
        return ([p] if p is not None else []) + self.children[v]

    def child_toward(self, t: int, v: int) -> int:
        """The child of t on the path down to its proper descendant v"""
        if t == v or not self.is_ancestor(t, v):
            raise PreconditionError(f"{t} is not a proper ancestor of {v}")
        while self.head[v] != self.head[t]:
            h = self.head[v]
            if self.parent[h] == t:
                return h
            v = self.parent[h]
        return self.heavy_paths[self.path_id[t]][self.path_pos[t] + 1]

    def path_up(self, v: int, a: int) -> List[int]:
        """Vertices from v up to its ancestor a, both included"""
        out = [v]
        while out[-1] != a:
            p = self.parent[out[-1]]
            if p is None:
                raise PreconditionError(f"{a} is not an ancestor of {v}")
            out.append(p)
        return out

    def light_edges_on_path(self, v: int) -> int:
        """Light edges between v and the root"""
        count = 0
        while self.head[v] != self.root:
            count += 1
            v = self.parent[self.head[v]]
        return count


def build_euler_lca(tree: GatedBranchTree) -> Tuple[List[int], EulerLCA]:
    """Euler tour and LCA structure of a tree"""
    return tree.euler.tour, tree.euler


def heavy_light(tree: GatedBranchTree) -> List[Tuple[int, ...]]:
    """Heavy paths, each listed top-down"""
    return tree.heavy_paths


# ============================================================================
# NEAREST ANCESTOR
# ============================================================================

class NearestAncestorIndex:
    """
    Deepest ancestor inside a connected subgraph T' of a rooted tree

    Keeps the tour positions i with tour[i] in T' that are either the first
    visit of tour[i] or a return from a child in T'. The answer for u is the
    vertex at the largest kept position not after u's first visit, provided it
    is an ancestor of u.
    """

    __slots__ = ("tree", "members", "positions")

    def __init__(self, tree: GatedBranchTree, members: Iterable[int]):
        self.tree = tree
        self.members: FrozenSet[int] = frozenset(members)
        first = tree.euler.first
        positions = []
        for v in self.members:
            i = first[v]
            positions.append(i)
            # returns from children in T'
            for c in tree.children[v]:
                if c in self.members:
                    positions.append(tree.euler.last[c] + 1)
        positions.sort()
        self.positions = positions

    def query(self, u: int) -> Optional[int]:
        if u in self.members:
            return u
        k = bisect_right(self.positions, self.tree.euler.first[u]) - 1
        if k < 0:
            return None
        a = self.tree.euler.tour[self.positions[k]]
        return a if self.tree.is_ancestor(a, u) else None

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)


def build_nearest_ancestor(tree: GatedBranchTree, members: Iterable[int]) -> NearestAncestorIndex:
    return NearestAncestorIndex(tree, members)


# ============================================================================
# BOUNDARY TREES
# ============================================================================

def boundary_vertices(view: FiberView, fiber_of: np.ndarray) -> List[int]:
    """Fiber vertices with a neighbor in another fiber"""
    x = view.root
    return [v for v in view.members if any(fiber_of[w] != x for w in view.graph.neighbors(v))]


def total_boundary(view: FiberView, fiber_of: np.ndarray) -> GatedBranchTree:
    """
    The union of all relative boundaries of F(x), rooted at x

    Raises:
        StructureError: The boundary does not induce a tree containing x
    """
    x = view.root
    members = set(boundary_vertices(view, fiber_of))
    members.add(x)
    edges = sum(1 for v in members for w in view.graph.neighbors(v) if w in members) // 2
    if edges != len(members) - 1:
        raise StructureError(f"boundary of fiber {x} has {edges} edges on {len(members)} vertices", (x,))

    parent: Dict[int, Optional[int]] = {x: None}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        for w in view.graph.neighbors(u):
            if w in members and w not in parent:
                parent[w] = u
                queue.append(w)
    if len(parent) != len(members):
        missing = sorted(members - set(parent))
        raise StructureError(f"boundary of fiber {x} is disconnected", (x, missing[0]))
    return GatedBranchTree(x, parent)


def maximal_gated_tree(view: FiberView, boundary: GatedBranchTree, squares: SquareIndex) -> GatedBranchTree:
    """
    Greedy extension of the boundary tree

    Vertices are tried in ascending (depth, id). z joins below the first tree
    neighbor y (by id) one step closer to the root for which y is the root or
    z and parent(y) share no common neighbor besides y.
    """
    parent = dict(boundary.parent)
    for z in view.by_depth():
        if z in parent:
            continue
        for y in view.lower_neighbors(z):
            if y not in parent:
                continue
            p = parent[y]
            if p is None or not squares.closes(z, y, p):
                parent[z] = y
                break
    added = len(parent) - len(boundary.parent)
    logger.debug(f"Extended boundary of fiber {view.root} by {added} vertices")
    return GatedBranchTree(boundary.root, parent)


# ============================================================================
# IMPRINTS
# ============================================================================

class ImprintTable:
    """
    The one or two imprints of every fiber vertex with exact distances

    Attributes:
        imprints: vertex -> ((imprint, distance), ...) sorted by imprint
        owners: tree vertex w -> sorted vertices having imprint w (F(x,w))
    """

    def __init__(self, tree: GatedBranchTree, imprints: Dict[int, Tuple[Tuple[int, int], ...]]):
        self.tree = tree
        self.imprints = imprints
        owners: Dict[int, List[int]] = {w: [] for w in tree.vertices}
        for z, pairs in imprints.items():
            for w, _ in pairs:
                owners[w].append(z)
        self.owners = {w: sorted(zs) for w, zs in owners.items()}

    def of(self, u: int) -> Tuple[Tuple[int, int], ...]:
        return self.imprints[u]

    def distance(self, u: int, w: int) -> int:
        """d(u, w) for a tree vertex w"""
        return min(d + self.tree.distance(c, w) for c, d in self.imprints[u])

    def imprint_distance(self, u: int, w: int) -> Optional[int]:
        for c, d in self.imprints[u]:
            if c == w:
                return d
        return None

    def __len__(self) -> int:
        return len(self.imprints)


def compute_imprints(view: FiberView, tree: GatedBranchTree) -> ImprintTable:
    """
    Imprints of every fiber vertex in the tree

    Every imprint of z lies in I[x, z], so it is inherited from a lower
    neighbor. Inherited candidates are pruned when another candidate lies
    between z and them along the tree.

    Raises:
        StructureError: Some vertex keeps more than two imprints
    """
    imprints: Dict[int, Tuple[Tuple[int, int], ...]] = {}
    for z in view.by_depth():
        if z in tree:
            imprints[z] = ((z, 0),)
            continue
        best: Dict[int, int] = {}
        for y in view.lower_neighbors(z):
            inherited = ((y, 0),) if y in tree else imprints[y]
            for c, d in inherited:
                if c not in best or d + 1 < best[c]:
                    best[c] = d + 1
        kept = [
            (c, d) for c, d in best.items()
            if not any(o != c and do + tree.distance(o, c) <= d for o, do in best.items())
        ]
        if not kept:
            raise StructureError(f"vertex {z} of fiber {view.root} has no imprint", (view.root, z))
        if len(kept) > 2:
            raise StructureError(f"vertex {z} has {len(kept)} imprints", (z, *sorted(c for c, _ in kept)))
        imprints[z] = tuple(sorted(kept))
    return ImprintTable(tree, imprints)


# ============================================================================
# RELATIVE BOUNDARIES, SUCCESSORS, ENTRANCES
# ============================================================================

@dataclass
class CrossingSet:
    """
    A connected tree subset with a designated neighbor per member

    Used for relative boundaries T_X(x,y) (cross = neighbor in F(y)) and for
    entrance sets (cross = neighbor with the child imprint).
    """

    index: NearestAncestorIndex
    cross: Dict[int, int] = field(default_factory=dict)

    def __contains__(self, u: int) -> bool:
        return u in self.index

    def nearest(self, u: int) -> Optional[int]:
        return self.index.query(u)


def relative_boundaries(view: FiberView, tree: GatedBranchTree, fiber_of: np.ndarray) -> Dict[int, CrossingSet]:
    """
    T_X(x,y) for every neighboring fiber F(y)

    Raises:
        StructureError: A boundary vertex has two neighbors in one fiber
    """
    x = view.root
    members: Dict[int, Dict[int, int]] = {}
    for b in view.members:
        for w in view.graph.neighbors(b):
            y = int(fiber_of[w])
            if y == x:
                continue
            cross = members.setdefault(y, {})
            if b in cross:
                raise StructureError(f"vertex {b} has two neighbors in fiber {y}", (b, cross[b], w))
            cross[b] = w
    return {y: CrossingSet(build_nearest_ancestor(tree, cross), cross) for y, cross in sorted(members.items())}


def successor_tables(view: FiberView, tree: GatedBranchTree, imprints: ImprintTable) -> Dict[Tuple[int, int], Dict[int, int]]:
    """
    Gate in F(x,w') of every z in F(x,w), for every tree edge (w, w')

    One multi-source BFS per tree vertex w', from F(x,w'), stopping once all
    vertices with an imprint next to w' are labeled.

    Returns:
        (w, w') -> {z: gate}
    """
    tables: Dict[Tuple[int, int], Dict[int, int]] = {}
    for target in tree.vertices:
        sources = imprints.owners[target]
        label: Dict[int, int] = {z: z for z in sources}
        depth: Dict[int, int] = {z: 0 for z in sources}
        wanted = set()
        for w in tree.neighbors(target):
            wanted.update(imprints.owners[w])
        remaining = wanted - set(label)
        queue = deque(sources)
        while queue and remaining:
            u = queue.popleft()
            for w in view.neighbors(u):
                if w not in label:
                    label[w] = label[u]
                    depth[w] = depth[u] + 1
                    remaining.discard(w)
                    queue.append(w)
                elif depth[w] == depth[u] + 1 and label[w] != label[u]:
                    raise ConvexityError(f"vertex {w} has no gate in the imprint set of {target}", (w, target))
        if remaining:
            raise StructureError(f"imprint set of {target} unreachable inside fiber {view.root}", (target,))
        for w in tree.neighbors(target):
            tables[(w, target)] = {z: label[z] for z in imprints.owners[w]}
    return tables


def entrance_sets(view: FiberView, tree: GatedBranchTree, imprints: ImprintTable) -> Dict[Tuple[int, int], CrossingSet]:
    """
    For each tree edge t -> t' (t' a child of t): the tree vertices y below t
    and outside the subtree of t' that have a neighbor b with imprint t' and
    d(b, t') = depth(y) - depth(t). The set contains t and is connected.

    Returns:
        (t, t') -> CrossingSet with cross[y] = b
    """
    sets: Dict[Tuple[int, int], CrossingSet] = {}
    for t in tree.vertices:
        for t2 in tree.children[t]:
            cross = {t: t2}
            stack = [c for c in tree.children[t] if c != t2]
            while stack:
                y = stack.pop()
                offset = tree.depth[y] - tree.depth[t]
                hits = [b for b in view.neighbors(y) if imprints.imprint_distance(b, t2) == offset]
                if not hits:
                    continue
                cross[y] = min(hits)
                stack.extend(tree.children[y])
            sets[(t, t2)] = CrossingSet(build_nearest_ancestor(tree, cross), cross)
    return sets
