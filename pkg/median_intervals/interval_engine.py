"""
Median Intervals - Recursive Interval Engine
============================================

This module provides:
1. RecursiveIntervalIndex: one recursion level (median, star, fibers) with a
   child index per fiber and the per-fiber tree machinery
2. Interval queries: same-fiber recursion, fiber decomposition of the
   interval, and staircases decomposition for pieces with one end on a tree
3. Median-of-three and distance queries
4. IndexStats and the partition audit helper materialize_decomposition

Usage:
    from median_intervals.interval_engine import build
    index = build(g, get_semigroup("sum"))
    index.query(u, v)
    index.median_of_three(a, b, c)
    index.distance(u, v)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .boundary_forest import (
    CrossingSet,
    FiberView,
    GatedBranchTree,
    ImprintTable,
    compute_imprints,
    entrance_sets,
    maximal_gated_tree,
    relative_boundaries,
    successor_tables,
    total_boundary,
)
from .config import Settings
from .errors import NotMedianError, PreconditionError, StructureError
from .graph_core import (
    Graph,
    SquareIndex,
    Star,
    bfs_distances,
    compute_median,
    distance_rows,
    enumerate_squares,
    fiber_layers,
)
from .median_oracle import interval_bruteforce, staircase_bruteforce
from .semigroup import SemigroupSpec, fold, fold_optional, payload_vector
from .staircase_index import QueryStats, TreeStaircaseIndex, build_tree_index, successor

logger = logging.getLogger(__name__)

# Staircases decomposition case tags
CASE_NONE = "none"          # the special interval alone
CASE_SINGLE = "single"      # one imprint, staircases L only (v is an ancestor of w)
CASE_D = "single-d"         # one imprint, entrance found on the tree path
CASE_E = "single-e"         # one imprint, entrance is the successor of L's end
CASE_DOUBLE = "double"      # two imprints


@dataclass(frozen=True)
class FiberIntersection:
    """I[u,v] meets F(x) in I[g_u, g_v]"""

    x: int
    g_u: int
    g_v: int


@dataclass
class StaircaseDecomposition:
    """
    Parts of I[u,v] for u in a fiber and v on its gated tree

    Attributes:
        case: One of the CASE_* tags
        u: Fiber vertex
        v: Tree vertex
        key: (u, w): the special interval I[u,w]
        staircases: (top, first base vertex, last base vertex) per staircases
        anchors: Named vertices of the decomposition (w, t, w1, w2, e, e2)
    """

    case: str
    u: int
    v: int
    key: Tuple[int, int]
    staircases: List[Tuple[int, int, int]] = field(default_factory=list)
    anchors: Dict[str, int] = field(default_factory=dict)


@dataclass
class FiberIndex:
    """Everything stored for one fiber F(x) of a level"""

    x: int
    members: Tuple[int, ...]
    local: Dict[int, int]
    child: "RecursiveIntervalIndex"
    tree: GatedBranchTree
    imprints: ImprintTable
    special: Dict[Tuple[int, int], int]
    special_lca: Dict[int, Tuple[int, int]]
    relative: Dict[int, CrossingSet]
    successors: Dict[Tuple[int, int], Dict[int, int]]
    entrances: Dict[Tuple[int, int], CrossingSet]
    staircase: TreeStaircaseIndex


@dataclass
class IndexStats:
    """Size counters of a built index"""

    vertices: int = 0
    levels: int = 0
    fibers: int = 0
    base_cases: int = 0
    special_entries: int = 0
    segment_entries: int = 0
    tree_vertices: int = 0
    max_fiber_fraction: float = 0.0

    @property
    def entries(self) -> int:
        return self.special_entries + self.segment_entries


@dataclass(frozen=True)
class Part:
    """A materialized piece of a decomposed interval (top-level ids)"""

    kind: str
    fiber: Optional[int]
    vertices: FrozenSet[int]


# ============================================================================
# RECURSIVE INDEX
# ============================================================================

class RecursiveIntervalIndex:
    """
    Interval, median and distance index over one recursion level

    Vertices are the level graph's local ids; top_ids maps them back to the
    input graph. Levels with at most base_size vertices answer by brute force.
    """

    def __init__(
        self,
        graph: Graph,
        values: Sequence[int],
        spec: SemigroupSpec,
        base_size: int = 32,
        level: int = 0,
        top_ids: Optional[Sequence[int]] = None,
    ):
        """
        Args:
            graph: Level graph (connected, cube-free median)
            values: Resolved payload per vertex
            spec: Semigroup for interval folds
            base_size: Brute-force threshold
            level: Recursion depth of this level
            top_ids: Input-graph id per level vertex
        """
        self.graph = graph
        self.values = list(values)
        self.spec = spec
        self.base_size = max(1, base_size)
        self.level = level
        self.top_ids = tuple(range(graph.n)) if top_ids is None else tuple(top_ids)
        self.is_base = graph.n <= self.base_size
        self.fibers: Dict[int, FiberIndex] = {}
        self.settings: Optional[Settings] = None
        self.seed = 0
        if self.is_base:
            self.dist = distance_rows(graph, range(graph.n))
        else:
            self._build()

    # ================================================================ build

    def _build(self) -> None:
        g = self.graph
        logger.debug(f"Building level {self.level} on {g.n} vertices...")
        self.m = compute_median(g)
        dist_m = bfs_distances(g, self.m)
        self.star = Star.build(g, self.m, dist_m)
        squares = SquareIndex(enumerate_squares(g, dist_m))
        self.fiber_of, self.dist_to_star = fiber_layers(g, self.star.members)

        groups: Dict[int, List[int]] = {x: [] for x in self.star.members}
        for v in range(g.n):
            groups[int(self.fiber_of[v])].append(v)
        largest = max(groups, key=lambda x: len(groups[x]))
        if 2 * len(groups[largest]) > g.n:
            raise StructureError(
                f"fiber of {largest} holds {len(groups[largest])} of {g.n} vertices", (self.m, largest)
            )

        for x in self.star.members:
            self.fibers[x] = self._build_fiber(x, groups[x], squares)

    def _build_fiber(self, x: int, members: List[int], squares: SquareIndex) -> FiberIndex:
        g = self.graph
        sub = g.subgraph(members)
        child = RecursiveIntervalIndex(
            sub,
            [self.values[v] for v in sub.origin],
            self.spec,
            self.base_size,
            self.level + 1,
            [self.top_ids[v] for v in sub.origin],
        )
        local = {v: i for i, v in enumerate(sub.origin)}

        view = FiberView.build(g, x, members, self.dist_to_star)
        tree = maximal_gated_tree(view, total_boundary(view, self.fiber_of), squares)
        imprints = compute_imprints(view, tree)

        # special intervals through the child index
        special: Dict[Tuple[int, int], int] = {}
        special_lca: Dict[int, Tuple[int, int]] = {}
        for u, pairs in imprints.imprints.items():
            for w, _ in pairs:
                special[(u, w)] = child.query(local[u], local[w])
            if len(pairs) == 2:
                a = tree.lca(pairs[0][0], pairs[1][0])
                special_lca[u] = (a, child.query(local[u], local[a]))

        relative = relative_boundaries(view, tree, self.fiber_of)
        successors = successor_tables(view, tree, imprints)
        entrances = entrance_sets(view, tree, imprints)
        staircase = build_tree_index(tree, imprints, successors, special, self.spec)
        return FiberIndex(
            x, tuple(members), local, child, tree, imprints, special, special_lca,
            relative, successors, entrances, staircase,
        )

    # ================================================================ gates

    def _boundary_gate(self, x: int, u: int, y: int) -> Tuple[int, int]:
        """Gate of u (in F(x)) in the relative boundary T_X(x,y), with distance"""
        F = self.fibers[x]
        rel = F.relative[y]
        best = None
        for w, _ in F.imprints.of(u):
            a = rel.nearest(w)
            if a is None:
                continue
            d = F.imprints.distance(u, a)
            if best is None or (d, a) < best:
                best = (d, a)
        if best is None:
            raise StructureError(f"vertex {u} has no gate towards fiber {y}", (u, x, y))
        return best[1], best[0]

    def _gate(self, u: int, x: int) -> Tuple[int, int]:
        ru = int(self.fiber_of[u])
        if x == ru:
            return u, 0
        cr, cx = self.star.code[ru], self.star.code[x]
        if not cr & cx:
            # m lies between r(u) and x
            return x, int(self.dist_to_star[u]) + len(cr ^ cx)
        if len(cr ^ cx) == 1:
            h, dh = self._boundary_gate(ru, u, x)
            return self.fibers[ru].relative[x].cross[h], dh + 1
        y = self.star.by_code[cr & cx]
        w1, d1 = self._boundary_gate(ru, u, y)
        w2 = self.fibers[ru].relative[y].cross[w1]
        w3, d3 = self._boundary_gate(y, w2, x)
        return self.fibers[y].relative[x].cross[w3], d1 + 1 + d3 + 1

    def gate_in_fiber(self, u: int, x: int) -> int:
        """Gate of u in the fiber of star vertex x"""
        if self.is_base or x not in self.star:
            raise PreconditionError(f"{x} is not a star vertex of this level")
        return self._gate(self.graph.check_vertex(u), x)[0]

    # ======================================================= decomposition

    def _inner_distance(self, x: int, u: int, v: int, g_u: int, g_v: int) -> int:
        if g_u == g_v:
            return 0
        F = self.fibers[x]
        if g_u == u and int(self.fiber_of[u]) == x:
            return F.imprints.distance(u, g_v)
        if g_v == v and int(self.fiber_of[v]) == x:
            return F.imprints.distance(v, g_u)
        return F.tree.distance(g_u, g_v)

    def decompose_interval_fibers(self, u: int, v: int) -> List[FiberIntersection]:
        """
        Fibers met by I[u,v] with the gates of u and v in them

        Candidates are the fibers of I[r(u), r(v)] inside the star; a fiber is
        kept when its gates lie on a shortest u-v path.
        """
        ru, rv = int(self.fiber_of[u]), int(self.fiber_of[v])
        if ru == rv:
            raise PreconditionError(f"{u} and {v} share the fiber of {ru}")
        scored = []
        for x in self.star.interval(ru, rv):
            g_u, d_u = self._gate(u, x)
            g_v, d_v = self._gate(v, x)
            total = d_u + self._inner_distance(x, u, v, g_u, g_v) + d_v
            scored.append((total, FiberIntersection(x, g_u, g_v)))
        shortest = min(total for total, _ in scored)
        return [piece for total, piece in scored if total == shortest]

    def find_entrance(self, F: FiberIndex, t: int, t2: int, anchors: Sequence[int]) -> int:
        """
        Entrance of the staircases based at t2 among tree vertices below t

        The deepest nearest ancestor of the anchors in the entrance set of
        (t, t2); t itself when none is deeper.
        """
        ent = F.entrances[(t, t2)]
        best = t
        for a in anchors:
            e = ent.nearest(a)
            if e is not None and F.tree.depth[e] > F.tree.depth[best]:
                best = e
        return best

    def _one_end(self, F: FiberIndex, u: int, v: int, stats: QueryStats) -> Tuple[int, StaircaseDecomposition]:
        tree, st = F.tree, F.staircase
        if v not in tree:
            raise PreconditionError(f"{v} is not on the gated tree of fiber {F.x}")
        scored = [(d + tree.distance(w, v), w) for w, d in F.imprints.of(u)]
        best = min(s for s, _ in scored)
        qualifying = sorted(w for s, w in scored if s == best)

        if len(qualifying) == 1:
            w = qualifying[0]
            t = tree.lca(w, v)
            value = F.special[(u, w)]
            plan = StaircaseDecomposition(CASE_NONE, u, v, (u, w), anchors={"w": w, "t": t})
            z = u
            if w != t:
                p = tree.parent[w]
                s = successor(F.successors, u, w, p)
                z, lower = st.query(s, p, t, stats)
                value = self.spec.combine(value, lower)
                plan.staircases.append((s, p, t))
                plan.case = CASE_SINGLE
            if t == v:
                return value, plan
            t2 = tree.child_toward(t, v)
            ent = F.entrances[(t, t2)]
            if w != t and tree.child_toward(t, w) in ent:
                e = self.find_entrance(F, t, t2, [w])
                e2 = ent.cross[e]
                plan.case = CASE_D
            else:
                e = t
                e2 = successor(F.successors, z, t, t2)
                plan.case = CASE_E
        else:
            w1, w2 = qualifying
            w, value = F.special_lca[u]
            t = tree.lca(w, v)
            plan = StaircaseDecomposition(CASE_DOUBLE, u, v, (u, w), anchors={"w1": w1, "w2": w2, "w": w, "t": t})
            if w != t:
                p = tree.parent[w]
                _, path_value = st.query(p, p, t, stats)
                value = self.spec.combine(value, path_value)
                plan.staircases.append((p, p, t))
            if t == v:
                return value, plan
            t2 = tree.child_toward(t, v)
            e = self.find_entrance(F, t, t2, [w1, w2])
            e2 = F.entrances[(t, t2)].cross[e]

        plan.anchors.update(e=e, e2=e2)
        _, upper = st.query(e2, t2, v, stats)
        plan.staircases.append((e2, t2, v))
        return self.spec.combine(value, upper), plan

    def decompose_one_end_on_tree(self, x: int, u: int, v: int) -> StaircaseDecomposition:
        """Staircases decomposition of I[u,v] for u in F(x) and v on its tree"""
        F = self._fiber_containing(x, u)
        return self._one_end(F, u, v, QueryStats())[1]

    def query_one_end_on_tree(self, x: int, u: int, v: int, stats: Optional[QueryStats] = None) -> int:
        """p(I[u,v]) for u in F(x) and v on the gated tree of F(x)"""
        F = self._fiber_containing(x, u)
        return self._one_end(F, u, v, stats if stats is not None else QueryStats())[0]

    def _fiber_containing(self, x: int, u: int) -> FiberIndex:
        if self.is_base or x not in self.fibers:
            raise PreconditionError(f"{x} is not a star vertex of this level")
        if int(self.fiber_of[self.graph.check_vertex(u)]) != x:
            raise PreconditionError(f"{u} is not in the fiber of {x}")
        return self.fibers[x]

    def _piece(self, piece: FiberIntersection, u: int, v: int, stats: QueryStats) -> Tuple[int, Optional[StaircaseDecomposition]]:
        if piece.g_u == piece.g_v:
            return self.values[piece.g_u], None
        F = self.fibers[piece.x]
        if int(self.fiber_of[u]) == piece.x:
            return self._one_end(F, u, piece.g_v, stats)
        if int(self.fiber_of[v]) == piece.x:
            return self._one_end(F, v, piece.g_u, stats)
        return self._one_end(F, piece.g_u, piece.g_v, stats)

    # ============================================================== queries

    def query(self, u: int, v: int, stats: Optional[QueryStats] = None) -> int:
        """
        p(I[u,v]): the fold of payloads over every shortest u-v path

        Raises:
            VertexBoundsError: u or v out of range
        """
        u, v = self.graph.check_vertex(u), self.graph.check_vertex(v)
        stats = stats if stats is not None else QueryStats()
        stats.depth = max(stats.depth, self.level)
        if self.is_base:
            members = np.flatnonzero(self.dist[u] + self.dist[v] == self.dist[u, v])
            return fold(self.spec, (self.values[w] for w in members))
        x = int(self.fiber_of[u])
        if x == int(self.fiber_of[v]):
            F = self.fibers[x]
            return F.child.query(F.local[u], F.local[v], stats)

        pieces = self.decompose_interval_fibers(u, v)
        stats.fibers += len(pieces)
        stats.max_fibers = max(stats.max_fibers, len(pieces))
        total = None
        for piece in pieces:
            total = fold_optional(self.spec, total, self._piece(piece, u, v, stats)[0])
        return total

    def distance(self, u: int, v: int) -> int:
        """d(u,v) through the fiber of u"""
        u, v = self.graph.check_vertex(u), self.graph.check_vertex(v)
        if self.is_base:
            return int(self.dist[u, v])
        x = int(self.fiber_of[u])
        F = self.fibers[x]
        if x == int(self.fiber_of[v]):
            return F.child.distance(F.local[u], F.local[v])
        g, d = self._gate(v, x)
        return F.imprints.distance(u, g) + d

    def median_of_three(self, a: int, b: int, c: int) -> int:
        """
        The median of three vertices

        Raises:
            NotMedianError: Brute-force base case finds no unique median
        """
        a, b, c = (self.graph.check_vertex(v) for v in (a, b, c))
        if self.is_base:
            D = self.dist
            common = (
                (D[a] + D[b] == D[a, b]) & (D[b] + D[c] == D[b, c]) & (D[c] + D[a] == D[c, a])
            )
            found = np.flatnonzero(common)
            if len(found) != 1:
                raise NotMedianError(f"triple {(a, b, c)} has {len(found)} medians", (a, b, c))
            return int(found[0])
        x = self.star.median(*(int(self.fiber_of[v]) for v in (a, b, c)))
        F = self.fibers[x]
        gates = [F.local[self._gate(v, x)[0]] for v in (a, b, c)]
        return F.members[F.child.median_of_three(*gates)]

    # ================================================================ stats

    def levels(self):
        """Yield every level of the recursion, parents first"""
        yield self
        for F in self.fibers.values():
            yield from F.child.levels()

    def index_stats(self) -> IndexStats:
        stats = IndexStats(vertices=self.graph.n)
        for lvl in self.levels():
            stats.levels = max(stats.levels, lvl.level + 1)
            if lvl.is_base:
                stats.base_cases += 1
                continue
            for F in lvl.fibers.values():
                stats.fibers += 1
                stats.special_entries += len(F.special) + len(F.special_lca)
                stats.segment_entries += F.staircase.entries
                stats.tree_vertices += len(F.tree)
                stats.max_fiber_fraction = max(stats.max_fiber_fraction, len(F.members) / lvl.graph.n)
        return stats

    def __repr__(self) -> str:
        kind = "base" if self.is_base else f"median={self.m}, fibers={len(self.fibers)}"
        return f"RecursiveIntervalIndex(level={self.level}, n={self.graph.n}, {kind})"


# ============================================================================
# ENTRY POINTS
# ============================================================================

def build(
    g: Graph,
    spec: SemigroupSpec,
    settings: Optional[Settings] = None,
    base_size: Optional[int] = None,
    seed: Optional[int] = None,
) -> RecursiveIntervalIndex:
    """
    Build the recursive index for a cube-free median graph

    Args:
        g: Input graph
        spec: Semigroup for interval queries
        settings: Knobs (defaults from the environment)
        base_size: Overrides settings.base_size
        seed: Overrides settings.fingerprint_seed

    Raises:
        StructureError: The graph is not a cube-free median graph
    """
    settings = (settings or Settings.from_env()).with_overrides(base_size=base_size, fingerprint_seed=seed)
    logger.info(f"Building interval index on {g.n} vertices ({spec.name})...")
    values = payload_vector(g.payload, spec, settings.fingerprint_seed)
    index = RecursiveIntervalIndex(g, values, spec, settings.base_size)
    index.settings = settings
    index.seed = settings.fingerprint_seed
    stats = index.index_stats()
    logger.info(f"✓ Built index: {stats.levels} levels, {stats.entries} entries")
    return index


def _locate(index: RecursiveIntervalIndex, u: int, v: int) -> Tuple[RecursiveIntervalIndex, int, int]:
    """Descend to the level where u and v are split (or the base case)"""
    level = index
    while not level.is_base:
        x = int(level.fiber_of[u])
        if x != int(level.fiber_of[v]):
            break
        F = level.fibers[x]
        level, u, v = F.child, F.local[u], F.local[v]
    return level, u, v


def _tree_path(tree: GatedBranchTree, a: int, b: int) -> List[int]:
    if tree.is_ancestor(a, b):
        return tree.path_up(b, a)[::-1]
    return tree.path_up(a, b)


def materialize_decomposition(index: RecursiveIntervalIndex, u: int, v: int) -> List[Part]:
    """
    Vertex sets of every part the query for (u, v) folds, in input ids

    Parts are fiber pieces; a piece answered by the staircases decomposition
    contributes its special interval and each staircases separately.
    """
    u, v = index.graph.check_vertex(u), index.graph.check_vertex(v)
    level, u, v = _locate(index, u, v)
    g = level.graph
    D = distance_rows(g, range(g.n))
    def lift(vs):
        return frozenset(level.top_ids[w] for w in vs)

    if level.is_base:
        return [Part("base", None, lift(interval_bruteforce(g, u, v, D)))]

    parts = []
    for piece in level.decompose_interval_fibers(u, v):
        fiber = level.top_ids[piece.x]
        _, plan = level._piece(piece, u, v, QueryStats())
        if plan is None:
            parts.append(Part("point", fiber, lift([piece.g_u])))
            continue
        F = level.fibers[piece.x]
        a, w = plan.key
        parts.append(Part("special", fiber, lift(interval_bruteforce(g, a, w, D))))
        for top, start, end in plan.staircases:
            base = _tree_path(F.tree, start, end)
            columns = [F.imprints.owners[b] for b in base]
            parts.append(Part("staircase", fiber, lift(staircase_bruteforce(g, top, base, columns, D))))
    return parts
