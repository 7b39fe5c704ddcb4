import math

import numpy as np
import pytest

from median_intervals.boundary_forest import (
    FiberView,
    GatedBranchTree,
    NearestAncestorIndex,
    boundary_vertices,
    build_euler_lca,
    build_nearest_ancestor,
    compute_imprints,
    entrance_sets,
    heavy_light,
    maximal_gated_tree,
    relative_boundaries,
    successor_tables,
    total_boundary,
)
from median_intervals.errors import PreconditionError, StructureError
from median_intervals.generator import grid_graph
from median_intervals.graph_core import SquareIndex, Star, bfs_distances, enumerate_squares, fiber_layers
from median_intervals.median_oracle import all_pairs_distances, imprints_bruteforce

# root 0; 1 and 2 below it; 3 and 4 below 1; 5 below 3
SAMPLE_PARENT = {0: None, 1: 0, 2: 0, 3: 1, 4: 1, 5: 3}


@pytest.fixture
def sample_tree():
    return GatedBranchTree(0, SAMPLE_PARENT)


@pytest.fixture(scope="module")
def corner_fiber():
    """
    The 3x3 corner block (rows 0-2, cols 0-2) of the 7x7 grid

    Its star vertex is (2,2) = 16 and its boundary is the L-shaped tree
    (0,2) - (1,2) - (2,2) - (2,1) - (2,0).
    """
    g = grid_graph(7, 7)
    st = Star.build(g, 24)
    fiber_of, dist = fiber_layers(g, st.members)
    members = np.flatnonzero(fiber_of == 16).tolist()
    view = FiberView.build(g, 16, members, dist)
    squares = SquareIndex(enumerate_squares(g, bfs_distances(g, 24)))
    boundary = total_boundary(view, fiber_of)
    tree = maximal_gated_tree(view, boundary, squares)
    return g, view, fiber_of, tree


class TestGatedBranchTree:
    def test_shape(self, sample_tree):
        assert sample_tree.vertices == (0, 1, 2, 3, 4, 5)
        assert sample_tree.children[1] == [3, 4]
        assert sample_tree.depth[5] == 3
        assert sample_tree.size[1] == 4

    def test_euler_tour(self, sample_tree):
        tour, lca = build_euler_lca(sample_tree)
        assert tour == [0, 1, 3, 5, 3, 1, 4, 1, 0, 2, 0]
        assert lca.lca(4, 5) == 1

    def test_lca_and_distance(self, sample_tree):
        assert sample_tree.lca(5, 4) == 1
        assert sample_tree.lca(5, 2) == 0
        assert sample_tree.lca(3, 5) == 3
        assert sample_tree.distance(5, 2) == 4

    def test_ancestry(self, sample_tree):
        assert sample_tree.is_ancestor(1, 5)
        assert sample_tree.is_ancestor(5, 5)
        assert not sample_tree.is_ancestor(2, 5)

    def test_heavy_paths(self, sample_tree):
        assert heavy_light(sample_tree) == [(0, 1, 3, 5), (2,), (4,)]
        assert sample_tree.head[5] == 0
        assert sample_tree.light_edges_on_path(4) == 1
        assert sample_tree.light_edges_on_path(5) == 0

    def test_child_toward(self, sample_tree):
        assert sample_tree.child_toward(0, 4) == 1
        assert sample_tree.child_toward(1, 4) == 4
        assert sample_tree.child_toward(0, 5) == 1
        with pytest.raises(PreconditionError):
            sample_tree.child_toward(5, 5)
        with pytest.raises(PreconditionError):
            sample_tree.child_toward(2, 5)

    def test_path_up(self, sample_tree):
        assert sample_tree.path_up(5, 0) == [5, 3, 1, 0]
        with pytest.raises(PreconditionError):
            sample_tree.path_up(5, 2)

    def test_balanced_tree_has_few_light_edges(self):
        tree = GatedBranchTree(0, {v: (v - 1) // 2 if v else None for v in range(15)})
        paths = heavy_light(tree)
        assert sorted(v for path in paths for v in path) == list(range(15))
        assert max(tree.light_edges_on_path(v) for v in tree.vertices) <= math.ceil(math.log2(15))

    def test_unreachable_vertices(self):
        with pytest.raises(StructureError):
            GatedBranchTree(0, {0: None, 1: 2, 2: 1})


class TestNearestAncestor:
    def test_subtree_at_root(self, sample_tree):
        index = NearestAncestorIndex(sample_tree, {0, 1, 4})
        assert index.query(5) == 1
        assert index.query(3) == 1
        assert index.query(4) == 4
        assert index.query(2) == 0

    def test_subtree_below_root(self, sample_tree):
        index = build_nearest_ancestor(sample_tree, {1, 3})
        assert index.query(0) is None
        assert index.query(2) is None
        assert index.query(4) == 1
        assert index.query(5) == 3
        assert 3 in index and 4 not in index

    def test_agrees_with_walking_up(self, sample_tree):
        for members in ({0}, {0, 2}, {1}, {3, 5}, {0, 1, 2, 3, 4, 5}):
            index = NearestAncestorIndex(sample_tree, members)
            for u in sample_tree.vertices:
                expected = next((a for a in sample_tree.path_up(u, 0) if a in members), None)
                assert index.query(u) == expected


class TestBoundaryTree:
    def test_boundary_is_l_shaped(self, corner_fiber):
        g, view, fiber_of, tree = corner_fiber
        assert view.members == (0, 1, 2, 7, 8, 9, 14, 15, 16)
        assert boundary_vertices(view, fiber_of) == [2, 9, 14, 15, 16]
        assert tree.parent == {16: None, 9: 16, 15: 16, 2: 9, 14: 15}

    def test_square_corners_stay_outside(self, corner_fiber):
        _, _, _, tree = corner_fiber
        assert 8 not in tree

    def test_imprints_match_oracle(self, corner_fiber):
        g, view, _, tree = corner_fiber
        D = all_pairs_distances(g)
        table = compute_imprints(view, tree)
        for z in view.members:
            pairs = table.of(z)
            assert [w for w, _ in pairs] == imprints_bruteforce(g, tree.vertices, z, D)
            assert all(d == D[z, w] for w, d in pairs)

    def test_two_imprints(self, corner_fiber):
        _, view, _, tree = corner_fiber
        table = compute_imprints(view, tree)
        assert table.of(8) == ((9, 1), (15, 1))
        assert table.of(0) == ((2, 2), (14, 2))
        assert table.owners[9] == [7, 8, 9]
        assert table.distance(0, 16) == 4


class TestDerivedTables:
    def test_relative_boundaries(self, corner_fiber):
        _, view, fiber_of, tree = corner_fiber
        rb = relative_boundaries(view, tree, fiber_of)
        assert sorted(rb) == [17, 23]
        assert rb[17].cross == {2: 3, 9: 10, 16: 17}
        assert rb[23].cross == {14: 21, 15: 22, 16: 23}
        assert rb[17].nearest(14) == 16
        assert rb[17].nearest(2) == 2

    def test_successor_tables(self, corner_fiber):
        _, view, _, tree = corner_fiber
        tables = successor_tables(view, tree, compute_imprints(view, tree))
        assert tables[(9, 2)] == {7: 0, 8: 1, 9: 2}
        assert tables[(16, 9)] == {16: 9}
        assert set(tables[(9, 16)].values()) == {16}

    def test_entrance_sets(self, corner_fiber):
        _, view, _, tree = corner_fiber
        sets = entrance_sets(view, tree, compute_imprints(view, tree))
        assert sets[(16, 9)].cross == {16: 9, 15: 8, 14: 7}
        assert sets[(16, 15)].cross == {16: 15, 9: 8, 2: 1}
        assert 14 in sets[(16, 9)]
        assert sets[(16, 9)].nearest(14) == 14
