"""
Median Intervals - Instance Generator
=====================================

This module provides:
1. GenSpec: family, size parameters and seed of an instance
2. Deterministic families: path, tree, grid
3. Verified families: staircase_subgrid, glued, random_expansion
4. Payload assignment (ones, ids, random(seed))

Random families are checked with the oracle and regenerated with a perturbed
seed until they pass, up to the configured number of attempts.

Usage:
    from median_intervals.generator import GenSpec, generate
    g = generate(GenSpec("grid", (4, 4)))
    g = generate(GenSpec("random_expansion", (50,), seed=7))
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_MAX_ATTEMPTS, MASK64
from .errors import GenerationError, PreconditionError
from .graph_core import Graph, bfs_distances
from .median_oracle import verify_cube_free, verify_median_graph

logger = logging.getLogger(__name__)

FAMILIES = ("path", "tree", "grid", "staircase_subgrid", "glued", "random_expansion")
VERIFIED_FAMILIES = ("staircase_subgrid", "glued", "random_expansion")

# Perturbation step between rejected attempts (odd, so seeds never repeat)
SEED_STEP = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class GenSpec:
    """
    Description of one instance

    Attributes:
        family: One of FAMILIES
        size: Size parameters; (n,) for path/tree/random_expansion,
            (rows, cols) for grid/staircase_subgrid, (rows, cols, extra)
            for glued
        seed: 64-bit seed
        payload: "ones", "ids", "random" or "none"
        payload_seed: Seed for random payloads
    """

    family: str
    size: Tuple[int, ...]
    seed: int = 0
    payload: str = "none"
    payload_seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if not self.size or any(s < 1 for s in self.size):
            raise PreconditionError(f"size parameters must be positive, got {self.size}")


def parse_size(text: str) -> Tuple[int, ...]:
    """Parse "4x4", "200" or "6x6x10" into a tuple of ints"""
    try:
        return tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise PreconditionError(f"bad size {text!r}, expected e.g. 200 or 4x4") from None


def parse_payload(text: str) -> Tuple[str, int]:
    """Parse "ones", "ids", "random" or "random(SEED)" into (mode, seed)"""
    match = re.fullmatch(r"(ones|ids|none|random)(?:\((\d+)\))?", text.strip())
    if match is None:
        raise PreconditionError(f"bad payload mode {text!r}, expected ones|ids|random(SEED)")
    return match.group(1), int(match.group(2) or 0)


# ============================================================================
# DETERMINISTIC FAMILIES
# ============================================================================

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def tree_graph(n: int, rng: np.random.Generator) -> Graph:
    """Random recursive tree: vertex i hangs below a uniform earlier vertex"""
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    return Graph.from_edges(n, [(p, i + 1) for i, p in enumerate(parents)])


def grid_graph(rows: int, cols: int) -> Graph:
    """rows x cols grid, vertex (i, j) has id i*cols + j and label "(i,j)" """
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1))
            if i + 1 < rows:
                edges.append((v, v + cols))
    labels = [f"({i},{j})" for i in range(rows) for j in range(cols)]
    return Graph.from_edges(rows * cols, edges, labels=labels)


# ============================================================================
# VERIFIED FAMILIES
# ============================================================================

def staircase_subgrid(rows: int, cols: int, rng: np.random.Generator) -> Graph:
    """
    Cells (i, j) with lo(i) <= j < hi(i), lo and hi nondecreasing

    Consecutive rows overlap so the region is connected.
    """
    lo, hi = [0], [int(rng.integers(1, cols + 1))]
    for _ in range(1, rows):
        new_lo = int(rng.integers(lo[-1], hi[-1]))
        new_hi = int(rng.integers(max(hi[-1], new_lo + 1), cols + 1))
        lo.append(new_lo)
        hi.append(new_hi)

    ids: Dict[Tuple[int, int], int] = {}
    for i in range(rows):
        for j in range(lo[i], hi[i]):
            ids[(i, j)] = len(ids)
    edges = []
    for (i, j), v in ids.items():
        for cell in ((i, j + 1), (i + 1, j)):
            if cell in ids:
                edges.append((v, ids[cell]))
    labels = [f"({i},{j})" for (i, j) in ids]
    return Graph.from_edges(len(ids), edges, labels=labels)


def glued_graph(rows: int, cols: int, extra: int, rng: np.random.Generator) -> Graph:
    """Grid with `extra` tree vertices hanging from its boundary vertices"""
    grid = grid_graph(rows, cols)
    border = [i * cols + j for i in range(rows) for j in range(cols) if i in (0, rows - 1) or j in (0, cols - 1)]
    edges = grid.edges()
    labels = list(grid.labels)
    hosts = list(border)
    for k in range(extra):
        v = grid.n + k
        host = hosts[int(rng.integers(0, len(hosts)))]
        edges.append((host, v))
        hosts.append(v)
        labels.append(f"t{k}")
    return Graph.from_edges(grid.n + extra, edges, labels=labels)


def random_expansion(n: int, rng: np.random.Generator, max_path: int = 6) -> Graph:
    """
    Grow a graph by peripheral expansions along square-free convex sets

    Each step copies a convex path I[a,b] (a single vertex, an edge or a
    longer geodesic whose interval is the path itself) and joins every vertex
    to its copy. Convex copies keep the graph median; paths contain no square
    so no cube appears.
    """
    adjacency: List[List[int]] = [[]]
    while len(adjacency) < n:
        room = n - len(adjacency)
        current = Graph(adjacency)
        a = int(rng.integers(0, current.n))
        dist_a = bfs_distances(current, a)
        reach = min(room, max_path) - 1
        candidates = np.flatnonzero(dist_a <= reach)
        b = int(candidates[int(rng.integers(0, len(candidates)))])
        dist_b = bfs_distances(current, b)
        between = np.flatnonzero(dist_a + dist_b == dist_a[b])
        if len(between) != dist_a[b] + 1:
            # interval is not a path; fall back to a pendant copy of a
            between = np.array([a])
        path = sorted(between.tolist(), key=lambda v: dist_a[v])

        base = len(adjacency)
        copy = {v: base + k for k, v in enumerate(path)}
        adjacency.extend([] for _ in path)
        for v in path:
            adjacency[v].append(copy[v])
            adjacency[copy[v]].append(v)
        for p, q in zip(path, path[1:]):
            adjacency[copy[p]].append(copy[q])
            adjacency[copy[q]].append(copy[p])

    edges = [(u, v) for u in range(len(adjacency)) for v in adjacency[u] if u < v]
    return Graph.from_edges(len(adjacency), edges)


# ============================================================================
# ENTRY POINT
# ============================================================================

def _build_once(spec: GenSpec, seed: int) -> Graph:
    rng = np.random.default_rng(seed & MASK64)
    size = spec.size
    if spec.family == "path":
        return path_graph(size[0])
    if spec.family == "tree":
        return tree_graph(size[0], rng)
    if spec.family == "grid":
        return grid_graph(*_pair(size))
    if spec.family == "staircase_subgrid":
        return staircase_subgrid(*_pair(size), rng)
    if spec.family == "glued":
        rows, cols = _pair(size[:2])
        extra = size[2] if len(size) > 2 else rows + cols
        return glued_graph(rows, cols, extra, rng)
    return random_expansion(size[0], rng)


def _pair(size: Tuple[int, ...]) -> Tuple[int, int]:
    return (size[0], size[1]) if len(size) > 1 else (size[0], size[0])


def assign_payload(graph: Graph, mode: str, seed: int = 0) -> Graph:
    """
    Attach payloads to a graph

    Args:
        mode: "ones", "ids", "random" or "none"
        seed: Seed for "random" (values below 2^32)
    """
    if mode == "none":
        payload = [None] * graph.n
    elif mode == "ones":
        payload = [1] * graph.n
    elif mode == "ids":
        payload = list(range(graph.n))
    elif mode == "random":
        rng = np.random.default_rng(seed)
        payload = [int(x) for x in rng.integers(0, 1 << 32, size=graph.n)]
    else:
        raise PreconditionError(f"unknown payload mode {mode!r}")
    return Graph(graph.adjacency, payload, graph.labels)


def generate(
    spec: GenSpec,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    oracle_limit: Optional[int] = None,
    force: bool = False,
    trust: bool = False,
) -> Graph:
    """
    Produce the instance described by spec

    Args:
        spec: Instance description
        max_attempts: Rejection budget for the verified families
        oracle_limit: Size guard passed to the verifiers
        force: Verify even above the size guard
        trust: Skip verification of the random families

    Returns:
        A connected cube-free median graph

    Raises:
        GenerationError: Every attempt failed verification
    """
    logger.info(f"Generating {spec.family} {spec.size} seed={spec.seed}...")
    if spec.family not in VERIFIED_FAMILIES or trust:
        graph = _build_once(spec, spec.seed)
        return assign_payload(graph, spec.payload, spec.payload_seed)

    witness: Tuple[int, ...] = ()
    for attempt in range(max_attempts):
        seed = (spec.seed + attempt * SEED_STEP) & MASK64
        graph = _build_once(spec, seed)
        for check in (verify_median_graph, verify_cube_free):
            report = check(graph, limit=oracle_limit, force=force)
            if not report.ok:
                witness = report.witness
                logger.warning(f"WARNING: attempt {attempt + 1} rejected: {report.message}")
                break
        else:
            logger.info(f"✓ Generated {graph.n} vertices, {graph.m} edges (attempt {attempt + 1})")
            return assign_payload(graph, spec.payload, spec.payload_seed)
    raise GenerationError(f"no valid {spec.family} instance after {max_attempts} attempts", witness)
