"""
Median Intervals
================

Semigroup interval queries, medians of three and distances on cube-free
median graphs, answered from a recursive index over median stars and fibers.

Usage:
    from median_intervals import build, generate, GenSpec, get_semigroup
    g = generate(GenSpec("grid", (8, 8), payload="ids"))
    index = build(g, get_semigroup("sum"))
    index.query(0, 63)
"""

from .config import Settings
from .errors import (
    MedianIntervalError,
    GraphInputError,
    PreconditionError,
    StructureError,
)
from .generator import GenSpec, generate
from .graph_core import Graph, read_graph, write_graph
from .interval_engine import RecursiveIntervalIndex, build, materialize_decomposition
from .semigroup import SemigroupSpec, get_semigroup
from .serialization import load_index, save_index

__version__ = "0.1.0"
