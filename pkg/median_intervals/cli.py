"""
Median Intervals - Command Line
===============================

This module provides:
1. generate: write a generated instance in the text graph format
2. verify: median and cube-free checks with witnesses
3. build: construct an index and save it (optionally plot the top level)
4. query: answer interval / median3 / distance queries in input order
5. bench: build and query timings per size with a c*log2(n)^2 fit

Exit codes: 0 ok, 1 oracle mismatch or failed verification, 2 input error.

Usage:
    python -m median_intervals generate --family grid --size 4x4 --out g.txt
    python -m median_intervals query g.txt --queries q.txt --check
    python -m median_intervals bench --family grid --sizes 128,256,512 --format table
"""

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

from .config import Settings
from .errors import (
    GenerationError,
    GraphInputError,
    OracleSizeError,
    PreconditionError,
    SerializationError,
    StructureError,
)
from .generator import FAMILIES, GenSpec, generate, parse_payload, parse_size
from .graph_core import Graph, format_graph, read_graph
from .interval_engine import RecursiveIntervalIndex, build
from .median_oracle import (
    all_pairs_distances,
    interval_sum_bruteforce,
    median_of_three_bruteforce,
    verify_cube_free,
    verify_median_graph,
)
from .semigroup import BUILTINS, get_semigroup
from .serialization import load_index, save_index
from .staircase_index import QueryStats
from .visualize import export_html, fiber_figure, scaling_figure

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2

QUERY_ARITY = {"interval": 2, "median3": 3, "distance": 2}


# ============================================================================
# QUERY BATCHES
# ============================================================================

@dataclass(frozen=True)
class QueryRecord:
    """One parsed query line; args are internal vertex ids"""

    kind: str
    args: Tuple[int, ...]
    line: int


def parse_queries(text: str, graph: Graph) -> List[QueryRecord]:
    """
    Parse "interval a b", "median3 a b c" and "distance a b" lines

    Labels are the graph file's labels. Blank lines and "#" comments are
    skipped.

    Raises:
        GraphInputError: Unknown kind, wrong arity or unknown label
    """
    records = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *labels = line.split()
        if kind not in QUERY_ARITY:
            raise GraphInputError(f"unknown query kind {kind!r}", line=no)
        if len(labels) != QUERY_ARITY[kind]:
            raise GraphInputError(f"{kind} takes {QUERY_ARITY[kind]} vertices, got {len(labels)}", line=no)
        try:
            args = tuple(graph.vertex_of(label) for label in labels)
        except GraphInputError as exc:
            raise GraphInputError(str(exc), line=no) from None
        records.append(QueryRecord(kind, args, no))
    return records


def answer(index: RecursiveIntervalIndex, record: QueryRecord) -> int:
    if record.kind == "interval":
        return index.query(*record.args)
    if record.kind == "median3":
        return index.median_of_three(*record.args)
    return index.distance(*record.args)


def oracle_answer(index: RecursiveIntervalIndex, record: QueryRecord, D: np.ndarray) -> int:
    g = index.graph
    if record.kind == "interval":
        return interval_sum_bruteforce(g, index.spec, *record.args, values=index.values, D=D)
    if record.kind == "median3":
        return median_of_three_bruteforce(g, *record.args, D=D)
    u, v = record.args
    return int(D[u, v])


def render(index: RecursiveIntervalIndex, record: QueryRecord, value: int) -> str:
    return index.graph.labels[value] if record.kind == "median3" else str(value)


# ============================================================================
# COMMANDS
# ============================================================================

def _settings(args) -> Settings:
    return Settings.from_env().with_overrides(
        base_size=getattr(args, "base_size", None),
        fingerprint_seed=getattr(args, "fingerprint_seed", None),
        threads=getattr(args, "threads", None),
    )


def _emit(args, data, table: pd.DataFrame) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, default=_json_default))
    else:
        print(table.to_string(index=False))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def cmd_generate(args) -> int:
    mode, payload_seed = parse_payload(args.payload)
    spec = GenSpec(args.family, parse_size(args.size), args.seed, mode, payload_seed)
    settings = _settings(args)
    graph = generate(spec, settings.max_attempts, settings.oracle_limit, force=args.force)
    text = format_graph(graph)
    if args.out:
        Path(args.out).write_text(text)
        logger.info(f"✓ Wrote {graph.n} vertices to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    graph = read_graph(args.graph)
    settings = _settings(args)
    reports = [check(graph, limit=settings.oracle_limit, force=args.force) for check in (verify_median_graph, verify_cube_free)]
    rows = []
    for report in reports:
        row = report.to_dict()
        row["witness"] = [graph.labels[v] for v in report.witness]
        rows.append(row)
    table = pd.DataFrame(rows, columns=["check", "ok", "witness", "message"])
    _emit(args, rows, table)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_MISMATCH


def _checked_build(graph: Graph, args, settings: Settings) -> RecursiveIntervalIndex:
    """Verify (unless trusted) and build"""
    if not args.trust:
        if graph.n > settings.oracle_limit and not args.force:
            raise OracleSizeError(
                f"graph has {graph.n} vertices, above the oracle limit {settings.oracle_limit}; pass --trust or --force"
            )
        for check in (verify_median_graph, verify_cube_free):
            report = check(graph, limit=settings.oracle_limit, force=args.force)
            if not report.ok:
                raise StructureError(report.message, report.witness)
    return build(graph, get_semigroup(args.semigroup), settings)


def cmd_build(args) -> int:
    graph = read_graph(args.graph)
    settings = _settings(args)
    index = _checked_build(graph, args, settings)
    size = save_index(index, args.out)
    stats = index.index_stats()
    if args.plot:
        export_html(fiber_figure(index), args.plot)
    row = {
        "n": graph.n, "levels": stats.levels, "fibers": stats.fibers, "entries": stats.entries,
        "special_entries": stats.special_entries, "segment_entries": stats.segment_entries, "bytes": size,
    }
    _emit(args, row, pd.DataFrame([row]))
    return EXIT_OK


def cmd_query(args) -> int:
    graph = read_graph(args.graph)
    settings = _settings(args)
    if args.index:
        index = load_index(args.index)
        if index.graph.adjacency != graph.adjacency:
            raise PreconditionError(f"index {args.index} was built for a different graph")
    else:
        index = _checked_build(graph, args, settings)

    text = Path(args.queries).read_text() if args.queries else sys.stdin.read()
    records = parse_queries(text, graph)
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        answers = list(pool.map(lambda r: answer(index, r), records))

    mismatches = 0
    if args.check:
        if graph.n > settings.oracle_limit and not args.force:
            raise OracleSizeError(f"--check needs n <= {settings.oracle_limit}, got {graph.n}; pass --force")
        D = all_pairs_distances(graph)
        for record, value in zip(records, answers):
            expected = oracle_answer(index, record, D)
            if expected != value:
                mismatches += 1
                logger.error(f"line {record.line}: {record.kind} answered {value}, oracle says {expected}")

    if args.format == "json":
        rows = [
            {"line": r.line, "kind": r.kind, "args": [graph.labels[v] for v in r.args], "answer": render(index, r, a)}
            for r, a in zip(records, answers)
        ]
        print(json.dumps(rows, indent=2))
    else:
        for record, value in zip(records, answers):
            print(render(index, record, value))
    return EXIT_MISMATCH if mismatches else EXIT_OK


# ============================================================================
# BENCH
# ============================================================================

def bench_spec(family: str, n: int, seed: int) -> GenSpec:
    """Instance of roughly n vertices for a family"""
    if family in ("grid", "staircase_subgrid"):
        rows = 1 << (max(n, 1).bit_length() - 1) // 2
        return GenSpec(family, (rows, max(1, n // rows)), seed)
    if family == "glued":
        side = max(2, math.isqrt(n // 2))
        return GenSpec(family, (side, side, max(1, n - side * side)), seed)
    return GenSpec(family, (n,), seed)


def log2_squared(n, c):
    return c * np.log2(n) ** 2


def fit_log_squared(n: Sequence[float], visits: Sequence[float]) -> Tuple[float, float]:
    """
    Least-squares c for visits ~ c*log2(n)^2

    Returns:
        (c, max measured/fit ratio); NaNs when there is nothing to fit
    """
    n, visits = np.asarray(n, dtype=float), np.asarray(visits, dtype=float)
    keep = (n > 1) & np.isfinite(visits)
    if not keep.any():
        return float("nan"), float("nan")
    (c,), _ = curve_fit(log2_squared, n[keep], visits[keep], p0=[1.0])
    if c <= 0:
        return float(c), float("nan")
    return float(c), float(np.max(visits[keep] / log2_squared(n[keep], c)))


def doubling_ratios(n: Sequence[float], seconds: Sequence[float]) -> np.ndarray:
    """
    Growth of build time per doubling of n between consecutive rows

    NaN for the first row and wherever n did not grow or the previous time
    is zero.
    """
    n, seconds = np.asarray(n, dtype=float), np.asarray(seconds, dtype=float)
    out = np.full(len(n), np.nan)
    for i in range(1, len(n)):
        if n[i] > n[i - 1] > 0 and seconds[i - 1] > 0:
            out[i] = (seconds[i] / seconds[i - 1]) ** (1.0 / math.log2(n[i] / n[i - 1]))
    return out


def run_bench(
    family: str,
    sizes: Sequence[int],
    seed: int = 0,
    trials: int = 1000,
    semigroup: str = "sum",
    check: bool = False,
    settings: Optional[Settings] = None,
) -> pd.DataFrame:
    """
    Build and query timings for a series of sizes

    Returns:
        One row per size: n, build_s, entries, entries_ratio, levels,
        mean_query_us, median_query_us, mean_visits, max_visits, mismatches,
        plus the series columns fit_c, fit_ratio, entries_fit_c and
        entries_fit_ratio (entries ~ c*n*log2(n)^2) and build_ratio, the
        build time growth per doubling from the previous row
    """
    settings = settings or Settings.from_env()
    spec = get_semigroup(semigroup)
    rows = []
    for size in sizes:
        graph = generate(bench_spec(family, size, seed), settings.max_attempts, settings.oracle_limit,
                         trust=size > settings.oracle_limit)
        started = time.perf_counter()
        index = build(graph, spec, settings)
        build_s = time.perf_counter() - started
        stats = index.index_stats()

        rng = np.random.default_rng(seed)
        pairs = rng.integers(0, graph.n, size=(trials, 2))
        D = all_pairs_distances(graph) if check and graph.n <= settings.oracle_limit else None
        if check and D is None:
            logger.warning(f"WARNING: skipping oracle check at n={graph.n}")
        times, visits, mismatches = [], [], 0
        for u, v in pairs.tolist():
            qs = QueryStats()
            started = time.perf_counter()
            value = index.query(u, v, qs)
            times.append((time.perf_counter() - started) * 1e6)
            visits.append(qs.node_visits)
            if D is not None and value != interval_sum_bruteforce(graph, spec, u, v, values=index.values, D=D):
                mismatches += 1

        log_sq = math.log2(graph.n) ** 2 if graph.n > 1 else 1.0
        rows.append({
            "n": graph.n,
            "build_s": build_s,
            "entries": stats.entries,
            "entries_ratio": stats.entries / (graph.n * log_sq),
            "levels": stats.levels,
            "mean_query_us": float(np.mean(times)) if times else float("nan"),
            "median_query_us": float(np.median(times)) if times else float("nan"),
            "mean_visits": float(np.mean(visits)) if visits else float("nan"),
            "max_visits": int(max(visits)) if visits else 0,
            "mismatches": mismatches,
        })
        logger.info(f"✓ n={graph.n}: built in {build_s:.2f}s, {stats.entries} entries")

    report = pd.DataFrame(rows)
    fit_c, fit_ratio = fit_log_squared(report["n"], report["mean_visits"]) if trials else (float("nan"), float("nan"))
    report["fit_c"] = fit_c
    report["fit_ratio"] = fit_ratio
    report["build_ratio"] = doubling_ratios(report["n"], report["build_s"])
    entries_c, entries_ratio = fit_log_squared(report["n"], report["entries"] / report["n"])
    report["entries_fit_c"] = entries_c
    report["entries_fit_ratio"] = entries_ratio
    return report


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    if sizes != sorted(sizes):
        raise PreconditionError(f"sizes must be ascending, got {args.sizes}")
    report = run_bench(args.family, sizes, args.seed, args.trials, args.semigroup, args.check, _settings(args))
    if args.plot:
        export_html(scaling_figure(report), args.plot)
    _emit(args, report.to_dict(orient="records"), report)
    return EXIT_MISMATCH if report["mismatches"].sum() else EXIT_OK


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="median_intervals", description="Interval queries on cube-free median graphs")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress (INFO)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        if fmt:
            p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("--force", action="store_true", help="run the oracle above its size guard")
        return p

    def building(p):
        p.add_argument("--semigroup", choices=sorted(BUILTINS), default="sum")
        p.add_argument("--base-size", type=int, default=None)
        p.add_argument("--fingerprint-seed", type=int, default=None)
        p.add_argument("--trust", action="store_true", help="skip input verification")
        return p

    p = common(sub.add_parser("generate", help="write a generated instance"), fmt=False)
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--size", required=True, help="e.g. 200, 4x4 or 6x6x10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--payload", default="none", help="none|ones|ids|random(SEED)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("verify", help="median and cube-free checks"))
    p.add_argument("graph")
    p.set_defaults(func=cmd_verify)

    p = building(common(sub.add_parser("build", help="build and save an index")))
    p.add_argument("graph")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", default=None, help="write the fiber drawing as HTML")
    p.set_defaults(func=cmd_build)

    p = building(common(sub.add_parser("query", help="answer a query batch")))
    p.add_argument("graph")
    p.add_argument("--index", default=None, help="saved index (built on the fly when omitted)")
    p.add_argument("--queries", default=None, help="query file (stdin when omitted)")
    p.add_argument("--check", action="store_true", help="compare every answer with the oracle")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_query)

    p = common(sub.add_parser("bench", help="scaling report"))
    p.add_argument("--family", choices=FAMILIES, default="grid")
    p.add_argument("--sizes", default="128,256,512,1024")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--semigroup", choices=sorted(BUILTINS), default="sum")
    p.add_argument("--base-size", type=int, default=None)
    p.add_argument("--check", action="store_true")
    p.add_argument("--plot", default=None, help="write the scaling plot as HTML")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (GraphInputError, PreconditionError, SerializationError, OracleSizeError, GenerationError, StructureError) as exc:
        logger.error(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        logger.error(f"{exc.filename}: {exc.strerror}")
        return EXIT_INPUT
