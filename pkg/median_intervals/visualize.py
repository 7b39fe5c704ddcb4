"""
Median Intervals - Visualization
================================

Kamada-Kawai drawings of an index's top level and bench scaling plots.

This module provides:
1. fiber_figure: vertices coloured by fiber, gated-tree edges highlighted,
   the median marked
2. scaling_figure: measured node visits against the fitted c*log2(n)^2 curve
3. export_html: write a figure as a standalone HTML file

Usage:
    fig = fiber_figure(index)
    export_html(fig, "fibers.html")
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
import plotly.graph_objects as go

from .interval_engine import RecursiveIntervalIndex

logger = logging.getLogger(__name__)

FIBER_COLORS = [
    '#FF6B6B', '#4ECDC4', '#45B7D1', '#FFA07A', '#98D8C8',
    '#F7DC6F', '#BB8FCE', '#85C1E2', '#F8B739',
]

DARK_LAYOUT = dict(
    plot_bgcolor='#0a0a0a',
    paper_bgcolor='#1a1a1a',
    font=dict(color='white'),
    legend=dict(x=1.02, y=1, bgcolor='rgba(42, 42, 42, 0.8)', bordercolor='white', borderwidth=1),
    margin=dict(b=20, l=20, r=20, t=60),
)


def layout_positions(index: RecursiveIntervalIndex, scale: float = 60) -> Dict[int, Tuple[float, float]]:
    """Kamada-Kawai positions, so that hop distance reads as visual distance"""
    graph = index.graph.to_networkx()
    if graph.number_of_nodes() == 1:
        return {0: (0.0, 0.0)}
    logger.info(f"Calculating layout using Kamada-Kawai (scale={scale})...")
    pos = nx.kamada_kawai_layout(graph, scale=scale)
    return {v: (float(x), float(y)) for v, (x, y) in pos.items()}


def _edge_trace(edges: List[Tuple[int, int]], pos, name: str, color: str, width: float) -> go.Scatter:
    xs, ys = [], []
    for a, b in edges:
        xs += [pos[a][0], pos[b][0], None]
        ys += [pos[a][1], pos[b][1], None]
    return go.Scatter(x=xs, y=ys, mode='lines', name=name, line=dict(color=color, width=width), hoverinfo='skip')


def fiber_figure(
    index: RecursiveIntervalIndex,
    pos: Optional[Dict[int, Tuple[float, float]]] = None,
    title: str = "Fibers of the median star",
) -> go.Figure:
    """
    Draw the top recursion level

    Args:
        index: Built index (a base-case index shows a single colour)
        pos: Precomputed positions (Kamada-Kawai when omitted)
        title: Figure title

    Returns:
        Plotly Figure
    """
    g = index.graph
    pos = pos or layout_positions(index)
    traces = [_edge_trace(g.edges(), pos, "edges", 'rgba(150, 150, 150, 0.5)', 1)]

    if index.is_base:
        groups = {None: list(range(g.n))}
    else:
        groups = {x: list(F.members) for x, F in index.fibers.items()}
        tree_edges = [
            (v, p) for F in index.fibers.values() for v, p in F.tree.parent.items() if p is not None
        ]
        traces.append(_edge_trace(tree_edges, pos, "gated trees", 'white', 3))

    for i, (x, members) in enumerate(sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0]))):
        name = "base case" if x is None else f"F({g.labels[x]})"
        traces.append(go.Scatter(
            x=[pos[v][0] for v in members],
            y=[pos[v][1] for v in members],
            mode='markers+text' if g.n <= 100 else 'markers',
            name=name,
            text=[g.labels[v] for v in members],
            textposition='top center',
            marker=dict(size=10, color=FIBER_COLORS[i % len(FIBER_COLORS)], line=dict(width=1, color='white')),
            hovertext=[f"{g.labels[v]} payload={g.payload[v]}" for v in members],
            hoverinfo='text',
        ))

    if not index.is_base:
        m = index.m
        traces.append(go.Scatter(
            x=[pos[m][0]], y=[pos[m][1]], mode='markers', name=f"median {g.labels[m]}",
            marker=dict(size=18, symbol='star', color='#FFD700', line=dict(width=2, color='white')),
        ))

    fig = go.Figure(data=traces)
    fig.update_layout(
        title=dict(text=title, font=dict(size=20, color='white'), x=0.5, xanchor='center'),
        showlegend=True,
        hovermode='closest',
        xaxis=dict(showgrid=False, zeroline=False, showticklabels=False),
        yaxis=dict(showgrid=False, zeroline=False, showticklabels=False, scaleanchor="x", scaleratio=1),
        height=800,
        width=1000,
        **DARK_LAYOUT,
    )
    logger.info("✓ Plotly figure created")
    return fig


def scaling_figure(report: pd.DataFrame, title: str = "Query node visits") -> go.Figure:
    """
    Measured mean node visits per size against c*log2(n)^2

    Args:
        report: Bench rows with columns n, mean_visits, fit_c
    """
    n = report["n"].to_numpy(dtype=float)
    fit_c = float(report["fit_c"].iloc[0]) if len(report) else 0.0
    grid = np.linspace(n.min(), n.max(), 200) if len(n) else np.array([])
    fig = go.Figure([
        go.Scatter(x=n, y=report["mean_visits"], mode='markers+lines', name="measured",
                   marker=dict(size=9, color='#4ECDC4')),
        go.Scatter(x=grid, y=fit_c * np.log2(grid) ** 2, mode='lines', name=f"{fit_c:.2f}·log₂²n",
                   line=dict(color='#FF6B6B', dash='dash')),
    ])
    fig.update_layout(
        title=dict(text=title, font=dict(size=20, color='white'), x=0.5, xanchor='center'),
        xaxis=dict(title="n", type='log', gridcolor='rgba(100, 100, 100, 0.3)'),
        yaxis=dict(title="segment-node visits per query", gridcolor='rgba(100, 100, 100, 0.3)'),
        height=600,
        width=900,
        **DARK_LAYOUT,
    )
    return fig


def export_html(fig: go.Figure, filename: Union[str, Path]) -> None:
    """Write a standalone HTML file"""
    fig.write_html(str(filename), include_plotlyjs=True, full_html=True)
    logger.info(f"✓ Exported to {filename}")
