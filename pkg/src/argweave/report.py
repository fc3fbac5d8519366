"""Assessment report: per-vertex values as CSV plus summary figures.

The report never draws the graph itself (structure goes out as DOT for
external viewers); the figures summarize stage growth and the evaluated
value distribution so a reviewer can spot weak dependencies quickly.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import PipelineResult
from .evaluation import EvaluationResult
from .fileio import write_atomic
from .graph import ArgumentGraph


def values_csv(graph: ArgumentGraph, result: EvaluationResult) -> bytes:
    """One row per vertex: id, kind, attributes, evaluated value. Sorted by id."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["vertex_id", "kind", "attributes", "value"])
    for vertex in sorted(graph.vertices(), key=lambda v: v.id):
        attr_text = ";".join(f"{k}={v}" for k, v in sorted(vertex.attrs.items()))
        writer.writerow(
            [vertex.id, vertex.kind.value, attr_text, f"{result.values[vertex.id]:.12g}"]
        )
    return buffer.getvalue().encode("utf-8")


def stage_growth_figure(pipeline: PipelineResult, path: Path) -> None:
    """Grouped bars: vertex and edge counts after each generation stage."""
    stages = ["g", "gs", "gsa"]
    vertex_counts = [pipeline.stage(s).vertex_count for s in stages]
    edge_counts = [pipeline.stage(s).edge_count for s in stages]
    x = range(len(stages))
    width = 0.38

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([i - width / 2 for i in x], vertex_counts, width, label="vertices", color="#3a6ea5")
    ax.bar([i + width / 2 for i in x], edge_counts, width, label="edges", color="#c0504d")
    for i, (v, e) in enumerate(zip(vertex_counts, edge_counts)):
        ax.text(i - width / 2, v, str(v), ha="center", va="bottom", fontsize=9)
        ax.text(i + width / 2, e, str(e), ha="center", va="bottom", fontsize=9)
    ax.set_xticks(list(x))
    ax.set_xticklabels([s.upper() for s in stages])
    ax.set_ylabel("count")
    ax.set_title("Argument graph growth by stage")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def value_summary_figure(
    graph: ArgumentGraph, result: EvaluationResult, path: Path, worst: int = 12
) -> None:
    """Horizontal bars for the lowest-valued vertices, the weak points."""
    ranked = sorted(
        ((result.values[v.id], v) for v in graph.vertices()),
        key=lambda pair: (pair[0], pair[1].id),
    )[:worst]
    names = [
        f"{v.kind.value}: " + ", ".join(f"{val}" for val in sorted(v.attrs.values()))
        for _, v in ranked
    ]
    values = [value for value, _ in ranked]

    fig, ax = plt.subplots(figsize=(8, 0.45 * max(len(ranked), 4) + 1.2))
    bars = ax.barh(range(len(ranked)), values, color="#d08770")
    ax.set_yticks(range(len(ranked)))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("evaluated availability / capability")
    goal = result.goal_value(graph)
    title = "Lowest-valued vertices"
    if goal is not None:
        title += f" (goal value {goal:.6f})"
    ax.set_title(title)
    for bar, value in zip(bars, values):
        ax.text(value, bar.get_y() + bar.get_height() / 2, f" {value:.4f}", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(
    out_dir: Path,
    pipeline: PipelineResult,
    graph: ArgumentGraph,
    result: EvaluationResult,
) -> list[Path]:
    """Write values.csv plus the two summary figures; returns the paths written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "values.csv"
    write_atomic(csv_path, values_csv(graph, result))
    growth_path = out_dir / "stage_growth.png"
    stage_growth_figure(pipeline, growth_path)
    summary_path = out_dir / "weak_points.png"
    value_summary_figure(graph, result, summary_path)
    return [csv_path, growth_path, summary_path]
