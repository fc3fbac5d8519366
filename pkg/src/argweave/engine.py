"""Template dispatch and the graph generation loop.

Generation repeatedly applies extension templates to a graph until no
(vertex, template) pair with a positive matching score remains. Applying
each pair at most once per run is what guarantees termination: a center's
label is always rewritten on application, so without the applied record a
matching template would fire forever.

Scheduling is deterministic: vertices are processed in insertion order
with a FIFO frontier of newly added vertices; among applicable templates
the highest score wins, ties broken by ascending template id.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .graph import (
    ArgumentGraph,
    Aggregator,
    Label,
    Vertex,
    VertexKind,
    apply_extension,
)
from .models import Environment
from .templates import BUILTIN_TEMPLATES, STAGE_TEMPLATE_IDS, ExtensionTemplate

# (vertex id, template id) pairs already applied in the current run.
AppliedRecord = set[tuple[str, str]]


class EngineError(Exception):
    """Base class for generation-loop failures."""


class NonTerminationError(EngineError):
    def __init__(self, ceiling: int, vertex_id: str, template_id: str):
        super().__init__(
            f"generation exceeded the application ceiling of {ceiling};"
            f" last application was template {template_id} on vertex {vertex_id}."
            " A user-supplied template is probably re-matching its own output."
        )
        self.ceiling = ceiling


class UnknownWorkflowError(EngineError):
    def __init__(self, subject: str, known: str):
        super().__init__(
            f"goal subject {subject!r} does not name the loaded workflow ({known!r})"
        )


class EmptyWorkflowError(EngineError):
    def __init__(self, workflow_id: str):
        super().__init__(f"workflow {workflow_id!r} has no steps; nothing to assess")


class TemplateSet:
    """An ordered set of templates with unique ids (one stage's rule set)."""

    def __init__(self, templates: Iterable[ExtensionTemplate], name: str = ""):
        self.name = name
        self.templates: list[ExtensionTemplate] = list(templates)
        seen: set[str] = set()
        for t in self.templates:
            if t.template_id in seen:
                raise ValueError(f"duplicate template id {t.template_id!r} in set")
            seen.add(t.template_id)

    def __iter__(self) -> Iterator[ExtensionTemplate]:
        return iter(self.templates)

    def __len__(self) -> int:
        return len(self.templates)


@dataclass
class ApplicationEvent:
    """One template application, recorded for tracing and provenance checks."""

    vertex_id: str
    template_id: str
    score: float


def match_templates(
    vertex: Vertex,
    templates: TemplateSet | Iterable[ExtensionTemplate],
    env: Environment,
    applied: AppliedRecord,
) -> list[tuple[ExtensionTemplate, float]]:
    """All templates applicable to a vertex, minus already-applied pairs.

    Sorted by descending score, then ascending template id.
    """
    matches = []
    for template in templates:
        if (vertex.id, template.template_id) in applied:
            continue
        score = template.match(vertex, env)
        if score < 0:
            raise EngineError(
                f"template {template.template_id} returned negative score {score}"
            )
        if score > 0:
            matches.append((template, score))
    matches.sort(key=lambda pair: (-pair[1], pair[0].template_id))
    return matches


def generate_graph(
    graph: ArgumentGraph,
    templates: TemplateSet | Iterable[ExtensionTemplate],
    env: Environment,
    max_applications: Optional[int] = None,
    trace: Optional[list[ApplicationEvent]] = None,
) -> ArgumentGraph:
    """Run one stage to fixpoint and return the extended graph.

    The input graph is not mutated. On return, no vertex of the result has
    an applicable, unapplied template left.
    """
    if not isinstance(templates, TemplateSet):
        templates = TemplateSet(templates)
    ceiling = max_applications if max_applications is not None else env.config.max_applications
    current = graph.copy()
    applied: AppliedRecord = set()
    frontier = list(current.vertex_ids())
    cursor = 0
    applications = 0
    while cursor < len(frontier):
        vid = frontier[cursor]
        cursor += 1
        while True:
            matches = match_templates(current.vertex(vid), templates, env, applied)
            if not matches:
                break
            template, score = matches[0]
            extension = template.generate(current.vertex(vid), env)
            new_ids = [w.id for w in extension.star.vertices() if w.id not in current]
            current = apply_extension(current, extension)
            applied.add((vid, template.template_id))
            applications += 1
            if trace is not None:
                trace.append(ApplicationEvent(vid, template.template_id, score))
            frontier.extend(new_ids)
            if applications > ceiling:
                raise NonTerminationError(ceiling, vid, template.template_id)
    return current


@dataclass
class PipelineResult:
    g: ArgumentGraph
    gs: ArgumentGraph
    gsa: ArgumentGraph
    elapsed_seconds: float = 0.0
    trace: list[ApplicationEvent] = field(default_factory=list)

    def stage(self, name: str) -> ArgumentGraph:
        return {"g": self.g, "gs": self.gs, "gsa": self.gsa}[name]


def stage_template_set(stage: str, env: Environment) -> TemplateSet:
    """The built-in templates of a stage, filtered by the run configuration."""
    ids = [tid for tid in STAGE_TEMPLATE_IDS[stage] if env.config.template_enabled(tid)]
    return TemplateSet([BUILTIN_TEMPLATES[tid] for tid in ids], name=stage)


def initial_graph(goal: Vertex) -> ArgumentGraph:
    graph = ArgumentGraph()
    graph.add_vertex(goal, Label(Aggregator.AND, provenance="input"))
    return graph


def run_pipeline(goal: Vertex, env: Environment) -> PipelineResult:
    """Grow the three stage graphs: goal, goal+system, goal+system+attacker."""
    if goal.kind is not VertexKind.GOAL:
        raise EngineError(f"pipeline goal must be a Goal vertex, got {goal.kind.value}")
    if goal.attrs["subject"] != env.workflow.workflow_id:
        raise UnknownWorkflowError(goal.attrs["subject"], env.workflow.workflow_id)
    if not env.workflow.steps:
        raise EmptyWorkflowError(env.workflow.workflow_id)

    trace: list[ApplicationEvent] = []
    start = time.perf_counter()
    g = generate_graph(initial_graph(goal), stage_template_set("g", env), env, trace=trace)
    gs = generate_graph(g, stage_template_set("gs", env), env, trace=trace)
    gsa = generate_graph(gs, stage_template_set("gsa", env), env, trace=trace)
    elapsed = time.perf_counter() - start
    for name, stage_graph in (("g", g), ("gs", gs), ("gsa", gsa)):
        if not stage_graph.is_acyclic():
            raise EngineError(f"stage {name} produced a cyclic graph (template defect)")
    return PipelineResult(g=g, gs=gs, gsa=gsa, elapsed_seconds=elapsed, trace=trace)
