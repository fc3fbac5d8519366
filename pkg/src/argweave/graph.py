"""Core argument-graph data model.

A security argument graph is a directed graph of typed vertices. Each
vertex carries immutable static attributes that define its identity, and
a mutable label (aggregation semantics, optional prior probability,
provenance of the rule that last wrote it). Edges point from a
prerequisite to the vertex that depends on it.

Graphs grow by applying *local extensions*: a matched center vertex plus
a star of prerequisite vertices, merged by set union with a fixed
label-merge rule (the center and genuinely new vertices take the star's
labels; everything else keeps its old label).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional


class GraphError(Exception):
    """Base class for argument-graph errors."""


class MissingAttributeError(GraphError):
    def __init__(self, kind: "VertexKind", key: str):
        super().__init__(f"{kind.value} vertex is missing required attribute {key!r}")
        self.key = key


class UnknownAttributeError(GraphError):
    def __init__(self, kind: "VertexKind", key: str):
        super().__init__(f"{kind.value} vertex does not accept attribute {key!r}")
        self.key = key


class StarInvalidError(GraphError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid star extension: " + "; ".join(violations))
        self.violations = violations


class CenterNotInGraphError(GraphError):
    def __init__(self, center_id: str):
        super().__init__(f"extension center {center_id} is not a vertex of the graph")
        self.center_id = center_id


class CycleError(GraphError):
    def __init__(self, remaining: Iterable[str]):
        ids = sorted(remaining)
        super().__init__(f"graph contains a cycle through {len(ids)} vertices: {ids[:5]}")
        self.vertex_ids = ids


class GraphFormatError(GraphError):
    """Raised when a serialized graph cannot be parsed back."""


class VertexKind(str, Enum):
    GOAL = "Goal"
    ACTION_AVAILABILITY = "ActionAvailability"
    ACTOR_AVAILABILITY = "ActorAvailability"
    MESSAGE_AVAILABILITY = "MessageAvailability"
    COMPONENT_AVAILABILITY = "ComponentAvailability"
    ATTACK_STEP = "AttackStep"
    ATTACKER_PROPERTY = "AttackerProperty"


# Exact attribute key set each kind must carry; identity is derived from these.
REQUIRED_ATTRS: dict[VertexKind, frozenset[str]] = {
    VertexKind.GOAL: frozenset({"property", "subject"}),
    VertexKind.ACTION_AVAILABILITY: frozenset({"action", "actor", "step_id"}),
    VertexKind.ACTOR_AVAILABILITY: frozenset({"actor"}),
    VertexKind.MESSAGE_AVAILABILITY: frozenset({"message", "sender", "receiver"}),
    VertexKind.COMPONENT_AVAILABILITY: frozenset({"device", "component_type", "component"}),
    VertexKind.ATTACK_STEP: frozenset({"attack", "device"}),
    VertexKind.ATTACKER_PROPERTY: frozenset({"property"}),
}


class Aggregator(str, Enum):
    AND = "AND"
    OR = "OR"
    ATTACK_DISCOUNT = "ATTACK_DISCOUNT"


@dataclass(frozen=True)
class Vertex:
    """A typed vertex. Kind and attrs are fixed at creation; id derives from them."""

    kind: VertexKind
    attrs: Mapping[str, str]
    id: str

    def __repr__(self) -> str:
        pairs = ", ".join(f"{k}={v!r}" for k, v in sorted(self.attrs.items()))
        return f"Vertex({self.kind.value}, {pairs})"


@dataclass
class Label:
    """The mutable side of a vertex: aggregation rule, optional prior, provenance."""

    aggregator: Aggregator = Aggregator.AND
    prior: Optional[float] = None
    provenance: str = "input"
    notes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.prior is not None and not (0.0 <= self.prior <= 1.0):
            raise ValueError(f"label prior must lie in [0, 1], got {self.prior}")

    def copy(self) -> "Label":
        return Label(self.aggregator, self.prior, self.provenance, dict(self.notes))


# An edge is the pair (prerequisite id, dependent id).
Edge = tuple[str, str]


def vertex_id(kind: VertexKind, attrs: Mapping[str, str]) -> str:
    """Deterministic content id: stable hash of kind + sorted attributes.

    Equal static data yields equal ids in any process, so merging
    identical vertices during extension application is automatic.
    """
    canonical = json.dumps([kind.value, sorted(attrs.items())], separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
    return f"{kind.value}:{digest}"


def make_vertex(kind: VertexKind, attrs: Mapping[str, str]) -> Vertex:
    """Create a vertex, checking the exact attribute key set for the kind."""
    required = REQUIRED_ATTRS[kind]
    for key in required:
        if key not in attrs:
            raise MissingAttributeError(kind, key)
    for key, value in attrs.items():
        if key not in required:
            raise UnknownAttributeError(kind, key)
        if not isinstance(value, str):
            raise ValueError(f"attribute {key!r} must be a string, got {type(value).__name__}")
    frozen = MappingProxyType(dict(attrs))
    return Vertex(kind=kind, attrs=frozen, id=vertex_id(kind, attrs))


class ArgumentGraph:
    """Vertices keyed by id (insertion order preserved), edges, labels.

    Mutating methods are for builders that exclusively own the instance;
    pipeline operations treat graphs as values and return new ones.
    """

    def __init__(self) -> None:
        self._vertices: dict[str, Vertex] = {}
        self._labels: dict[str, Label] = {}
        self._edges: dict[Edge, None] = {}

    # -- construction -------------------------------------------------

    def add_vertex(self, vertex: Vertex, label: Label) -> None:
        if vertex.id in self._vertices:
            raise ValueError(f"vertex {vertex.id} already present")
        self._vertices[vertex.id] = vertex
        self._labels[vertex.id] = label

    def add_edge(self, source_id: str, target_id: str) -> None:
        if source_id not in self._vertices:
            raise ValueError(f"edge source {source_id} is not a vertex")
        if target_id not in self._vertices:
            raise ValueError(f"edge target {target_id} is not a vertex")
        if source_id == target_id:
            raise ValueError(f"self-loop on {source_id} is not allowed")
        self._edges.setdefault((source_id, target_id))

    def set_label(self, vertex_id: str, label: Label) -> None:
        if vertex_id not in self._vertices:
            raise ValueError(f"no vertex {vertex_id}")
        self._labels[vertex_id] = label

    def copy(self) -> "ArgumentGraph":
        dup = ArgumentGraph()
        dup._vertices = dict(self._vertices)
        dup._labels = {vid: lab.copy() for vid, lab in self._labels.items()}
        dup._edges = dict(self._edges)
        return dup

    # -- access -------------------------------------------------------

    def __contains__(self, vertex_id: str) -> bool:
        return vertex_id in self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    def vertex(self, vertex_id: str) -> Vertex:
        return self._vertices[vertex_id]

    def label(self, vertex_id: str) -> Label:
        return self._labels[vertex_id]

    def vertices(self) -> Iterator[Vertex]:
        return iter(self._vertices.values())

    def vertex_ids(self) -> Iterator[str]:
        return iter(self._vertices.keys())

    def edges(self) -> Iterator[Edge]:
        return iter(self._edges.keys())

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def predecessors(self, vertex_id: str) -> list[str]:
        """Prerequisites of a vertex: sources of its incoming edges."""
        return [s for (s, t) in self._edges if t == vertex_id]

    def successors(self, vertex_id: str) -> list[str]:
        return [t for (s, t) in self._edges if s == vertex_id]

    def vertices_of_kind(self, kind: VertexKind) -> list[Vertex]:
        return [v for v in self._vertices.values() if v.kind == kind]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArgumentGraph):
            return NotImplemented
        if set(self._edges) != set(other._edges):
            return False
        if set(self._vertices) != set(other._vertices):
            return False
        for vid, vertex in self._vertices.items():
            theirs = other._vertices[vid]
            if vertex.kind != theirs.kind or dict(vertex.attrs) != dict(theirs.attrs):
                return False
            a, b = self._labels[vid], other._labels[vid]
            if (a.aggregator, a.prior, a.provenance, a.notes) != (
                b.aggregator,
                b.prior,
                b.provenance,
                b.notes,
            ):
                return False
        return True

    def topological_order(self) -> list[str]:
        """Kahn's algorithm over prerequisite -> dependent edges.

        Ties resolve by insertion order, but any valid order gives the
        same evaluation results. Raises CycleError on cyclic graphs.
        """
        indegree = {vid: 0 for vid in self._vertices}
        for _, target in self._edges:
            indegree[target] += 1
        queue = [vid for vid in self._vertices if indegree[vid] == 0]
        order: list[str] = []
        while queue:
            vid = queue.pop(0)
            order.append(vid)
            for succ in self.successors(vid):
                indegree[succ] -= 1
                if indegree[succ] == 0:
                    queue.append(succ)
        if len(order) != len(self._vertices):
            raise CycleError(set(self._vertices) - set(order))
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except CycleError:
            return False
        return True


@dataclass
class LocalExtension:
    """A matched center vertex plus the star of prerequisites to merge in."""

    center: Vertex
    star: ArgumentGraph


def make_extension(
    center: Vertex,
    center_label: Label,
    prerequisites: list[tuple[Vertex, Label]],
) -> LocalExtension:
    """Build a canonical star: every prerequisite gets one edge toward center."""
    star = ArgumentGraph()
    star.add_vertex(center, center_label)
    for vertex, label in prerequisites:
        if vertex.id not in star:
            star.add_vertex(vertex, label)
        star.add_edge(vertex.id, center.id)
    return LocalExtension(center=center, star=star)


def validate_star(ext: LocalExtension) -> list[str]:
    """Check star shape. Returns a report of violations; empty means valid.

    A valid star contains the center plus at least one additional vertex,
    and its only edges run from each additional vertex to the center.
    """
    violations: list[str] = []
    star = ext.star
    center_id = ext.center.id
    if center_id not in star:
        violations.append(f"center {center_id} is absent from the star graph")
        return violations
    additional = [vid for vid in star.vertex_ids() if vid != center_id]
    if not additional:
        violations.append("at least one additional vertex is required")
    allowed = {(vid, center_id) for vid in additional}
    for edge in star.edges():
        if edge not in allowed:
            violations.append(f"extra edge {edge[0]} -> {edge[1]}")
    present = set(star.edges())
    for vid in additional:
        if (vid, center_id) not in present:
            violations.append(f"vertex {vid} has no edge toward the center")
    return violations


def apply_extension(graph: ArgumentGraph, ext: LocalExtension) -> ArgumentGraph:
    """Merge a local extension into a graph, returning a new graph.

    Vertices and edges combine by set union. Labels: the center and any
    star vertex not already present take the star's label; vertices that
    were already in the graph keep their old labels.
    """
    violations = validate_star(ext)
    if violations:
        raise StarInvalidError(violations)
    if ext.center.id not in graph:
        raise CenterNotInGraphError(ext.center.id)

    result = graph.copy()
    for vertex in ext.star.vertices():
        if vertex.id not in result:
            result.add_vertex(vertex, ext.star.label(vertex.id).copy())
    result.set_label(ext.center.id, ext.star.label(ext.center.id).copy())
    for source, target in ext.star.edges():
        result.add_edge(source, target)
    return result


# -- serialization ----------------------------------------------------

DOT_SHAPES: dict[VertexKind, str] = {
    VertexKind.GOAL: "doubleoctagon",
    VertexKind.ACTION_AVAILABILITY: "box",
    VertexKind.ACTOR_AVAILABILITY: "ellipse",
    VertexKind.MESSAGE_AVAILABILITY: "parallelogram",
    VertexKind.COMPONENT_AVAILABILITY: "box3d",
    VertexKind.ATTACK_STEP: "octagon",
    VertexKind.ATTACKER_PROPERTY: "diamond",
}


def _label_payload(label: Label) -> dict:
    payload: dict = {"aggregator": label.aggregator.value, "provenance": label.provenance}
    if label.prior is not None:
        payload["prior"] = label.prior
    if label.notes:
        payload["notes"] = dict(label.notes)
    return payload


def to_canonical_json(graph: ArgumentGraph) -> bytes:
    """Canonical serialization: vertices sorted by id, edges by (source, target).

    Structurally equal graphs serialize to byte-identical output
    regardless of insertion order.
    """
    vertices = [
        {
            "id": vertex.id,
            "kind": vertex.kind.value,
            "attrs": dict(vertex.attrs),
            "label": _label_payload(graph.label(vertex.id)),
        }
        for vertex in sorted(graph.vertices(), key=lambda v: v.id)
    ]
    edges = [
        {"source": s, "target": t} for (s, t) in sorted(graph.edges())
    ]
    text = json.dumps({"vertices": vertices, "edges": edges}, indent=2, sort_keys=True)
    return (text + "\n").encode("utf-8")


def from_canonical_json(data: bytes | str) -> ArgumentGraph:
    """Parse a graph serialized by to_canonical_json."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise GraphFormatError("expected an object with 'vertices' and 'edges'")
    graph = ArgumentGraph()
    for entry in doc["vertices"]:
        try:
            kind = VertexKind(entry["kind"])
        except (ValueError, KeyError, TypeError):
            raise GraphFormatError(f"unknown vertex kind in {entry!r}") from None
        vertex = make_vertex(kind, entry.get("attrs", {}))
        raw = entry.get("label", {})
        try:
            aggregator = Aggregator(raw.get("aggregator", "AND"))
        except ValueError:
            raise GraphFormatError(f"unknown aggregator {raw.get('aggregator')!r}") from None
        label = Label(
            aggregator=aggregator,
            prior=raw.get("prior"),
            provenance=raw.get("provenance", "input"),
            notes=dict(raw.get("notes", {})),
        )
        if "id" in entry and entry["id"] != vertex.id:
            raise GraphFormatError(
                f"vertex id {entry['id']} does not match its static data (expected {vertex.id})"
            )
        graph.add_vertex(vertex, label)
    for entry in doc["edges"]:
        try:
            graph.add_edge(entry["source"], entry["target"])
        except (KeyError, TypeError):
            raise GraphFormatError(f"malformed edge entry {entry!r}") from None
        except ValueError as exc:
            raise GraphFormatError(str(exc)) from None
    return graph


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(graph: ArgumentGraph) -> str:
    """Render as Graphviz DOT, arrows pointing prerequisite -> dependent."""
    lines = ["digraph argument_graph {", "  rankdir=BT;", "  node [fontsize=10];"]
    for vertex in sorted(graph.vertices(), key=lambda v: v.id):
        attr_text = "\\n".join(
            f"{key}={_dot_escape(value)}" for key, value in sorted(vertex.attrs.items())
        )
        shape = DOT_SHAPES[vertex.kind]
        lines.append(
            f'  "{_dot_escape(vertex.id)}" [shape={shape}, '
            f'label="{vertex.kind.value}\\n{attr_text}"];'
        )
    for source, target in sorted(graph.edges()):
        lines.append(f'  "{_dot_escape(source)}" -> "{_dot_escape(target)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(graph: ArgumentGraph, fmt: str) -> bytes:
    """Serialize a graph as 'json' (canonical) or 'dot'."""
    if fmt == "json":
        return to_canonical_json(graph)
    if fmt == "dot":
        return to_dot(graph).encode("utf-8")
    raise ValueError(f"unknown export format {fmt!r} (expected 'json' or 'dot')")
