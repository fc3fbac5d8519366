"""Quantitative propagation over a completed argument graph.

Values flow along prerequisite -> dependent edges in topological order,
treating predecessors as independent:

  * support leaves (component / actor / message / action availability)
    take an override, else their label prior, else 1.0;
  * attacker properties take an override, else their label prior, else 0;
  * an attack step multiplies its stored success probability by the
    product of its prerequisite values;
  * AND combines non-attack predecessors by product, OR by the complement
    of the product of complements;
  * the attack-discount rule scales the AND-combined support side by
    (1 - value) for every incoming attack step.

These rules are this tool's own construction: they are deliberately the
simplest semantics with the right monotonicity (more attacker capability
never raises the goal value, stronger supports never lower it).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod
from typing import Mapping, Optional

from .graph import Aggregator, ArgumentGraph, CycleError, VertexKind

SUPPORT_DEFAULT = 1.0  # a support leaf is perfect unless stated otherwise
ATTACKER_DEFAULT = 0.0  # the attacker is incapable unless stated otherwise


class EvaluationError(Exception):
    pass


class CyclicGraphError(EvaluationError):
    def __init__(self, cause: CycleError):
        super().__init__(f"cannot evaluate a cyclic graph: {cause}")


class OverrideOutOfRangeError(EvaluationError):
    def __init__(self, vertex_id: str, value: float):
        super().__init__(f"override for {vertex_id} must lie in [0, 1], got {value}")


@dataclass
class EvaluationResult:
    values: dict[str, float]
    order: list[str]
    warnings: list[str] = field(default_factory=list)

    def goal_value(self, graph: ArgumentGraph) -> Optional[float]:
        goals = graph.vertices_of_kind(VertexKind.GOAL)
        if len(goals) != 1:
            return None
        return self.values[goals[0].id]

    def to_json(self) -> bytes:
        payload = {
            "values": {vid: value for vid, value in sorted(self.values.items())},
            "warnings": list(self.warnings),
        }
        return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _leaf_base(graph: ArgumentGraph, vid: str, overrides: Mapping[str, float]) -> float:
    vertex = graph.vertex(vid)
    default = (
        ATTACKER_DEFAULT if vertex.kind is VertexKind.ATTACKER_PROPERTY else SUPPORT_DEFAULT
    )
    if vid in overrides:
        return overrides[vid]
    prior = graph.label(vid).prior
    return prior if prior is not None else default


def evaluate(
    graph: ArgumentGraph,
    overrides: Optional[Mapping[str, float]] = None,
) -> EvaluationResult:
    """Compute a probability for every vertex; see the module docstring for rules."""
    overrides = dict(overrides or {})
    for vid, value in overrides.items():
        if not 0.0 <= value <= 1.0:
            raise OverrideOutOfRangeError(vid, value)

    warnings: list[str] = []
    for vid in list(overrides):
        if vid not in graph:
            warnings.append(f"override for unknown vertex {vid} ignored")
            del overrides[vid]
            continue
        # a vertex stays overridable while attacks are its only predecessors
        support = [
            p
            for p in graph.predecessors(vid)
            if graph.vertex(p).kind is not VertexKind.ATTACK_STEP
        ]
        if support or graph.vertex(vid).kind is VertexKind.ATTACK_STEP:
            warnings.append(f"override for non-leaf vertex {vid} ignored")
            del overrides[vid]

    try:
        order = graph.topological_order()
    except CycleError as exc:
        raise CyclicGraphError(exc) from None

    values: dict[str, float] = {}
    for vid in order:
        vertex = graph.vertex(vid)
        label = graph.label(vid)
        preds = graph.predecessors(vid)
        attack_preds = [p for p in preds if graph.vertex(p).kind is VertexKind.ATTACK_STEP]
        support_preds = [p for p in preds if graph.vertex(p).kind is not VertexKind.ATTACK_STEP]

        if vertex.kind is VertexKind.ATTACK_STEP:
            success = label.prior
            if success is None:
                warnings.append(
                    f"attack step {vid} has no stored success probability; assuming 1.0"
                )
                success = 1.0
            values[vid] = success * prod(values[p] for p in preds)
            continue

        if support_preds:
            if label.aggregator is Aggregator.OR:
                support = 1.0 - prod(1.0 - values[p] for p in support_preds)
            else:
                support = prod(values[p] for p in support_preds)
        else:
            support = _leaf_base(graph, vid, overrides)

        if label.aggregator is Aggregator.ATTACK_DISCOUNT:
            support *= prod(1.0 - values[p] for p in attack_preds)
        elif attack_preds:
            warnings.append(
                f"vertex {vid} has attack-step predecessors but aggregator"
                f" {label.aggregator.value}; the attacks are ignored"
            )
        values[vid] = support

    return EvaluationResult(values=values, order=order, warnings=warnings)
