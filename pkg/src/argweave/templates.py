"""The built-in extension templates T1 through T7.

Each template pairs a matching function (returns a non-negative score;
0 means not applicable) with a generation function that builds the local
extension for a matched vertex. All built-in scores are Boolean (0 or 1):
no pair of built-ins needs graded precedence.

Stage assignment is fixed: T1-T3 consume the workflow (stage "g"),
T4-T5 consume the system description (stage "gs"), T6-T7 consume the
attacker model (stage "gsa").
"""

from __future__ import annotations

from .graph import (
    Aggregator,
    Label,
    LocalExtension,
    Vertex,
    VertexKind,
    make_extension,
    make_vertex,
)
from .models import Environment, ModelError, resolve_composition_tree


class ExtensionTemplate:
    """Base contract: match(vertex, env) -> score, generate(vertex, env) -> extension.

    generate is only called when match returned a positive score, and its
    result must be a valid star centered on the matched vertex.
    """

    template_id: str = "?"
    stage: str = "?"

    def match(self, vertex: Vertex, env: Environment) -> float:
        raise NotImplementedError

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        raise NotImplementedError

    @property
    def provenance(self) -> str:
        return f"{self.template_id}@{self.stage}"


class WorkflowHasNoUniqueFinalStepError(Exception):
    def __init__(self, workflow_id: str):
        super().__init__(f"workflow {workflow_id!r} has no unique final step")


def _action_vertex(step) -> Vertex:
    return make_vertex(
        VertexKind.ACTION_AVAILABILITY,
        {"action": step.action, "actor": step.actor, "step_id": step.step_id},
    )


class GoalToWorkflow(ExtensionTemplate):
    """T1: connect the assessment goal to the final step of its workflow."""

    template_id = "T1"
    stage = "g"

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.GOAL:
            return 0.0
        if vertex.attrs["subject"] != env.workflow.workflow_id:
            return 0.0
        return 1.0 if env.workflow.steps else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        if not env.workflow.steps:
            raise WorkflowHasNoUniqueFinalStepError(env.workflow.workflow_id)
        final = env.workflow.final_step()
        return make_extension(
            vertex,
            Label(Aggregator.AND, provenance=self.provenance),
            [(_action_vertex(final), Label(Aggregator.AND, provenance=self.provenance))],
        )


class PreviousSteps(ExtensionTemplate):
    """T2: add the required previous step of a workflow action (works backwards)."""

    template_id = "T2"
    stage = "g"

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.ACTION_AVAILABILITY:
            return 0.0
        return 1.0 if env.workflow.predecessor(vertex.attrs["step_id"]) else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        prev = env.workflow.predecessor(vertex.attrs["step_id"])
        assert prev is not None
        return make_extension(
            vertex,
            Label(Aggregator.AND, provenance=self.provenance),
            [(_action_vertex(prev), Label(Aggregator.AND, provenance=self.provenance))],
        )


class ActorRequirements(ExtensionTemplate):
    """T3: a workflow action needs its actor, and any message the step receives."""

    template_id = "T3"
    stage = "g"

    def match(self, vertex: Vertex, env: Environment) -> float:
        return 1.0 if vertex.kind is VertexKind.ACTION_AVAILABILITY else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        label = Label(Aggregator.AND, provenance=self.provenance)
        prerequisites = [
            (
                make_vertex(VertexKind.ACTOR_AVAILABILITY, {"actor": vertex.attrs["actor"]}),
                Label(Aggregator.AND, provenance=self.provenance),
            )
        ]
        step = env.workflow.step(vertex.attrs["step_id"])
        if step is not None and step.receives_message is not None:
            prerequisites.append(
                (
                    make_vertex(
                        VertexKind.MESSAGE_AVAILABILITY,
                        {
                            "message": step.receives_message.message_id,
                            "sender": step.receives_message.actor,
                            "receiver": step.actor,
                        },
                    ),
                    Label(Aggregator.AND, provenance=self.provenance),
                )
            )
        return make_extension(vertex, label, prerequisites)


class ActorDevices(ExtensionTemplate):
    """T4: an actor needs every topology device of its mapped component type."""

    template_id = "T4"
    stage = "gs"

    def _devices(self, vertex: Vertex, env: Environment):
        mapped = env.system.actor_map.get(vertex.attrs["actor"])
        if mapped is None:
            return []
        return env.system.devices_matching_type(mapped)

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.ACTOR_AVAILABILITY:
            return 0.0
        return 1.0 if self._devices(vertex, env) else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        prerequisites = []
        for device in self._devices(vertex, env):
            prerequisites.append(
                (
                    make_vertex(
                        VertexKind.COMPONENT_AVAILABILITY,
                        {
                            "device": device.device_id,
                            "component_type": device.type_name,
                            "component": "root",
                        },
                    ),
                    Label(Aggregator.AND, provenance=self.provenance),
                )
            )
        # all mapped devices are required: the actor aggregates them with AND
        return make_extension(
            vertex, Label(Aggregator.AND, provenance=self.provenance), prerequisites
        )


class ComponentDecomposition(ExtensionTemplate):
    """T5: decompose a component into its subcomponents.

    The composition tree is resolved against the nearest ancestor-or-self
    of the vertex's component type that owns one; children inherit the
    vertex's declared type so further decompositions resolve identically.
    """

    template_id = "T5"
    stage = "gs"

    def _node(self, vertex: Vertex, env: Environment):
        try:
            _, tree = resolve_composition_tree(vertex.attrs["component_type"], env.system)
        except ModelError:
            return None  # type outside the hierarchy: nothing to decompose
        return tree.node_at(vertex.attrs["component"])

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.COMPONENT_AVAILABILITY:
            return 0.0
        node = self._node(vertex, env)
        return 1.0 if node is not None and node.children else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        node = self._node(vertex, env)
        assert node is not None
        base = vertex.attrs["component"]
        prerequisites = []
        for child in node.children:
            prerequisites.append(
                (
                    make_vertex(
                        VertexKind.COMPONENT_AVAILABILITY,
                        {
                            "device": vertex.attrs["device"],
                            "component_type": vertex.attrs["component_type"],
                            "component": f"{base}/{child.name}",
                        },
                    ),
                    Label(Aggregator(child.aggregator), provenance=self.provenance),
                )
            )
        return make_extension(
            vertex, Label(Aggregator(node.aggregator), provenance=self.provenance), prerequisites
        )


class LeafAttacks(ExtensionTemplate):
    """T6: attach matching attack steps to a leaf component property.

    A pattern matches when its target component equals the leaf path (or
    its final segment) and the device's declared type equals the target
    type or descends from it. The attacked leaf switches to the
    attack-discount aggregator; each attack step stores the pattern's
    success probability as its prior.
    """

    template_id = "T6"
    stage = "gsa"

    def _matching_patterns(self, vertex: Vertex, env: Environment):
        try:
            _, tree = resolve_composition_tree(vertex.attrs["component_type"], env.system)
        except ModelError:
            return []
        node = tree.node_at(vertex.attrs["component"])
        if node is None or node.children:
            return []  # only leaves are attacked
        return [
            p
            for p in env.attacker.patterns
            if p.matches_component(vertex.attrs["component"])
            and env.system.is_type_or_descendant(
                vertex.attrs["component_type"], p.target.component_type
            )
        ]

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.COMPONENT_AVAILABILITY:
            return 0.0
        return 1.0 if self._matching_patterns(vertex, env) else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        prerequisites = []
        for pattern in self._matching_patterns(vertex, env):
            prerequisites.append(
                (
                    make_vertex(
                        VertexKind.ATTACK_STEP,
                        {"attack": pattern.pattern_id, "device": vertex.attrs["device"]},
                    ),
                    Label(
                        Aggregator.AND,
                        prior=pattern.success_prob,
                        provenance=self.provenance,
                    ),
                )
            )
        return make_extension(
            vertex,
            Label(Aggregator.ATTACK_DISCOUNT, provenance=self.provenance),
            prerequisites,
        )


class AttackRequirements(ExtensionTemplate):
    """T7: an attack step requires the attacker properties its pattern declares.

    Property vertices are shared across attack steps by identity; their
    priors come from the attacker profile (0 when unstated).
    """

    template_id = "T7"
    stage = "gsa"

    def match(self, vertex: Vertex, env: Environment) -> float:
        if vertex.kind is not VertexKind.ATTACK_STEP:
            return 0.0
        pattern = env.attacker.pattern(vertex.attrs["attack"])
        return 1.0 if pattern is not None and pattern.prerequisites else 0.0

    def generate(self, vertex: Vertex, env: Environment) -> LocalExtension:
        pattern = env.attacker.pattern(vertex.attrs["attack"])
        assert pattern is not None
        prerequisites = []
        for name in pattern.prerequisites:
            prerequisites.append(
                (
                    make_vertex(VertexKind.ATTACKER_PROPERTY, {"property": name}),
                    Label(
                        Aggregator.AND,
                        prior=env.attacker.profile.get(name, 0.0),
                        provenance=self.provenance,
                    ),
                )
            )
        # re-stamp the success probability so the center rewrite loses nothing
        return make_extension(
            vertex,
            Label(Aggregator.AND, prior=pattern.success_prob, provenance=self.provenance),
            prerequisites,
        )


BUILTIN_TEMPLATES: dict[str, ExtensionTemplate] = {
    t.template_id: t
    for t in (
        GoalToWorkflow(),
        PreviousSteps(),
        ActorRequirements(),
        ActorDevices(),
        ComponentDecomposition(),
        LeafAttacks(),
        AttackRequirements(),
    )
}

STAGE_TEMPLATE_IDS: dict[str, tuple[str, ...]] = {
    "g": ("T1", "T2", "T3"),
    "gs": ("T4", "T5"),
    "gsa": ("T6", "T7"),
}
