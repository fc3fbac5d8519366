"""Input models: workflow, system, and attacker descriptions.

The three model files are a versioned JSON dialect (format_version 1).
Parsing is strict by default: unknown fields are rejected unless lenient
mode is on, in which case they are preserved as opaque notes. Cross-file
consistency is checked by validate_environment, which reports every
violation it finds rather than stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

WORKFLOW_FORMAT_VERSION = 1
SYSTEM_FORMAT_VERSION = 1
ATTACKER_FORMAT_VERSION = 1


class ModelError(Exception):
    """Base class for model-input errors."""


class ModelSyntaxError(ModelError):
    def __init__(self, locus: str, reason: str):
        super().__init__(f"{locus}: {reason}")
        self.locus = locus
        self.reason = reason


class SchemaError(ModelError):
    def __init__(self, fieldname: str, reason: str):
        super().__init__(f"{fieldname}: {reason}")
        self.fieldname = fieldname
        self.reason = reason


class CrossRefError(ModelError):
    """Carries the full list of cross-reference violations."""

    def __init__(self, issues: list[str]):
        super().__init__(
            f"{len(issues)} cross-reference problem(s):\n  " + "\n  ".join(issues)
        )
        self.issues = issues


@dataclass
class MessageRef:
    message_id: str
    actor: str  # sender for receives_message, receiver for sends_message


@dataclass
class WorkflowStep:
    step_id: str
    action: str
    actor: str
    receives_message: Optional[MessageRef] = None
    sends_message: Optional[MessageRef] = None
    notes: dict[str, Any] = field(default_factory=dict)


@dataclass
class WorkflowModel:
    """A sequential workflow; the step list order defines the chain."""

    workflow_id: str
    steps: list[WorkflowStep]

    def step(self, step_id: str) -> Optional[WorkflowStep]:
        for s in self.steps:
            if s.step_id == step_id:
                return s
        return None

    def predecessor(self, step_id: str) -> Optional[WorkflowStep]:
        for i, s in enumerate(self.steps):
            if s.step_id == step_id:
                return self.steps[i - 1] if i > 0 else None
        return None

    def final_step(self) -> WorkflowStep:
        if not self.steps:
            raise ValueError(f"workflow {self.workflow_id} has no steps")
        return self.steps[-1]

    def actors(self) -> list[str]:
        seen: dict[str, None] = {}
        for s in self.steps:
            seen.setdefault(s.actor)
        return list(seen)


@dataclass
class Device:
    device_id: str
    type_name: str
    location: str = ""
    access: list[str] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)


@dataclass
class Link:
    endpoints: tuple[str, str]
    link_type: str  # "communication" | "physical-power"
    capacity: Optional[float] = None
    delay: Optional[float] = None
    wide_area: bool = False
    notes: dict[str, Any] = field(default_factory=dict)


@dataclass
class CompositionNode:
    """One node of a per-type composition tree. Paths are slash-joined from 'root'."""

    name: str
    aggregator: str = "AND"  # "AND" | "OR"
    children: list["CompositionNode"] = field(default_factory=list)

    def walk(self, prefix: str = "root"):
        yield prefix, self
        for child in self.children:
            yield from child.walk(f"{prefix}/{child.name}")

    def node_at(self, path: str) -> Optional["CompositionNode"]:
        for node_path, node in self.walk():
            if node_path == path:
                return node
        return None


@dataclass
class TypeNode:
    name: str
    children: list["TypeNode"] = field(default_factory=list)


@dataclass
class SystemModel:
    devices: list[Device]
    links: list[Link]
    actor_map: dict[str, str]
    type_root: TypeNode
    composition_trees: dict[str, CompositionNode]

    def __post_init__(self) -> None:
        self._parents: dict[str, Optional[str]] = {}
        stack: list[tuple[TypeNode, Optional[str]]] = [(self.type_root, None)]
        while stack:
            node, parent = stack.pop()
            self._parents[node.name] = parent
            for child in node.children:
                stack.append((child, node.name))

    def device(self, device_id: str) -> Optional[Device]:
        for d in self.devices:
            if d.device_id == device_id:
                return d
        return None

    def type_names(self) -> set[str]:
        return set(self._parents)

    def parent_type(self, type_name: str) -> Optional[str]:
        return self._parents.get(type_name)

    def is_type_or_descendant(self, type_name: str, ancestor: str) -> bool:
        """True when type_name equals ancestor or lies below it in the hierarchy."""
        current: Optional[str] = type_name
        while current is not None:
            if current == ancestor:
                return True
            current = self._parents.get(current)
        return False

    def devices_matching_type(self, type_name: str) -> list[Device]:
        return [d for d in self.devices if self.is_type_or_descendant(d.type_name, type_name)]


@dataclass
class AttackTarget:
    component: str  # leaf path or its final segment
    component_type: str


@dataclass
class AttackPattern:
    pattern_id: str
    target: AttackTarget
    success_prob: float
    prerequisites: list[str]

    def matches_component(self, leaf_path: str) -> bool:
        return self.target.component == leaf_path or (
            leaf_path.rsplit("/", 1)[-1] == self.target.component
        )


@dataclass
class AttackerModel:
    profile: dict[str, float]
    patterns: list[AttackPattern]

    def pattern(self, pattern_id: str) -> Optional[AttackPattern]:
        for p in self.patterns:
            if p.pattern_id == pattern_id:
                return p
        return None


@dataclass
class RunConfig:
    """Run-time knobs: stage depth, template filtering, generation ceiling."""

    stage: str = "gsa"  # g | gs | gsa
    disabled_templates: frozenset[str] = frozenset()
    enable_only: Optional[frozenset[str]] = None
    max_applications: int = 10_000
    lenient: bool = False

    KNOWN_TEMPLATES = frozenset({"T1", "T2", "T3", "T4", "T5", "T6", "T7"})

    def __post_init__(self) -> None:
        if self.stage not in ("g", "gs", "gsa"):
            raise ValueError(f"unknown stage {self.stage!r}")
        unknown = self.disabled_templates - self.KNOWN_TEMPLATES
        if unknown:
            raise ValueError(f"unknown template id(s) in disabled set: {sorted(unknown)}")
        if self.enable_only is not None:
            unknown = self.enable_only - self.KNOWN_TEMPLATES
            if unknown:
                raise ValueError(f"unknown template id(s) in enable-only set: {sorted(unknown)}")

    def template_enabled(self, template_id: str) -> bool:
        if self.enable_only is not None and template_id not in self.enable_only:
            return False
        return template_id not in self.disabled_templates


@dataclass
class Environment:
    """Everything templates may consult: the three models plus run config."""

    workflow: WorkflowModel
    system: SystemModel
    attacker: AttackerModel
    config: RunConfig = field(default_factory=RunConfig)
    warnings: list[str] = field(default_factory=list)


# -- parsing helpers ---------------------------------------------------


def _load_json(data: bytes | str, source: str) -> Any:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from None


def _check_fields(
    obj: dict,
    where: str,
    required: dict[str, type | tuple[type, ...]],
    optional: dict[str, type | tuple[type, ...]],
    lenient: bool,
) -> dict[str, Any]:
    """Validate key presence/types; return any extra fields kept in lenient mode."""
    if not isinstance(obj, dict):
        raise SchemaError(where, f"expected an object, got {type(obj).__name__}")
    extras: dict[str, Any] = {}
    for key, typ in required.items():
        if key not in obj:
            raise SchemaError(f"{where}.{key}", "required field is missing")
        if not isinstance(obj[key], typ):
            raise SchemaError(f"{where}.{key}", f"expected {typ}, got {type(obj[key]).__name__}")
    for key, value in obj.items():
        if key in required:
            continue
        if key in optional:
            if not isinstance(value, optional[key]):
                raise SchemaError(
                    f"{where}.{key}", f"expected {optional[key]}, got {type(value).__name__}"
                )
            continue
        if lenient:
            extras[key] = value
        else:
            raise SchemaError(f"{where}.{key}", "unknown field (use lenient mode to keep it)")
    return extras


def _check_version(doc: dict, expected: int, source: str) -> None:
    version = doc.get("format_version")
    if version != expected:
        raise SchemaError(f"{source}.format_version", f"expected {expected}, got {version!r}")


def _parse_message_ref(obj: dict, where: str, actor_key: str, lenient: bool) -> MessageRef:
    _check_fields(obj, where, {"message_id": str, actor_key: str}, {}, lenient)
    return MessageRef(message_id=obj["message_id"], actor=obj[actor_key])


def parse_workflow(data: bytes | str, *, lenient: bool = False, source: str = "workflow") -> WorkflowModel:
    doc = _load_json(data, source)
    _check_fields(
        doc, source, {"format_version": int, "workflow_id": str, "steps": list}, {}, lenient
    )
    _check_version(doc, WORKFLOW_FORMAT_VERSION, source)
    if not doc["steps"]:
        raise SchemaError(f"{source}.steps", "a workflow needs at least one step")
    steps: list[WorkflowStep] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(doc["steps"]):
        where = f"{source}.steps[{i}]"
        extras = _check_fields(
            raw,
            where,
            {"step_id": str, "action": str, "actor": str},
            {"receives_message": dict, "sends_message": dict},
            lenient,
        )
        if raw["step_id"] in seen_ids:
            raise SchemaError(f"{where}.step_id", f"duplicate step id {raw['step_id']!r}")
        seen_ids.add(raw["step_id"])
        receives = sends = None
        if "receives_message" in raw:
            receives = _parse_message_ref(
                raw["receives_message"], f"{where}.receives_message", "from_actor", lenient
            )
        if "sends_message" in raw:
            sends = _parse_message_ref(
                raw["sends_message"], f"{where}.sends_message", "to_actor", lenient
            )
        steps.append(
            WorkflowStep(
                step_id=raw["step_id"],
                action=raw["action"],
                actor=raw["actor"],
                receives_message=receives,
                sends_message=sends,
                notes=extras,
            )
        )
    return WorkflowModel(workflow_id=doc["workflow_id"], steps=steps)


def _parse_type_node(obj: dict, where: str, lenient: bool) -> TypeNode:
    _check_fields(obj, where, {"name": str}, {"children": list}, lenient)
    children = [
        _parse_type_node(child, f"{where}.children[{i}]", lenient)
        for i, child in enumerate(obj.get("children", []))
    ]
    return TypeNode(name=obj["name"], children=children)


def _parse_composition_node(obj: dict, where: str, lenient: bool, named: bool) -> CompositionNode:
    required: dict[str, type | tuple[type, ...]] = {"name": str} if named else {}
    _check_fields(obj, where, required, {"aggregator": str, "children": list}, lenient)
    aggregator = obj.get("aggregator", "AND")
    if aggregator not in ("AND", "OR"):
        raise SchemaError(f"{where}.aggregator", f"expected AND or OR, got {aggregator!r}")
    children = [
        _parse_composition_node(child, f"{where}.children[{i}]", lenient, named=True)
        for i, child in enumerate(obj.get("children", []))
    ]
    names = [c.name for c in children]
    if len(names) != len(set(names)):
        raise SchemaError(f"{where}.children", "duplicate child component names")
    return CompositionNode(name=obj.get("name", "root"), aggregator=aggregator, children=children)


def parse_system(data: bytes | str, *, lenient: bool = False, source: str = "system") -> SystemModel:
    doc = _load_json(data, source)
    _check_fields(
        doc,
        source,
        {
            "format_version": int,
            "devices": list,
            "actor_map": dict,
            "type_hierarchy": dict,
            "composition_trees": dict,
        },
        {"links": list},
        lenient,
    )
    _check_version(doc, SYSTEM_FORMAT_VERSION, source)

    devices: list[Device] = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["devices"]):
        where = f"{source}.devices[{i}]"
        extras = _check_fields(
            raw,
            where,
            {"device_id": str, "type_name": str},
            {"location": str, "access": list},
            lenient,
        )
        if raw["device_id"] in seen:
            raise SchemaError(f"{where}.device_id", f"duplicate device id {raw['device_id']!r}")
        seen.add(raw["device_id"])
        devices.append(
            Device(
                device_id=raw["device_id"],
                type_name=raw["type_name"],
                location=raw.get("location", ""),
                access=list(raw.get("access", [])),
                notes=extras,
            )
        )

    links: list[Link] = []
    for i, raw in enumerate(doc.get("links", [])):
        where = f"{source}.links[{i}]"
        extras = _check_fields(
            raw,
            where,
            {"endpoints": list, "link_type": str},
            {"capacity": (int, float), "delay": (int, float), "wide_area": bool},
            lenient,
        )
        if len(raw["endpoints"]) != 2:
            raise SchemaError(f"{where}.endpoints", "a link joins exactly two devices")
        if raw["link_type"] not in ("communication", "physical-power"):
            raise SchemaError(
                f"{where}.link_type",
                f"expected communication or physical-power, got {raw['link_type']!r}",
            )
        links.append(
            Link(
                endpoints=(raw["endpoints"][0], raw["endpoints"][1]),
                link_type=raw["link_type"],
                capacity=raw.get("capacity"),
                delay=raw.get("delay"),
                wide_area=raw.get("wide_area", False),
                notes=extras,
            )
        )

    for actor, type_name in doc["actor_map"].items():
        if not isinstance(type_name, str):
            raise SchemaError(f"{source}.actor_map.{actor}", "mapped type must be a string")

    type_root = _parse_type_node(doc["type_hierarchy"], f"{source}.type_hierarchy", lenient)

    trees: dict[str, CompositionNode] = {}
    for type_name, raw in doc["composition_trees"].items():
        trees[type_name] = _parse_composition_node(
            raw, f"{source}.composition_trees.{type_name}", lenient, named=False
        )

    return SystemModel(
        devices=devices,
        links=links,
        actor_map=dict(doc["actor_map"]),
        type_root=type_root,
        composition_trees=trees,
    )


def parse_attacker(data: bytes | str, *, lenient: bool = False, source: str = "attacker") -> AttackerModel:
    doc = _load_json(data, source)
    _check_fields(
        doc, source, {"format_version": int, "profile": dict, "patterns": list}, {}, lenient
    )
    _check_version(doc, ATTACKER_FORMAT_VERSION, source)

    profile: dict[str, float] = {}
    for name, prior in doc["profile"].items():
        if not isinstance(prior, (int, float)) or isinstance(prior, bool):
            raise SchemaError(f"{source}.profile.{name}", "prior must be a number")
        if not 0.0 <= prior <= 1.0:
            raise SchemaError(f"{source}.profile.{name}", f"prior {prior} outside [0, 1]")
        profile[name] = float(prior)

    patterns: list[AttackPattern] = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["patterns"]):
        where = f"{source}.patterns[{i}]"
        _check_fields(
            raw,
            where,
            {
                "pattern_id": str,
                "target": dict,
                "success_prob": (int, float),
                "prerequisites": list,
            },
            {},
            lenient,
        )
        if raw["pattern_id"] in seen:
            raise SchemaError(f"{where}.pattern_id", f"duplicate pattern id {raw['pattern_id']!r}")
        seen.add(raw["pattern_id"])
        _check_fields(
            raw["target"], f"{where}.target", {"component": str, "component_type": str}, {}, lenient
        )
        prob = raw["success_prob"]
        if isinstance(prob, bool) or not 0.0 <= prob <= 1.0:
            raise SchemaError(f"{where}.success_prob", f"probability {prob!r} outside [0, 1]")
        prereqs = raw["prerequisites"]
        if not all(isinstance(p, str) for p in prereqs):
            raise SchemaError(f"{where}.prerequisites", "prerequisites must be strings")
        patterns.append(
            AttackPattern(
                pattern_id=raw["pattern_id"],
                target=AttackTarget(
                    component=raw["target"]["component"],
                    component_type=raw["target"]["component_type"],
                ),
                success_prob=float(prob),
                prerequisites=list(prereqs),
            )
        )
    return AttackerModel(profile=profile, patterns=patterns)


# -- cross-reference validation -----------------------------------------


def resolve_composition_tree(type_name: str, system: SystemModel) -> tuple[str, CompositionNode]:
    """Nearest ancestor-or-self of type_name that owns a composition tree.

    After validation this cannot fail: the hierarchy root always owns one.
    """
    current: Optional[str] = type_name
    while current is not None:
        if current in system.composition_trees:
            return current, system.composition_trees[current]
        current = system.parent_type(current)
    raise ModelError(
        f"no composition tree found for {type_name!r} or any ancestor type"
    )


def validate_environment(
    workflow: WorkflowModel,
    system: SystemModel,
    attacker: AttackerModel,
    config: Optional[RunConfig] = None,
) -> Environment:
    """Cross-check the three models; raise CrossRefError listing every violation.

    Warnings (for example attacker-property priors missing from the
    profile, which default to 0) are attached to the returned Environment.
    """
    issues: list[str] = []
    warnings: list[str] = []
    type_names = system.type_names()

    # type hierarchy sanity: names unique (the tree shape is structural)
    counted: list[str] = []
    stack = [system.type_root]
    while stack:
        node = stack.pop()
        counted.append(node.name)
        stack.extend(node.children)
    dupes = {n for n in counted if counted.count(n) > 1}
    if dupes:
        issues.append(f"type hierarchy repeats type name(s): {sorted(dupes)}")

    if system.type_root.name not in system.composition_trees:
        issues.append(
            f"hierarchy root {system.type_root.name!r} owns no composition tree;"
            " decomposition would have no fallback"
        )
    for type_name in system.composition_trees:
        if type_name not in type_names:
            issues.append(f"composition tree owner {type_name!r} is not in the type hierarchy")

    for device in system.devices:
        if device.type_name not in type_names:
            issues.append(
                f"device {device.device_id} declares unknown type {device.type_name!r}"
            )
    device_ids = {d.device_id for d in system.devices}
    for link in system.links:
        for endpoint in link.endpoints:
            if endpoint not in device_ids:
                issues.append(f"link endpoint {endpoint!r} is not a declared device")

    for actor, mapped in system.actor_map.items():
        if mapped not in type_names:
            issues.append(f"actor {actor!r} maps to unknown component type {mapped!r}")

    workflow_actors = workflow.actors()
    for actor in workflow_actors:
        mapped = system.actor_map.get(actor)
        if mapped is None:
            issues.append(f"workflow actor {actor!r} has no actor_map entry")
        elif mapped in type_names and not system.devices_matching_type(mapped):
            issues.append(
                f"actor {actor!r} maps to type {mapped!r} but no device matches it"
            )

    # message consistency: every received message must be sent by an earlier step
    actor_set = set(workflow_actors)
    sent_by_index: dict[str, tuple[int, WorkflowStep]] = {}
    for i, step in enumerate(workflow.steps):
        if step.sends_message is not None:
            sent_by_index.setdefault(step.sends_message.message_id, (i, step))
    for i, step in enumerate(workflow.steps):
        recv = step.receives_message
        if recv is None:
            continue
        if recv.actor not in actor_set:
            issues.append(
                f"step {step.step_id} receives {recv.message_id!r} from {recv.actor!r},"
                " which is not a workflow actor"
            )
        origin = sent_by_index.get(recv.message_id)
        if origin is None or origin[0] >= i:
            issues.append(
                f"step {step.step_id} receives message {recv.message_id!r}"
                " that no earlier step sends"
            )
        elif origin[1].actor != recv.actor:
            issues.append(
                f"step {step.step_id} expects {recv.message_id!r} from {recv.actor!r}"
                f" but step {origin[1].step_id} (actor {origin[1].actor!r}) sends it"
            )
        if step.sends_message is not None and step.sends_message.actor not in actor_set:
            issues.append(
                f"step {step.step_id} sends {step.sends_message.message_id!r}"
                f" to {step.sends_message.actor!r}, which is not a workflow actor"
            )

    for pattern in attacker.patterns:
        if pattern.target.component_type not in type_names:
            issues.append(
                f"attack pattern {pattern.pattern_id!r} targets unknown type"
                f" {pattern.target.component_type!r}"
            )
        for prereq in pattern.prerequisites:
            if prereq not in attacker.profile:
                warnings.append(
                    f"attacker property {prereq!r} (required by {pattern.pattern_id!r})"
                    " has no profile prior; it defaults to 0"
                )

    if issues:
        raise CrossRefError(issues)
    return Environment(
        workflow=workflow,
        system=system,
        attacker=attacker,
        config=config or RunConfig(),
        warnings=warnings,
    )
