"""argweave: rule-driven construction and evaluation of security argument graphs.

The pipeline grows a typed dependency graph in three stages (goal,
goal+system, goal+system+attacker) by iteratively applying extension
templates, then propagates probabilities over the result.
"""

from .engine import (
    AppliedRecord,
    NonTerminationError,
    PipelineResult,
    TemplateSet,
    generate_graph,
    match_templates,
    run_pipeline,
)
from .evaluation import EvaluationResult, evaluate
from .graph import (
    Aggregator,
    ArgumentGraph,
    Label,
    LocalExtension,
    Vertex,
    VertexKind,
    apply_extension,
    export_graph,
    from_canonical_json,
    make_extension,
    make_vertex,
    to_canonical_json,
    to_dot,
    validate_star,
)
from .models import (
    AttackerModel,
    Environment,
    RunConfig,
    SystemModel,
    WorkflowModel,
    parse_attacker,
    parse_system,
    parse_workflow,
    resolve_composition_tree,
    validate_environment,
)
from .templates import BUILTIN_TEMPLATES, STAGE_TEMPLATE_IDS, ExtensionTemplate

__version__ = "0.1.0"

__all__ = [
    "Aggregator",
    "AppliedRecord",
    "ArgumentGraph",
    "AttackerModel",
    "BUILTIN_TEMPLATES",
    "Environment",
    "EvaluationResult",
    "ExtensionTemplate",
    "Label",
    "LocalExtension",
    "NonTerminationError",
    "PipelineResult",
    "RunConfig",
    "STAGE_TEMPLATE_IDS",
    "SystemModel",
    "TemplateSet",
    "Vertex",
    "VertexKind",
    "WorkflowModel",
    "apply_extension",
    "evaluate",
    "export_graph",
    "from_canonical_json",
    "generate_graph",
    "make_extension",
    "make_vertex",
    "match_templates",
    "parse_attacker",
    "parse_system",
    "parse_workflow",
    "resolve_composition_tree",
    "run_pipeline",
    "to_canonical_json",
    "to_dot",
    "validate_star",
    "validate_environment",
]
