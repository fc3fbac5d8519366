"""Command-line front end.

Commands: validate, generate, evaluate, export-dot, report.

Exit codes: 0 success, 2 parse/syntax problems, 3 cross-reference
problems, 4 cyclic graph on evaluation, 1 anything else. Diagnostics go
to stderr; machine-readable output goes to files and stdout only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import evaluation, models, report
from .engine import EngineError, run_pipeline
from .fileio import write_atomic
from .graph import (
    GraphError,
    GraphFormatError,
    Vertex,
    VertexKind,
    from_canonical_json,
    make_vertex,
    to_canonical_json,
    to_dot,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_CROSSREF = 3
EXIT_CYCLIC = 4

STAGES = ("g", "gs", "gsa")

RESERVED_GOAL_PROPERTIES = ("confidentiality", "integrity")


class GoalSpecError(Exception):
    pass


def parse_goal_spec(spec: str) -> Vertex:
    """Parse '<property>:<workflow_id>' into a Goal vertex.

    Only availability goals are supported; confidentiality and integrity
    are recognized but rejected.
    """
    if ":" not in spec:
        raise GoalSpecError(
            f"goal {spec!r} is not of the form <property>:<workflow_id>,"
            " e.g. availability:wf-volt-ctrl"
        )
    prop, subject = spec.split(":", 1)
    if not subject:
        raise GoalSpecError(f"goal {spec!r} names no workflow")
    if prop in RESERVED_GOAL_PROPERTIES:
        raise GoalSpecError(f"goal property {prop!r} is reserved but not supported yet")
    if prop != "availability":
        raise GoalSpecError(f"unknown goal property {prop!r} (supported: availability)")
    return make_vertex(VertexKind.GOAL, {"property": prop, "subject": subject})


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _load_models(args: argparse.Namespace):
    workflow = models.parse_workflow(
        Path(args.workflow).read_bytes(), lenient=args.lenient, source=args.workflow
    )
    system = models.parse_system(
        Path(args.system).read_bytes(), lenient=args.lenient, source=args.system
    )
    attacker = models.parse_attacker(
        Path(args.attacker).read_bytes(), lenient=args.lenient, source=args.attacker
    )
    return workflow, system, attacker


def _build_config(args: argparse.Namespace) -> models.RunConfig:
    disabled = frozenset(getattr(args, "disable_template", None) or [])
    enable_only = None
    if getattr(args, "enable_only", None):
        enable_only = frozenset(t.strip() for t in args.enable_only.split(",") if t.strip())
    return models.RunConfig(
        stage=getattr(args, "stage", "gsa"),
        disabled_templates=disabled,
        enable_only=enable_only,
        max_applications=getattr(args, "max_applications", 10_000),
        lenient=args.lenient,
    )


def _validated_environment(args: argparse.Namespace) -> models.Environment:
    workflow, system, attacker = _load_models(args)
    env = models.validate_environment(workflow, system, attacker, _build_config(args))
    for warning in env.warnings:
        _info(f"warning: {warning}")
    return env


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        env = _validated_environment(args)
    except (models.ModelSyntaxError, models.SchemaError) as exc:
        _info(f"parse error: {exc}")
        return EXIT_PARSE
    except models.CrossRefError as exc:
        _info("validation failed:")
        for issue in exc.issues:
            _info(f"  - {issue}")
        return EXIT_CROSSREF
    _info(
        f"models are consistent: {len(env.workflow.steps)} workflow step(s),"
        f" {len(env.system.devices)} device(s), {len(env.attacker.patterns)} attack pattern(s)"
    )
    return EXIT_OK


def _run_pipeline_from_args(args: argparse.Namespace):
    env = _validated_environment(args)
    goal = parse_goal_spec(args.goal)
    return run_pipeline(goal, env), env


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        pipeline, env = _run_pipeline_from_args(args)
    except (models.ModelSyntaxError, models.SchemaError, GoalSpecError) as exc:
        _info(f"parse error: {exc}")
        return EXIT_PARSE
    except models.CrossRefError as exc:
        _info(f"validation failed: {exc}")
        return EXIT_CROSSREF
    except EngineError as exc:
        _info(f"generation failed: {exc}")
        return EXIT_ERROR

    out_dir = Path(args.out_dir)
    requested = STAGES[: STAGES.index(env.config.stage) + 1]
    for stage_name in requested:
        graph = pipeline.stage(stage_name)
        write_atomic(out_dir / f"{stage_name}.json", to_canonical_json(graph))
        _info(f"{stage_name}: {graph.vertex_count} vertices, {graph.edge_count} edges")
    if args.dot:
        final = pipeline.stage(env.config.stage)
        write_atomic(out_dir / f"{env.config.stage}.dot", to_dot(final).encode("utf-8"))
    _info(f"generation time: {pipeline.elapsed_seconds:.3f}s")
    return EXIT_OK


def _load_overrides(path: Optional[str]) -> Optional[dict[str, float]]:
    if path is None:
        return None
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise models.SchemaError(path, "priors file must map vertex ids to numbers")
    return {str(k): float(v) for k, v in doc.items()}


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        graph = from_canonical_json(Path(args.graph).read_bytes())
        overrides = _load_overrides(args.priors)
    except (GraphFormatError, models.SchemaError, ValueError) as exc:
        _info(f"parse error: {exc}")
        return EXIT_PARSE
    try:
        result = evaluation.evaluate(graph, overrides)
    except evaluation.CyclicGraphError as exc:
        _info(str(exc))
        return EXIT_CYCLIC
    except evaluation.EvaluationError as exc:
        _info(str(exc))
        return EXIT_ERROR
    for warning in result.warnings:
        _info(f"warning: {warning}")
    write_atomic(Path(args.out_dir) / "evaluation.json", result.to_json())
    goal = result.goal_value(graph)
    if goal is None:
        _info("graph has no unique goal vertex; see evaluation.json for all values")
    else:
        print(f"{goal:.6f}")
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    try:
        graph = from_canonical_json(Path(args.graph).read_bytes())
    except GraphFormatError as exc:
        _info(f"parse error: {exc}")
        return EXIT_PARSE
    out = Path(args.out) if args.out else Path(args.graph).with_suffix(".dot")
    write_atomic(out, to_dot(graph).encode("utf-8"))
    _info(f"wrote {out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        pipeline, env = _run_pipeline_from_args(args)
        overrides = _load_overrides(args.priors)
    except (models.ModelSyntaxError, models.SchemaError, GoalSpecError, ValueError) as exc:
        _info(f"parse error: {exc}")
        return EXIT_PARSE
    except models.CrossRefError as exc:
        _info(f"validation failed: {exc}")
        return EXIT_CROSSREF
    except EngineError as exc:
        _info(f"generation failed: {exc}")
        return EXIT_ERROR
    graph = pipeline.stage(env.config.stage)
    try:
        result = evaluation.evaluate(graph, overrides)
    except evaluation.EvaluationError as exc:
        _info(str(exc))
        return EXIT_ERROR
    paths = report.write_report(Path(args.out_dir), pipeline, graph, result)
    for path in paths:
        _info(f"wrote {path}")
    goal = result.goal_value(graph)
    if goal is not None:
        print(f"{goal:.6f}")
    return EXIT_OK


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workflow", required=True, help="workflow model file")
    parser.add_argument("--system", required=True, help="system model file")
    parser.add_argument("--attacker", required=True, help="attacker model file")
    parser.add_argument(
        "--lenient", action="store_true", help="keep unknown model fields instead of rejecting"
    )


def _add_generation_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--goal", required=True, help="goal spec, e.g. availability:wf-volt-ctrl")
    parser.add_argument("--stage", choices=STAGES, default="gsa", help="deepest stage to emit")
    parser.add_argument(
        "--disable-template",
        action="append",
        metavar="ID",
        help="disable a template (repeatable), e.g. --disable-template T6",
    )
    parser.add_argument(
        "--enable-only", metavar="IDS", help="comma-separated list of the only templates to run"
    )
    parser.add_argument(
        "--max-applications",
        type=int,
        default=10_000,
        help="application ceiling guarding against non-terminating template sets",
    )
    parser.add_argument("--out-dir", default=".", help="directory for output files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argweave",
        description="Build and evaluate security argument graphs from model files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check the three model files for consistency")
    _add_model_arguments(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_generate = sub.add_parser("generate", help="run the pipeline and write stage graphs")
    _add_model_arguments(p_generate)
    _add_generation_arguments(p_generate)
    p_generate.add_argument(
        "--dot", action="store_true", help="also write Graphviz DOT for the deepest stage"
    )
    p_generate.set_defaults(func=cmd_generate)

    p_evaluate = sub.add_parser("evaluate", help="propagate probabilities over a graph file")
    p_evaluate.add_argument("--graph", required=True, help="graph JSON file")
    p_evaluate.add_argument("--priors", help="JSON file mapping vertex ids to leaf priors")
    p_evaluate.add_argument("--out-dir", default=".", help="directory for evaluation.json")
    p_evaluate.set_defaults(func=cmd_evaluate)

    p_export = sub.add_parser("export-dot", help="convert a graph JSON file to Graphviz DOT")
    p_export.add_argument("--graph", required=True, help="graph JSON file")
    p_export.add_argument("--out", help="output path (default: alongside the input)")
    p_export.set_defaults(func=cmd_export_dot)

    p_report = sub.add_parser("report", help="generate, evaluate, and write CSV + figures")
    _add_model_arguments(p_report)
    _add_generation_arguments(p_report)
    p_report.add_argument("--priors", help="JSON file mapping vertex ids to leaf priors")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _info(f"cannot read {exc.filename}: no such file")
        return EXIT_ERROR
    except (GraphError, ValueError) as exc:
        _info(f"error: {exc}")
        return EXIT_ERROR


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
