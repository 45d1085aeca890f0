"""Command-line surface: validate models, generate dilemmas, verify pairs,
inspect pipeline stages, export the causality graph.

Machine-readable results go to stdout (or --out); human-readable summaries
and diagnostics go to stderr. Exit codes: 0 success, 1 model validation
failure, 2 usage error, 3 nothing generated under --require-result.
"""

from __future__ import annotations

import argparse
import json
import sys

from .causality import negative_actions, negative_barriers
from .generator import run_pipeline
from .knowledge import ConsequenceCategory, ModelError, ValidationReport
from .model_io import (
    build_bundle,
    export_dot,
    load_bundle,
    parse_causality_graph,
    parse_task_model,
    parse_world_model,
    validate_bundle,
    write_result,
)
from .scoring import (
    DEFAULT_CONSTANTS,
    DilemmaFilter,
    PedagogicalInstruction,
    extract_goal_state,
    parse_scoring_constants,
)
from .verifier import verify_obligation, verify_prohibition

EXIT_OK = 0
EXIT_MODEL_INVALID = 1
EXIT_USAGE = 2
EXIT_NO_RESULT = 3


def _add_model_flags(parser, tasks=True, causality=True, world=True):
    if tasks:
        parser.add_argument("--tasks", help="task model file")
    if causality:
        parser.add_argument("--causality", help="causality model file")
    if world:
        parser.add_argument("--world", help="world model file")


def _add_instruction_flags(parser):
    parser.add_argument(
        "--type", default="both", choices=["obligation", "prohibition", "both"],
        help="dilemma type to emit (default: both)",
    )
    parser.add_argument("--gmin", type=int, help="minimum gravity 0..5")
    parser.add_argument("--gmax", type=int, help="maximum gravity 0..5")
    parser.add_argument("--gap", type=int, help="target gravity gap between the pair")
    parser.add_argument(
        "--categories",
        help="required consequence categories, comma-separated: gravity,violations,points",
    )
    parser.add_argument("--wp", type=float, help="weight of the pedagogical constraints")
    parser.add_argument("--ws", type=float, help="weight of the scenaristic constraints")
    parser.add_argument(
        "--criticality", type=int,
        help="preset: criticality k maps to gravity bounds k-1..k+1 (explicit --gmin/--gmax win)",
    )
    parser.add_argument("--constants", help="scoring constants file (tau_seconds, gravity_scale)")
    parser.add_argument(
        "--seed", type=int, default=None,
        help="accepted for interface stability; generation is deterministic, so this is a no-op",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dilemmagen",
        description="Discover obligation and prohibition dilemmas in declarative knowledge models.",
    )
    parser.add_argument(
        "-q", "--quiet", action="store_true",
        help="suppress the human-readable summary on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate the three models together")
    _add_model_flags(p_validate)
    p_validate.add_argument("--strict", action="store_true",
                            help="also require condition subjects to resolve in the world model")

    p_generate = sub.add_parser("generate", help="run the full generation pipeline")
    _add_model_flags(p_generate)
    _add_instruction_flags(p_generate)
    p_generate.add_argument("--top", type=int, help="emit only the N best candidates")
    p_generate.add_argument("--out", help="write the result document here instead of stdout")
    p_generate.add_argument("--require-result", action="store_true",
                            help="exit 3 when no candidate survives")

    p_verify = sub.add_parser("verify", help="check one task pair against the dilemma conditions")
    _add_model_flags(p_verify)
    p_verify.add_argument("--pair", nargs=2, metavar=("TASK_A", "TASK_B"), required=True)
    p_verify.add_argument("--type", default="both",
                          choices=["obligation", "prohibition", "both"])

    p_inspect = sub.add_parser("inspect", help="print one intermediate pipeline stage")
    p_inspect.add_argument("stage", choices=["barriers", "actions", "pairs", "filtered", "ranked"])
    _add_model_flags(p_inspect)
    _add_instruction_flags(p_inspect)

    p_dot = sub.add_parser("export-dot", help="emit the causality graph in DOT form")
    _add_model_flags(p_dot, tasks=False, world=False)
    p_dot.add_argument("--out", help="write the DOT document here instead of stdout")

    return parser


def _require(parser, args, names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(f"--{name} is required for this command")


def _instruction(parser, args) -> PedagogicalInstruction:
    overrides = {"dilemma_type": DilemmaFilter(args.type.upper())}
    if args.gmin is not None:
        overrides["gravity_min"] = args.gmin
    if args.gmax is not None:
        overrides["gravity_max"] = args.gmax
    if args.gap is not None:
        overrides["gravity_gap_target"] = args.gap
    if args.categories:
        try:
            overrides["required_categories"] = frozenset(
                ConsequenceCategory(token.strip().upper())
                for token in args.categories.split(",")
                if token.strip()
            )
        except ValueError:
            parser.error(f"unknown consequence category in {args.categories!r}")
    if args.wp is not None:
        overrides["weight_pedagogical"] = args.wp
    if args.ws is not None:
        overrides["weight_scenaristic"] = args.ws
    try:
        if args.criticality is not None:
            return PedagogicalInstruction.from_criticality(args.criticality, **overrides)
        return PedagogicalInstruction(**overrides)
    except ValueError as exc:
        parser.error(str(exc))


def _constants(args):
    if getattr(args, "constants", None):
        with open(args.constants, encoding="utf-8") as fh:
            return parse_scoring_constants(fh.read())
    return DEFAULT_CONSTANTS


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _print_report(args, report: ValidationReport) -> None:
    for issue in report.issues:
        print(f"{issue.severity.value} {issue.location}: {issue.message}", file=sys.stderr)
    _say(args, f"{len(report.errors())} errors, {len(report.warnings())} warnings")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_validate(parser, args) -> int:
    _require(parser, args, ("tasks", "causality", "world"))
    with open(args.tasks, encoding="utf-8") as fh:
        tm = parse_task_model(fh.read())
    with open(args.causality, encoding="utf-8") as fh:
        cg = parse_causality_graph(fh.read())
    with open(args.world, encoding="utf-8") as fh:
        wm = parse_world_model(fh.read())
    report = validate_bundle(tm, cg, wm, strict=args.strict)
    _print_report(args, report)
    return EXIT_OK if report.ok else EXIT_MODEL_INVALID


def _cmd_generate(parser, args) -> int:
    _require(parser, args, ("tasks", "causality", "world"))
    instruction = _instruction(parser, args)
    bundle = load_bundle(args.tasks, args.causality, args.world)
    result = run_pipeline(bundle, instruction, _constants(args))

    ranked = result.ranked
    if args.top is not None:
        ranked = ranked[: max(args.top, 0)]
    goal = extract_goal_state(ranked[0], bundle.task_model) if ranked else None
    _emit(write_result(ranked, goal), args.out)

    by_type = {"OBLIGATION": 0, "PROHIBITION": 0}
    for cand in ranked:
        by_type[cand.type.value] += 1
    _say(
        args,
        f"{len(ranked)} candidate(s): {by_type['OBLIGATION']} obligation, "
        f"{by_type['PROHIBITION']} prohibition; "
        f"{len(result.rejected)} rejected during filtering",
    )
    for cand, reason in result.rejected:
        _say(args, f"rejected {cand.task_a} + {cand.task_b}: {reason}")
    if not ranked and args.require_result:
        return EXIT_NO_RESULT
    return EXIT_OK


def _scenario_json(scenario) -> dict:
    return {
        "performed_tasks": sorted(scenario.performed_tasks),
        "ambient_events": sorted(scenario.ambient_events),
    }


def _report_json(report) -> dict:
    checks = []
    for check in report.checks:
        entry = {"name": check.name, "passed": check.passed}
        if check.scenario is not None:
            entry["scenario"] = _scenario_json(check.scenario)
        if check.outcome is not None:
            entry["consequence"] = {
                "node": check.outcome.node,
                "category": check.outcome.category.value,
                "severity": check.outcome.severity,
                "via": list(check.outcome.via),
            }
        if check.detail:
            entry["detail"] = check.detail
        checks.append(entry)
    return {
        "type": report.claimed_type.value,
        "holds": report.holds,
        "checks": checks,
    }


def _cmd_verify(parser, args) -> int:
    _require(parser, args, ("tasks", "causality", "world"))
    bundle = load_bundle(args.tasks, args.causality, args.world)
    t1, t2 = args.pair
    reports = []
    if args.type in ("obligation", "both"):
        reports.append(verify_obligation(bundle, t1, t2))
    if args.type in ("prohibition", "both"):
        reports.append(verify_prohibition(bundle, t1, t2))
    payload = {
        "format_version": 1,
        "pair": [t1, t2],
        "reports": [_report_json(r) for r in reports],
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    verdicts = ", ".join(f"{r.claimed_type.value.lower()}: {r.holds}" for r in reports)
    _say(args, f"{t1} + {t2} -> {verdicts}")
    return EXIT_OK


def _cmd_inspect(parser, args) -> int:
    if args.stage in ("barriers", "actions"):
        _require(parser, args, ("causality",))
        with open(args.causality, encoding="utf-8") as fh:
            cg = parse_causality_graph(fh.read())
        sources = negative_barriers(cg) if args.stage == "barriers" else negative_actions(cg)
        for task in sorted({source.task for source in sources}):
            print(task)
        return EXIT_OK

    if args.stage in ("pairs", "filtered"):
        _require(parser, args, ("tasks", "causality"))
    else:
        _require(parser, args, ("tasks", "causality", "world"))
    if args.world is None:
        # pairs/filtered do not rank, so an empty world stands in
        wm = parse_world_model('{"format_version": 1, "classes": [], "instances": []}')
        with open(args.tasks, encoding="utf-8") as fh:
            tm = parse_task_model(fh.read())
        with open(args.causality, encoding="utf-8") as fh:
            cg = parse_causality_graph(fh.read())
        bundle = build_bundle(tm, cg, wm)
    else:
        bundle = load_bundle(args.tasks, args.causality, args.world)

    instruction = _instruction(parser, args)
    result = run_pipeline(bundle, instruction, _constants(args))
    if args.stage == "pairs":
        for cand in result.pairs:
            print(f"{cand.type.value} {cand.task_a} {cand.task_b}")
    elif args.stage == "filtered":
        for cand in result.confirmed:
            print(f"{cand.type.value} {cand.task_a} {cand.task_b}")
    else:
        for position, cand in enumerate(result.ranked, start=1):
            print(
                f"{position} {cand.type.value} {cand.task_a} {cand.task_b} "
                f"{cand.score.total:.6f}"
            )
    return EXIT_OK


def _cmd_export_dot(parser, args) -> int:
    _require(parser, args, ("causality",))
    with open(args.causality, encoding="utf-8") as fh:
        cg = parse_causality_graph(fh.read())
    _emit(export_dot(cg), args.out)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "generate": _cmd_generate,
    "verify": _cmd_verify,
    "inspect": _cmd_inspect,
    "export-dot": _cmd_export_dot,
}


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](parser, args)
    except SystemExit as exc:  # parser.error inside a command
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_INVALID
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_INVALID


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
