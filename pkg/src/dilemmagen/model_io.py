"""Parsing and serialization of the three knowledge models, the result
document, and the DOT export.

All files are JSON with an explicit format_version. Parsers are strict:
unknown keys, unknown enum values and structurally invalid models are
rejected, so a successful parse always yields a model whose validator
reports ok.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from .knowledge import (
    CausalityGraph,
    CausalNode,
    Condition,
    ConsequenceCategory,
    Constructor,
    Edge,
    EdgeKind,
    GateType,
    Issue,
    IssueSeverity,
    ModelError,
    NodeKind,
    TaskModel,
    TaskNode,
    ValidationReport,
    WorldInstance,
    WorldModel,
    condition_tuple,
    validate_causality_graph,
    validate_task_model,
    validate_world_model,
)

if TYPE_CHECKING:
    from .generator import DilemmaCandidate
    from .scoring import GoalState

FORMAT_VERSION = 1


class ParseError(ModelError):
    """The document is not well-formed."""


class SchemaError(ModelError):
    """The document is well-formed but violates the model schema."""


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _require_object(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{where}: expected an object")
    return value


def _require_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected an array")
    return value


def _require_string(value, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected a string")
    return value


def _check_keys(obj: dict, required: set[str], optional: set[str], where: str) -> None:
    missing = required - obj.keys()
    if missing:
        raise SchemaError(f"{where}: missing field {sorted(missing)[0]}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise SchemaError(f"{where}: unknown field {sorted(unknown)[0]}")


def _check_version(doc: dict, where: str) -> None:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"{where}: unsupported format_version {version!r}")


def _enum_value(enum_cls, raw, where: str):
    try:
        return enum_cls(raw)
    except ValueError:
        name = enum_cls.__name__
        raise SchemaError(f"{where}: unsupported {name} value {raw!r}") from None


def _condition_from_json(raw, where: str) -> Condition:
    items = _require_list(raw, where)
    if len(items) != 3:
        raise SchemaError(f"{where}: condition must be a [subject, predicate, object] triple")
    subject = _require_string(items[0], where)
    predicate = _require_string(items[1], where)
    obj = items[2]
    if not isinstance(obj, (str, bool, int, float)):
        raise SchemaError(f"{where}: condition object must be an identifier, boolean or number")
    return Condition(subject, predicate, obj)


def _conditions_from_json(raw, where: str) -> tuple[Condition, ...]:
    return condition_tuple(_condition_from_json(item, where) for item in _require_list(raw, where))


def _raise_on_errors(report: ValidationReport, what: str) -> None:
    if not report.ok:
        first = report.errors()[0]
        raise SchemaError(f"{what} invalid at {first.location}: {first.message}")


def condition_to_json(cond: Condition) -> list:
    return [cond.subject, cond.predicate, cond.obj]


# ---------------------------------------------------------------------------
# Task model
# ---------------------------------------------------------------------------

def parse_task_model(text: str) -> TaskModel:
    doc = _require_object(_load_json(text), "task model")
    _check_keys(doc, {"format_version", "root", "tasks"}, set(), "task model")
    _check_version(doc, "task model")
    root = _require_string(doc["root"], "task model root")

    nodes: dict[str, TaskNode] = {}
    for raw in _require_list(doc["tasks"], "tasks"):
        task = _require_object(raw, "task")
        _check_keys(
            task,
            {"id", "name", "constructor"},
            {"children", "pre_contextual", "pre_favorable", "post"},
            "task",
        )
        task_id = _require_string(task["id"], "task id")
        if task_id in nodes:
            raise SchemaError(f"task {task_id}: duplicate id")
        constructor = _enum_value(Constructor, task["constructor"], f"task {task_id}")
        children = tuple(
            _require_string(c, f"task {task_id} child")
            for c in _require_list(task.get("children", []), f"task {task_id} children")
        )
        nodes[task_id] = TaskNode(
            id=task_id,
            name=_require_string(task["name"], f"task {task_id} name"),
            constructor=constructor,
            children=children,
            pre_contextual=_conditions_from_json(
                task.get("pre_contextual", []), f"task {task_id} pre_contextual"
            ),
            pre_favorable=_conditions_from_json(
                task.get("pre_favorable", []), f"task {task_id} pre_favorable"
            ),
            post=_conditions_from_json(task.get("post", []), f"task {task_id} post"),
        )

    model = TaskModel(root=root, nodes=nodes)
    _raise_on_errors(validate_task_model(model), "task model")
    return model


def serialize_task_model(tm: TaskModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "root": tm.root,
        "tasks": [
            {
                "id": node.id,
                "name": node.name,
                "constructor": node.constructor.value,
                "children": list(node.children),
                "pre_contextual": [condition_to_json(c) for c in node.pre_contextual],
                "pre_favorable": [condition_to_json(c) for c in node.pre_favorable],
                "post": [condition_to_json(c) for c in node.post],
            }
            for _, node in sorted(tm.nodes.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Causality graph
# ---------------------------------------------------------------------------

_NODE_OPTIONAL = {"task_ref", "gate_type", "category", "severity", "lead_time"}


def parse_causality_graph(text: str) -> CausalityGraph:
    doc = _require_object(_load_json(text), "causality model")
    _check_keys(doc, {"format_version", "nodes", "edges"}, set(), "causality model")
    _check_version(doc, "causality model")

    nodes: dict[str, CausalNode] = {}
    for raw in _require_list(doc["nodes"], "nodes"):
        node = _require_object(raw, "node")
        _check_keys(node, {"id", "kind", "label"}, _NODE_OPTIONAL, "node")
        node_id = _require_string(node["id"], "node id")
        if node_id in nodes:
            raise SchemaError(f"node {node_id}: duplicate id")
        kind = _enum_value(NodeKind, node["kind"], f"node {node_id}")
        gate_type = node.get("gate_type")
        if gate_type is not None:
            gate_type = _enum_value(GateType, gate_type, f"node {node_id}")
        category = node.get("category")
        if category is not None:
            category = _enum_value(ConsequenceCategory, category, f"node {node_id}")
        severity = node.get("severity")
        if severity is not None and (isinstance(severity, bool) or not isinstance(severity, int)):
            raise SchemaError(f"node {node_id}: severity must be an integer")
        lead_time = node.get("lead_time")
        if lead_time is not None and (
            isinstance(lead_time, bool) or not isinstance(lead_time, (int, float))
        ):
            raise SchemaError(f"node {node_id}: lead_time must be a number")
        task_ref = node.get("task_ref")
        if task_ref is not None:
            task_ref = _require_string(task_ref, f"node {node_id} task_ref")
        nodes[node_id] = CausalNode(
            id=node_id,
            kind=kind,
            label=_require_string(node["label"], f"node {node_id} label"),
            task_ref=task_ref,
            gate_type=gate_type,
            category=category,
            severity=severity,
            lead_time=float(lead_time) if lead_time is not None else None,
        )

    edges: list[Edge] = []
    seen_edges: set[tuple[str, str, str]] = set()
    for raw in _require_list(doc["edges"], "edges"):
        edge = _require_object(raw, "edge")
        _check_keys(edge, {"from", "to"}, {"kind"}, "edge")
        src = _require_string(edge["from"], "edge from")
        dst = _require_string(edge["to"], "edge to")
        kind = _enum_value(EdgeKind, edge.get("kind", "CAUSAL"), f"edge {src}->{dst}")
        key = (src, dst, kind.value)
        if key in seen_edges:
            continue
        seen_edges.add(key)
        edges.append(Edge(src=src, dst=dst, kind=kind))

    graph = CausalityGraph(nodes=nodes, edges=tuple(sorted(edges, key=Edge.sort_key)))
    _raise_on_errors(validate_causality_graph(graph), "causality model")
    return graph


def serialize_causality_graph(cg: CausalityGraph) -> str:
    nodes = []
    for _, node in sorted(cg.nodes.items()):
        entry: dict[str, Any] = {"id": node.id, "kind": node.kind.value, "label": node.label}
        if node.task_ref is not None:
            entry["task_ref"] = node.task_ref
        if node.gate_type is not None:
            entry["gate_type"] = node.gate_type.value
        if node.category is not None:
            entry["category"] = node.category.value
        if node.severity is not None:
            entry["severity"] = node.severity
        if node.lead_time is not None:
            entry["lead_time"] = node.lead_time
        nodes.append(entry)
    doc = {
        "format_version": FORMAT_VERSION,
        "nodes": nodes,
        "edges": [
            {"from": e.src, "to": e.dst, "kind": e.kind.value}
            for e in sorted(cg.edges, key=Edge.sort_key)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# World model
# ---------------------------------------------------------------------------

def parse_world_model(text: str) -> WorldModel:
    doc = _require_object(_load_json(text), "world model")
    _check_keys(doc, {"format_version", "classes", "instances"}, set(), "world model")
    _check_version(doc, "world model")
    classes = tuple(
        sorted(_require_string(c, "class") for c in _require_list(doc["classes"], "classes"))
    )
    if len(set(classes)) != len(classes):
        raise SchemaError("world model: duplicate class")

    instances: dict[str, WorldInstance] = {}
    for raw in _require_list(doc["instances"], "instances"):
        inst = _require_object(raw, "instance")
        _check_keys(inst, {"id", "class"}, {"properties"}, "instance")
        inst_id = _require_string(inst["id"], "instance id")
        if inst_id in instances:
            raise SchemaError(f"instance {inst_id}: duplicate id")
        instances[inst_id] = WorldInstance(
            class_name=_require_string(inst["class"], f"instance {inst_id} class"),
            properties=_conditions_from_json(
                inst.get("properties", []), f"instance {inst_id} properties"
            ),
        )

    world = WorldModel(classes=classes, instances=instances)
    _raise_on_errors(validate_world_model(world), "world model")
    return world


def serialize_world_model(wm: WorldModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "classes": list(wm.classes),
        "instances": [
            {
                "id": inst_id,
                "class": inst.class_name,
                "properties": [condition_to_json(c) for c in inst.properties],
            }
            for inst_id, inst in sorted(wm.instances.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelBundle:
    """The three models an engine run needs, cross-checked together."""

    task_model: TaskModel
    causality: CausalityGraph
    world: WorldModel


def validate_bundle(
    tm: TaskModel, cg: CausalityGraph, wm: WorldModel, strict: bool = False
) -> ValidationReport:
    """Combined report over the three models plus cross-references.

    Strict mode additionally requires every condition subject to resolve to a
    world class or instance; authors iterating on one model at a time keep it
    off.
    """
    issues = list(validate_task_model(tm).issues)
    issues.extend(validate_causality_graph(cg, tm).issues)
    issues.extend(validate_world_model(wm).issues)
    if strict:
        known = set(wm.classes) | set(wm.instances)
        for _, task in sorted(tm.nodes.items()):
            for cond in task.pre_contextual + task.pre_favorable + task.post:
                if cond.subject not in known:
                    issues.append(
                        Issue(
                            IssueSeverity.ERROR,
                            task.id,
                            f"condition subject {cond.subject} unknown to the world model",
                        )
                    )
    return ValidationReport(tuple(issues))


def build_bundle(
    tm: TaskModel, cg: CausalityGraph, wm: WorldModel, strict: bool = False
) -> ModelBundle:
    report = validate_bundle(tm, cg, wm, strict=strict)
    _raise_on_errors(report, "model bundle")
    return ModelBundle(task_model=tm, causality=cg, world=wm)


def load_bundle(
    tasks_path, causality_path, world_path, strict: bool = False
) -> ModelBundle:
    """Parse the three model files and assemble a cross-checked bundle."""
    with open(tasks_path, encoding="utf-8") as fh:
        tm = parse_task_model(fh.read())
    with open(causality_path, encoding="utf-8") as fh:
        cg = parse_causality_graph(fh.read())
    with open(world_path, encoding="utf-8") as fh:
        wm = parse_world_model(fh.read())
    return build_bundle(tm, cg, wm, strict=strict)


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

_DOT_SHAPES = {
    NodeKind.BARRIER: "box",
    NodeKind.GATE: "diamond",
    NodeKind.CONSEQUENCE: "doubleoctagon",
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(cg: CausalityGraph) -> str:
    """Deterministic DOT rendering: one statement per node and per edge,
    nodes sorted by id, edges by (from, to, kind), subsumption dashed."""
    lines = ["digraph causality {"]
    for node_id, node in sorted(cg.nodes.items()):
        shape = _DOT_SHAPES.get(node.kind, "ellipse")
        lines.append(
            f'  "{_dot_escape(node_id)}" [label="{_dot_escape(node.label)}", shape={shape}];'
        )
    for edge in sorted(cg.edges, key=Edge.sort_key):
        style = " [style=dashed]" if edge.kind is EdgeKind.SUBSUMPTION else ""
        lines.append(f'  "{_dot_escape(edge.src)}" -> "{_dot_escape(edge.dst)}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Result document
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultCandidate:
    tasks: tuple[str, str]
    type: str
    score: float
    pedagogical_fit: float
    scenario_fit: float
    flagged: bool
    details: tuple[tuple[str, float], ...]
    consequences: tuple[tuple[str, str, int], ...]
    goal_state: tuple[Condition, ...] | None


@dataclass(frozen=True)
class ResultDocument:
    dilemma_type: str | None
    candidates: tuple[ResultCandidate, ...]


def _candidate_consequences(candidate: DilemmaCandidate) -> tuple[tuple[str, str, int], ...]:
    merged = {}
    for outcome in candidate.evidence_a + candidate.evidence_b + candidate.nonchoice_evidence:
        merged[outcome.node] = (outcome.node, outcome.category.value, outcome.severity)
    return tuple(merged[k] for k in sorted(merged))


def result_document(
    candidates: list[DilemmaCandidate], goal: GoalState | None
) -> ResultDocument:
    entries = []
    for index, cand in enumerate(candidates):
        breakdown = cand.score
        goal_here = None
        if index == 0 and goal is not None:
            goal_here = goal.conditions
        entries.append(
            ResultCandidate(
                tasks=(cand.task_a, cand.task_b),
                type=cand.type.value,
                score=breakdown.total,
                pedagogical_fit=breakdown.pedagogical_fit,
                scenario_fit=breakdown.scenario_fit,
                flagged=breakdown.total == 0.0,
                details=tuple(sorted(breakdown.details.items())),
                consequences=_candidate_consequences(cand),
                goal_state=goal_here,
            )
        )
    dilemma_type = candidates[0].type.value if candidates else None
    return ResultDocument(dilemma_type=dilemma_type, candidates=tuple(entries))


def write_result(candidates: list[DilemmaCandidate], goal: GoalState | None) -> str:
    """Machine-readable generation result; candidates in rank order, the top
    candidate carrying the goal state handed to the downstream planner."""
    doc = result_document(candidates, goal)
    payload: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "dilemma_type": doc.dilemma_type,
        "candidates": [],
    }
    for entry in doc.candidates:
        item: dict[str, Any] = {
            "tasks": list(entry.tasks),
            "type": entry.type,
            "score": entry.score,
            "pedagogical_fit": entry.pedagogical_fit,
            "scenario_fit": entry.scenario_fit,
            "flagged": entry.flagged,
            "details": {k: v for k, v in entry.details},
            "consequences": [
                {"node": node, "category": category, "severity": severity}
                for node, category, severity in entry.consequences
            ],
        }
        if entry.goal_state is not None:
            item["goal_state"] = [condition_to_json(c) for c in entry.goal_state]
        payload["candidates"].append(item)
    return json.dumps(payload, indent=2) + "\n"


def parse_result(text: str) -> ResultDocument:
    doc = _require_object(_load_json(text), "result")
    _check_keys(doc, {"format_version", "dilemma_type", "candidates"}, set(), "result")
    _check_version(doc, "result")
    dilemma_type = doc["dilemma_type"]
    if dilemma_type is not None:
        dilemma_type = _require_string(dilemma_type, "result dilemma_type")

    entries = []
    for raw in _require_list(doc["candidates"], "candidates"):
        entry = _require_object(raw, "candidate")
        _check_keys(
            entry,
            {"tasks", "type", "score", "pedagogical_fit", "scenario_fit", "flagged",
             "details", "consequences"},
            {"goal_state"},
            "candidate",
        )
        tasks = _require_list(entry["tasks"], "candidate tasks")
        if len(tasks) != 2:
            raise SchemaError("candidate tasks must name exactly two tasks")
        consequences = []
        for c in _require_list(entry["consequences"], "candidate consequences"):
            c = _require_object(c, "consequence")
            _check_keys(c, {"node", "category", "severity"}, set(), "consequence")
            consequences.append((c["node"], c["category"], c["severity"]))
        goal_state = None
        if "goal_state" in entry:
            goal_state = _conditions_from_json(entry["goal_state"], "candidate goal_state")
        details = _require_object(entry["details"], "candidate details")
        entries.append(
            ResultCandidate(
                tasks=(tasks[0], tasks[1]),
                type=_require_string(entry["type"], "candidate type"),
                score=float(entry["score"]),
                pedagogical_fit=float(entry["pedagogical_fit"]),
                scenario_fit=float(entry["scenario_fit"]),
                flagged=bool(entry["flagged"]),
                details=tuple(sorted((k, float(v)) for k, v in details.items())),
                consequences=tuple(consequences),
                goal_state=goal_state,
            )
        )
    return ResultDocument(dilemma_type=dilemma_type, candidates=tuple(entries))
