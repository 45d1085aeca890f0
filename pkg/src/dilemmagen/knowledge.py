"""Core domain types: world conditions, hierarchical task models, causality
graphs, world models, and their structural validators.

Everything here is immutable after construction and every operation is a pure
function, so values can be shared freely between threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")

SEVERITY_MIN = 0
SEVERITY_MAX = 5


class ModelError(Exception):
    """Base class for every error raised by the engine."""


class UnknownTask(ModelError):
    pass


class UnknownNode(ModelError):
    pass


class WrongKind(ModelError):
    pass


class DanglingTaskRef(ModelError):
    pass


class ConflictingGoal(ModelError):
    pass


class ModelTooLarge(ModelError):
    pass


class Constructor(str, Enum):
    """Temporal/logical operator relating a task's children."""

    SEQ = "SEQ"
    PAR = "PAR"
    IND = "IND"
    LEAF = "LEAF"


class NodeKind(str, Enum):
    EVENT = "EVENT"
    ACTION = "ACTION"
    BARRIER = "BARRIER"
    GATE = "GATE"
    CONSEQUENCE = "CONSEQUENCE"


class GateType(str, Enum):
    AND = "AND"
    OR = "OR"


class ConsequenceCategory(str, Enum):
    """What kind of harm a consequence node records."""

    GRAVITY = "GRAVITY"
    VIOLATIONS = "VIOLATIONS"
    POINTS = "POINTS"


class EdgeKind(str, Enum):
    CAUSAL = "CAUSAL"
    SUBSUMPTION = "SUBSUMPTION"


class IssueSeverity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


def canonical_literal(value):
    """Normalize a condition object literal.

    Boolean spellings are case-insensitive ("True" == "true" == true); numbers
    compare by numeric value; identifier strings stay case-sensitive.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        low = value.lower()
        if low == "true":
            return True
        if low == "false":
            return False
        return value
    if isinstance(value, (int, float)):
        return value
    raise TypeError(f"unsupported condition object literal: {value!r}")


def _literal_tag(value) -> tuple[str, object]:
    # bool must be tested before int: bool is an int subclass
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return ("number", float(value))
    return ("id", value)


@dataclass(frozen=True, eq=False)
class Condition:
    """A subject-predicate-object assertion about the world."""

    subject: str
    predicate: str
    obj: object

    def __post_init__(self):
        object.__setattr__(self, "obj", canonical_literal(self.obj))

    def key(self) -> tuple:
        return (self.subject, self.predicate) + _literal_tag(self.obj)

    def sort_key(self) -> tuple[str, str, str, str]:
        s, p, tag, value = self.key()
        return (s, p, tag, str(value))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Condition):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"({self.subject} {self.predicate} {self.obj!r})"


def condition_tuple(conditions: Iterable[Condition]) -> tuple[Condition, ...]:
    """Deduplicated, deterministically ordered condition collection."""
    return tuple(sorted(set(conditions), key=Condition.sort_key))


def condition_conflict(c1: Condition, c2: Condition) -> bool:
    """True when both conditions pin the same (subject, predicate) to
    different objects. Symmetric, and false for identical triples."""
    return (
        c1.subject == c2.subject
        and c1.predicate == c2.predicate
        and _literal_tag(c1.obj) != _literal_tag(c2.obj)
    )


def condition_set_conflict(s1: Iterable[Condition], s2: Iterable[Condition]) -> bool:
    """True when any cross pair of the two sets conflicts."""
    by_sp: dict[tuple[str, str], set] = {}
    for c in s1:
        by_sp.setdefault((c.subject, c.predicate), set()).add(_literal_tag(c.obj))
    for c in s2:
        objs = by_sp.get((c.subject, c.predicate))
        if objs and any(o != _literal_tag(c.obj) for o in objs):
            return True
    return False


@dataclass(frozen=True)
class TaskNode:
    """One task in the hierarchical task model.

    Children are ordered (order matters under SEQ); condition collections are
    stored sorted and deduplicated so models compare structurally.
    """

    id: str
    name: str
    constructor: Constructor
    children: tuple[str, ...] = ()
    pre_contextual: tuple[Condition, ...] = ()
    pre_favorable: tuple[Condition, ...] = ()
    post: tuple[Condition, ...] = ()


@dataclass(frozen=True)
class TaskModel:
    root: str
    nodes: dict[str, TaskNode]

    def node(self, task_id: str) -> TaskNode:
        try:
            return self.nodes[task_id]
        except KeyError:
            raise UnknownTask(f"unknown task: {task_id}") from None

    @cached_property
    def parents(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for node in self.nodes.values():
            for child in node.children:
                out.setdefault(child, node.id)
        return out

    def ancestor_chain(self, task_id: str) -> list[str]:
        """Path from the task up to the root, starting at the task itself."""
        self.node(task_id)
        chain = [task_id]
        seen = {task_id}
        while chain[-1] in self.parents:
            parent = self.parents[chain[-1]]
            if parent in seen:  # defensive: validators reject cycles
                break
            chain.append(parent)
            seen.add(parent)
        return chain


def lowest_common_ancestor(tm: TaskModel, t1: str, t2: str) -> str:
    """Deepest task having both arguments among its descendants."""
    if t1 == t2:
        raise ValueError("lowest_common_ancestor requires two distinct tasks")
    chain1 = tm.ancestor_chain(t1)
    chain2 = set(tm.ancestor_chain(t2))
    for task_id in chain1:
        if task_id in chain2:
            return task_id
    raise UnknownTask(f"no common ancestor for {t1} and {t2}")


@dataclass(frozen=True)
class CausalNode:
    """One vertex of the causality graph.

    Kind-specific fields: task_ref on ACTION/BARRIER, gate_type on GATE,
    category and severity on CONSEQUENCE, lead_time on EVENT/ACTION.
    """

    id: str
    kind: NodeKind
    label: str
    task_ref: str | None = None
    gate_type: GateType | None = None
    category: ConsequenceCategory | None = None
    severity: int | None = None
    lead_time: float | None = None


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: EdgeKind = EdgeKind.CAUSAL

    def sort_key(self) -> tuple[str, str, str]:
        return (self.src, self.dst, self.kind.value)


@dataclass(frozen=True)
class CausalityGraph:
    nodes: dict[str, CausalNode]
    edges: tuple[Edge, ...]

    def node(self, node_id: str) -> CausalNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown causal node: {node_id}") from None

    def of_kind(self, kind: NodeKind) -> tuple[CausalNode, ...]:
        return tuple(n for _, n in sorted(self.nodes.items()) if n.kind == kind)

    @cached_property
    def successors(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {nid: [] for nid in self.nodes}
        for edge in self.edges:
            if edge.src in out:
                out[edge.src].append(edge)
        return {nid: tuple(sorted(es, key=Edge.sort_key)) for nid, es in out.items()}

    @cached_property
    def predecessors(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {nid: [] for nid in self.nodes}
        for edge in self.edges:
            if edge.dst in out:
                out[edge.dst].append(edge)
        return {nid: tuple(sorted(es, key=Edge.sort_key)) for nid, es in out.items()}

    @cached_property
    def barriers_by_task(self) -> dict[str, tuple[str, ...]]:
        return self._kind_by_task(NodeKind.BARRIER)

    @cached_property
    def actions_by_task(self) -> dict[str, tuple[str, ...]]:
        return self._kind_by_task(NodeKind.ACTION)

    def _kind_by_task(self, kind: NodeKind) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for node in self.of_kind(kind):
            if node.task_ref is not None:
                out.setdefault(node.task_ref, []).append(node.id)
        return {task: tuple(sorted(ids)) for task, ids in out.items()}

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Kahn order over all edge kinds; ties broken by id."""
        indegree = {nid: 0 for nid in self.nodes}
        for edge in self.edges:
            if edge.dst in indegree:
                indegree[edge.dst] += 1
        ready = sorted(nid for nid, deg in indegree.items() if deg == 0)
        order: list[str] = []
        while ready:
            nid = ready.pop(0)
            order.append(nid)
            inserted = False
            for edge in self.successors.get(nid, ()):
                indegree[edge.dst] -= 1
                if indegree[edge.dst] == 0:
                    ready.append(edge.dst)
                    inserted = True
            if inserted:
                ready.sort()
        return tuple(order)


@dataclass(frozen=True)
class WorldInstance:
    class_name: str
    properties: tuple[Condition, ...] = ()


@dataclass(frozen=True)
class WorldModel:
    classes: tuple[str, ...]
    instances: dict[str, WorldInstance]

    @cached_property
    def class_counts(self) -> dict[str, int]:
        counts = {cls: 0 for cls in self.classes}
        for inst in self.instances.values():
            if inst.class_name in counts:
                counts[inst.class_name] += 1
        return counts


@dataclass(frozen=True)
class Issue:
    severity: IssueSeverity
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not any(i.severity is IssueSeverity.ERROR for i in self.issues)

    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity is IssueSeverity.ERROR)

    def warnings(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity is IssueSeverity.WARNING)


class _Issues:
    """Mutable accumulator used while validating; frozen on report()."""

    def __init__(self):
        self.items: list[Issue] = []

    def error(self, location: str, message: str) -> None:
        self.items.append(Issue(IssueSeverity.ERROR, location, message))

    def warning(self, location: str, message: str) -> None:
        self.items.append(Issue(IssueSeverity.WARNING, location, message))

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.items))


def _valid_identifier(value) -> bool:
    return isinstance(value, str) and bool(IDENTIFIER_RE.match(value))


def _check_condition(issues: _Issues, location: str, cond: Condition) -> None:
    if not _valid_identifier(cond.subject):
        issues.error(location, f"condition subject {cond.subject!r} is not a valid identifier")
    if not _valid_identifier(cond.predicate):
        issues.error(location, f"condition predicate {cond.predicate!r} is not a valid identifier")
    if isinstance(cond.obj, str) and not _valid_identifier(cond.obj):
        issues.error(location, f"condition object {cond.obj!r} is not a valid identifier, boolean or number")


def validate_task_model(tm: TaskModel) -> ValidationReport:
    """Structural check of a task model; violations become report entries."""
    issues = _Issues()

    for task_id, node in sorted(tm.nodes.items()):
        if not _valid_identifier(task_id):
            issues.error(task_id, "task id is not a valid identifier")
        if node.constructor is Constructor.LEAF:
            if node.children:
                issues.error(task_id, "LEAF task must not have children")
        else:
            if len(node.children) < 2:
                issues.error(
                    task_id,
                    f"constructor arity: {node.constructor.value} requires at least 2 children, "
                    f"got {len(node.children)}",
                )
        for child in node.children:
            if child not in tm.nodes:
                issues.error(task_id, f"unknown child task: {child}")
        if len(set(node.children)) != len(node.children):
            issues.error(task_id, "duplicate child reference")
        for cond in node.pre_contextual + node.pre_favorable + node.post:
            _check_condition(issues, task_id, cond)

    if tm.root not in tm.nodes:
        issues.error(tm.root, "root task is not defined")
        return issues.report()

    parent_count: dict[str, int] = {}
    for node in tm.nodes.values():
        for child in node.children:
            parent_count[child] = parent_count.get(child, 0) + 1
    for task_id, count in sorted(parent_count.items()):
        if count > 1:
            issues.error(task_id, f"task referenced by {count} parents")
    if tm.root in parent_count:
        issues.error(tm.root, "root task referenced as a child")

    # Walk from the root; anything revisited is a cycle, anything missed is
    # unreachable (which also means the model has more than one root).
    reached: set[str] = set()

    def visit(task_id: str, trail: tuple[str, ...]) -> None:
        if task_id in trail:
            issues.error(task_id, "cycle in task hierarchy")
            return
        if task_id in reached:
            return
        reached.add(task_id)
        node = tm.nodes.get(task_id)
        if node is None:
            return
        for child in node.children:
            visit(child, trail + (task_id,))

    visit(tm.root, ())
    for task_id in sorted(set(tm.nodes) - reached):
        issues.error(task_id, "task unreachable from the root")

    return issues.report()


_KIND_FIELDS = {
    NodeKind.EVENT: {"lead_time"},
    NodeKind.ACTION: {"task_ref", "lead_time"},
    NodeKind.BARRIER: {"task_ref"},
    NodeKind.GATE: {"gate_type"},
    NodeKind.CONSEQUENCE: {"category", "severity"},
}
_KIND_REQUIRED = {
    NodeKind.EVENT: set(),
    NodeKind.ACTION: {"task_ref"},
    NodeKind.BARRIER: {"task_ref"},
    NodeKind.GATE: {"gate_type"},
    NodeKind.CONSEQUENCE: {"category", "severity"},
}


def validate_causality_graph(cg: CausalityGraph, tm: TaskModel | None = None) -> ValidationReport:
    """Structural check of a causality graph.

    With a task model supplied, BARRIER/ACTION task references must resolve;
    without one, only graph-local invariants are checked.
    """
    issues = _Issues()

    for node_id, node in sorted(cg.nodes.items()):
        if not _valid_identifier(node_id):
            issues.error(node_id, "node id is not a valid identifier")
        allowed = _KIND_FIELDS[node.kind]
        required = _KIND_REQUIRED[node.kind]
        present = {
            name
            for name in ("task_ref", "gate_type", "category", "severity", "lead_time")
            if getattr(node, name) is not None
        }
        for name in sorted(required - present):
            issues.error(node_id, f"{node.kind.value} node requires field {name}")
        for name in sorted(present - allowed):
            issues.error(node_id, f"field {name} is not allowed on a {node.kind.value} node")
        if node.severity is not None and not (SEVERITY_MIN <= node.severity <= SEVERITY_MAX):
            issues.error(node_id, f"severity {node.severity} outside {SEVERITY_MIN}..{SEVERITY_MAX}")
        if node.lead_time is not None and node.lead_time < 0:
            issues.error(node_id, f"lead_time {node.lead_time} is negative")
        if tm is not None and node.task_ref is not None and node.task_ref not in tm.nodes:
            issues.error(node_id, f"dangling task_ref: {node.task_ref}")

    indegree: dict[str, int] = {nid: 0 for nid in cg.nodes}
    outdegree: dict[str, int] = {nid: 0 for nid in cg.nodes}
    for edge in cg.edges:
        where = f"{edge.src}->{edge.dst}"
        if edge.src not in cg.nodes or edge.dst not in cg.nodes:
            issues.error(where, "edge references an unknown node")
            continue
        indegree[edge.dst] += 1
        outdegree[edge.src] += 1
        src = cg.nodes[edge.src]
        dst = cg.nodes[edge.dst]
        if src.kind is NodeKind.CONSEQUENCE:
            issues.error(where, "consequence has outgoing edge")
        if dst.kind is NodeKind.ACTION and edge.kind is EdgeKind.CAUSAL:
            issues.error(where, "action has incoming causal edge")
        if edge.kind is EdgeKind.SUBSUMPTION and not (
            src.kind is NodeKind.EVENT and dst.kind is NodeKind.EVENT
        ):
            issues.error(where, "subsumption edge must connect EVENT to EVENT")

    for node in cg.of_kind(NodeKind.GATE):
        if indegree.get(node.id, 0) < 2:
            issues.error(node.id, "gate requires at least 2 incoming edges")
        if outdegree.get(node.id, 0) < 1:
            issues.error(node.id, "gate requires at least 1 outgoing edge")

    if len(cg.topological_order) != len(cg.nodes):
        stuck = sorted(set(cg.nodes) - set(cg.topological_order))
        issues.error(",".join(stuck), "cycle in causality graph")

    # Consequences nobody can cause are almost certainly authoring mistakes.
    sources = [n.id for n in cg.of_kind(NodeKind.ACTION) + cg.of_kind(NodeKind.BARRIER)]
    reachable: set[str] = set()
    frontier = list(sources)
    while frontier:
        nid = frontier.pop()
        for edge in cg.successors.get(nid, ()):
            if edge.dst not in reachable:
                reachable.add(edge.dst)
                frontier.append(edge.dst)
    for node in cg.of_kind(NodeKind.CONSEQUENCE):
        if node.id not in reachable:
            issues.warning(node.id, "consequence unreachable from any action or barrier")

    return issues.report()


def validate_world_model(wm: WorldModel) -> ValidationReport:
    issues = _Issues()
    for cls in wm.classes:
        if not _valid_identifier(cls):
            issues.error(cls, "class name is not a valid identifier")
    declared = set(wm.classes)
    for inst_id, inst in sorted(wm.instances.items()):
        if not _valid_identifier(inst_id):
            issues.error(inst_id, "instance id is not a valid identifier")
        if inst.class_name not in declared:
            issues.error(inst_id, f"instance of undeclared class: {inst.class_name}")
        for cond in inst.properties:
            _check_condition(issues, inst_id, cond)
    return issues.report()
