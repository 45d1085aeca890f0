"""Random valid model bundles for property and oracle-equivalence tests.

The builder assembles bundles from small causal substructures with fresh
intermediate nodes, so every generated model validates and stays desk-scale
(at most 12 tasks and 25 causal nodes). Tasks that appear both as actions and
as barriers are only produced by the forced-choice substructure, whose
barrier sides feed a dedicated AND gate; ordinary preventive tasks never get
action nodes. That mirrors how such models are authored and keeps every
generated shape inside the semantics both engines implement.
"""

from __future__ import annotations

import random

from dilemmagen import (
    CausalityGraph,
    CausalNode,
    Condition,
    ConsequenceCategory,
    Constructor,
    Edge,
    EdgeKind,
    GateType,
    ModelBundle,
    NodeKind,
    TaskModel,
    TaskNode,
    WorldInstance,
    WorldModel,
    build_bundle,
)
from dilemmagen.knowledge import condition_tuple

MAX_TASKS = 12
MAX_CAUSAL_NODES = 25

_SUBJECTS = ["S0", "S1", "C0", "C1"]
_PREDICATES = ["p0", "p1"]
_OBJECTS = [True, False, "v0", "v1", 1, 2]
_CATEGORIES = list(ConsequenceCategory)


def _random_conditions(rng: random.Random, count: int) -> tuple[Condition, ...]:
    conds = [
        Condition(rng.choice(_SUBJECTS), rng.choice(_PREDICATES), rng.choice(_OBJECTS))
        for _ in range(count)
    ]
    return condition_tuple(conds)


def _random_task_tree(rng: random.Random, leaf_ids: list[str]) -> TaskModel:
    nodes: dict[str, TaskNode] = {}
    counter = [0]

    def build(ids: list[str]) -> str:
        if len(ids) == 1:
            leaf = ids[0]
            nodes[leaf] = TaskNode(
                id=leaf,
                name=leaf,
                constructor=Constructor.LEAF,
                pre_contextual=_random_conditions(rng, rng.randint(0, 2)),
                pre_favorable=_random_conditions(rng, rng.randint(0, 1)),
                post=_random_conditions(rng, rng.randint(0, 2)),
            )
            return leaf
        split = rng.randint(1, len(ids) - 1)
        groups = [ids[:split], ids[split:]]
        children = tuple(build(group) for group in groups)
        counter[0] += 1
        parent = f"grp{counter[0]}"
        nodes[parent] = TaskNode(
            id=parent,
            name=parent,
            constructor=rng.choice([Constructor.SEQ, Constructor.PAR, Constructor.IND]),
            children=children,
        )
        return parent

    root = build(leaf_ids)
    return TaskModel(root=root, nodes=nodes)


class _GraphBuilder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.nodes: dict[str, CausalNode] = {}
        self.edges: list[Edge] = []
        self.counter = 0

    def remaining(self) -> int:
        return MAX_CAUSAL_NODES - len(self.nodes)

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def add(self, node: CausalNode) -> str:
        self.nodes[node.id] = node
        return node.id

    def event(self, prefix: str = "e") -> str:
        return self.add(CausalNode(id=self.fresh(prefix), kind=NodeKind.EVENT, label="event"))

    def consequence(self) -> str:
        return self.add(
            CausalNode(
                id=self.fresh("nc"),
                kind=NodeKind.CONSEQUENCE,
                label="harm",
                category=self.rng.choice(_CATEGORIES),
                severity=self.rng.randint(0, 5),
            )
        )

    def barrier(self, task: str) -> str:
        return self.add(
            CausalNode(
                id=self.fresh("bar"), kind=NodeKind.BARRIER, label=f"omit {task}", task_ref=task
            )
        )

    def action(self, task: str) -> str:
        lead = self.rng.choice([None, None, float(self.rng.randint(5, 120))])
        return self.add(
            CausalNode(
                id=self.fresh("act"),
                kind=NodeKind.ACTION,
                label=f"do {task}",
                task_ref=task,
                lead_time=lead,
            )
        )

    def link(self, src: str, dst: str, kind: EdgeKind = EdgeKind.CAUSAL) -> None:
        self.edges.append(Edge(src=src, dst=dst, kind=kind))

    def chain_to_consequence(self, start: str, hops: int) -> str:
        current = start
        for _ in range(hops):
            nxt = self.event()
            self.link(current, nxt)
            current = nxt
        harm = self.consequence()
        self.link(current, harm)
        return harm

    def barrier_structure(self, task: str, interposer: str | None) -> None:
        """Root (or event-triggered) barrier whose omission reaches harm,
        optionally with a second branch guarded by another task's barrier."""
        barrier = self.barrier(task)
        if self.rng.random() < 0.7:
            trigger = self.event("root")
            self.link(trigger, barrier)
        shape = self.rng.random()
        if shape < 0.15:
            dead = self.event()
            self.link(barrier, dead)  # harmless downstream: screened out
            return
        if interposer is not None and shape < 0.45 and self.remaining() >= 5:
            mid = self.event()
            self.link(barrier, mid)
            guard = self.barrier(interposer)
            self.link(mid, guard)
            self.chain_to_consequence(guard, self.rng.randint(0, 1))
            if self.rng.random() < 0.5 and self.remaining() >= 3:
                self.chain_to_consequence(barrier, self.rng.randint(0, 1))
            return
        self.chain_to_consequence(barrier, self.rng.randint(0, 2))

    def action_structure(self, task: str, guard_task: str | None) -> None:
        """Action whose performance reaches harm, possibly behind a barrier."""
        action = self.action(task)
        if guard_task is not None and self.rng.random() < 0.3 and self.remaining() >= 4:
            mid = self.event()
            self.link(action, mid)
            guard = self.barrier(guard_task)
            self.link(mid, guard)
            self.chain_to_consequence(guard, 0)
            return
        self.chain_to_consequence(action, self.rng.randint(0, 1))

    def forced_choice_structure(self, task_a: str, task_b: str) -> None:
        """Both tasks harmful to perform, refusing both harmful as well."""
        trigger = self.event("root")
        barrier_a = self.barrier(task_a)
        barrier_b = self.barrier(task_b)
        self.link(trigger, barrier_a)
        self.link(trigger, barrier_b)
        gate = self.add(
            CausalNode(
                id=self.fresh("and"), kind=NodeKind.GATE, label="joint omission",
                gate_type=GateType.AND,
            )
        )
        self.link(barrier_a, gate)
        self.link(barrier_b, gate)
        self.link(gate, self.consequence())
        for task in (task_a, task_b):
            self.chain_to_consequence(self.action(task), 0)

    def subsumption_noise(self) -> None:
        events = [n.id for _, n in sorted(self.nodes.items()) if n.kind is NodeKind.EVENT]
        if not events or self.remaining() < 3:
            return
        specific = self.rng.choice(events)
        general = self.event("gen")
        self.link(specific, general, EdgeKind.SUBSUMPTION)
        if self.rng.random() < 0.5:
            self.link(general, self.consequence())

    def graph(self) -> CausalityGraph:
        edges = tuple(sorted(set(self.edges), key=Edge.sort_key))
        return CausalityGraph(nodes=self.nodes, edges=edges)


def _random_world(rng: random.Random) -> WorldModel:
    classes = ("C0", "C1")
    instances: dict[str, WorldInstance] = {}
    counter = 0
    for cls in classes:
        for _ in range(rng.randint(0, 3)):
            counter += 1
            instances[f"inst{counter}"] = WorldInstance(class_name=cls)
    return WorldModel(classes=classes, instances=instances)


def build_random_bundle(rng: random.Random) -> ModelBundle:
    """One random, valid, desk-scale bundle."""
    leaf_count = rng.randint(3, 6)
    leaves = [f"T{i}" for i in range(leaf_count)]
    tm = _random_task_tree(rng, leaves)
    assert len(tm.nodes) <= MAX_TASKS

    builder = _GraphBuilder(rng)
    pool = list(leaves)
    rng.shuffle(pool)

    if len(pool) >= 2 and rng.random() < 0.35:
        task_a, task_b = pool.pop(), pool.pop()
        builder.forced_choice_structure(task_a, task_b)

    barrier_tasks: list[str] = []
    while pool and builder.remaining() >= 6 and rng.random() < 0.75:
        task = pool.pop()
        barrier_tasks.append(task)
        interposer = rng.choice(barrier_tasks) if len(barrier_tasks) > 1 else None
        builder.barrier_structure(task, interposer)

    while pool and builder.remaining() >= 4 and rng.random() < 0.5:
        task = pool.pop()
        guard = rng.choice(barrier_tasks) if barrier_tasks else None
        builder.action_structure(task, guard)

    for _ in range(rng.randint(0, 2)):
        builder.subsumption_noise()

    cg = builder.graph()
    assert len(cg.nodes) <= MAX_CAUSAL_NODES
    return build_bundle(tm, cg, _random_world(rng))
