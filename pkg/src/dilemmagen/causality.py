"""Reachability and propagation semantics over the causality graph.

Two complementary views live here. The path view (unguarded_consequences and
the negative_* screens) asks which harms a single barrier or action can reach
without another barrier standing in the way; it deliberately ignores AND-gate
satisfaction. The propagation view (propagate) evaluates a whole activation
scenario to a truth value per node, honouring barrier holds and gate logic.
The candidate pipeline screens with the path view and confirms with the
propagation view.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .knowledge import (
    CausalityGraph,
    ConsequenceCategory,
    GateType,
    NodeKind,
    UnknownNode,
    WrongKind,
)

if TYPE_CHECKING:
    from .model_io import ModelBundle


@dataclass(frozen=True)
class ConsequenceOutcome:
    """A reachable harm plus one witnessing path.

    The path starts at the queried source (or at the last transmitting
    barrier for propagation witnesses) and contains no other barrier.
    """

    node: str
    category: ConsequenceCategory
    severity: int
    via: tuple[str, ...]

    def sort_key(self) -> tuple[str, tuple[str, ...]]:
        return (self.node, self.via)


@dataclass(frozen=True)
class ActivationScenario:
    """What the agent does (performed_tasks) and what the environment
    asserts exogenously (ambient_events)."""

    performed_tasks: frozenset[str] = frozenset()
    ambient_events: frozenset[str] = frozenset()


@dataclass(frozen=True)
class NegativeSource:
    """A barrier or action node whose omission/performance reaches harm."""

    node: str
    task: str
    outcomes: tuple[ConsequenceOutcome, ...]


def _outcome(cg: CausalityGraph, consequence_id: str, via: tuple[str, ...]) -> ConsequenceOutcome:
    node = cg.nodes[consequence_id]
    return ConsequenceOutcome(
        node=consequence_id,
        category=node.category,
        severity=node.severity,
        via=via,
    )


def _unguarded_from(cg: CausalityGraph, source: str) -> tuple[ConsequenceOutcome, ...]:
    """Consequences reachable from source along paths free of other barriers.

    Breadth-first with sorted expansion, so each witnessing path is the
    shortest one and deterministic across runs.
    """
    parent: dict[str, str] = {source: ""}
    found: list[str] = []
    queue = deque([source])
    while queue:
        current = queue.popleft()
        node = cg.nodes[current]
        if current != source and node.kind is NodeKind.BARRIER:
            continue  # another barrier guards everything beyond this point
        if current != source and node.kind is NodeKind.CONSEQUENCE:
            found.append(current)
            continue  # consequences have no outgoing edges anyway
        for edge in cg.successors.get(current, ()):
            if edge.dst not in parent:
                parent[edge.dst] = current
                queue.append(edge.dst)

    outcomes = []
    for consequence_id in sorted(found):
        path = [consequence_id]
        while path[-1] != source:
            path.append(parent[path[-1]])
        outcomes.append(_outcome(cg, consequence_id, tuple(reversed(path))))
    return tuple(outcomes)


def unguarded_consequences(cg: CausalityGraph, source: str) -> tuple[ConsequenceOutcome, ...]:
    """Harms a barrier's omission (or an action's performance) can reach
    with no other barrier on the way. Gates are traversed as plain nodes."""
    node = cg.node(source)
    if node.kind not in (NodeKind.BARRIER, NodeKind.ACTION):
        raise WrongKind(f"{source} is a {node.kind.value} node, expected BARRIER or ACTION")
    return _unguarded_from(cg, source)


def negative_barriers(cg: CausalityGraph) -> tuple[NegativeSource, ...]:
    """Barriers whose downstream events reach harm unguarded (step 1.1)."""
    out = []
    for node in cg.of_kind(NodeKind.BARRIER):
        outcomes = _unguarded_from(cg, node.id)
        if outcomes:
            out.append(NegativeSource(node=node.id, task=node.task_ref, outcomes=outcomes))
    return tuple(out)


def negative_actions(cg: CausalityGraph) -> tuple[NegativeSource, ...]:
    """Actions whose performance reaches harm unguarded (step 1.2)."""
    out = []
    for node in cg.of_kind(NodeKind.ACTION):
        outcomes = _unguarded_from(cg, node.id)
        if outcomes:
            out.append(NegativeSource(node=node.id, task=node.task_ref, outcomes=outcomes))
    return tuple(out)


def _descendants(cg: CausalityGraph, start: str) -> set[str]:
    seen: set[str] = set()
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for edge in cg.successors.get(current, ()):
            if edge.dst not in seen:
                seen.add(edge.dst)
                frontier.append(edge.dst)
    return seen


def common_and_gates(cg: CausalityGraph, n1: str, n2: str) -> tuple[str, ...]:
    """AND gates downstream of both nodes that still reach harm unguarded."""
    cg.node(n1)
    cg.node(n2)
    shared = _descendants(cg, n1) & _descendants(cg, n2)
    gates = []
    for node_id in sorted(shared):
        node = cg.nodes[node_id]
        if node.kind is NodeKind.GATE and node.gate_type is GateType.AND:
            if _unguarded_from(cg, node_id):
                gates.append(node_id)
    return tuple(gates)


def common_and_descendant(cg: CausalityGraph, n1: str, n2: str) -> bool:
    return bool(common_and_gates(cg, n1, n2))


def gate_consequences(cg: CausalityGraph, gate_id: str) -> tuple[ConsequenceOutcome, ...]:
    """Harms a gate's firing reaches with no barrier on the way."""
    node = cg.node(gate_id)
    if node.kind is not NodeKind.GATE:
        raise WrongKind(f"{gate_id} is a {node.kind.value} node, expected GATE")
    return _unguarded_from(cg, gate_id)


def _check_scenario(bundle: ModelBundle, scenario: ActivationScenario) -> None:
    for task in scenario.performed_tasks:
        if task not in bundle.task_model.nodes:
            raise UnknownNode(f"performed task not in the task model: {task}")
    for event in scenario.ambient_events:
        node = bundle.causality.node(event)
        if node.kind is not NodeKind.EVENT:
            raise UnknownNode(f"ambient id {event} is a {node.kind.value} node, expected EVENT")


def evaluate_scenario(bundle: ModelBundle, scenario: ActivationScenario) -> dict[str, bool]:
    """Truth value per node under the scenario.

    ACTION fires when its task is performed. BARRIER is held when its task is
    performed and transmits when not held and some predecessor fires (a
    barrier with no predecessors transmits whenever not held). EVENT fires
    when ambient or any incoming edge fires (OR join; subsumption fires the
    general event when the specific one does). GATE applies AND/OR over its
    inputs; CONSEQUENCE triggers on any input. Single pass in topological
    order, which on a DAG is the fixpoint.
    """
    _check_scenario(bundle, scenario)
    cg = bundle.causality
    value: dict[str, bool] = {}
    for node_id in cg.topological_order:
        node = cg.nodes[node_id]
        inputs = [value[e.src] for e in cg.predecessors.get(node_id, ())]
        if node.kind is NodeKind.ACTION:
            fired = node.task_ref in scenario.performed_tasks
        elif node.kind is NodeKind.BARRIER:
            held = node.task_ref in scenario.performed_tasks
            fired = (not held) and (any(inputs) if inputs else True)
        elif node.kind is NodeKind.EVENT:
            fired = node_id in scenario.ambient_events or any(inputs)
        elif node.kind is NodeKind.GATE:
            fired = all(inputs) if node.gate_type is GateType.AND else any(inputs)
        else:  # CONSEQUENCE
            fired = any(inputs)
        value[node_id] = fired
    return value


def triggered_consequences(bundle: ModelBundle, scenario: ActivationScenario) -> frozenset[str]:
    """Ids of consequence nodes the scenario triggers (no witness paths)."""
    value = evaluate_scenario(bundle, scenario)
    return frozenset(
        n.id for n in bundle.causality.of_kind(NodeKind.CONSEQUENCE) if value[n.id]
    )


def _witness_chain(cg: CausalityGraph, value: dict[str, bool], consequence_id: str) -> tuple[str, ...]:
    """Deterministic firing chain ending at the consequence.

    Walks upstream through the lexicographically first firing predecessor,
    then trims the front so the path starts at the last barrier crossed (or
    at the originating root when no barrier is involved).
    """
    chain = [consequence_id]
    current = consequence_id
    while True:
        firing = [e.src for e in cg.predecessors.get(current, ()) if value[e.src]]
        if not firing:
            break
        current = sorted(firing)[0]
        chain.append(current)
    chain.reverse()
    last_barrier = None
    for index, node_id in enumerate(chain[:-1]):
        if cg.nodes[node_id].kind is NodeKind.BARRIER:
            last_barrier = index
    if last_barrier is not None:
        chain = chain[last_barrier:]
    return tuple(chain)


def propagate(bundle: ModelBundle, scenario: ActivationScenario) -> tuple[ConsequenceOutcome, ...]:
    """Consequences triggered by the scenario, each with a witnessing chain."""
    value = evaluate_scenario(bundle, scenario)
    cg = bundle.causality
    out = []
    for node in cg.of_kind(NodeKind.CONSEQUENCE):
        if value[node.id]:
            out.append(_outcome(cg, node.id, _witness_chain(cg, value, node.id)))
    return tuple(out)


def root_events(cg: CausalityGraph) -> tuple[str, ...]:
    """EVENT nodes with no incoming edges; the enumerable ambient contexts."""
    return tuple(
        n.id for n in cg.of_kind(NodeKind.EVENT) if not cg.predecessors.get(n.id, ())
    )


def ancestors(cg: CausalityGraph, start: str) -> set[str]:
    """Every node with a directed path into start, start included."""
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for edge in cg.predecessors.get(current, ()):
            if edge.src not in seen:
                seen.add(edge.src)
                frontier.append(edge.src)
    return seen
