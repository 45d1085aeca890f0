"""Brute-force oracle for the dilemma conditions.

Where the generator screens with path queries and pairs candidates
algorithmically, this module goes back to the defining conditions and checks
them by exhaustive scenario propagation: a harm counts as caused by an
(in)action only when some enumerated context triggers it and flipping that
single task untriggers it. The path side is recomputed here with its own
depth-first search rather than reusing the generator's screens, so the two
routes stay independent down to the traversal.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .causality import (
    ActivationScenario,
    ConsequenceOutcome,
    ancestors,
    propagate,
    root_events,
    triggered_consequences,
)
from .generator import (
    DilemmaCandidate,
    DilemmaType,
    contextually_compatible,
    make_candidate,
    temporally_compatible,
)
from .knowledge import (
    CausalityGraph,
    ModelTooLarge,
    NodeKind,
    UnknownTask,
    condition_set_conflict,
)
from .model_io import ModelBundle

SCENARIO_CAP = 2 ** 16


@dataclass(frozen=True)
class CheckResult:
    """One verified condition, with a replayable witness when it passed."""

    name: str
    passed: bool
    scenario: ActivationScenario | None = None
    outcome: ConsequenceOutcome | None = None
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    pair: tuple[str, str]
    claimed_type: DilemmaType
    checks: tuple[CheckResult, ...]

    @property
    def holds(self) -> bool:
        return all(check.passed for check in self.checks)


def _dfs_unguarded(cg: CausalityGraph, source: str) -> dict[str, tuple[str, ...]]:
    """Consequence id -> one path from source crossing no other barrier.

    Depth-first over sorted successors; deliberately a different traversal
    from the generator's screening queries.
    """
    found: dict[str, tuple[str, ...]] = {}
    visited = {source}

    def walk(node_id: str, trail: tuple[str, ...]) -> None:
        for edge in cg.successors.get(node_id, ()):
            nxt = edge.dst
            if nxt in visited:
                continue
            visited.add(nxt)
            node = cg.nodes[nxt]
            if node.kind is NodeKind.BARRIER:
                continue
            if node.kind is NodeKind.CONSEQUENCE:
                found[nxt] = trail + (nxt,)
                continue
            walk(nxt, trail + (nxt,))

    walk(source, (source,))
    return found


def _plain_descendants(cg: CausalityGraph, start: str) -> set[str]:
    seen: set[str] = set()
    stack = [start]
    while stack:
        for edge in cg.successors.get(stack.pop(), ()):
            if edge.dst not in seen:
                seen.add(edge.dst)
                stack.append(edge.dst)
    return seen


class _Session:
    """Propagation cache shared across the checks of one verification run."""

    def __init__(self, bundle: ModelBundle):
        self.bundle = bundle
        self.cg = bundle.causality
        self.roots = root_events(self.cg)
        self._triggered: dict[tuple[frozenset[str], frozenset[str]], frozenset[str]] = {}
        self._omission: dict[str, CheckResult | None] = {}

    def triggered(self, performed: frozenset[str], ambient: frozenset[str]) -> frozenset[str]:
        key = (performed, ambient)
        hit = self._triggered.get(key)
        if hit is None:
            hit = triggered_consequences(
                self.bundle, ActivationScenario(performed_tasks=performed, ambient_events=ambient)
            )
            self._triggered[key] = hit
        return hit

    def cone_inputs(self, consequence: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """Ambient events and tasks that can influence the consequence."""
        cone = ancestors(self.cg, consequence)
        events = tuple(e for e in self.roots if e in cone)
        tasks: set[str] = set()
        for node_id in cone:
            node = self.cg.nodes[node_id]
            if node.kind in (NodeKind.ACTION, NodeKind.BARRIER):
                tasks.add(node.task_ref)
        return events, tuple(sorted(tasks))

    def scenario_space(
        self, consequence: str, fixed_on: frozenset[str], fixed_off: frozenset[str]
    ):
        """All (performed, ambient) contexts over the consequence's cone,
        with the named tasks pinned on or off. Errors beyond the cap."""
        events, tasks = self.cone_inputs(consequence)
        free = [t for t in tasks if t not in fixed_on and t not in fixed_off]
        size = 2 ** (len(events) + len(free))
        if size > SCENARIO_CAP:
            raise ModelTooLarge(
                f"scenario space for {consequence} has {size} contexts (cap {SCENARIO_CAP})"
            )
        for task_bits in range(2 ** len(free)):
            performed = frozenset(
                t for i, t in enumerate(free) if task_bits >> i & 1
            ) | fixed_on
            for event_bits in range(2 ** len(events)):
                ambient = frozenset(e for i, e in enumerate(events) if event_bits >> i & 1)
                yield performed, ambient

    def witness_outcome(
        self, performed: frozenset[str], ambient: frozenset[str], consequence: str
    ) -> ConsequenceOutcome:
        scenario = ActivationScenario(performed_tasks=performed, ambient_events=ambient)
        for outcome in propagate(self.bundle, scenario):
            if outcome.node == consequence:
                return outcome
        raise AssertionError(f"witness scenario does not trigger {consequence}")

    def omission_harm(self, task: str) -> CheckResult | None:
        """A context where leaving the task undone triggers a harm that doing
        it would have blocked. Cached: the answer does not depend on the
        partner task (its state is part of the enumerated context)."""
        if task in self._omission:
            return self._omission[task]
        result = self._find_omission(task)
        self._omission[task] = result
        return result

    def _find_omission(self, task: str) -> CheckResult | None:
        barrier_nodes = self.cg.barriers_by_task.get(task, ())
        reachable: dict[str, tuple[str, ...]] = {}
        for node_id in barrier_nodes:
            for consequence, path in _dfs_unguarded(self.cg, node_id).items():
                reachable.setdefault(consequence, path)
        for consequence in sorted(reachable):
            for performed, ambient in self.scenario_space(
                consequence, frozenset(), frozenset({task})
            ):
                if consequence not in self.triggered(performed, ambient):
                    continue
                if consequence in self.triggered(performed | {task}, ambient):
                    continue
                scenario = ActivationScenario(performed_tasks=performed, ambient_events=ambient)
                return CheckResult(
                    name="",
                    passed=True,
                    scenario=scenario,
                    outcome=self.witness_outcome(performed, ambient, consequence),
                )
        return None

    def performance_harm(self, task: str, partner: str) -> CheckResult | None:
        """A context where performing the task (the partner left undone)
        triggers a harm that refraining would have avoided."""
        action_nodes = self.cg.actions_by_task.get(task, ())
        reachable: dict[str, tuple[str, ...]] = {}
        for node_id in action_nodes:
            for consequence, path in _dfs_unguarded(self.cg, node_id).items():
                reachable.setdefault(consequence, path)
        for consequence in sorted(reachable):
            for performed, ambient in self.scenario_space(
                consequence, frozenset({task}), frozenset({partner})
            ):
                if consequence not in self.triggered(performed, ambient):
                    continue
                if consequence in self.triggered(performed - {task}, ambient):
                    continue
                return CheckResult(
                    name="",
                    passed=True,
                    scenario=ActivationScenario(performed_tasks=performed, ambient_events=ambient),
                    outcome=self.witness_outcome(performed, ambient, consequence),
                )
        return None

    def nonchoice_harm(self, t1: str, t2: str) -> CheckResult | None:
        """A context where refusing both tasks triggers a harm that doing
        either one would have blocked."""
        down_1: set[str] = set()
        for node_id in self.cg.barriers_by_task.get(t1, ()):
            down_1 |= _plain_descendants(self.cg, node_id)
        down_2: set[str] = set()
        for node_id in self.cg.barriers_by_task.get(t2, ()):
            down_2 |= _plain_descendants(self.cg, node_id)
        shared = {
            nid
            for nid in down_1 & down_2
            if self.cg.nodes[nid].kind is NodeKind.CONSEQUENCE
        }
        for consequence in sorted(shared):
            for performed, ambient in self.scenario_space(
                consequence, frozenset(), frozenset({t1, t2})
            ):
                if consequence not in self.triggered(performed, ambient):
                    continue
                if consequence in self.triggered(performed | {t1}, ambient):
                    continue
                if consequence in self.triggered(performed | {t2}, ambient):
                    continue
                return CheckResult(
                    name="",
                    passed=True,
                    scenario=ActivationScenario(performed_tasks=performed, ambient_events=ambient),
                    outcome=self.witness_outcome(performed, ambient, consequence),
                )
        return None


def _named(result: CheckResult | None, name: str, failure_detail: str) -> CheckResult:
    if result is None:
        return CheckResult(name=name, passed=False, detail=failure_detail)
    return CheckResult(
        name=name, passed=True, scenario=result.scenario, outcome=result.outcome
    )


def _check_pair(bundle: ModelBundle, t1: str, t2: str) -> None:
    if t1 == t2:
        raise ValueError("verification requires two distinct tasks")
    for task in (t1, t2):
        if task not in bundle.task_model.nodes:
            raise UnknownTask(f"unknown task: {task}")


def _exclusivity_check(bundle: ModelBundle, t1: str, t2: str) -> CheckResult:
    tm = bundle.task_model
    conflicting = condition_set_conflict(tm.node(t1).post, tm.node(t2).post)
    detail = "" if conflicting else "postcondition sets are compatible"
    return CheckResult(name="postconditions_mutually_exclusive", passed=conflicting, detail=detail)


def verify_obligation(
    bundle: ModelBundle, t1: str, t2: str, session: _Session | None = None
) -> VerificationReport:
    """Both omissions lead to harm and the tasks cannot both be satisfied."""
    _check_pair(bundle, t1, t2)
    session = session or _Session(bundle)
    checks = (
        _named(
            session.omission_harm(t1),
            "omission_of_first_task_causes_harm",
            f"no context makes omitting {t1} trigger an avoidable harm",
        ),
        _named(
            session.omission_harm(t2),
            "omission_of_second_task_causes_harm",
            f"no context makes omitting {t2} trigger an avoidable harm",
        ),
        _exclusivity_check(bundle, t1, t2),
    )
    return VerificationReport(pair=(t1, t2), claimed_type=DilemmaType.OBLIGATION, checks=checks)


def verify_prohibition(
    bundle: ModelBundle, t1: str, t2: str, session: _Session | None = None
) -> VerificationReport:
    """Either performance leads to harm, and so does refusing both."""
    _check_pair(bundle, t1, t2)
    session = session or _Session(bundle)
    checks = (
        _named(
            session.performance_harm(t1, t2),
            "performing_first_task_causes_harm",
            f"no context makes performing {t1} trigger an avoidable harm",
        ),
        _named(
            session.performance_harm(t2, t1),
            "performing_second_task_causes_harm",
            f"no context makes performing {t2} trigger an avoidable harm",
        ),
        _named(
            session.nonchoice_harm(t1, t2),
            "refusing_both_tasks_causes_harm",
            f"no context makes refusing both {t1} and {t2} trigger an avoidable harm",
        ),
    )
    return VerificationReport(pair=(t1, t2), claimed_type=DilemmaType.PROHIBITION, checks=checks)


def _evidence_from_paths(cg: CausalityGraph, node_ids) -> tuple[ConsequenceOutcome, ...]:
    merged: dict[str, ConsequenceOutcome] = {}
    for node_id in node_ids:
        for consequence, path in _dfs_unguarded(cg, node_id).items():
            node = cg.nodes[consequence]
            merged.setdefault(
                consequence,
                ConsequenceOutcome(
                    node=consequence, category=node.category, severity=node.severity, via=path
                ),
            )
    return tuple(sorted(merged.values(), key=ConsequenceOutcome.sort_key))


def enumerate_dilemmas(bundle: ModelBundle) -> tuple[DilemmaCandidate, ...]:
    """Every task pair that verifies as a dilemma and passes both
    compatibility filters: the ground truth the generator is tested against."""
    tm = bundle.task_model
    cg = bundle.causality
    session = _Session(bundle)
    found: list[DilemmaCandidate] = []
    for t1, t2 in combinations(sorted(tm.nodes), 2):
        obligation = verify_obligation(bundle, t1, t2, session=session)
        prohibition = verify_prohibition(bundle, t1, t2, session=session)
        for report, type_ in ((obligation, DilemmaType.OBLIGATION), (prohibition, DilemmaType.PROHIBITION)):
            if not report.holds:
                continue
            if type_ is DilemmaType.OBLIGATION:
                evidence_1 = _evidence_from_paths(cg, cg.barriers_by_task.get(t1, ()))
                evidence_2 = _evidence_from_paths(cg, cg.barriers_by_task.get(t2, ()))
                nonchoice: tuple[ConsequenceOutcome, ...] = ()
            else:
                evidence_1 = _evidence_from_paths(cg, cg.actions_by_task.get(t1, ()))
                evidence_2 = _evidence_from_paths(cg, cg.actions_by_task.get(t2, ()))
                nonchoice = tuple(
                    check.outcome
                    for check in report.checks
                    if check.name == "refusing_both_tasks_causes_harm" and check.outcome
                )
            candidate = make_candidate(type_, t1, evidence_1, t2, evidence_2, nonchoice=nonchoice)
            if contextually_compatible(tm, candidate) and temporally_compatible(tm, candidate):
                found.append(candidate)
    return tuple(sorted(found, key=DilemmaCandidate.key))
