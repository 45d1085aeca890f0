"""Candidate pipeline: screen the causality graph for harmful omissions and
actions, pair tasks into obligation and prohibition candidates, filter them
for instantiation compatibility, confirm each survivor by propagation, and
hand the result to the ranker.

Obligation candidates pair tasks that must both be done but cannot be
(conflicting postconditions, each omission reaching harm). Prohibition
candidates pair tasks that must both be avoided but cannot both be refused
(each performance reaching harm, the joint omission feeding an AND gate that
reaches harm).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .causality import (
    ConsequenceOutcome,
    NegativeSource,
    common_and_gates,
    gate_consequences,
    negative_actions,
    negative_barriers,
)
from .knowledge import (
    Constructor,
    DanglingTaskRef,
    TaskModel,
    condition_set_conflict,
    lowest_common_ancestor,
)
from .model_io import ModelBundle
from .scoring import (
    DEFAULT_CONSTANTS,
    DilemmaFilter,
    PedagogicalInstruction,
    ScoreBreakdown,
    ScoringConstants,
    rank,
)


class DilemmaType(str, Enum):
    OBLIGATION = "OBLIGATION"
    PROHIBITION = "PROHIBITION"


@dataclass(frozen=True)
class DilemmaCandidate:
    """An unordered task pair with the consequence evidence that makes it a
    dilemma. Stored with task_a < task_b so equal pairs compare equal."""

    type: DilemmaType
    task_a: str
    task_b: str
    evidence_a: tuple[ConsequenceOutcome, ...]
    evidence_b: tuple[ConsequenceOutcome, ...]
    nonchoice_evidence: tuple[ConsequenceOutcome, ...] = ()
    score: ScoreBreakdown | None = None

    def key(self) -> tuple[str, str, str]:
        return (self.type.value, self.task_a, self.task_b)


def make_candidate(
    type_: DilemmaType,
    t1: str,
    evidence_1: tuple[ConsequenceOutcome, ...],
    t2: str,
    evidence_2: tuple[ConsequenceOutcome, ...],
    nonchoice: tuple[ConsequenceOutcome, ...] = (),
) -> DilemmaCandidate:
    """Canonicalize the pair ordering, keeping evidence attached to its task."""
    if t1 == t2:
        raise ValueError("a dilemma candidate needs two distinct tasks")
    if t2 < t1:
        t1, t2 = t2, t1
        evidence_1, evidence_2 = evidence_2, evidence_1
    return DilemmaCandidate(
        type=type_,
        task_a=t1,
        task_b=t2,
        evidence_a=evidence_1,
        evidence_b=evidence_2,
        nonchoice_evidence=nonchoice,
    )


def _merge_by_task(sources: tuple[NegativeSource, ...]) -> dict[str, tuple[ConsequenceOutcome, ...]]:
    """A task may be carried by several nodes; merge their outcomes."""
    merged: dict[str, set[ConsequenceOutcome]] = {}
    for source in sources:
        merged.setdefault(source.task, set()).update(source.outcomes)
    return {
        task: tuple(sorted(outcomes, key=ConsequenceOutcome.sort_key))
        for task, outcomes in merged.items()
    }


def _require_tasks(tm: TaskModel, tasks) -> None:
    for task in tasks:
        if task not in tm.nodes:
            raise DanglingTaskRef(f"causality graph references unknown task: {task}")


def contradictory_pairs(
    tm: TaskModel, barriers: tuple[NegativeSource, ...]
) -> tuple[DilemmaCandidate, ...]:
    """Obligation pairing (step 2.1): among tasks whose omission reaches harm,
    keep the pairs whose postcondition sets conflict."""
    by_task = _merge_by_task(barriers)
    _require_tasks(tm, by_task)
    tasks = sorted(by_task)
    out = []
    for i, t1 in enumerate(tasks):
        for t2 in tasks[i + 1:]:
            if condition_set_conflict(tm.node(t1).post, tm.node(t2).post):
                out.append(
                    make_candidate(
                        DilemmaType.OBLIGATION, t1, by_task[t1], t2, by_task[t2]
                    )
                )
    return tuple(out)


def prohibition_pairs(
    bundle: ModelBundle, actions: tuple[NegativeSource, ...]
) -> tuple[DilemmaCandidate, ...]:
    """Prohibition pairing (step 2.3): among tasks whose performance reaches
    harm, keep the pairs whose barrier sides share an AND gate that still
    reaches harm, so refusing both is penalized too.

    A task qualifies only when the graph carries it both as an action (the
    harm of doing it) and as a barrier (the harm of refusing it); pairs
    without the barrier side are skipped.
    """
    cg = bundle.causality
    by_task = _merge_by_task(actions)
    _require_tasks(bundle.task_model, by_task)
    tasks = sorted(by_task)
    out = []
    for i, t1 in enumerate(tasks):
        for t2 in tasks[i + 1:]:
            barriers_1 = cg.barriers_by_task.get(t1, ())
            barriers_2 = cg.barriers_by_task.get(t2, ())
            gates: set[str] = set()
            for b1 in barriers_1:
                for b2 in barriers_2:
                    gates.update(common_and_gates(cg, b1, b2))
            if not gates:
                continue
            nonchoice: set[ConsequenceOutcome] = set()
            for gate in sorted(gates):
                nonchoice.update(gate_consequences(cg, gate))
            out.append(
                make_candidate(
                    DilemmaType.PROHIBITION,
                    t1,
                    by_task[t1],
                    t2,
                    by_task[t2],
                    nonchoice=tuple(sorted(nonchoice, key=ConsequenceOutcome.sort_key)),
                )
            )
    return tuple(out)


def contextually_compatible(tm: TaskModel, c: DilemmaCandidate) -> bool:
    """Step 3.1: one world state can enable both tasks at once."""
    _require_tasks(tm, (c.task_a, c.task_b))
    return not condition_set_conflict(
        tm.node(c.task_a).pre_contextual, tm.node(c.task_b).pre_contextual
    )


def temporally_compatible(tm: TaskModel, c: DilemmaCandidate) -> bool:
    """Step 3.2: the closest shared ancestor leaves the two tasks unordered
    (parallel or independent constructor)."""
    _require_tasks(tm, (c.task_a, c.task_b))
    ancestor = lowest_common_ancestor(tm, c.task_a, c.task_b)
    return tm.node(ancestor).constructor in (Constructor.PAR, Constructor.IND)


@dataclass
class PipelineResult:
    """Every intermediate stage of one generation run, for inspection."""

    barriers: tuple[NegativeSource, ...] = ()
    actions: tuple[NegativeSource, ...] = ()
    pairs: tuple[DilemmaCandidate, ...] = ()
    compatible: tuple[DilemmaCandidate, ...] = ()
    confirmed: tuple[DilemmaCandidate, ...] = ()
    rejected: tuple[tuple[DilemmaCandidate, str], ...] = ()
    ranked: list[DilemmaCandidate] = field(default_factory=list)


def run_pipeline(
    bundle: ModelBundle,
    instruction: PedagogicalInstruction | None = None,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> PipelineResult:
    """Full generation pipeline with stage-by-stage outputs."""
    from .verifier import verify_obligation, verify_prohibition

    instruction = instruction or PedagogicalInstruction()
    tm = bundle.task_model
    result = PipelineResult()

    result.barriers = negative_barriers(bundle.causality)
    result.actions = negative_actions(bundle.causality)

    pairs = list(contradictory_pairs(tm, result.barriers))
    pairs.extend(prohibition_pairs(bundle, result.actions))
    pairs.sort(key=DilemmaCandidate.key)
    result.pairs = tuple(pairs)

    rejected: list[tuple[DilemmaCandidate, str]] = []
    compatible = []
    for cand in pairs:
        if not contextually_compatible(tm, cand):
            rejected.append((cand, "contextually incompatible preconditions"))
        elif not temporally_compatible(tm, cand):
            rejected.append((cand, "common ancestor orders the tasks"))
        else:
            compatible.append(cand)
    result.compatible = tuple(compatible)

    # Path-based screening can admit pairs whose harm sits behind a starved
    # AND gate; confirm every survivor against the propagation semantics.
    confirmed = []
    for cand in compatible:
        if cand.type is DilemmaType.OBLIGATION:
            report = verify_obligation(bundle, cand.task_a, cand.task_b)
        else:
            report = verify_prohibition(bundle, cand.task_a, cand.task_b)
        if report.holds:
            confirmed.append(cand)
        else:
            failed = ", ".join(check.name for check in report.checks if not check.passed)
            rejected.append((cand, f"propagation check failed: {failed}"))
    result.confirmed = tuple(confirmed)
    result.rejected = tuple(rejected)

    wanted = confirmed
    if instruction.dilemma_type is not DilemmaFilter.BOTH:
        wanted = [c for c in confirmed if c.type.value == instruction.dilemma_type.value]
    result.ranked = rank(wanted, instruction, bundle, constants)
    return result


def generate(
    bundle: ModelBundle,
    instruction: PedagogicalInstruction | None = None,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> list[DilemmaCandidate]:
    """Ranked dilemma candidates for the bundle; empty list when no pair
    survives screening, compatibility and propagation."""
    return run_pipeline(bundle, instruction, constants).ranked
