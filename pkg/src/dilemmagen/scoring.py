"""Candidate ranking against pedagogical and scenaristic constraints, and
goal-state extraction for the selected pair.

The constraint set is fixed (gravity bounds, gravity gap, required
consequence categories, entity availability, event lead times); the exact
composition below favours bounded, monotone, auditable terms: every term
lives in [0, 1], the pedagogical side multiplies its terms, availability is a
geometric mean, and lead times discount hyperbolically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING

from .knowledge import (
    CausalityGraph,
    Condition,
    ConflictingGoal,
    ConsequenceCategory,
    SEVERITY_MAX,
    SEVERITY_MIN,
    TaskModel,
    WorldModel,
    condition_set_conflict,
    condition_tuple,
)

if TYPE_CHECKING:
    from .generator import DilemmaCandidate
    from .model_io import ModelBundle


class DilemmaFilter(str, Enum):
    """Which dilemma types an instruction asks for."""

    OBLIGATION = "OBLIGATION"
    PROHIBITION = "PROHIBITION"
    BOTH = "BOTH"


@dataclass(frozen=True)
class ScoringConstants:
    tau_seconds: float = 60.0
    gravity_scale: int = SEVERITY_MAX


DEFAULT_CONSTANTS = ScoringConstants()


def parse_scoring_constants(text: str) -> ScoringConstants:
    """Optional overrides file: {"tau_seconds": ..., "gravity_scale": ...}."""
    from .model_io import ParseError, SchemaError

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("scoring constants: expected an object")
    unknown = doc.keys() - {"tau_seconds", "gravity_scale"}
    if unknown:
        raise SchemaError(f"scoring constants: unknown field {sorted(unknown)[0]}")
    constants = ScoringConstants(
        tau_seconds=float(doc.get("tau_seconds", DEFAULT_CONSTANTS.tau_seconds)),
        gravity_scale=int(doc.get("gravity_scale", DEFAULT_CONSTANTS.gravity_scale)),
    )
    if constants.tau_seconds <= 0 or constants.gravity_scale <= 0:
        raise SchemaError("scoring constants must be positive")
    return constants


@dataclass(frozen=True)
class PedagogicalInstruction:
    """What the trainer (or the learner-diagnosis side) asks the engine for."""

    dilemma_type: DilemmaFilter = DilemmaFilter.BOTH
    gravity_min: int = SEVERITY_MIN
    gravity_max: int = SEVERITY_MAX
    gravity_gap_target: int = 0
    required_categories: frozenset[ConsequenceCategory] = frozenset()
    weight_pedagogical: float = 0.5
    weight_scenaristic: float = 0.5

    def __post_init__(self):
        if not (SEVERITY_MIN <= self.gravity_min <= SEVERITY_MAX):
            raise ValueError(f"gravity_min {self.gravity_min} outside {SEVERITY_MIN}..{SEVERITY_MAX}")
        if not (SEVERITY_MIN <= self.gravity_max <= SEVERITY_MAX):
            raise ValueError(f"gravity_max {self.gravity_max} outside {SEVERITY_MIN}..{SEVERITY_MAX}")
        if self.gravity_min > self.gravity_max:
            raise ValueError("gravity_min must not exceed gravity_max")
        if self.gravity_gap_target < 0:
            raise ValueError("gravity_gap_target must be non-negative")
        for weight in (self.weight_pedagogical, self.weight_scenaristic):
            if not (0.0 <= weight <= 1.0):
                raise ValueError("weights must lie in [0, 1]")
        if self.weight_pedagogical == 0.0 and self.weight_scenaristic == 0.0:
            raise ValueError("weights must not both be zero")

    @classmethod
    def from_criticality(cls, criticality: int, **overrides) -> PedagogicalInstruction:
        """Convenience preset: criticality k maps to gravity bounds k-1..k+1,
        clamped to the severity scale."""
        if not (SEVERITY_MIN <= criticality <= SEVERITY_MAX):
            raise ValueError(f"criticality {criticality} outside {SEVERITY_MIN}..{SEVERITY_MAX}")
        bounds = {
            "gravity_min": max(SEVERITY_MIN, criticality - 1),
            "gravity_max": min(SEVERITY_MAX, criticality + 1),
        }
        bounds.update(overrides)
        return cls(**bounds)


@dataclass(frozen=True)
class ScoreBreakdown:
    pedagogical_fit: float
    scenario_fit: float
    total: float
    details: dict[str, float]

    @property
    def raw_availability(self) -> float:
        return self.details.get("raw_availability", 0.0)


@dataclass(frozen=True)
class GoalState:
    """Aggregated contextual preconditions the planner must bring about."""

    conditions: tuple[Condition, ...]
    for_candidate: tuple[str, str]


def _max_severity(outcomes) -> int:
    return max(o.severity for o in outcomes)


def pedagogical_fit(
    c: DilemmaCandidate,
    instr: PedagogicalInstruction,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> tuple[float, dict[str, float]]:
    """How well the pair's harm profile matches the instruction.

    bounds_term gates on both sides' peak gravity lying inside
    [gravity_min, gravity_max]; gap_term penalizes distance from the target
    gravity gap linearly over the scale; category_term gates on every
    required category appearing on both sides.
    """
    g_a = _max_severity(c.evidence_a)
    g_b = _max_severity(c.evidence_b)

    in_bounds = instr.gravity_min <= min(g_a, g_b) and max(g_a, g_b) <= instr.gravity_max
    bounds_term = 1.0 if in_bounds else 0.0

    gap = abs(g_a - g_b)
    gap_term = max(0.0, 1.0 - abs(gap - instr.gravity_gap_target) / constants.gravity_scale)

    cats_a = {o.category for o in c.evidence_a}
    cats_b = {o.category for o in c.evidence_b}
    covered = instr.required_categories <= cats_a and instr.required_categories <= cats_b
    category_term = 1.0 if covered else 0.0

    fit = bounds_term * category_term * gap_term
    return fit, {"bounds_term": bounds_term, "gap_term": gap_term, "category_term": category_term}


def _condition_counts(cond: Condition, wm: WorldModel) -> list[int]:
    """Class counts the condition depends on.

    An identifier mentions a class either directly or through a declared
    instance of it; anything else is neutral and contributes no count.
    """
    counts = []
    for mention in (cond.subject, cond.obj):
        if not isinstance(mention, str):
            continue
        if mention in wm.class_counts:
            counts.append(wm.class_counts[mention])
        elif mention in wm.instances:
            counts.append(wm.class_counts.get(wm.instances[mention].class_name, 0))
    return counts


def _lead_time_max(c: DilemmaCandidate, cg: CausalityGraph) -> float:
    lead = 0.0
    for outcome in c.evidence_a + c.evidence_b + c.nonchoice_evidence:
        for node_id in outcome.via:
            node = cg.nodes.get(node_id)
            if node is not None and node.lead_time is not None:
                lead = max(lead, node.lead_time)
    return lead


def scenario_fit(
    c: DilemmaCandidate,
    tm: TaskModel,
    wm: WorldModel,
    cg: CausalityGraph,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> tuple[float, dict[str, float]]:
    """How instantiable the pair is in the current world.

    availability_term is the geometric mean, over the contextual
    preconditions of both tasks, of min(1, count) where count is the scarcest
    world class the condition mentions (neutral conditions contribute 1, an
    absent class contributes 0). The raw counts are kept for tie-breaking.
    temporality_term discounts long lead times: 1 / (1 + L / tau).
    """
    conditions = condition_tuple(
        tm.node(c.task_a).pre_contextual + tm.node(c.task_b).pre_contextual
    )

    terms = []
    raw_total = 0.0
    for cond in conditions:
        counts = _condition_counts(cond, wm)
        if not counts:
            terms.append(1.0)
            continue
        scarcest = min(counts)
        raw_total += scarcest
        terms.append(min(1.0, float(scarcest)))
    availability = math.prod(terms) ** (1.0 / len(terms)) if terms else 1.0

    lead = _lead_time_max(c, cg)
    temporality = 1.0 / (1.0 + lead / constants.tau_seconds)

    fit = availability * temporality
    return fit, {
        "availability_term": availability,
        "temporality_term": temporality,
        "raw_availability": raw_total,
    }


def score_candidate(
    c: DilemmaCandidate,
    instr: PedagogicalInstruction,
    bundle: ModelBundle,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> ScoreBreakdown:
    ped, ped_details = pedagogical_fit(c, instr, constants)
    scen, scen_details = scenario_fit(
        c, bundle.task_model, bundle.world, bundle.causality, constants
    )
    w_p = instr.weight_pedagogical
    w_s = instr.weight_scenaristic
    total = (w_p * ped + w_s * scen) / (w_p + w_s)
    details = dict(sorted({**ped_details, **scen_details}.items()))
    return ScoreBreakdown(pedagogical_fit=ped, scenario_fit=scen, total=total, details=details)


def rank(
    cands,
    instr: PedagogicalInstruction,
    bundle: ModelBundle,
    constants: ScoringConstants = DEFAULT_CONSTANTS,
) -> list[DilemmaCandidate]:
    """Score and order candidates.

    Descending total, then descending raw availability, then the task pair
    alphabetically. Zero-scored candidates stay in the list (flagged in the
    result document) so callers can explain why nothing satisfied the
    instruction.
    """
    scored = [replace(c, score=score_candidate(c, instr, bundle, constants)) for c in cands]
    scored.sort(
        key=lambda c: (-c.score.total, -c.score.raw_availability, c.task_a, c.task_b)
    )
    return scored


def extract_goal_state(c: DilemmaCandidate, tm: TaskModel) -> GoalState:
    """Union of both tasks' contextual preconditions.

    Contextual compatibility upstream guarantees conflict-freedom; it is
    re-checked here because a conflicting goal state would send the planner
    after an impossible world.
    """
    conditions = condition_tuple(
        tm.node(c.task_a).pre_contextual + tm.node(c.task_b).pre_contextual
    )
    if condition_set_conflict(conditions, conditions):
        raise ConflictingGoal(
            f"goal state for ({c.task_a}, {c.task_b}) conflicts internally"
        )
    return GoalState(conditions=conditions, for_candidate=(c.task_a, c.task_b))
