from __future__ import annotations

import json

import pytest

from dilemmagen import (
    Condition,
    ConflictingGoal,
    ConsequenceCategory,
    DilemmaType,
    PedagogicalInstruction,
    extract_goal_state,
    generate,
    pedagogical_fit,
    rank,
    scenario_fit,
)
from dilemmagen.causality import ConsequenceOutcome
from dilemmagen.generator import make_candidate
from dilemmagen.scoring import DilemmaFilter, ScoringConstants, parse_scoring_constants


def outcome(node, severity, category=ConsequenceCategory.GRAVITY):
    return ConsequenceOutcome(node=node, category=category, severity=severity, via=(node,))


def candidate(sev_a, sev_b, cat_a=ConsequenceCategory.GRAVITY, cat_b=ConsequenceCategory.GRAVITY):
    return make_candidate(
        DilemmaType.OBLIGATION,
        "task_a",
        (outcome("nc_a", sev_a, cat_a),),
        "task_b",
        (outcome("nc_b", sev_b, cat_b),),
    )


class TestPedagogicalFit:
    def test_perfect_fit(self):
        fit, details = pedagogical_fit(candidate(3, 3), PedagogicalInstruction())
        assert fit == 1.0
        assert details == {"bounds_term": 1.0, "gap_term": 1.0, "category_term": 1.0}

    def test_bounds_violation_zeroes_the_fit(self):
        instr = PedagogicalInstruction(gravity_max=3)
        fit, details = pedagogical_fit(candidate(5, 3), instr)
        assert fit == 0.0
        assert details["bounds_term"] == 0.0

    def test_gap_penalty_is_linear_over_the_scale(self):
        fit, details = pedagogical_fit(candidate(4, 2), PedagogicalInstruction())
        # |4 - 2| = 2 away from the target gap of 0: 1 - 2/5
        assert details["gap_term"] == pytest.approx(0.6)
        assert fit == pytest.approx(0.6)

    def test_gap_target_can_reward_uneven_pairs(self):
        instr = PedagogicalInstruction(gravity_gap_target=2)
        fit, _ = pedagogical_fit(candidate(4, 2), instr)
        assert fit == 1.0

    def test_required_categories_must_appear_on_both_sides(self):
        instr = PedagogicalInstruction(
            required_categories=frozenset({ConsequenceCategory.GRAVITY})
        )
        ok, _ = pedagogical_fit(candidate(3, 3), instr)
        assert ok == 1.0
        mixed = candidate(3, 3, cat_b=ConsequenceCategory.POINTS)
        bad, details = pedagogical_fit(mixed, instr)
        assert bad == 0.0
        assert details["category_term"] == 0.0

    def test_gravity_bounds_must_hold_for_the_weaker_side_too(self):
        instr = PedagogicalInstruction(gravity_min=3)
        fit, _ = pedagogical_fit(candidate(4, 2), instr)
        assert fit == 0.0


class TestScenarioFit:
    def test_availability_prefers_plentiful_classes(self, driving):
        ranked = generate(driving)
        by_pair = {(c.task_a, c.task_b): c for c in ranked}
        red = by_pair[("Handle_aquaplaning", "Handle_red_light")]
        stop = by_pair[("Handle_aquaplaning", "Handle_stop")]
        assert red.score.raw_availability > stop.score.raw_availability
        assert ranked[0] is red

    def test_missing_class_zeroes_the_fit(self, driving):
        # Handle_aquaplaning's precondition names the Vehicle class directly;
        # a world with the class declared but no instance makes it count 0
        cand = make_candidate(
            DilemmaType.OBLIGATION,
            "Handle_aquaplaning",
            (outcome("nc", 2),),
            "Handle_red_light",
            (outcome("nc2", 2),),
        )
        world = driving.world
        empty_world = type(world)(classes=world.classes, instances={})
        fit, details = scenario_fit(cand, driving.task_model, empty_world, driving.causality)
        assert fit == 0.0
        assert details["availability_term"] == 0.0

    def test_no_lead_time_means_no_discount(self, driving):
        cand = generate(driving)[0]
        _, details = scenario_fit(cand, driving.task_model, driving.world, driving.causality)
        assert details["temporality_term"] == 1.0

    def test_lead_time_discount_uses_tau(self, driving):
        via_node = "Running_a_Red_Light"
        cand = make_candidate(
            DilemmaType.OBLIGATION,
            "Handle_red_light",
            (
                ConsequenceOutcome(
                    node="Highway_Code_Violation",
                    category=ConsequenceCategory.VIOLATIONS,
                    severity=2,
                    via=(via_node, "Highway_Code_Violation"),
                ),
            ),
            "Handle_aquaplaning",
            (outcome("Accident", 4),),
        )
        graph = driving.causality
        patched = {
            nid: (
                node
                if nid != via_node
                else type(node)(
                    id=node.id, kind=node.kind, label=node.label, lead_time=60.0
                )
            )
            for nid, node in graph.nodes.items()
        }
        cg = type(graph)(nodes=patched, edges=graph.edges)
        _, details = scenario_fit(cand, driving.task_model, driving.world, cg)
        assert details["temporality_term"] == pytest.approx(0.5)

    def test_neutral_conditions_contribute_one(self, screening):
        cand = make_candidate(
            DilemmaType.OBLIGATION, "b2", (outcome("Gravity", 3),), "b4", (outcome("Violations", 2),)
        )
        fit, details = scenario_fit(
            cand, screening.task_model, screening.world, screening.causality
        )
        assert fit == 1.0
        assert details["raw_availability"] == 0.0


class TestRank:
    def test_weights_normalize(self, driving):
        instr = PedagogicalInstruction(weight_pedagogical=1.0, weight_scenaristic=0.0)
        ranked = rank(generate(driving), instr, driving)
        for cand in ranked:
            assert cand.score.total == cand.score.pedagogical_fit

    def test_scenaristic_only(self, driving):
        instr = PedagogicalInstruction(weight_pedagogical=0.0, weight_scenaristic=1.0)
        ranked = rank(generate(driving), instr, driving)
        for cand in ranked:
            assert cand.score.total == cand.score.scenario_fit

    def test_rank_is_a_permutation(self, driving):
        cands = generate(driving)
        ranked = rank(cands, PedagogicalInstruction(), driving)
        assert sorted(c.key() for c in ranked) == sorted(c.key() for c in cands)

    def test_zero_scored_candidates_kept_at_tail(self, driving):
        instr = PedagogicalInstruction(gravity_min=5)  # nothing satisfies this
        ranked = rank(generate(driving), instr, driving)
        assert ranked
        assert all(c.score.pedagogical_fit == 0.0 for c in ranked)

    def test_weights_not_both_zero(self):
        with pytest.raises(ValueError):
            PedagogicalInstruction(weight_pedagogical=0.0, weight_scenaristic=0.0)

    def test_gravity_bounds_ordered(self):
        with pytest.raises(ValueError):
            PedagogicalInstruction(gravity_min=4, gravity_max=2)


class TestCriticalityPreset:
    def test_maps_to_clamped_bounds(self):
        instr = PedagogicalInstruction.from_criticality(0)
        assert (instr.gravity_min, instr.gravity_max) == (0, 1)
        instr = PedagogicalInstruction.from_criticality(5)
        assert (instr.gravity_min, instr.gravity_max) == (4, 5)
        instr = PedagogicalInstruction.from_criticality(3)
        assert (instr.gravity_min, instr.gravity_max) == (2, 4)

    def test_explicit_bounds_win(self):
        instr = PedagogicalInstruction.from_criticality(3, gravity_max=5)
        assert (instr.gravity_min, instr.gravity_max) == (2, 5)


class TestExtractGoalState:
    def test_driving_top_pair(self, driving):
        top = generate(driving)[0]
        goal = extract_goal_state(top, driving.task_model)
        assert set(goal.conditions) == {
            Condition("Vehicle", "has-state", "aquaplaning"),
            Condition("Light", "has-color", "Red"),
        }

    def test_precondition_free_tasks_give_empty_goal(self, screening):
        cand = make_candidate(
            DilemmaType.OBLIGATION, "b2", (outcome("Gravity", 3),), "b4", (outcome("Violations", 2),)
        )
        assert extract_goal_state(cand, screening.task_model).conditions == ()

    def test_shared_precondition_appears_once(self, two_evils):
        cand = make_candidate(
            DilemmaType.PROHIBITION,
            "Swerve_left",
            (outcome("Left_collision", 3),),
            "Swerve_right",
            (outcome("Right_collision", 3),),
            nonchoice=(outcome("Frontal_collision", 5),),
        )
        goal = extract_goal_state(cand, two_evils.task_model)
        assert goal.conditions == (Condition("Obstacle", "is-ahead", True),)

    def test_conflicting_goal_raises(self, driving):
        tm = driving.task_model
        open_door = type(tm.nodes["Handle_stop"])(
            id="open", name="open", constructor=tm.nodes["Handle_stop"].constructor,
            pre_contextual=(Condition("Door", "is-open", False),),
        )
        close_door = type(tm.nodes["Handle_stop"])(
            id="close", name="close", constructor=tm.nodes["Handle_stop"].constructor,
            pre_contextual=(Condition("Door", "is-open", True),),
        )
        nodes = dict(tm.nodes)
        nodes["open"] = open_door
        nodes["close"] = close_door
        patched = type(tm)(root=tm.root, nodes=nodes)
        cand = make_candidate(
            DilemmaType.OBLIGATION, "open", (outcome("nc", 1),), "close", (outcome("nc2", 1),)
        )
        with pytest.raises(ConflictingGoal):
            extract_goal_state(cand, patched)


class TestScoringConstants:
    def test_parse_overrides(self):
        constants = parse_scoring_constants(json.dumps({"tau_seconds": 30}))
        assert constants == ScoringConstants(tau_seconds=30.0, gravity_scale=5)

    def test_rejects_unknown_keys(self):
        from dilemmagen import SchemaError

        with pytest.raises(SchemaError):
            parse_scoring_constants('{"tau": 1}')

    def test_type_filter_values(self):
        assert DilemmaFilter("OBLIGATION") is DilemmaFilter.OBLIGATION
