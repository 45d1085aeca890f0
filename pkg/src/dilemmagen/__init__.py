"""Dilemma generation engine over declarative knowledge models.

Given a hierarchical task model, a barrier-annotated causality graph and a
world model, the engine discovers obligation and prohibition dilemmas (task
pairs with no harm-free outcome), ranks them against pedagogical and
scenaristic constraints, and emits the goal world state that instantiates
the chosen pair.
"""

from .causality import (
    ActivationScenario,
    ConsequenceOutcome,
    NegativeSource,
    common_and_descendant,
    negative_actions,
    negative_barriers,
    propagate,
    unguarded_consequences,
)
from .generator import (
    DilemmaCandidate,
    DilemmaType,
    contextually_compatible,
    contradictory_pairs,
    generate,
    prohibition_pairs,
    run_pipeline,
    temporally_compatible,
)
from .knowledge import (
    CausalityGraph,
    CausalNode,
    Condition,
    ConflictingGoal,
    ConsequenceCategory,
    Constructor,
    DanglingTaskRef,
    Edge,
    EdgeKind,
    GateType,
    ModelError,
    ModelTooLarge,
    NodeKind,
    TaskModel,
    TaskNode,
    UnknownNode,
    UnknownTask,
    ValidationReport,
    WorldInstance,
    WorldModel,
    WrongKind,
    condition_conflict,
    condition_set_conflict,
    lowest_common_ancestor,
    validate_causality_graph,
    validate_task_model,
    validate_world_model,
)
from .model_io import (
    ModelBundle,
    ParseError,
    SchemaError,
    build_bundle,
    export_dot,
    load_bundle,
    parse_causality_graph,
    parse_result,
    parse_task_model,
    parse_world_model,
    serialize_causality_graph,
    serialize_task_model,
    serialize_world_model,
    validate_bundle,
    write_result,
)
from .scoring import (
    DilemmaFilter,
    GoalState,
    PedagogicalInstruction,
    ScoreBreakdown,
    ScoringConstants,
    extract_goal_state,
    pedagogical_fit,
    rank,
    scenario_fit,
)
from .verifier import (
    CheckResult,
    VerificationReport,
    enumerate_dilemmas,
    verify_obligation,
    verify_prohibition,
)

__version__ = "0.1.0"
