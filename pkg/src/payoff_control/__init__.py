"""Memory-one payoff control for the iterated prisoner's dilemma.

Synthesize strategies that confine the long-run payoff pair to a region with
linear boundaries, verify them against sampled and extreme opponents, and
evaluate them in tournaments and against a learning opponent.
"""
from .estimators import (
    MemoryOneController,
    PayoffControlSynthesizer,
    RLearner,
    check_opponents,
    check_payoffs,
    check_spec,
    check_strategy,
)
from .exceptions import (
    EmptyInterval,
    InfeasibleRegion,
    InvalidObjective,
    InvalidPayoffs,
    InvalidStrategy,
    PayoffControlError,
    SingularChain,
)
from .game import (
    DEFAULT_PAYOFFS,
    MatchTrace,
    MemoryOneStrategy,
    Outcome,
    PayoffPair,
    PayoffParams,
    StationaryDistribution,
    akin_residual,
    batch_payoffs,
    build_transition_matrix,
    expected_payoffs,
    long_run_payoffs,
    play_match,
    stationary_distribution,
    stationary_for,
)
from .learner import LearnerConfig, LearnerState, LearningTrace, run_learning_match
from .strategies import catalog, get_strategy
from .synthesis import (
    BoundObjective,
    ControlClass,
    ControlSpec,
    LinearInequalitySystem,
    RelationObjective,
    SynthesisResult,
    Verdict,
    alpha_coefficients,
    beta_coefficients,
    bound_region,
    build_inequality_system,
    classify_control,
    coordinate_range,
    feasibility_of_region,
    gamma_coefficients,
    make_cooperation_enforcing,
    solve_feasible_strategy,
    synthesize,
)
from .tournament import TournamentReport, rank_table, run_tournament
from .verification import (
    CornerReport,
    PayoffCloud,
    VerificationReport,
    corner_extrema,
    sample_payoff_cloud,
    verify_spec,
)

__version__ = "0.1.0"

__all__ = [
    "akin_residual",
    "alpha_coefficients",
    "batch_payoffs",
    "beta_coefficients",
    "bound_region",
    "BoundObjective",
    "build_inequality_system",
    "build_transition_matrix",
    "catalog",
    "check_opponents",
    "check_payoffs",
    "check_spec",
    "check_strategy",
    "classify_control",
    "ControlClass",
    "ControlSpec",
    "coordinate_range",
    "corner_extrema",
    "CornerReport",
    "DEFAULT_PAYOFFS",
    "EmptyInterval",
    "expected_payoffs",
    "feasibility_of_region",
    "gamma_coefficients",
    "get_strategy",
    "InfeasibleRegion",
    "InvalidObjective",
    "InvalidPayoffs",
    "InvalidStrategy",
    "LearnerConfig",
    "LearnerState",
    "LearningTrace",
    "LinearInequalitySystem",
    "long_run_payoffs",
    "make_cooperation_enforcing",
    "MatchTrace",
    "MemoryOneController",
    "MemoryOneStrategy",
    "Outcome",
    "PayoffCloud",
    "PayoffControlError",
    "PayoffControlSynthesizer",
    "PayoffPair",
    "PayoffParams",
    "play_match",
    "rank_table",
    "RelationObjective",
    "RLearner",
    "run_learning_match",
    "run_tournament",
    "sample_payoff_cloud",
    "SingularChain",
    "solve_feasible_strategy",
    "stationary_distribution",
    "stationary_for",
    "StationaryDistribution",
    "SynthesisResult",
    "synthesize",
    "TournamentReport",
    "Verdict",
    "VerificationReport",
    "verify_spec",
]
