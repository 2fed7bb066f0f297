"""Inverse planning on notched maze tasks.

The package infers what a demonstrator wants (reward over goals) and how it
represents the maze (whether it knows notched walls are passable) from short
trajectories, and checks the dynamics-mismatch performance bound that governs
how costly a wrong representation can be.
"""

from .backend import available_backends, backend_name
from .bounds import (
    BoundReport,
    dynamics_l1_gap,
    empirical_gap,
    performance_gap_bound,
    verify_bound,
)
from .demonstrator import Trajectory, dump_trajectory, load_trajectory, simulate
from .errors import (
    CompileError,
    ConfigError,
    ConstrualIrlError,
    ConvergenceError,
    GridParseError,
    IngestError,
    UndefinedCorrelationError,
    ValidationError,
)
from .gridworld import (
    FULLY_AWARE,
    NOTCH_UNAWARE,
    Construal,
    GridSpec,
    RewardHypothesis,
    apply_construal,
    compile_mdp,
    load_grid,
    parse_grid,
    reachable_cells,
    save_grid,
    serialize_grid,
)
from .harness import (
    ExperimentConfig,
    HumanSummary,
    ScenarioResult,
    binomial_test_one_sided,
    compare_models,
    default_config_path,
    ingest_human_summary,
    parse_config,
    pearson_correlation,
    run_experiment,
)
from .inference import (
    HypothesisSpace,
    Posterior,
    default_hypothesis_space,
    joint_posterior,
    marginal,
    reward_only_posterior,
    to_judgment_scale,
    trajectory_log_likelihood,
)
from .mdp import (
    OccupancyMatrix,
    Policy,
    TabularMDP,
    ValueFunction,
    greedy_policy,
    occupancy,
    policy_evaluation,
    policy_return,
    soft_policy,
    soft_value_iteration,
    value_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CompileError",
    "ConfigError",
    "Construal",
    "ConstrualIrlError",
    "ConvergenceError",
    "ExperimentConfig",
    "FULLY_AWARE",
    "GridParseError",
    "GridSpec",
    "HumanSummary",
    "HypothesisSpace",
    "IngestError",
    "NOTCH_UNAWARE",
    "OccupancyMatrix",
    "Policy",
    "Posterior",
    "RewardHypothesis",
    "ScenarioResult",
    "TabularMDP",
    "Trajectory",
    "UndefinedCorrelationError",
    "ValidationError",
    "ValueFunction",
    "apply_construal",
    "available_backends",
    "backend_name",
    "binomial_test_one_sided",
    "compare_models",
    "compile_mdp",
    "default_config_path",
    "default_hypothesis_space",
    "dump_trajectory",
    "dynamics_l1_gap",
    "empirical_gap",
    "greedy_policy",
    "ingest_human_summary",
    "joint_posterior",
    "load_grid",
    "load_trajectory",
    "marginal",
    "occupancy",
    "parse_config",
    "parse_grid",
    "pearson_correlation",
    "performance_gap_bound",
    "policy_evaluation",
    "policy_return",
    "reachable_cells",
    "reward_only_posterior",
    "run_experiment",
    "save_grid",
    "serialize_grid",
    "simulate",
    "soft_policy",
    "soft_value_iteration",
    "to_judgment_scale",
    "trajectory_log_likelihood",
    "value_iteration",
    "verify_bound",
]
