"""Benchmark toolkit for stationary mean field games on finite spaces."""

from .core import (
    Distribution,
    GameClass,
    Logits,
    MFGError,
    MFGModel,
    Policy,
    QTable,
    ValueTable,
    uniform_distribution,
    validate_distribution,
)
from .dynamics import (
    BRConfig,
    MeanFieldConfig,
    TransitionMatrix,
    average_policies,
    backward_induction_br,
    exploitability,
    induced_transition_matrix,
    mean_field_step,
    policy_evaluation,
    softmax_policy,
    stationary_mean_field,
)
from .checks import ll_monotonicity_check, potential_symmetry_check
from .envs import build_env, list_envs
from .garnet import GarnetInstance, GarnetSpec, generate
from .solvers import SolverConfig, SolverTrace, init_policy, list_algorithms, run_solver
from .harness import RunSpec, SweepSpec, execute_run, execute_sweep, garnet_campaign

__all__ = [
    "BRConfig",
    "Distribution",
    "GameClass",
    "GarnetInstance",
    "GarnetSpec",
    "Logits",
    "MFGError",
    "MFGModel",
    "MeanFieldConfig",
    "Policy",
    "QTable",
    "RunSpec",
    "SolverConfig",
    "SolverTrace",
    "SweepSpec",
    "TransitionMatrix",
    "ValueTable",
    "average_policies",
    "backward_induction_br",
    "build_env",
    "execute_run",
    "execute_sweep",
    "exploitability",
    "garnet_campaign",
    "generate",
    "induced_transition_matrix",
    "init_policy",
    "list_algorithms",
    "list_envs",
    "ll_monotonicity_check",
    "mean_field_step",
    "policy_evaluation",
    "potential_symmetry_check",
    "run_solver",
    "softmax_policy",
    "stationary_mean_field",
    "uniform_distribution",
    "validate_distribution",
]
