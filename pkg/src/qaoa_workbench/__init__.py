"""QAOA on MAX-CUT: state-vector emulation plus noisy optimizers that count
every circuit repetition they spend."""

from .emulator import DiagonalCostOperator, StateVector, init_plus_state
from .errors import CapacityError, OptimizationError
from .experiment import ExperimentConfig, RunRecord, run_experiment, run_single
from .maxcut import MaxCutInstance, brute_force_maximum, classical_objective, generate_random_3regular
from .optimizers import StoppingConfig, bfgs_maximize, initial_points, nelder_mead_maximize
from .qaoa import (
    ParameterVector,
    analytic_gradient,
    circuit_gradient,
    finite_difference_gradient,
    objective,
    prepare_state,
)
from .shots import CostLedger, NoisyOracle, PrecisionConfig

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CostLedger", "DiagonalCostOperator", "ExperimentConfig", "MaxCutInstance",
    "NoisyOracle", "OptimizationError", "ParameterVector", "PrecisionConfig", "RunRecord",
    "StateVector", "StoppingConfig", "analytic_gradient", "bfgs_maximize", "brute_force_maximum",
    "circuit_gradient", "classical_objective", "finite_difference_gradient", "generate_random_3regular",
    "init_plus_state", "initial_points", "nelder_mead_maximize", "objective", "prepare_state",
    "run_experiment", "run_single",
]
