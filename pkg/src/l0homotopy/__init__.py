"""Sparse recovery via homotopy coordinate descent on the l0-penalized least-squares objective."""

from .baselines import OracleResult, brute_force_l0, solve_homotopy_iht
from .datagen import (
    GenSpec,
    Problem,
    extract_patches,
    generate,
    normalize_columns,
    read_pgm,
)
from .metrics import Metrics, compute_metrics, support_recovered
from .solver import (
    RunTrace,
    Solution,
    SolverParams,
    StageTrace,
    hard_threshold,
    objective,
    solve_fixed_penalty,
    solve_homotopy,
    strong_rule_active_set,
)

__all__ = [
    "GenSpec",
    "Metrics",
    "OracleResult",
    "Problem",
    "RunTrace",
    "Solution",
    "SolverParams",
    "StageTrace",
    "brute_force_l0",
    "compute_metrics",
    "extract_patches",
    "generate",
    "hard_threshold",
    "normalize_columns",
    "objective",
    "read_pgm",
    "solve_fixed_penalty",
    "solve_homotopy",
    "solve_homotopy_iht",
    "strong_rule_active_set",
    "support_recovered",
]

__version__ = "0.1.0"
