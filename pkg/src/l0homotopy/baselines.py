"""Reference methods: exhaustive-support global oracle and a plain IHT baseline.

The oracle enumerates every support up to a size budget, solves the
restricted least-squares problem on each, and returns the global minimum
of the penalized objective -- tractable only for desk-scale instances,
which is exactly its job.  The IHT baseline runs the same homotopy
schedule as the coordinate-descent solver but takes full-vector
gradient-plus-threshold steps, with no active sets or screening.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import refresh_residual
from .solver import (
    RunTrace,
    Solution,
    StageTrace,
    objective,
    penalty_schedule,
)


@dataclass
class OracleResult:
    """Globally optimal support, restricted-least-squares code, and objective."""

    support: tuple[int, ...]
    alpha: np.ndarray
    objective: float


def _restricted_lsq(D, x, support):
    """Least-squares code on `support`, with a tiny ridge retry on rank deficiency."""
    sub = D[:, support]
    gram = sub.T @ sub
    rhs = sub.T @ x
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(gram + 1e-12 * np.eye(len(support)), rhs)
    if not np.all(np.isfinite(coef)):
        coef = np.linalg.solve(gram + 1e-12 * np.eye(len(support)), rhs)
    return coef


def brute_force_l0(problem, lam, max_support):
    """Global minimizer of the l0-penalized objective over supports of size <= max_support.

    Ties break toward the lexicographically smallest support.  Guarded by a
    combinatorial budget: requires K <= 20 or max_support <= 4.
    """
    K = problem.K
    if K > 20 and max_support > 4:
        raise ValueError(f"enumeration budget exceeded (K={K}, max_support={max_support})")
    D, x = problem.dictionary, problem.signal

    best_obj = 0.5 * float(x @ x)  # empty support
    best_support = ()
    best_alpha = np.zeros(K)
    for size in range(1, max_support + 1):
        for support in itertools.combinations(range(K), size):
            coef = _restricted_lsq(D, x, support)
            r = x - D[:, support] @ coef
            obj = 0.5 * float(r @ r) + lam * size
            better = obj < best_obj - 1e-15
            lex_tie = abs(obj - best_obj) <= 1e-15 and support < best_support
            if better or lex_tie:
                best_obj = obj
                best_support = support
                best_alpha = np.zeros(K)
                best_alpha[list(support)] = coef
    return OracleResult(support=best_support, alpha=best_alpha, objective=best_obj)


def solve_homotopy_iht(problem, params, alpha_init=None):
    """Plain iterative hard thresholding on the same homotopy schedule.

    Every iteration thresholds the full-vector gradient step
    alpha - (1/L) * D.T @ (D @ alpha - x); there is no active set.  For
    non-orthonormal dictionaries pass params.lipschitz >= ||D||_2^2 or the
    iteration may diverge.  Trace schema matches solve_homotopy (the
    middle-loop fields stay empty; iterations count as inner sweeps).
    """
    D, x = problem.dictionary, problem.signal
    col_norms = np.linalg.norm(D, axis=0)
    if np.max(np.abs(col_norms - 1.0)) > 1e-8:
        raise ValueError("dictionary columns must be unit-norm (pass through normalize_columns)")
    L = params.lipschitz

    if alpha_init is None:
        alpha = np.zeros(problem.K)
    else:
        alpha = np.asarray(alpha_init, dtype=np.float64).copy()

    grad0 = D.T @ (D @ alpha - x) if alpha.any() else -(D.T @ x)
    lam0 = float(np.max(np.abs(grad0))) if grad0.size else 0.0

    trace = RunTrace()
    for lam in penalty_schedule(lam0, params.lambda_tgt, params.eta, params.max_outer):
        stage = StageTrace(lam=lam)
        trace.stages.append(stage)
        cut2 = 2.0 * lam / L
        iters = 0
        while iters < params.max_inner:
            r = refresh_residual(x, D, alpha)
            s = alpha + (D.T @ r) / L
            new = np.where(s * s > cut2, s, 0.0)
            if not np.all(np.isfinite(new)):
                raise ValueError(
                    "iterate diverged; increase lipschitz to at least ||D||_2^2"
                )
            iters += 1
            change = float(np.linalg.norm(new - alpha))
            prev_norm = float(np.linalg.norm(alpha))
            alpha = new
            stage.objective_checkpoints.append(objective(problem, alpha, lam))
            stage.nnz_checkpoints.append(int(np.count_nonzero(alpha)))
            if prev_norm == 0.0:
                if change == 0.0:
                    break
            elif change / prev_norm < params.tau * lam:
                break
        else:
            trace.cap_warnings.append(f"iteration cap {params.max_inner} hit at lam={lam:.6g}")
        stage.inner_sweeps_total = iters
    return Solution(alpha=alpha, objective=objective(problem, alpha, params.lambda_tgt), trace=trace)
