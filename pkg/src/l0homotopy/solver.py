"""Homotopy coordinate descent for l0-regularized least squares.

Minimizes 0.5 * ||x - D @ alpha||^2 + lam * nnz(alpha) via three nested
loops: per-coordinate hard thresholding swept over an active set (inner),
greedy active-set growth gated by a gradient test (middle), and a
geometric continuation schedule on lam with warm starts (outer).  The
active set is seeded at each penalty stage by a gradient-magnitude strong
rule.  Atoms are assumed unit-norm so the coordinatewise Lipschitz bound
defaults to 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .datagen import Problem
from .linalg import as_vector, refresh_residual, residual_coordinate_update


@dataclass(frozen=True)
class SolverParams:
    """Tuning knobs shared by the solver and the IHT baseline."""

    lambda_tgt: float
    eta: float = 0.5
    tau: float = 1e-6
    delta: float = 1e-3
    phi: float = 0.05
    lipschitz: float = 1.0
    max_inner: int = 10_000
    max_middle: int | None = None  # default: one admission per coordinate
    max_outer: int = 100

    def __post_init__(self):
        if self.lambda_tgt <= 0:
            raise ValueError("lambda_tgt must be > 0")
        if not 0 < self.eta < 1:
            raise ValueError("eta must be in (0, 1)")
        if not 0 < self.phi < 1:
            raise ValueError("phi must be in (0, 1)")
        if self.tau <= 0 or self.delta <= 0:
            raise ValueError("tau and delta must be > 0")
        if self.lipschitz <= 0:
            raise ValueError("lipschitz must be > 0")


@dataclass
class StageTrace:
    """Per-penalty-stage record of the middle loop."""

    lam: float
    middle_iters: int = 0
    inner_sweeps_total: int = 0
    objective_checkpoints: list[float] = field(default_factory=list)
    nnz_checkpoints: list[int] = field(default_factory=list)
    admitted_coords: list[int] = field(default_factory=list)


@dataclass
class RunTrace:
    """Full record of one solve across all penalty stages."""

    stages: list[StageTrace] = field(default_factory=list)
    total_middle_iters: int = 0
    cap_warnings: list[str] = field(default_factory=list)


@dataclass
class Solution:
    """Final iterate, its objective at the target penalty, and the trace."""

    alpha: np.ndarray
    objective: float
    trace: RunTrace

    @property
    def nnz(self):
        return int(np.count_nonzero(self.alpha))

    @property
    def support(self):
        return np.flatnonzero(self.alpha)


def objective(problem, alpha, lam):
    """0.5 * ||x - D @ alpha||^2 + lam * nnz(alpha), recomputed from scratch."""
    alpha = as_vector(alpha)
    if alpha.shape[0] != problem.K:
        raise ValueError("alpha length does not match dictionary columns")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    r = refresh_residual(problem.signal, problem.dictionary, alpha)
    return 0.5 * float(r @ r) + lam * int(np.count_nonzero(alpha))


def hard_threshold(alpha_i, resid_corr, lam, L=1.0):
    """One-coordinate exact minimization of the penalized quadratic.

    `resid_corr` is d_i . r with r the current full residual x - D @ alpha
    (so the gradient step is s = alpha_i + resid_corr / L regardless of
    whether coordinate i currently contributes).  Returns s if it survives
    the threshold s^2 > 2 * lam / L, else exactly 0.0.
    """
    s = alpha_i + resid_corr / L
    if s * s > 2.0 * lam / L:
        return s
    return 0.0


def hard_threshold_state(state, problem, i, lam, L=1.0):
    """Thresholding step phrased on a solver state; caller commits the value."""
    if not 0 <= i < problem.K:
        raise IndexError(f"coordinate {i} out of range")
    corr = float(problem.dictionary[:, i] @ state.residual)
    return hard_threshold(float(state.alpha[i]), corr, lam, L)


@dataclass
class SolverState:
    """Mutable mid-solve snapshot (residual kept consistent with alpha)."""

    alpha: np.ndarray
    active: np.ndarray  # sorted, duplicate-free coordinate indices
    residual: np.ndarray  # x - D @ alpha
    lam: float
    stage: int = 0


def active_coordinate_descent(state, problem, lam, params, trace=None):
    """Sweep the active coordinates until the relative change drops below tau * lam.

    Coordinates are visited in ascending index order; each thresholded
    update is committed immediately so later coordinates in the sweep see
    it.  Coordinates outside the active set are never touched.  Returns
    the number of sweeps performed; mutates state.alpha and state.residual
    in place.
    """
    D = problem.dictionary
    alpha, r = state.alpha, state.residual
    active = np.asarray(state.active, dtype=np.intp)
    L = params.lipschitz
    sweeps = 0
    if active.size == 0:
        return 0
    cols = [D[:, j] for j in active]
    while sweeps < params.max_inner:
        prev = alpha[active].copy()
        prev_norm = float(np.linalg.norm(alpha))
        for j, dj in zip(active, cols):
            old = alpha[j]
            new = hard_threshold(old, float(dj @ r), lam, L)
            if new != old:
                alpha[j] = new
                r -= dj * (new - old)
        sweeps += 1
        diff = alpha[active] - prev
        change = math.sqrt(float(diff @ diff))
        if prev_norm == 0.0:
            # all-zero previous iterate: converged iff it stayed all-zero
            if change == 0.0:
                break
        elif change / prev_norm < params.tau * lam:
            break
    else:
        if trace is not None:
            trace.cap_warnings.append(
                f"inner sweep cap {params.max_inner} hit at lam={lam:.6g}"
            )
    if trace is not None and trace.stages:
        trace.stages[-1].inner_sweeps_total += sweeps
    return sweeps


def strong_rule_active_set(alpha0, problem, lam, params):
    """Gradient-magnitude screening for the initial active set of a stage.

    Admits every currently-nonzero coordinate plus any zero coordinate
    whose gradient entry is within a (1 - phi) margin of the threshold
    sqrt(2 * lam / L).  Returns a sorted index array.
    """
    alpha0 = as_vector(alpha0)
    grad = -(problem.dictionary.T @ refresh_residual(problem.signal, problem.dictionary, alpha0))
    cut = (1.0 - params.phi) * math.sqrt(2.0 * lam / params.lipschitz)
    keep = (alpha0 != 0.0) | (np.abs(grad) >= cut)
    return np.flatnonzero(keep)


def solve_fixed_penalty(alpha0, problem, lam, params, run_trace=None):
    """Middle loop: alternate active-set descent with greedy one-coordinate growth.

    Starts from the strong-rule active set, descends over it, then
    repeatedly admits the inactive coordinate with the largest gradient
    magnitude until that magnitude falls below (1 - delta) * sqrt(2*lam/L).
    Returns (alpha, StageTrace).
    """
    D, x = problem.dictionary, problem.signal
    L = params.lipschitz
    alpha = as_vector(alpha0).copy()
    if alpha.shape[0] != problem.K:
        raise ValueError("alpha length does not match dictionary columns")
    if lam <= 0:
        raise ValueError("lam must be > 0")
    max_middle = params.max_middle if params.max_middle is not None else problem.K

    stage = StageTrace(lam=lam)
    trace = run_trace if run_trace is not None else RunTrace()
    trace.stages.append(stage)

    state = SolverState(
        alpha=alpha,
        active=strong_rule_active_set(alpha, problem, lam, params),
        residual=refresh_residual(x, D, alpha),
        lam=lam,
    )

    def checkpoint():
        r = state.residual
        stage.objective_checkpoints.append(
            0.5 * float(r @ r) + lam * int(np.count_nonzero(state.alpha))
        )
        stage.nnz_checkpoints.append(int(np.count_nonzero(state.alpha)))

    checkpoint()  # warm-start objective at this stage's penalty
    active_coordinate_descent(state, problem, lam, params, trace)
    checkpoint()

    stop_cut = (1.0 - params.delta) * math.sqrt(2.0 * lam / L)
    while True:
        # prune zeroed coordinates; refresh the residual to bound drift
        state.active = np.flatnonzero(state.alpha)
        state.residual = refresh_residual(x, D, state.alpha)
        grad = -(D.T @ state.residual)
        inactive_mask = state.alpha == 0.0
        if not inactive_mask.any():
            break
        grad_masked = np.where(inactive_mask, np.abs(grad), -np.inf)
        k = int(np.argmax(grad_masked))  # ties resolve to the lowest index
        if grad_masked[k] <= stop_cut:
            break
        if stage.middle_iters >= max_middle:
            trace.cap_warnings.append(
                f"middle iteration cap {max_middle} hit at lam={lam:.6g}"
            )
            break
        stage.middle_iters += 1
        trace.total_middle_iters += 1

        value = hard_threshold(0.0, -float(grad[k]), lam, L)
        if value == 0.0:
            # gradient sits between the strong cut and the full threshold:
            # admitting the coordinate cannot change the solution
            break
        state.alpha[k] = value
        residual_coordinate_update(state.residual, D, k, 0.0, value)
        stage.admitted_coords.append(k)
        checkpoint()

        state.active = np.union1d(state.active, [k])
        active_coordinate_descent(state, problem, lam, params, trace)
        checkpoint()

    state.active = np.flatnonzero(state.alpha)
    return state.alpha, stage


def penalty_schedule(lam0, lambda_tgt, eta, max_outer):
    """Geometric stage values eta^n * lam0, with the last stage clamped to lambda_tgt."""
    if lam0 <= lambda_tgt:
        return [lambda_tgt]
    lams = []
    lam = eta * lam0
    while lam > lambda_tgt and len(lams) < max_outer - 1:
        lams.append(lam)
        lam *= eta
    lams.append(lambda_tgt)
    return lams


def solve_homotopy(problem, params, alpha_init=None):
    """Outer loop: continuation over a decreasing penalty, warm-started per stage.

    The initial penalty is the infinity norm of the gradient at the start
    point (||D.T @ x||_inf when starting from zero); each stage's solution
    seeds the next.  Returns a Solution whose objective is recomputed from
    scratch at lambda_tgt.
    """
    D, x = problem.dictionary, problem.signal
    col_norms = np.linalg.norm(D, axis=0)
    if np.max(np.abs(col_norms - 1.0)) > 1e-8:
        raise ValueError("dictionary columns must be unit-norm (pass through normalize_columns)")

    if alpha_init is None:
        alpha = np.zeros(problem.K)
    else:
        alpha = as_vector(alpha_init).copy()
        if alpha.shape[0] != problem.K:
            raise ValueError("alpha_init length does not match dictionary columns")

    grad0 = D.T @ (D @ alpha - x) if alpha.any() else -(D.T @ x)
    lam0 = float(np.max(np.abs(grad0))) if grad0.size else 0.0

    trace = RunTrace()
    for n, lam in enumerate(penalty_schedule(lam0, params.lambda_tgt, params.eta, params.max_outer)):
        alpha, _ = solve_fixed_penalty(alpha, problem, lam, params, trace)
        if n + 1 >= params.max_outer:
            trace.cap_warnings.append(f"outer stage cap {params.max_outer} hit")
            break
    return Solution(alpha=alpha, objective=objective(problem, alpha, params.lambda_tgt), trace=trace)
