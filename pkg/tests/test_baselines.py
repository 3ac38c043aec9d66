import numpy as np
import pytest

from l0homotopy import (
    GenSpec,
    Problem,
    SolverParams,
    brute_force_l0,
    generate,
    objective,
    solve_homotopy,
    solve_homotopy_iht,
)
from conftest import orthonormal_problem, random_problem


def test_brute_force_zero_signal():
    p = Problem(dictionary=np.eye(3), signal=np.zeros(3))
    res = brute_force_l0(p, 0.1, 2)
    assert res.support == ()
    assert res.objective == 0.0


def test_brute_force_hand_enumeration():
    p = Problem(dictionary=np.eye(2), signal=np.array([2.0, 0.1]))
    res = brute_force_l0(p, 0.5, 2)
    # empty: 2.005; {0}: 0.505; {1}: 2.5; {0,1}: 1.0
    assert res.support == (0,)
    assert np.array_equal(res.alpha, [2.0, 0.0])
    assert res.objective == pytest.approx(0.505)


def test_brute_force_huge_penalty_empty_support(rng):
    p = random_problem(rng, 5, 6, 2)
    lam = np.linalg.norm(p.signal) ** 2
    res = brute_force_l0(p, lam, 3)
    assert res.support == ()


def test_brute_force_budget_guard(rng):
    p = random_problem(rng, 10, 30, 2)
    with pytest.raises(ValueError, match="budget"):
        brute_force_l0(p, 0.1, 6)


def test_brute_force_restricted_lsq_orthogonality(rng):
    for _ in range(10):
        p = random_problem(rng, 12, 10, 3, sigma=0.1)
        res = brute_force_l0(p, 0.05, 3)
        r = p.signal - p.dictionary @ res.alpha
        for j in res.support:
            assert abs(p.dictionary[:, j] @ r) <= 1e-8


def test_oracle_dominates_both_methods(rng):
    for _ in range(15):
        p = random_problem(rng, 15, 12, 2, sigma=0.05)
        res = brute_force_l0(p, 0.02, 4)
        hcd = solve_homotopy(p, SolverParams(lambda_tgt=0.02))
        iht = solve_homotopy_iht(p, SolverParams(lambda_tgt=0.02, lipschitz=_lip(p)))
        assert res.objective <= hcd.objective + 1e-10
        assert res.objective <= iht.objective + 1e-10


def _lip(problem):
    return float(np.linalg.norm(problem.dictionary, 2) ** 2)


def test_iht_zero_signal():
    p = Problem(dictionary=np.eye(4), signal=np.zeros(4))
    sol = solve_homotopy_iht(p, SolverParams(lambda_tgt=0.1))
    assert np.array_equal(sol.alpha, np.zeros(4))


def test_iht_orthonormal_single_step_reaches_oracle(rng):
    q = orthonormal_problem(rng, 10, 3)
    lam = 0.01
    sol = solve_homotopy_iht(q, SolverParams(lambda_tgt=lam))
    res = brute_force_l0(q, lam, 4)
    assert tuple(np.flatnonzero(sol.alpha)) == res.support
    assert sol.objective == pytest.approx(res.objective, abs=1e-9)


def test_iht_rejects_unnormalized_dictionary(rng):
    p = Problem(dictionary=rng.standard_normal((4, 6)), signal=rng.standard_normal(4))
    with pytest.raises(ValueError, match="unit-norm"):
        solve_homotopy_iht(p, SolverParams(lambda_tgt=0.1))


def test_iht_recovers_support_on_easy_instance():
    # overcomplete noise-free recovery with a valid full-gradient Lipschitz bound
    prob, _ = generate(GenSpec("normal", 100, 300, 5, 0.0, seed=3))
    params = SolverParams(lambda_tgt=0.01, lipschitz=_lip(prob), max_inner=20_000)
    sol = solve_homotopy_iht(prob, params)
    assert np.array_equal(np.flatnonzero(sol.alpha), np.flatnonzero(prob.truth))


def test_iht_matches_hcd_support_table_one_regime():
    prob, _ = generate(GenSpec("normal", 300, 2000, 20, 0.0, seed=2))
    hcd = solve_homotopy(prob, SolverParams(lambda_tgt=0.01))
    iht = solve_homotopy_iht(
        prob, SolverParams(lambda_tgt=0.01, lipschitz=_lip(prob), max_inner=20_000)
    )
    assert np.array_equal(hcd.support, np.flatnonzero(iht.alpha))


def test_iht_trace_schema_matches_hcd(rng):
    p = random_problem(rng, 20, 30, 3)
    hcd = solve_homotopy(p, SolverParams(lambda_tgt=0.05))
    iht = solve_homotopy_iht(p, SolverParams(lambda_tgt=0.05, lipschitz=_lip(p)))
    for trace in (hcd.trace, iht.trace):
        for st in trace.stages:
            assert len(st.objective_checkpoints) == len(st.nnz_checkpoints)
            assert st.lam > 0
