import csv
import json

import numpy as np
import pytest

from l0homotopy import (
    GenSpec,
    SolverParams,
    compute_metrics,
    generate,
    objective,
    solve_homotopy,
    support_recovered,
)
from l0homotopy.metrics import (
    trace_from_dict,
    trace_to_dict,
    write_metrics_json,
    write_trace_csv,
    write_trace_json,
)


@pytest.fixture(scope="module")
def solved():
    prob, _ = generate(GenSpec("normal", 40, 80, 5, 0.0, seed=17))
    sol = solve_homotopy(prob, SolverParams(lambda_tgt=0.01))
    return prob, sol


def test_metrics_perfect_recovery(solved):
    prob, sol = solved
    phi_star = objective(prob, prob.truth, 0.01)
    m = compute_metrics(prob, sol, 0.01, phi_star=phi_star, phi_star_source="truth")
    assert m.recon_error == pytest.approx(0.0, abs=1e-8)
    assert m.nnz == 5
    assert abs(m.obj_gap) < 1e-10
    assert m.phi_star_source == "truth"


def test_metrics_zero_solution(solved):
    prob, sol = solved
    zero = type(sol)(alpha=np.zeros(prob.K), objective=0.0, trace=sol.trace)
    m = compute_metrics(prob, zero, 0.01)
    assert m.recon_error == pytest.approx(np.linalg.norm(prob.signal))
    assert m.nnz == 0
    assert m.obj_gap is None


def test_metrics_pure_function(solved):
    prob, sol = solved
    a = compute_metrics(prob, sol, 0.01)
    b = compute_metrics(prob, sol, 0.01)
    assert a == b


def test_support_recovered_cases():
    t = np.array([0.0, 1.0, -2.0])
    assert support_recovered(t, t)
    assert support_recovered(t, np.array([0.0, 9.0, 1e-8]))
    assert not support_recovered(t, np.array([0.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        support_recovered(t, np.zeros(2))


def test_trace_json_round_trip(solved, tmp_path):
    _, sol = solved
    path = tmp_path / "trace.json"
    write_trace_json(path, sol.trace)
    with open(path) as fh:
        data = json.load(fh)
    assert data["schema_version"] == 1
    back = trace_from_dict(data)
    assert trace_to_dict(back) == trace_to_dict(sol.trace)


def test_trace_stage_lambdas_strictly_decreasing(solved):
    _, sol = solved
    lams = [st.lam for st in sol.trace.stages]
    assert all(b < a for a, b in zip(lams, lams[1:]))


def test_trace_csv_one_row_per_checkpoint(solved, tmp_path):
    _, sol = solved
    path = tmp_path / "trace.csv"
    write_trace_csv(path, sol.trace)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    expected = sum(len(st.objective_checkpoints) for st in sol.trace.stages)
    assert len(rows) == expected
    # objective values round-trip losslessly
    first = sol.trace.stages[0].objective_checkpoints[0]
    assert float(rows[0]["objective"]) == first


def test_metrics_json_schema(solved, tmp_path):
    prob, sol = solved
    m = compute_metrics(prob, sol, 0.01, wall_time_s=0.5)
    path = tmp_path / "metrics.json"
    write_metrics_json(path, m)
    with open(path) as fh:
        data = json.load(fh)
    assert data["schema_version"] == 1
    assert data["nnz"] == m.nnz
    assert data["wall_time_s"] == 0.5
