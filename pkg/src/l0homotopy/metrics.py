"""Validation metrics and JSON/CSV serialization of runs.

Metrics: residual norm of the reconstruction, objective gap against a
supplied reference optimum, exact nonzero count, and caller-measured wall
time.  Traces serialize to JSON (schema_version 1) and to a flat CSV with
one row per objective checkpoint, for external plotting.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .solver import RunTrace, Solution, StageTrace, objective

SCHEMA_VERSION = 1


@dataclass
class Metrics:
    recon_error: float
    nnz: int
    obj_gap: float | None = None
    phi_star_source: str | None = None
    wall_time_s: float | None = None


def compute_metrics(problem, solution, lam, phi_star=None, phi_star_source=None, wall_time_s=None):
    """Metrics for one solve; obj_gap only when a reference optimum is supplied."""
    alpha = solution.alpha
    if alpha.shape[0] != problem.K:
        raise ValueError("solution length does not match dictionary columns")
    r = problem.signal - problem.dictionary @ alpha
    gap = None
    if phi_star is not None:
        gap = objective(problem, alpha, lam) - phi_star
    return Metrics(
        recon_error=float(np.linalg.norm(r)),
        nnz=int(np.count_nonzero(alpha)),
        obj_gap=gap,
        phi_star_source=phi_star_source,
        wall_time_s=wall_time_s,
    )


def support_recovered(truth, alpha):
    """True iff the nonzero patterns of `truth` and `alpha` coincide exactly."""
    truth = np.asarray(truth)
    alpha = np.asarray(alpha)
    if truth.shape != alpha.shape:
        raise ValueError("length mismatch")
    return bool(np.array_equal(truth != 0.0, alpha != 0.0))


def metrics_to_dict(m):
    return {
        "schema_version": SCHEMA_VERSION,
        "recon_error": m.recon_error,
        "nnz": m.nnz,
        "obj_gap": m.obj_gap,
        "phi_star_source": m.phi_star_source,
        "wall_time_s": m.wall_time_s,
    }


def trace_to_dict(trace):
    return {
        "schema_version": SCHEMA_VERSION,
        "total_middle_iters": trace.total_middle_iters,
        "cap_warnings": list(trace.cap_warnings),
        "stages": [
            {
                "lambda": st.lam,
                "middle_iters": st.middle_iters,
                "inner_sweeps_total": st.inner_sweeps_total,
                "objective_checkpoints": list(st.objective_checkpoints),
                "nnz_checkpoints": list(st.nnz_checkpoints),
                "admitted_coords": [int(c) for c in st.admitted_coords],
            }
            for st in trace.stages
        ],
    }


def trace_from_dict(d):
    trace = RunTrace(
        total_middle_iters=d["total_middle_iters"],
        cap_warnings=list(d["cap_warnings"]),
    )
    for sd in d["stages"]:
        trace.stages.append(
            StageTrace(
                lam=sd["lambda"],
                middle_iters=sd["middle_iters"],
                inner_sweeps_total=sd["inner_sweeps_total"],
                objective_checkpoints=list(sd["objective_checkpoints"]),
                nnz_checkpoints=list(sd["nnz_checkpoints"]),
                admitted_coords=list(sd["admitted_coords"]),
            )
        )
    return trace


def write_metrics_json(path, m):
    with open(path, "w") as fh:
        json.dump(metrics_to_dict(m), fh, indent=2)
        fh.write("\n")


def write_trace_json(path, trace):
    with open(path, "w") as fh:
        json.dump(trace_to_dict(trace), fh, indent=2)
        fh.write("\n")


def write_trace_csv(path, trace):
    """One row per objective checkpoint: stage, lambda, checkpoint index, objective, nnz."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage", "lambda", "checkpoint", "objective", "nnz"])
        for n, st in enumerate(trace.stages):
            for c, (obj, nnz) in enumerate(zip(st.objective_checkpoints, st.nnz_checkpoints)):
                w.writerow([n, repr(float(st.lam)), c, repr(float(obj)), nnz])
