"""Command-line harness: generate instances, solve them, sweep parameters, benchmark.

Subcommands: gen, solve, sweep, bench, oracle-check.  All floating-point
CSV output uses shortest round-trip decimal (Python repr), so a write/read
cycle is bit-exact.  Exit codes: 0 success, 1 usage/config error, 2 data
error, 3 solver cap warning escalated under --strict.
"""

import argparse
import csv
import dataclasses
import json
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import datagen, metrics as metrics_mod
from .baselines import brute_force_l0, solve_homotopy_iht
from .datagen import GenSpec, Problem, PRNG_NAME, generate, normalize_columns
from .metrics import (
    SCHEMA_VERSION,
    compute_metrics,
    metrics_to_dict,
    support_recovered,
    write_metrics_json,
    write_trace_csv,
    write_trace_json,
)
from .solver import RunTrace, Solution, SolverParams, objective, solve_homotopy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CAP = 3

METHODS = ("hcd", "iht", "oracle")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- file I/O

def _out_path(prefix, name):
    path = prefix + name
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _write_matrix_csv(path, m):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"c{j}" for j in range(m.shape[1])])
        for row in m:
            w.writerow([repr(float(v)) for v in row])


def _read_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty CSV")
    data = [[float(v) for v in row] for row in rows[1:]]
    return np.asfortranarray(np.array(data, dtype=np.float64))


def _write_vector_csv(path, v, header):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([header])
        for val in v:
            w.writerow([repr(float(val))])


def _read_vector_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[0]) for r in rows[1:]], dtype=np.float64)


def write_problem(prefix, problem, spec=None, pre_norms=None):
    """Write dictionary/signal/truth CSVs plus a JSON manifest under `prefix`."""
    files = {
        "dictionary": _out_path(prefix, "dictionary.csv"),
        "signal": _out_path(prefix, "signal.csv"),
    }
    _write_matrix_csv(files["dictionary"], problem.dictionary)
    _write_vector_csv(files["signal"], problem.signal, "x")
    if problem.truth is not None:
        files["truth"] = _out_path(prefix, "truth.csv")
        _write_vector_csv(files["truth"], problem.truth, "alpha")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "prng": PRNG_NAME,
        "spec": None if spec is None else {
            "dist": spec.dist, "d": spec.d, "K": spec.K,
            "s": spec.s, "sigma": spec.sigma, "seed": spec.seed,
        },
        "pre_norms": None if pre_norms is None else [repr(float(v)) for v in pre_norms],
        "files": {k: os.path.basename(v) for k, v in files.items()},
    }
    with open(_out_path(prefix, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def read_problem(prefix, normalize=False):
    """Load a Problem written by write_problem (manifest preferred, CSVs direct)."""
    manifest_path = prefix + "manifest.json"
    base = os.path.dirname(prefix)
    try:
        if os.path.exists(manifest_path):
            with open(manifest_path) as fh:
                manifest = json.load(fh)
            files = manifest["files"]
            dict_path = os.path.join(base, files["dictionary"])
            sig_path = os.path.join(base, files["signal"])
            truth_path = os.path.join(base, files["truth"]) if "truth" in files else None
        else:
            dict_path = prefix + "dictionary.csv"
            sig_path = prefix + "signal.csv"
            truth_path = prefix + "truth.csv"
            if not os.path.exists(truth_path):
                truth_path = None
        D = _read_matrix_csv(dict_path)
        x = _read_vector_csv(sig_path)
        truth = _read_vector_csv(truth_path) if truth_path else None
    except OSError as exc:
        raise DataError(f"cannot read instance at prefix {prefix!r}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"malformed instance at prefix {prefix!r}: {exc}") from exc
    if normalize:
        norms = np.linalg.norm(D, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-8:
            D, _ = normalize_columns(D)
    try:
        return Problem(dictionary=D, signal=x, truth=truth)
    except ValueError as exc:
        raise DataError(str(exc)) from exc


# ---------------------------------------------------------------- config

PARAM_DEFAULTS = {
    "lambda_tgt": 0.01,
    "eta": 0.5,
    "tau": 1e-6,
    "delta": 1e-3,
    "phi": 0.05,
    "lipschitz": 1.0,
}


def _merge_config(args):
    """Overlay: defaults < config file < explicit CLI flags."""
    merged = dict(PARAM_DEFAULTS)
    merged.update({"seed": 0, "trials": 1, "method": "hcd", "max_support": 4})
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"bad config file {args.config!r}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        merged.update(cfg)
    explicit_lipschitz = "lipschitz" in merged and merged["lipschitz"] != PARAM_DEFAULTS["lipschitz"]
    for key in list(merged):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
            if key == "lipschitz":
                explicit_lipschitz = True
    merged["_lipschitz_explicit"] = explicit_lipschitz
    return merged


def _params_from(merged, **overrides):
    kw = {k: float(merged[k]) for k in PARAM_DEFAULTS}
    kw.update(overrides)
    try:
        return SolverParams(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _methods_from(merged):
    methods = [m.strip() for m in str(merged["method"]).split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {METHODS}")
    if not methods:
        raise UsageError("no method given")
    return methods


# ---------------------------------------------------------------- commands

def _spec_from_args(args, merged):
    try:
        return GenSpec(
            dist=args.dist, d=args.d, K=args.K, s=args.s,
            sigma=args.sigma, seed=int(merged["seed"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(args):
    merged = _merge_config(args)
    spec = _spec_from_args(args, merged)
    problem, pre_norms = generate(spec)
    write_problem(args.out, problem, spec=spec, pre_norms=pre_norms)
    print(f"wrote instance (d={spec.d}, K={spec.K}, s={spec.s}) to {args.out}*")
    return EXIT_OK


def _phi_star(problem, lam):
    if problem.truth is None:
        return None, None
    return objective(problem, problem.truth, lam), "truth"


def _run_method(method, problem, params, max_support, lipschitz_explicit=True):
    t0 = time.perf_counter()
    if method == "hcd":
        sol = solve_homotopy(problem, params)
    elif method == "iht":
        if not lipschitz_explicit:
            # full-vector steps need L >= ||D||_2^2 to avoid divergence
            spectral = float(np.linalg.norm(problem.dictionary, 2) ** 2)
            params = dataclasses.replace(params, lipschitz=max(params.lipschitz, spectral))
        sol = solve_homotopy_iht(problem, params)
    else:
        res = brute_force_l0(problem, params.lambda_tgt, max_support)
        sol = Solution(alpha=res.alpha, objective=res.objective, trace=RunTrace())
    return sol, time.perf_counter() - t0


def _solve_outputs(out, tag, problem, sol, params, elapsed):
    prefix = out if tag is None else f"{out}{tag}."
    phi_star, source = _phi_star(problem, params.lambda_tgt)
    m = compute_metrics(problem, sol, params.lambda_tgt,
                        phi_star=phi_star, phi_star_source=source, wall_time_s=elapsed)
    _write_vector_csv(_out_path(prefix, "solution.csv"), sol.alpha, "alpha")
    write_metrics_json(_out_path(prefix, "metrics.json"), m)
    write_trace_json(_out_path(prefix, "trace.json"), sol.trace)
    write_trace_csv(_out_path(prefix, "trace.csv"), sol.trace)
    return m


def cmd_solve(args):
    merged = _merge_config(args)
    methods = _methods_from(merged)
    params = _params_from(merged)
    problem = read_problem(args.input, normalize=args.normalize)
    code = EXIT_OK
    for method in methods:
        try:
            sol, elapsed = _run_method(method, problem, params, int(merged["max_support"]),
                                       lipschitz_explicit=merged["_lipschitz_explicit"])
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        tag = None if len(methods) == 1 else method
        m = _solve_outputs(args.out, tag, problem, sol, params, elapsed)
        print(f"{method}: recon_error={m.recon_error:.6g} nnz={m.nnz} "
              f"obj_gap={'n/a' if m.obj_gap is None else format(m.obj_gap, '.6g')} "
              f"time={elapsed:.3f}s")
        if args.strict and sol.trace.cap_warnings:
            print("cap warnings:", "; ".join(sol.trace.cap_warnings), file=sys.stderr)
            code = EXIT_CAP
    return code


def cmd_sweep(args):
    merged = _merge_config(args)
    if args.sweep not in ("lambda_tgt", "eta"):
        raise UsageError(f"unknown sweep parameter {args.sweep!r}")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --values list: {exc}") from exc
    if not values:
        raise UsageError("empty --values list")
    problem = _sweep_bench_problem(args, merged)

    rows = []
    for val in values:
        params = _params_from(merged, **{args.sweep: val})
        sol, elapsed = _run_method("hcd", problem, params, int(merged["max_support"]))
        tag = f"{args.sweep}={val:g}"
        m = _solve_outputs(args.out, tag, problem, sol, params, elapsed)
        rows.append({
            "value": val,
            "obj_gap": m.obj_gap,
            "nnz": m.nnz,
            "recon_error": m.recon_error,
            "stages": len(sol.trace.stages),
            "middle_iters_per_stage": ";".join(str(st.middle_iters) for st in sol.trace.stages),
            "wall_time_s": elapsed,
        })
    with open(_out_path(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"swept {args.sweep} over {values}; summary at {args.out}summary.csv")
    return EXIT_OK


def _sweep_bench_problem(args, merged):
    if getattr(args, "input", None):
        return read_problem(args.input, normalize=args.normalize)
    if args.dist is None:
        raise UsageError("either --in or generation flags (--dist/-d/-K/-s) required")
    spec = _spec_from_args(args, merged)
    problem, _ = generate(spec)
    return problem


def cmd_bench(args):
    merged = _merge_config(args)
    methods = _methods_from(merged)
    trials = int(merged["trials"])
    if trials < 1:
        raise UsageError("trials must be >= 1")
    if args.dist is None:
        raise UsageError("bench requires generation flags (--dist/-d/-K/-s)")
    base_seed = int(merged["seed"])
    params = _params_from(merged)
    max_support = int(merged["max_support"])

    def one_trial(seed):
        spec = GenSpec(dist=args.dist, d=args.d, K=args.K, s=args.s, sigma=args.sigma, seed=seed)
        problem, _ = generate(spec)
        phi_star, source = _phi_star(problem, params.lambda_tgt)
        out = {}
        for method in methods:
            try:
                sol, elapsed = _run_method(method, problem, params, max_support,
                                           lipschitz_explicit=merged["_lipschitz_explicit"])
            except Exception as exc:  # failure is recorded, the run continues
                out[method] = {"error": str(exc)}
                continue
            m = compute_metrics(problem, sol, params.lambda_tgt,
                                phi_star=phi_star, phi_star_source=source, wall_time_s=elapsed)
            rec = metrics_to_dict(m)
            rec["support_recovered"] = (problem.truth is not None
                                        and support_recovered(problem.truth, sol.alpha))
            rec["total_middle_iters"] = sol.trace.total_middle_iters
            out[method] = rec
        return out

    seeds = [base_seed + i for i in range(trials)]
    with ThreadPoolExecutor(max_workers=min(4, trials)) as pool:
        per_trial = dict(zip(seeds, pool.map(one_trial, seeds)))

    summary = {"schema_version": SCHEMA_VERSION, "trials": trials, "methods": {}}
    rows = []
    for method in methods:
        recs = [per_trial[s][method] for s in seeds]
        failures = [r for r in recs if "error" in r]
        good = [r for r in recs if "error" not in r]
        agg = {"failures": len(failures)}
        for key in ("recon_error", "nnz", "obj_gap", "wall_time_s", "total_middle_iters"):
            vals = [r[key] for r in good if r.get(key) is not None]
            if vals:
                agg[f"mean_{key}"] = statistics.fmean(vals)
                agg[f"median_{key}"] = statistics.median(vals)
        agg["support_recovery_rate"] = (
            sum(bool(r.get("support_recovered")) for r in good) / trials if good else 0.0
        )
        summary["methods"][method] = agg
        rows.append({"method": method, **agg})

    summary["per_trial"] = {str(s): per_trial[s] for s in seeds}
    with open(_out_path(args.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    fieldnames = sorted({k for row in rows for k in row}, key=lambda k: (k != "method", k))
    with open(_out_path(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"{row['method']}: mean_recon_error={row.get('mean_recon_error', float('nan')):.6g} "
              f"median_nnz={row.get('median_nnz', float('nan'))} "
              f"recovery_rate={row['support_recovery_rate']:.2f}")
    return EXIT_OK


def cmd_oracle_check(args):
    merged = _merge_config(args)
    params = _params_from(merged)
    problem = _sweep_bench_problem(args, merged)
    if problem.K > 20:
        raise UsageError(f"oracle-check needs K <= 20, got K={problem.K}")
    sol = solve_homotopy(problem, params)
    res = brute_force_l0(problem, params.lambda_tgt, int(merged["max_support"]))
    gap = sol.objective - res.objective
    match = tuple(sol.support) == res.support
    print(f"solver objective={sol.objective:.12g} oracle objective={res.objective:.12g} "
          f"gap={gap:.3g} support_match={match}")
    if gap < -1e-10:
        raise DataError("solver beat the oracle beyond tolerance; oracle budget too small?")
    return EXIT_OK if match else EXIT_OK


# ---------------------------------------------------------------- argparse

def _add_common(p):
    p.add_argument("--config", help="JSON config file; CLI flags override it")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda-tgt", dest="lambda_tgt", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--lipschitz", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--method", default=None, help="comma list from {hcd,iht,oracle}")
    p.add_argument("--max-support", dest="max_support", type=int, default=None)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", default="./", help="output path prefix")


def _add_gen_flags(p, required):
    p.add_argument("--dist", choices=("normal", "uniform"), required=required, default=None)
    p.add_argument("-d", type=int, required=required)
    p.add_argument("-K", type=int, required=required)
    p.add_argument("-s", type=int, required=required)
    p.add_argument("--sigma", type=float, default=0.0)


def build_parser():
    parser = _Parser(prog="l0homotopy",
                     description="l0-regularized sparse recovery: generate, solve, sweep, benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    _add_gen_flags(p, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance from files")
    p.add_argument("--in", dest="input", required=True, help="input path prefix")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sweep lambda_tgt or eta over a value list")
    p.add_argument("--in", dest="input", default=None, help="input path prefix")
    p.add_argument("--sweep", required=True)
    p.add_argument("--values", required=True, help="comma list of values")
    _add_gen_flags(p, required=False)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="repeated seeded trials with aggregate metrics")
    _add_gen_flags(p, required=False)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle-check", help="compare the solver against exhaustive enumeration")
    p.add_argument("--in", dest="input", default=None, help="input path prefix")
    _add_gen_flags(p, required=False)
    _add_common(p)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
