"""Command-line interface binding all modules.

Exit codes: 0 success, 1 usage error, 2 data or convergence error.  Every
command is deterministic given ``--seed``; artifacts are written with fixed
formatting so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import harness, svg
from .data import load_csv
from .errors import SsnetError
from .selection import safest_lambda, select_ss, select_ssnet, threshold_lasso
from .simgen import gen_instance, list_plans, plan_by_name, ExperimentPlan
from .solver import default_lambda_grid, fit_lasso, fit_lasso_path
from .theory import theory_report


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_args(p):
    p.add_argument("--csv", required=True, help="input data CSV")
    p.add_argument("--response", default="y",
                   help="response column name (or 0-based index when headerless)")
    p.add_argument("--family", default="quadratic",
                   choices=["quadratic", "logistic", "absolute", "squared-hinge"])
    p.add_argument("--standardize", default="unit-norm",
                   choices=["unit-norm", "sqrt-n", "none"],
                   help="sqrt-n inputs are centered and converted to the internal "
                        "unit-norm scale; a numeric --lambda is then multiplied by "
                        "sqrt(n)")
    p.add_argument("--add-intercept", action="store_true",
                   help="prepend an unpenalized constant column")


def _add_lambda_args(p):
    p.add_argument("--lambda", dest="lam", default="safest",
                   help="penalty value, or 'safest' for the smallest admissible "
                        "choice (needs --sigma2 for the linear family)")
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--c", type=float, default=None,
                   help="logistic strong-convexity constant (default 1/4)")


def _load_dataset(args):
    if args.standardize == "sqrt-n":
        # center first (the sqrt-n convention), then land on the unit scale
        d, names = load_csv(args.csv, response=args.response, family=args.family,
                            standardize="sqrt-n", add_intercept=False)
        from .data import Dataset, standardize_design

        Xu, s2 = standardize_design(d.X, "unit-norm")
        scale = d.scale * s2 if d.scale is not None else s2
        if args.add_intercept:
            Xu = np.column_stack([np.ones(Xu.shape[0]), Xu])
            scale = np.concatenate([[1.0], scale])
            names = ["(intercept)"] + names
        d = Dataset(X=Xu, y=d.y, family=args.family, standardization="unit-norm",
                    intercept=args.add_intercept, scale=scale)
        return d, names, True
    mode = None if args.standardize == "none" else args.standardize
    d, names = load_csv(args.csv, response=args.response, family=args.family,
                        standardize=mode, add_intercept=args.add_intercept)
    return d, names, False


def _resolve_lambda(args, d, sqrt_n_input):
    meta = {}
    if args.lam == "safest":
        lam = safest_lambda(d.family, d.n, d.p, sigma2=args.sigma2, c=args.c)
        meta["lambda_rule"] = "safest"
        if d.family == "logistic":
            meta["c"] = args.c if args.c is not None else 0.25
        else:
            meta["sigma2"] = args.sigma2
    else:
        lam = float(args.lam)
        if sqrt_n_input:
            lam *= math.sqrt(d.n)
            meta["lambda_rescaled_by"] = "sqrt(n)"
        meta["lambda_rule"] = "literal"
    meta["lambda"] = lam
    return lam, meta


def _dump(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fit_to_dict(fit):
    nz = fit.beta.support.indices
    return {
        "lambda": fit.lam,
        "kkt_residual": fit.kkt_residual,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "support": list(nz),
        "coefficients": {str(j): fit.beta.values[j] for j in nz},
    }


def _selection_to_dict(res, meta=None):
    out = {
        "method": res.method,
        "gic_lambda": res.gic_lambda,
        "support": list(res.support.indices),
        "coefficients": {str(j): res.coefficients.values[j]
                         for j in res.support.indices},
        "screening_converged": res.screening_converged,
        "gic_trace": [{"support": list(e.support.indices), "loss": e.loss,
                       "penalty": e.penalty, "gic": e.gic}
                      for e in res.trace.entries],
        "chosen": res.trace.chosen,
    }
    if meta:
        out["meta"] = meta
    return out


def _parse_c_list(text):
    if text is None:
        return None
    return [float(v) for v in text.split(",")]


def build_parser():
    p = _Parser(prog="ssnet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("fit", help="single Lasso fit at one penalty")
    _add_data_args(q)
    _add_lambda_args(q)
    q.add_argument("--out", default=None)

    q = sub.add_parser("path", help="Lasso path on the default log grid")
    _add_data_args(q)
    q.add_argument("--grid-size", type=int, default=None)
    q.add_argument("--out", default=None)

    q = sub.add_parser("select-ss", help="Screening-Selection at one penalty")
    _add_data_args(q)
    _add_lambda_args(q)
    q.add_argument("--out", default=None)

    q = sub.add_parser("select-tl", help="Thresholded Lasso")
    _add_data_args(q)
    _add_lambda_args(q)
    q.add_argument("--tau", type=float, required=True)
    q.add_argument("--out", default=None)

    q = sub.add_parser("select-ssnet", help="net Screening-Selection")
    _add_data_args(q)
    q.add_argument("--sigma2", type=float, default=None,
                   help="noise variance for the linear output grid (estimated "
                        "from the largest screened refit when omitted)")
    q.add_argument("--c-list", default=None,
                   help="comma-separated output-grid multipliers (default "
                        ".25,.5,...,7.5)")
    q.add_argument("--grid-size", type=int, default=None)
    q.add_argument("--out", default=None)

    q = sub.add_parser("simulate", help="write one synthetic dataset as CSV")
    q.add_argument("--plan", default=None, help=f"plan id, one of {list_plans()}")
    q.add_argument("--plan-json", default=None, help="path to a plan JSON file")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True, help="output CSV path")
    q.add_argument("--truth-out", default=None,
                   help="optional JSON path for the true model")

    q = sub.add_parser("bench", help="replication benchmark for a plan")
    q.add_argument("--plan", default=None)
    q.add_argument("--plan-json", default=None)
    q.add_argument("--methods", default="ssnet", help="comma list of ss,ssnet,tl")
    q.add_argument("--reps", type=int, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    q.add_argument("--c-list", default=None)
    q.add_argument("--out-dir", required=True)

    q = sub.add_parser("theory", help="identifiability constants and bounds")
    q.add_argument("--plan", default=None)
    q.add_argument("--plan-json", default=None)
    q.add_argument("--a1", type=float, default=0.9)
    q.add_argument("--theorem", default=None, choices=["T1", "T2", "T3", "T4"])
    q.add_argument("--lambda", dest="lam", default="safest")
    q.add_argument("--samples", type=int, default=10000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None)

    q = sub.add_parser("plot", help="PE-vs-MD SVG from an aggregate CSV")
    q.add_argument("--aggregate", required=True)
    q.add_argument("--marker-ck", type=float, default=2.5)
    q.add_argument("--title", default="")
    q.add_argument("--out", required=True)
    return p


def _resolve_plan(args):
    if args.plan_json:
        with open(args.plan_json) as fh:
            return ExperimentPlan.from_json(fh.read())
    if args.plan:
        return plan_by_name(args.plan)
    raise UsageError("one of --plan / --plan-json is required")


def _cmd_fit(args):
    d, _, sqrt_n = _load_dataset(args)
    lam, meta = _resolve_lambda(args, d, sqrt_n)
    fit = fit_lasso(d, lam)
    out = _fit_to_dict(fit)
    out["meta"] = meta
    _dump(out, args.out)
    return 0 if fit.converged else 2


def _cmd_path(args):
    d, _, _ = _load_dataset(args)
    m = args.grid_size or harness.input_grid_size(d.family)
    grid = default_lambda_grid(d, m)
    fits = fit_lasso_path(d, grid)
    _dump([_fit_to_dict(f) for f in fits], args.out)
    return 0


def _cmd_select_ss(args):
    d, _, sqrt_n = _load_dataset(args)
    lam, meta = _resolve_lambda(args, d, sqrt_n)
    res = select_ss(d, lam)
    _dump(_selection_to_dict(res, meta), args.out)
    return 0


def _cmd_select_tl(args):
    d, _, sqrt_n = _load_dataset(args)
    lam, meta = _resolve_lambda(args, d, sqrt_n)
    fit = fit_lasso(d, lam)
    res = threshold_lasso(d, fit, args.tau)
    meta["tau"] = args.tau
    _dump(_selection_to_dict(res, meta), args.out)
    return 0


def _cmd_select_ssnet(args):
    d, _, _ = _load_dataset(args)
    m = args.grid_size or harness.input_grid_size(d.family)
    in_grid = default_lambda_grid(d, m)
    c_list = _parse_c_list(args.c_list)
    meta = {}
    if d.family == "quadratic":
        sigma2 = args.sigma2
        if sigma2 is None:
            fits = fit_lasso_path(d, in_grid)
            sigma2 = harness.sigma2_plugin(d, fits)
            meta["sigma2_rule"] = "plugin rss/(n - s) on the largest screened refit"
        meta["sigma2"] = sigma2
        out_grid = harness.output_grid_linear(d.p, sigma2, c_list)
    else:
        out_grid = harness.output_grid_logistic(d.p, c_list)
    results = select_ssnet(d, in_grid, out_grid)
    _dump([_selection_to_dict(r, meta) for r in results], args.out)
    return 0


def _cmd_simulate(args):
    plan = _resolve_plan(args)
    rng = np.random.default_rng([args.seed, 0])
    ds, _, ev = _simulate_raw(plan, rng)
    X_raw, y = ds
    with open(args.out, "w") as fh:
        fh.write(",".join(["y"] + [f"x{j + 1}" for j in range(X_raw.shape[1])]) + "\n")
        for i in range(X_raw.shape[0]):
            fh.write(",".join([repr(float(y[i]))]
                              + [repr(float(v)) for v in X_raw[i]]) + "\n")
    if args.truth_out:
        tm = ev["true_model"]
        _dump({"beta": [float(b) for b in tm.beta],
               "support": list(tm.support.indices),
               "sigma2": tm.sigma2, "plan": plan.name}, args.truth_out)
    return 0


def _simulate_raw(plan, rng):
    from .simgen import beta_preset, gen_ar1_design, gen_response
    from .data import TrueModel

    tm = beta_preset(plan.beta_preset, plan.p, rng)
    if plan.family == "quadratic":
        tm = TrueModel(beta=tm.beta, sigma2=plan.sigma2)
    X = gen_ar1_design(plan.n, plan.p, plan.rho, rng)
    y = gen_response(X, tm, plan.family, rng)
    return (X, y), tm, {"true_model": tm}


def _cmd_bench(args):
    plan = _resolve_plan(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    c_list = _parse_c_list(args.c_list)
    rows, aggs, failures = harness.run_plan(plan, methods=methods, reps=args.reps,
                                            seed=args.seed, threads=args.threads,
                                            c_list=c_list)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = plan.name.replace(".", "_")
    harness.write_results_csv(rows, os.path.join(args.out_dir, f"{stem}_results.csv"))
    harness.write_aggregate_csv(aggs, os.path.join(args.out_dir, f"{stem}_aggregate.csv"))
    marker = harness.MARKER_CK[plan.family]
    text = svg.pe_md_svg(aggs, marker_ck=marker, title=plan.name)
    with open(os.path.join(args.out_dir, f"{stem}_curves.svg"), "w") as fh:
        fh.write(text)
    if failures:
        sys.stderr.write(json.dumps({"failed_replications": failures}) + "\n")
    return 0


def _cmd_theory(args):
    plan = _resolve_plan(args)
    rng = np.random.default_rng([args.seed, 0])
    ds, tm_u, _ = gen_instance(plan, rng)
    family = plan.family
    theorem = args.theorem or ("T3" if family == "quadratic" else "T2")
    sigma = math.sqrt(plan.sigma2) if plan.sigma2 else 0.5
    c = 1.0 if family == "quadratic" else 0.25
    if args.lam == "safest":
        lam = safest_lambda(family, plan.n, plan.p,
                            sigma2=plan.sigma2 if family == "quadratic" else None,
                            c=None)
    else:
        lam = float(args.lam)
    rep = theory_report(ds.X, tm_u, a1=args.a1, family=family, sigma=sigma, c=c,
                        theorem=theorem, lam=lam, n_samples=args.samples,
                        seed=args.seed)
    text = rep.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_plot(args):
    aggs = harness.read_aggregate_csv(args.aggregate)
    text = svg.pe_md_svg(aggs, marker_ck=args.marker_ck, title=args.title)
    with open(args.out, "w") as fh:
        fh.write(text)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "path": _cmd_path,
    "select-ss": _cmd_select_ss,
    "select-tl": _cmd_select_tl,
    "select-ssnet": _cmd_select_ssnet,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "theory": _cmd_theory,
    "plot": _cmd_plot,
}


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except (SsnetError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
