"""Replication driver for the PE-vs-MD benchmark protocol.

Each replication draws fresh training and evaluation data, runs the selected
methods over a common output grid of criterion penalties, refits the chosen
supports and records model dimension and prediction error.  Per-replication
rows are always materialized so the aggregate means are a pure post-process
of the log.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset, LambdaGrid
from .refit import RefitCache
from .selection import select_ss, select_ssnet, threshold_lasso
from .simgen import ExperimentPlan, gen_instance
from .solver import SolverConfig, default_lambda_grid, fit_lasso_path
from .losses import loss_value

DEFAULT_C_GRID = tuple(np.arange(1, 31) * 0.25)  # .25, .5, ..., 7.5
MARKER_CK = {"quadratic": 2.5, "logistic": 2.0}
RESULT_COLUMNS = ("plan", "method", "replication", "c_k", "lambda_k", "md", "pe",
                  "seed", "converged")
AGGREGATE_COLUMNS = ("plan", "method", "c_k", "lambda_k", "mean_md", "mean_pe",
                     "se_pe", "n_reps")


@dataclass(frozen=True)
class CurvePoint:
    c_k: float
    lambda_k: float
    mean_md: float
    mean_pe: float
    se_pe: float
    n_reps: int


def curve_points(aggregates):
    """Aggregate rows regrouped as {(plan, method): [CurvePoint, ...]} in
    c_k order."""
    out = {}
    for a in aggregates:
        out.setdefault((a["plan"], a["method"]), []).append(
            CurvePoint(c_k=a["c_k"], lambda_k=a["lambda_k"], mean_md=a["mean_md"],
                       mean_pe=a["mean_pe"], se_pe=a["se_pe"], n_reps=a["n_reps"]))
    for key in out:
        out[key].sort(key=lambda cp: cp.c_k)
    return out


def prediction_error_linear(X_new, beta_true, beta_hat_embedded, n, sigma2):
    """||X_new (b_true - b_hat)||^2 / (n sigma2), n the training size."""
    X_new = np.asarray(X_new, dtype=np.float64)
    diff = np.asarray(beta_true, dtype=np.float64) - np.asarray(beta_hat_embedded,
                                                                dtype=np.float64)
    r = X_new @ diff
    return float(r @ r) / (n * sigma2)


def prediction_error_logistic(X_new, y_new, beta_hat):
    """Misclassification frequency of the sign rule x'b > 0 (ties -> 0)."""
    X_new = np.asarray(X_new, dtype=np.float64)
    yhat = (X_new @ np.asarray(beta_hat, dtype=np.float64) > 0.0).astype(np.float64)
    return float(np.mean(yhat != np.asarray(y_new, dtype=np.float64)))


def output_grid_linear(p, sigma2, c_list=None):
    """GIC penalties lambda_k = sqrt(c_k log p sigma2)."""
    c = np.asarray(DEFAULT_C_GRID if c_list is None else c_list, dtype=np.float64)
    if (np.diff(c) <= 0).any() or (c <= 0).any():
        raise ValueError("c_list must be increasing and positive")
    return LambdaGrid(np.sqrt(c * math.log(p) * sigma2))


def output_grid_logistic(p, c_list=None):
    """GIC penalties lambda_k = sqrt(c_k log p) (noise scale absorbed)."""
    c = np.asarray(DEFAULT_C_GRID if c_list is None else c_list, dtype=np.float64)
    if (np.diff(c) <= 0).any() or (c <= 0).any():
        raise ValueError("c_list must be increasing and positive")
    return LambdaGrid(np.sqrt(c * math.log(p)))


def _plan_sigma2(plan: ExperimentPlan) -> float:
    # noiseless plans fall back to unit normalization for the grid and PE
    return plan.sigma2 if plan.sigma2 else 1.0


def output_grid_for(plan: ExperimentPlan, c_list=None):
    if plan.family == "quadratic":
        return output_grid_linear(plan.p, _plan_sigma2(plan), c_list)
    return output_grid_logistic(plan.p, c_list)


def input_grid_size(family: str) -> int:
    return 50 if family == "quadratic" else 20


def input_grid_eps(family: str) -> float:
    # logistic paths stop at the glmnet-style floor; below it the fits are
    # quasi-separable and defeat the fixed-curvature solver
    return 1e-3 if family == "quadratic" else 1e-2


def sigma2_plugin(d: Dataset, fits) -> float:
    """Residual-variance estimate RSS / (n - s) refit on the largest screened
    support (capped at floor(n/2))."""
    from .selection import nested_family

    cache = RefitCache(d)
    best = None
    for fit in fits:
        fam = nested_family(d, fit, max_size=d.n // 2)
        if len(fam):
            J = fam.supports[-1]
            if best is None or len(J) > len(best):
                best = J
    if best is None or len(best) >= d.n:
        rss = float(d.y @ d.y)
        return rss / d.n
    res = cache.get(best)
    return 2.0 * res.loss / (d.n - len(best))  # quadratic loss is RSS/2


def _pe_for_support(plan, ev, result, scale):
    beta_raw = result.coefficients.values / scale
    if plan.family == "quadratic":
        return prediction_error_linear(ev["X_new"], ev["true_model"].beta, beta_raw,
                                       plan.n, _plan_sigma2(plan))
    return prediction_error_logistic(ev["X_new"], ev["y_new"], beta_raw)


def run_replication(plan: ExperimentPlan, methods, seed: int, rep: int,
                    c_list=None, cfg: SolverConfig | None = None):
    """All rows for one replication: one row per (method, c_k)."""
    rng = np.random.default_rng([seed, rep])
    ds, _, ev = gen_instance(plan, rng)
    scale = ev["scale"]
    c = np.asarray(DEFAULT_C_GRID if c_list is None else c_list, dtype=np.float64)
    out_grid = output_grid_for(plan, c)
    in_grid = default_lambda_grid(ds, input_grid_size(plan.family),
                                  eps=input_grid_eps(plan.family))
    cfg = cfg or SolverConfig()
    rows = []
    cache = RefitCache(ds)
    for method in methods:
        if method == "ssnet":
            results = select_ssnet(ds, in_grid, out_grid, cfg, cache=cache)
        elif method == "ss":
            results = [select_ss(ds, float(lam), cfg, cache=cache)
                       for lam in out_grid]
        elif method == "tl":
            fits = fit_lasso_path(ds, out_grid, cfg)
            results = [threshold_lasso(ds, fit, fit.lam, cache=cache)
                       for fit in fits]
        else:
            raise ValueError(f"unknown method {method!r}")
        for ck, lam_k, res in zip(c, out_grid, results):
            pe = _pe_for_support(plan, ev, res, scale)
            rows.append({
                "plan": plan.name, "method": method, "replication": rep,
                "c_k": float(ck), "lambda_k": float(lam_k),
                "md": len(res.support), "pe": pe, "seed": seed,
                "converged": bool(res.screening_converged),
            })
    return rows


def _worker(args):
    plan, methods, seed, rep, c_list = args
    try:
        return run_replication(plan, methods, seed, rep, c_list), None
    except Exception as exc:  # noqa: BLE001 - logged, excluded from means
        return [], {"replication": rep, "seed": seed, "error": repr(exc)}


def run_plan(plan: ExperimentPlan, methods=("ssnet",), reps: int | None = None,
             seed: int = 0, threads: int = 1, c_list=None):
    """Run every replication and aggregate; deterministic given the seed
    regardless of thread count (ordered reduction over replication index).

    Returns (rows, aggregates); replication failures are excluded from the
    means and reported in the third element of the aggregate tuple.
    """
    methods = tuple(m.lower() for m in methods)
    reps = plan.replications if reps is None else reps
    rows, failures = [], []
    if threads > 1:
        jobs = [(plan, methods, seed, r, c_list) for r in range(reps)]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            for result, failure in ex.map(_worker, jobs):
                rows.extend(result)
                if failure is not None:
                    failures.append(failure)
    else:
        for r in range(reps):
            result, failure = _worker((plan, methods, seed, r, c_list))
            rows.extend(result)
            if failure is not None:
                failures.append(failure)
    return rows, aggregate_rows(rows), failures


def aggregate_rows(rows):
    """Mean/standard-error curve points per (method, c_k), in deterministic
    order."""
    keys = sorted({(r["method"], r["c_k"]) for r in rows})
    out = []
    for method, ck in keys:
        sel = [r for r in rows if r["method"] == method and r["c_k"] == ck]
        pes = np.asarray([r["pe"] for r in sel])
        mds = np.asarray([r["md"] for r in sel], dtype=np.float64)
        n = len(sel)
        se = float(np.std(pes, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append({
            "plan": sel[0]["plan"], "method": method, "c_k": ck,
            "lambda_k": sel[0]["lambda_k"], "mean_md": float(np.mean(mds)),
            "mean_pe": float(np.mean(pes)), "se_pe": se, "n_reps": n,
        })
    return out


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_results_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in RESULT_COLUMNS])


def write_aggregate_csv(aggs, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AGGREGATE_COLUMNS)
        for r in aggs:
            w.writerow([_fmt(r[c]) for c in AGGREGATE_COLUMNS])


def read_aggregate_csv(path):
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        out = []
        for row in rd:
            out.append({"plan": row["plan"], "method": row["method"],
                        "c_k": float(row["c_k"]), "lambda_k": float(row["lambda_k"]),
                        "mean_md": float(row["mean_md"]),
                        "mean_pe": float(row["mean_pe"]),
                        "se_pe": float(row["se_pe"]), "n_reps": int(row["n_reps"])})
        return out


# ---------------------------------------------------------------------------
# cross-validation (real-data inputs)

def lasso_cv_deviance(d: Dataset, grid: LambdaGrid, folds: int = 10, seed: int = 0,
                      cfg: SolverConfig | None = None, warm_fits=None):
    """K-fold held-out deviance (twice the loss) of the Lasso along a grid.

    Returns (deviance_per_lambda, index_of_minimum).  Fold assignment is a
    seeded permutation, so the curve is deterministic.  ``warm_fits`` (a
    full-data path) only seeds the fold solvers; every fold fit still stops
    on its own KKT certificate.
    """
    from .solver import fit_lasso

    cfg = cfg or SolverConfig()
    rng = np.random.default_rng(seed)
    perm = rng.permutation(d.n)
    dev = np.zeros(len(grid))
    for f in range(folds):
        test = perm[f::folds]
        train = np.setdiff1d(perm, test)
        d_tr = Dataset(X=d.X[train], y=d.y[train], family=d.family,
                       standardization="none", intercept=d.intercept)
        Xte, yte = d.X[test], d.y[test]
        if warm_fits is None:
            fits = fit_lasso_path(d_tr, grid, cfg)
        else:
            fits = []
            prev = None
            for i in range(len(grid) - 1, -1, -1):
                init = prev if prev is not None else warm_fits[i].beta
                fits.append(fit_lasso(d_tr, float(grid.values[i]), cfg, init=init))
                prev = fits[-1].beta
            fits = list(reversed(fits))
        for i, fit in enumerate(fits):
            dev[i] += 2.0 * loss_value(d.family, Xte @ fit.beta.values, yte)
    return dev, int(np.argmin(dev))
