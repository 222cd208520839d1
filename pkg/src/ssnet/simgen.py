"""Synthetic benchmark data: AR(1) Gaussian designs, coefficient presets,
signal-to-noise computation and response sampling.

Plans mirror the linear (N.*) and logistic (B.*) benchmark tables; a
``-desk`` suffix scales the predictor count down tenfold and the replication
count to 100 (linear) / 50 (logistic) so a full run fits on a desk machine.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, TrueModel, standardize_design

BETA1 = (3.0, 1.5, 0.0, 0.0, 2.0)


@dataclass(frozen=True)
class ExperimentPlan:
    name: str
    n: int
    p: int
    beta_preset: str          # "beta1" | "beta2"
    rho: float
    family: str = "quadratic"
    sigma2: float | None = None
    n_new: int = 1000
    replications: int = 100

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.family == "quadratic" and (self.sigma2 is None or self.sigma2 < 0):
            raise ValueError("linear plans need sigma2 >= 0 (0 = noiseless)")

    def to_json(self):
        return json.dumps(self.__dict__, sort_keys=True, indent=2)

    @staticmethod
    def from_json(text):
        return ExperimentPlan(**json.loads(text))


_PLAN_ROWS = {
    # name: (n, p, preset, rho, sigma2, family, replications)
    "N.1.5": (100, 3000, "beta1", 0.5, 4.0, "quadratic", 1000),
    "N.1.7": (100, 3000, "beta1", 0.7, 4.0, "quadratic", 1000),
    "N.1.9": (100, 3000, "beta1", 0.9, 4.0, "quadratic", 1000),
    "N.2.5": (200, 2000, "beta2", 0.5, 7.0, "quadratic", 1000),
    "N.2.7": (200, 2000, "beta2", 0.7, 7.0, "quadratic", 1000),
    "N.2.9": (200, 2000, "beta2", 0.9, 7.0, "quadratic", 1000),
    "B.1.5": (300, 3000, "beta1", 0.5, None, "logistic", 500),
    "B.1.7": (300, 3000, "beta1", 0.7, None, "logistic", 500),
    "B.1.9": (300, 3000, "beta1", 0.9, None, "logistic", 500),
    "B.2.5": (500, 2000, "beta2", 0.5, None, "logistic", 500),
    "B.2.7": (500, 2000, "beta2", 0.7, None, "logistic", 500),
    "B.2.9": (500, 2000, "beta2", 0.9, None, "logistic", 500),
}


def plan_by_name(name: str) -> ExperimentPlan:
    """Resolve a benchmark plan id; append ``-desk`` for the scaled-down
    variant (p / 10, 100 or 50 replications)."""
    desk = name.endswith("-desk")
    base = name[:-5] if desk else name
    if base not in _PLAN_ROWS:
        raise KeyError(f"unknown plan {name!r}")
    n, p, preset, rho, sigma2, family, reps = _PLAN_ROWS[base]
    plan = ExperimentPlan(name=name, n=n, p=p, beta_preset=preset, rho=rho,
                          family=family, sigma2=sigma2, replications=reps)
    if desk:
        plan = replace(plan, p=p // 10,
                       replications=100 if family == "quadratic" else 50)
    return plan


def list_plans():
    names = list(_PLAN_ROWS)
    return names + [f"{n}-desk" for n in names]


def beta_preset(kind: str, p: int, rng=None) -> TrueModel:
    """beta1 is the fixed vector (3, 1.5, 0, 0, 2, 0, ...); beta2 places ten
    coefficients of magnitude 2 with random signs in the last ten slots
    (signs drawn per call from rng)."""
    if kind == "beta1":
        if p < len(BETA1):
            raise ValueError(f"beta1 needs p >= {len(BETA1)}")
        b = np.zeros(p)
        b[: len(BETA1)] = BETA1
        return TrueModel(beta=b)
    if kind == "beta2":
        if p < 10:
            raise ValueError("beta2 needs p >= 10")
        rng = np.random.default_rng(rng)
        signs = rng.integers(0, 2, size=10) * 2.0 - 1.0
        b = np.zeros(p)
        b[p - 10:] = 2.0 * signs
        return TrueModel(beta=b)
    raise ValueError(f"unknown preset {kind!r}")


def gen_ar1_design(n: int, p: int, rho: float, rng=None):
    """Rows i.i.d. N(0, Xi) with Xi_ij = rho^|i-j|, generated by the AR(1)
    recursion (exact for this covariance, no p x p factorization), then
    centered with every squared column norm scaled to n."""
    if not abs(rho) < 1.0:
        raise ValueError("need |rho| < 1")
    rng = np.random.default_rng(rng)
    Z = rng.standard_normal((n, p))
    X = np.empty((n, p))
    X[:, 0] = Z[:, 0]
    s = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + s * Z[:, j]
    X -= X.mean(axis=0)
    norms = np.linalg.norm(X, axis=0)
    X *= math.sqrt(n) / norms
    return X


def _population_ar1_block(idx, rho):
    idx = np.asarray(idx)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def snr(plan: ExperimentPlan) -> float:
    """Signal-to-noise ratio sqrt(b' Xi b / sigma2) under the population
    AR(1) covariance; for the random-sign preset the expectation over the
    2^10 sign assignments is computed exactly."""
    if plan.family != "quadratic":
        raise ValueError("SNR is defined for linear plans")
    s2 = plan.sigma2
    if plan.beta_preset == "beta1":
        idx = np.flatnonzero(np.asarray(BETA1))
        b = np.asarray(BETA1)[idx]
        Xi = _population_ar1_block(idx, plan.rho)
        return float(np.sqrt(b @ Xi @ b / s2))
    Xi = _population_ar1_block(np.arange(10), plan.rho)
    vals = []
    for signs in itertools.product((1.0, -1.0), repeat=10):
        b = 2.0 * np.asarray(signs)
        vals.append(math.sqrt(b @ Xi @ b / s2))
    return float(np.mean(vals))


def gen_response(X, true_model: TrueModel, family: str, rng=None):
    """Linear: y = X b + N(0, sigma2 I); logistic: Bernoulli at the inverse
    logit of X b."""
    rng = np.random.default_rng(rng)
    eta = np.asarray(X) @ true_model.beta
    if family == "quadratic":
        s2 = true_model.sigma2
        if s2 is None:
            raise ValueError("linear responses need sigma2 on the true model")
        if s2 == 0:
            return eta.copy()
        return eta + math.sqrt(s2) * rng.standard_normal(eta.shape[0])
    if family == "logistic":
        pr = 1.0 / (1.0 + np.exp(-eta))
        return (rng.uniform(size=eta.shape[0]) < pr).astype(np.float64)
    raise ValueError(f"no response sampler for family {family!r}")


def gen_instance(plan: ExperimentPlan, rng=None):
    """One training draw of a plan on the internal unit-column-norm scale.

    Returns (dataset, true_model_on_that_scale, eval_pack) where eval_pack
    holds the fresh evaluation design (same sqrt-n convention as generated),
    the raw-scale true model and the column scale vector for mapping fitted
    coefficients back.
    """
    rng = np.random.default_rng(rng)
    tm = beta_preset(plan.beta_preset, plan.p, rng)
    if plan.family == "quadratic":
        tm = TrueModel(beta=tm.beta, sigma2=plan.sigma2)
    X = gen_ar1_design(plan.n, plan.p, plan.rho, rng)
    y = gen_response(X, tm, plan.family, rng)
    Xu, scale = standardize_design(X, "unit-norm")
    ds = Dataset(X=Xu, y=y, family=plan.family, standardization="unit-norm",
                 scale=scale)
    tm_u = tm.rescaled(scale)
    X_new = gen_ar1_design(plan.n_new, plan.p, plan.rho, rng)
    eval_pack = {"X_new": X_new, "true_model": tm, "scale": scale}
    if plan.family == "logistic":
        eval_pack["y_new"] = gen_response(X_new, tm, "logistic", rng)
    return ds, tm_u, eval_pack
