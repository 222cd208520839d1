"""Numerical evaluation of the identifiability constants and selection-error
bounds, plus Monte-Carlo checks of the subgaussian tail inequalities.

The projection-residual separation (delta_k, delta) is computed exactly by
subset enumeration.  The compatibility factor and the sign-restricted
pseudo-cone invertibility factor are infima over continuous cones: the
compatibility factor is certified by per-orthant quadratic minimization when
p is small, and both fall back to sampled upper bounds (flagged) otherwise.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .data import TrueModel
from .errors import MissingConstant, SsnetError, TooLargeT
from .losses import gamma_dot
from .selection import select_ss

MAX_ENUM_T = 12
MAX_ENUM_P = 12


# ---------------------------------------------------------------------------
# technical constants

@dataclass(frozen=True)
class BoundConstants:
    """a1 in (1/2, 1) and its derived companions:
    a2 = 1 - (1 - log(1 - a1)) (1 - a1), a3 = 2 - 1/a1, a4 = sqrt(a1 a2)."""

    a1: float
    sigma: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.a1 < 1.0:
            raise ValueError("a1 must lie in (1/2, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.c <= 1.0:
            raise ValueError("c must lie in (0, 1]")

    @property
    def a2(self) -> float:
        return 1.0 - (1.0 - math.log(1.0 - self.a1)) * (1.0 - self.a1)

    @property
    def a3(self) -> float:
        return 2.0 - 1.0 / self.a1

    @property
    def a4(self) -> float:
        return math.sqrt(self.a1 * self.a2)


# ---------------------------------------------------------------------------
# projection separations

def compute_delta_k(X, true_model: TrueModel):
    """Exact minimum projection residuals ||(I - H_J) X_T b_T||^2 over all
    J inside the true support with |T \\ J| = k, for k = 1..t (k = t is the
    full drop, J empty).  Enumerates all subsets; requires t <= 12."""
    X = np.asarray(X, dtype=np.float64)
    T = true_model.support.as_array()
    t = T.size
    if t < 1:
        raise ValueError("true support is empty")
    if t > MAX_ENUM_T:
        raise TooLargeT(f"t={t} exceeds the enumeration budget {MAX_ENUM_T}")
    mu = X[:, T] @ true_model.beta[T]
    out = np.empty(t)
    for k in range(1, t + 1):
        best = np.inf
        for J in itertools.combinations(T.tolist(), t - k):
            if J:
                Q, _ = np.linalg.qr(X[:, list(J)])
                r = mu - Q @ (Q.T @ mu)
            else:
                r = mu
            best = min(best, float(r @ r))
        out[k - 1] = best
    return out


def compute_delta(delta_k) -> float:
    """Scaled separation: min over k of delta_k / k (the k = t full-drop term
    is included, matching a minimum over every proper subset)."""
    dk = np.asarray(delta_k, dtype=np.float64)
    if dk.size == 0:
        raise ValueError("delta_k vector is empty")
    ks = np.arange(1, dk.size + 1)
    return float(np.min(dk / ks))


# ---------------------------------------------------------------------------
# compatibility factor

@dataclass(frozen=True)
class ConeEstimate:
    value: float
    certified: bool
    minimizer: np.ndarray = field(compare=False, default=None)


def _cone_ratio(G, nu, T_mask):
    l1T = np.sum(np.abs(nu[T_mask]))
    return float(nu @ (G @ nu)) / (l1T * l1T)


def _kappa_orthant(G, s, T_idx, Tc_idx, rho):
    """Minimize nu' G nu over one sign orthant with |nu_T|_1 = 1 and
    |nu_Tc|_1 <= rho, then polish through the KKT system of the active set."""
    p = G.shape[0]
    cons = [
        {"type": "eq", "fun": lambda v: float(s[T_idx] @ v[T_idx]) - 1.0,
         "jac": lambda v: np.where(np.isin(np.arange(p), T_idx), s, 0.0)},
        {"type": "ineq", "fun": lambda v: rho - float(s[Tc_idx] @ v[Tc_idx]),
         "jac": lambda v: -np.where(np.isin(np.arange(p), Tc_idx), s, 0.0)},
    ]
    bounds = [(0.0, None) if s[j] > 0 else (None, 0.0) for j in range(p)]
    x0 = np.zeros(p)
    x0[T_idx] = s[T_idx] / T_idx.size
    res = minimize(lambda v: float(v @ (G @ v)), x0, jac=lambda v: 2.0 * (G @ v),
                   method="SLSQP", bounds=bounds, constraints=cons,
                   options={"maxiter": 300, "ftol": 1e-14})
    nu = res.x if res.x is not None else x0
    val = float(nu @ (G @ nu))
    # KKT polish on the detected active set
    rows = [np.where(np.isin(np.arange(p), T_idx), s, 0.0)]
    rhs = [1.0]
    if Tc_idx.size and float(s[Tc_idx] @ nu[Tc_idx]) >= rho - 1e-8:
        rows.append(np.where(np.isin(np.arange(p), Tc_idx), s, 0.0))
        rhs.append(rho)
    for j in range(p):
        if abs(nu[j]) < 1e-9:
            e = np.zeros(p)
            e[j] = 1.0
            rows.append(e)
            rhs.append(0.0)
    A = np.vstack(rows)
    b = np.asarray(rhs)
    m = A.shape[0]
    K = np.zeros((p + m, p + m))
    K[:p, :p] = 2.0 * G
    K[:p, p:] = A.T
    K[p:, :p] = A
    sol, *_ = np.linalg.lstsq(K, np.concatenate([np.zeros(p), b]), rcond=None)
    cand = sol[:p]
    feas = (np.all(s * cand >= -1e-10)
            and (Tc_idx.size == 0 or float(s[Tc_idx] @ cand[Tc_idx]) <= rho + 1e-8)
            and abs(float(s[T_idx] @ cand[T_idx]) - 1.0) <= 1e-8)
    if feas:
        cval = float(cand @ (G @ cand))
        if cval < val:
            return cval, cand
    return val, nu


def compatibility_factor(X, T, a: float, mode: str = "enumerate",
                         n_samples: int = 10000, rng=None) -> ConeEstimate:
    """Cone-restricted infimum of nu' X'X nu / |nu_T|_1^2.

    ``enumerate`` (p <= 12) minimizes per sign orthant and is certified to
    solver tolerance; ``sample`` takes the minimum over random cone
    directions with local refinement and can only overestimate the infimum.
    """
    X = np.asarray(X, dtype=np.float64)
    p = X.shape[1]
    T_idx = np.asarray(sorted(T), dtype=np.intp)
    if T_idx.size == 0:
        raise ValueError("support must be nonempty")
    Tc_idx = np.asarray([j for j in range(p) if j not in set(T_idx.tolist())],
                        dtype=np.intp)
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    rho = (1.0 + a) / (1.0 - a)
    G = X.T @ X
    if mode == "enumerate":
        if p > MAX_ENUM_P:
            raise ValueError(f"enumerate mode needs p <= {MAX_ENUM_P}")
        best, best_nu = np.inf, None
        # nu -> -nu symmetry: pin the sign of the first support coordinate
        free = [j for j in range(p) if j != int(T_idx[0])]
        for bits in itertools.product((1.0, -1.0), repeat=len(free)):
            s = np.empty(p)
            s[T_idx[0]] = 1.0
            for j, b in zip(free, bits):
                s[j] = b
            val, nu = _kappa_orthant(G, s, T_idx, Tc_idx, rho)
            if val < best:
                best, best_nu = val, nu
        return ConeEstimate(value=best, certified=True, minimizer=best_nu)
    if mode != "sample":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng)
    t = T_idx.size
    best, best_nu = np.inf, None

    def consider(nu):
        nonlocal best, best_nu
        l1T = np.sum(np.abs(nu[T_idx]))
        if l1T <= 0:
            return
        if np.sum(np.abs(nu[Tc_idx])) > rho * l1T + 1e-12:
            return
        val = float(nu @ (G @ nu)) / (l1T * l1T)
        if val < best:
            best, best_nu = val, nu.copy()

    if t <= 10:  # structured probes: equal magnitudes, every sign pattern
        for signs in itertools.product((1.0, -1.0), repeat=t):
            nu = np.zeros(p)
            nu[T_idx] = np.asarray(signs) / t
            consider(nu)
    for _ in range(n_samples):
        nu = np.zeros(p)
        nu[T_idx] = rng.standard_normal(t)
        if Tc_idx.size:
            g = rng.standard_normal(Tc_idx.size)
            budget = rng.uniform() * rho * np.sum(np.abs(nu[T_idx]))
            nu[Tc_idx] = g * (budget / np.sum(np.abs(g)))
        consider(nu)
    for _ in range(300):  # local refinement around the incumbent
        nu = best_nu + 0.05 * rng.standard_normal(p) * max(np.max(np.abs(best_nu)), 1e-12)
        l1T = np.sum(np.abs(nu[T_idx]))
        if l1T > 0 and Tc_idx.size:
            over = np.sum(np.abs(nu[Tc_idx])) / (rho * l1T)
            if over > 1.0:
                nu[Tc_idx] /= over
        consider(nu)
    return ConeEstimate(value=best, certified=False, minimizer=best_nu)


# ---------------------------------------------------------------------------
# sign-restricted pseudo-cone invertibility factor

@dataclass(frozen=True)
class ScifEstimate:
    value: float
    upper_bound_only: bool
    minimizer: np.ndarray = field(compare=False, default=None)


def scif_numerator(X, beta0, nu, family: str):
    """|X' [gdot(X (beta0 + nu)) - gdot(X beta0)]|_inf and the inner vector."""
    if family == "quadratic":
        u = X.T @ (X @ nu)
    else:
        eta0 = X @ beta0
        u = X.T @ (gamma_dot(family, eta0 + X @ nu) - gamma_dot(family, eta0))
    return u


def scif_feasible(X, beta0, nu, T_mask, rho, family):
    l1T = np.sum(np.abs(nu[T_mask]))
    if l1T <= 0:
        return False, None
    if np.sum(np.abs(nu[~T_mask])) > rho * l1T + 1e-12:
        return False, None
    u = scif_numerator(X, beta0, nu, family)
    if np.any(nu[~T_mask] * u[~T_mask] > 1e-12):
        return False, None
    return True, u


def scif_estimate(X, true_model: TrueModel, a: float, q: str = "inf",
                  family: str = "quadratic", n_samples: int = 10000,
                  rng=None) -> ScifEstimate:
    """Sampled upper bound on the signed-cone invertibility factor
    inf |X'[gdot(X(b0+nu)) - gdot(X b0)]|_inf / |nu|_inf.

    Always flagged upper_bound_only except for an orthonormal linear design,
    where the ratio is identically one.
    """
    if q != "inf":
        raise ValueError("only the q = inf variant is implemented")
    X = np.asarray(X, dtype=np.float64)
    p = X.shape[1]
    T_idx = true_model.support.as_array()
    T_mask = np.zeros(p, dtype=bool)
    T_mask[T_idx] = True
    rho = (1.0 + a) / (1.0 - a)
    beta0 = true_model.beta
    if family == "quadratic":
        G = X.T @ X
        if G.shape[0] == G.shape[1] and np.max(np.abs(G - np.eye(p))) <= 1e-10:
            e = np.zeros(p)
            e[T_idx[0]] = 1.0
            return ScifEstimate(value=1.0, upper_bound_only=False, minimizer=e)
    rng = np.random.default_rng(rng)
    t = T_idx.size
    best, best_nu = np.inf, None

    def consider(nu):
        nonlocal best, best_nu
        ok, u = scif_feasible(X, beta0, nu, T_mask, rho, family)
        if not ok:
            return
        val = float(np.max(np.abs(u))) / float(np.max(np.abs(nu)))
        if val < best:
            best, best_nu = val, nu.copy()

    scale = true_model.beta_min if true_model.beta_min > 0 else 1.0
    for j in T_idx:  # coordinate probes are always sign-feasible
        for sgn in (1.0, -1.0):
            nu = np.zeros(p)
            nu[j] = sgn * scale
            consider(nu)
    for _ in range(n_samples):
        nu = np.zeros(p)
        nu[T_idx] = rng.standard_normal(t) * scale
        if p > t:
            g = rng.standard_normal(p - t)
            budget = rng.uniform() * rho * np.sum(np.abs(nu[T_idx]))
            cand = g * (budget / np.sum(np.abs(g)))
            nu[~T_mask] = cand
            # sign repair against the numerator, then zero any holdouts
            for _ in range(3):
                u = scif_numerator(X, beta0, nu, family)
                viol = (nu * u > 1e-12) & ~T_mask
                if not viol.any():
                    break
                nu[viol] *= -1.0
            u = scif_numerator(X, beta0, nu, family)
            viol = (nu * u > 1e-12) & ~T_mask
            nu[viol] = 0.0
        consider(nu)
    if best_nu is None:
        raise SsnetError("no feasible cone direction found")
    for _ in range(300):
        nu = best_nu + 0.05 * rng.standard_normal(p) * max(np.max(np.abs(best_nu)), 1e-12)
        l1T = np.sum(np.abs(nu[T_mask]))
        if l1T > 0 and p > t:
            over = np.sum(np.abs(nu[~T_mask])) / (rho * l1T)
            if over > 1.0:
                nu[~T_mask] /= over
            u = scif_numerator(X, beta0, nu, family)
            nu[(nu * u > 1e-12) & ~T_mask] = 0.0
        consider(nu)
    return ScifEstimate(value=best, upper_bound_only=True, minimizer=best_nu)


# ---------------------------------------------------------------------------
# admissible penalties and error bounds

@dataclass(frozen=True)
class AdmissibleInterval:
    lo: float
    hi: float
    theorem: str

    @property
    def empty(self) -> bool:
        return not self.lo <= self.hi


def _need(value, name):
    if value is None:
        raise MissingConstant(f"theorem evaluation needs {name}")
    return value


def admissible_lambda_interval(constants: BoundConstants, report,
                               theorem: str) -> AdmissibleInterval:
    """Evaluate the [lo, hi] penalty window of the selected theorem variant,
    term by term.  An empty window (lo > hi) is returned flagged, not raised;
    T4 is evaluated in shape-only form with its universal constants set to 1.
    """
    a1, a2, a3, a4 = constants.a1, constants.a2, constants.a3, constants.a4
    sigma2 = constants.sigma ** 2
    c = constants.c
    p = _need(report.p, "p")
    logp = math.log(p)
    if theorem == "T1":
        lo2 = 2.0 * sigma2 * logp / (a1 * a1 * a2)
        zeta = _need(report.zeta_a_inf, "zeta")
        hi2 = (zeta * _need(report.beta_min, "beta_min")) ** 2 / (4.0 * (1.0 + a1) ** 2)
    elif theorem == "T2":
        t = _need(report.t, "t")
        lo2 = max(2.0 * sigma2 * logp / (a3 * a2 * a1 * c),
                  sigma2 * t / ((1.0 - a1) ** 2 * c))
        terms = [c * _need(report.delta, "delta") / (1.0 + math.sqrt(2.0 * (1.0 - a1))) ** 2]
        zeta4 = _need(report.zeta_a4_inf, "zeta at a4")
        terms.append((zeta4 * _need(report.beta_min, "beta_min")) ** 2
                     / (4.0 * (1.0 + a4) ** 2))
        tbar = report.t_bar
        if tbar is not None and tbar > t and report.delta_t_minus_1 is not None:
            terms.append(c * report.delta_t_minus_1 / (16.0 * (tbar - t)))
        hi2 = min(terms)
    elif theorem == "T3":
        lo2 = 2.0 * sigma2 * logp / a1 ** 4
        zeta = _need(report.zeta_a_inf, "zeta")
        hi2 = min((zeta * _need(report.beta_min, "beta_min")) ** 2,
                  _need(report.delta, "delta")) / (4.0 * (1.0 + a1) ** 2)
    elif theorem == "T4":
        t = _need(report.t, "t")
        L = _need(report.lipschitz_L, "Lipschitz constant")
        lo2 = max(logp / (a1 * a1), logp / c, t / (a2 * c)) * L * L
        terms = [c * _need(report.delta, "delta") / (1.0 + math.sqrt(2.0 * a2)) ** 2,
                 ((1.0 - a1) * c * _need(report.kappa_a, "kappa")
                  * _need(report.beta_min, "beta_min")) ** 2]
        tbar = report.t_bar
        if tbar is not None and tbar > t and report.delta_t_minus_1 is not None:
            terms.append(c * report.delta_t_minus_1 / (tbar - t))
        hi2 = min(terms)
    else:
        raise ValueError(f"unknown theorem {theorem!r}")
    return AdmissibleInterval(lo=math.sqrt(lo2), hi=math.sqrt(max(hi2, 0.0)),
                              theorem=theorem)


def selection_error_bound(constants: BoundConstants, lam: float, theorem: str) -> float:
    """Right-hand side of the requested exponential selection-error bound."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a1, a2 = constants.a1, constants.a2
    sigma2 = constants.sigma ** 2
    lam2 = lam * lam
    if theorem == "T1":
        return 2.0 * math.exp(-(1.0 - a2) * a1 * a1 * lam2 / (2.0 * sigma2))
    if theorem == "T2":
        return 4.5 * math.exp(-a2 * (1.0 - a1) * constants.c * lam2 / (2.0 * sigma2))
    if theorem == "T3":
        return 5.0 * math.exp(-a1 * a1 * (1.0 - a1 * a1) * lam2 / (2.0 * sigma2))
    raise ValueError(f"unknown theorem {theorem!r}")


# ---------------------------------------------------------------------------
# Monte-Carlo checks

@dataclass(frozen=True)
class TailCheck:
    empirical_prob: float
    bound: float
    mc_se: float

    @property
    def passed(self) -> bool:
        return self.empirical_prob <= self.bound + 3.0 * self.mc_se


def subgaussian_tail_check(kind: str, sigma: float, n: int, m: int, tau: float,
                           n_mc: int = 100_000, seed: int = 0) -> TailCheck:
    """Monte-Carlo tail probabilities for a Gaussian noise vector against the
    subgaussian linear-form bound exp(-tau^2 / (2 sigma^2)) and the
    quadratic-form bound exp(-(m/2)(tau - 1 - log tau))."""
    if n_mc < 10_000:
        raise ValueError("need at least 1e4 Monte-Carlo draws")
    rng = np.random.default_rng(seed)
    if kind == "linear_form":
        if not tau > 0:
            raise ValueError("linear form needs tau > 0")
        nu = np.ones(n) / math.sqrt(n)
        hits = 0
        for start in range(0, n_mc, 20_000):
            b = min(20_000, n_mc - start)
            eps = sigma * rng.standard_normal((b, n))
            hits += int(np.sum(eps @ nu >= tau))
        bound = math.exp(-tau * tau / (2.0 * sigma * sigma))
    elif kind == "quadratic_form":
        if not tau > 1:
            raise ValueError("quadratic form needs tau > 1")
        if not 1 <= m <= n:
            raise ValueError("projection rank m must lie in [1, n]")
        hits = 0
        for start in range(0, n_mc, 20_000):
            b = min(20_000, n_mc - start)
            eps = sigma * rng.standard_normal((b, m))  # projection onto m coords
            hits += int(np.sum(np.sum(eps * eps, axis=1) >= m * sigma * sigma * tau))
        bound = math.exp(-0.5 * m * (tau - 1.0 - math.log(tau)))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    phat = hits / n_mc
    se = math.sqrt(max(phat * (1.0 - phat), 1.0 / n_mc) / n_mc)
    return TailCheck(empirical_prob=phat, bound=bound, mc_se=se)


# ---------------------------------------------------------------------------
# report assembly

@dataclass(frozen=True)
class TheoryReport:
    n: int
    p: int
    t: int
    t_bar: int | None
    family: str
    a1: float
    sigma: float
    c: float
    delta_k: tuple        # k = 1..t, the k = t entry is the full drop
    delta: float
    delta_t_minus_1: float | None
    beta_min: float
    kappa_a: float | None
    kappa_certified: bool
    zeta_a_inf: float | None
    zeta_upper_bound_only: bool
    zeta_a4_inf: float | None
    lipschitz_L: float | None
    theorem: str
    lambda_value: float | None
    lambda_interval: tuple[float, float] | None
    bound_value: float | None

    def to_dict(self):
        d = dict(self.__dict__)
        d["delta_k"] = list(self.delta_k)
        d["lambda_interval"] = (list(self.lambda_interval)
                                if self.lambda_interval is not None else None)
        if self.lambda_interval is not None:
            d["lambda_interval_empty"] = not (self.lambda_interval[0]
                                              <= self.lambda_interval[1])
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, **kw)


def theory_report(X, true_model: TrueModel, a1: float = 0.9, family: str = "quadratic",
                  sigma: float | None = None, c: float = 1.0, t_bar: int | None = None,
                  theorem: str = "T3", lam: float | None = None,
                  lipschitz_L: float | None = None, n_samples: int = 10000,
                  seed: int = 0) -> TheoryReport:
    """Compute every identifiability quantity for one design/true-model pair
    and evaluate the requested theorem's window and bound."""
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    t = true_model.t
    if sigma is None:
        sigma = math.sqrt(true_model.sigma2) if true_model.sigma2 else 1.0
    if t_bar is None:
        t_bar = min(n, p) // 2
    dk = compute_delta_k(X, true_model)
    delta = compute_delta(dk)
    d_tm1 = float(dk[t - 2]) if t >= 2 else None
    rng = np.random.default_rng(seed)
    mode = "enumerate" if p <= MAX_ENUM_P else "sample"
    kap = compatibility_factor(X, true_model.support, a1, mode=mode,
                               n_samples=n_samples, rng=rng)
    constants = BoundConstants(a1=a1, sigma=sigma, c=c)
    zeta = zeta4 = None
    zeta_flag = True
    # the invertibility factor is defined through the cumulant derivative,
    # so only the two GLM families carry one
    if family in ("quadratic", "logistic"):
        est = scif_estimate(X, true_model, a1, family=family,
                            n_samples=n_samples, rng=rng)
        zeta, zeta_flag = est.value, est.upper_bound_only
        if theorem == "T2":
            zeta4 = scif_estimate(X, true_model, constants.a4, family=family,
                                  n_samples=n_samples, rng=rng).value
    report = TheoryReport(
        n=n, p=p, t=t, t_bar=t_bar, family=family, a1=a1, sigma=sigma, c=c,
        delta_k=tuple(float(v) for v in dk), delta=delta, delta_t_minus_1=d_tm1,
        beta_min=true_model.beta_min, kappa_a=kap.value,
        kappa_certified=kap.certified, zeta_a_inf=zeta,
        zeta_upper_bound_only=zeta_flag, zeta_a4_inf=zeta4,
        lipschitz_L=lipschitz_L, theorem=theorem, lambda_value=lam,
        lambda_interval=None, bound_value=None)
    interval = admissible_lambda_interval(constants, report, theorem)
    bound = selection_error_bound(constants, lam, theorem) if (
        lam is not None and theorem in ("T1", "T2", "T3")) else None
    return TheoryReport(**{**report.__dict__,
                           "lambda_interval": (interval.lo, interval.hi),
                           "bound_value": bound})


# ---------------------------------------------------------------------------
# empirical validation of the linear-model bound

@dataclass(frozen=True)
class BoundValidation:
    empirical_error_rate: float
    theorem_bound: float
    mc_se: float
    interval: AdmissibleInterval
    lam: float
    n_mc: int

    @property
    def asserted(self) -> bool:
        return not self.interval.empty

    @property
    def within_bound(self) -> bool:
        return self.empirical_error_rate <= self.theorem_bound + 3.0 * self.mc_se


def empirical_bound_validation(plan, lam: float, n_mc: int, seed: int = 0,
                               a1: float = 0.9) -> BoundValidation:
    """Run the single-penalty selector on n_mc fresh draws of a linear plan
    and report the misselection rate next to the T3 bound; the
    comparison is enforced only when the admissible window is nonempty."""
    from .simgen import gen_instance  # deferred: simgen imports selection

    if plan.family != "quadratic":
        raise ValueError("bound validation applies to linear plans")
    ref_ds, ref_tm, _ = gen_instance(plan, np.random.default_rng([seed, n_mc]))
    if ref_tm.t > MAX_ENUM_T:
        raise TooLargeT(f"plan has t={ref_tm.t} > {MAX_ENUM_T}")
    sigma = math.sqrt(plan.sigma2)
    rep = theory_report(ref_ds.X, ref_tm, a1=a1, family="quadratic", sigma=sigma,
                        theorem="T3", lam=lam, seed=seed)
    interval = AdmissibleInterval(lo=rep.lambda_interval[0],
                                  hi=rep.lambda_interval[1], theorem="T3")
    constants = BoundConstants(a1=a1, sigma=sigma, c=1.0)
    bound = selection_error_bound(constants, lam, "T3")
    errors = 0
    for i in range(n_mc):
        ds, tm, _ = gen_instance(plan, np.random.default_rng([seed, i]))
        res = select_ss(ds, lam)
        if res.support != tm.support:
            errors += 1
    phat = errors / n_mc
    se = math.sqrt(max(phat * (1.0 - phat), 1.0 / n_mc) / n_mc)
    out = BoundValidation(empirical_error_rate=phat, theorem_bound=bound,
                          mc_se=se, interval=interval, lam=lam, n_mc=n_mc)
    if out.asserted and not out.within_bound:
        raise SsnetError(
            f"empirical misselection rate {phat} exceeds the theorem bound "
            f"{bound} + 3 se inside the admissible window")
    return out
