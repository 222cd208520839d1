"""Minimum-loss refits on a fixed support: the quantity GIC consumes.

Quadratic refits go through QR; logistic and squared-hinge use damped Newton
with step halving; the absolute contrast uses smoothed IRLS followed by a
subgradient polish.  Rank-deficient submatrices raise instead of being
pseudo-inverted, and a cache keyed by support deduplicates the many
overlapping refits the net selection step requests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit

from .data import Dataset, SupportSet, validate_dataset
from .errors import RankDeficient
from .losses import gamma_ddot, loss_value

GRAD_TOL = 1e-8
RANK_TOL = 1e-10
SEPARATION_GUARD = 1e3
MAX_NEWTON = 200


@dataclass(frozen=True)
class RefitResult:
    support: SupportSet
    beta_J: np.ndarray
    loss: float
    converged: bool
    rank_ok: bool

    def embed(self, p: int) -> np.ndarray:
        """Full-length coefficient vector with zeros off the support."""
        b = np.zeros(p)
        b[self.support.as_array()] = self.beta_J
        return b


def _qr_full_rank(XJ, support):
    Q, R = np.linalg.qr(XJ)
    diag = np.abs(np.diag(R))
    if diag.size and np.min(diag) <= RANK_TOL * np.max(diag):
        raise RankDeficient(support)
    return Q, R


def null_loss(d: Dataset) -> float:
    """Loss of the empty model (beta = 0), the GIC baseline."""
    return loss_value(d.family, np.zeros(d.n), d.y)


def _refit_quadratic(d, XJ, support):
    Q, R = _qr_full_rank(XJ, support)
    beta = solve_triangular(R, Q.T @ d.y)
    return beta, True


def _damped_newton(d, XJ, support, kind, init=None):
    y = d.y
    beta = np.zeros(XJ.shape[1]) if init is None else init.copy()
    _qr_full_rank(XJ, support)
    eta = XJ @ beta

    if kind == "logistic":
        def value(e):
            return float(np.sum(np.maximum(e, 0.0) + np.log1p(np.exp(-np.abs(e)))
                                - y * e))
    else:
        def value(e):
            m = np.maximum(0.0, 1.0 - y * e)
            return float(m @ m)

    cur = value(eta)
    converged = False
    for _ in range(MAX_NEWTON):
        if kind == "logistic":
            mu = expit(eta)
            grad = XJ.T @ (mu - y)
            w = gamma_ddot("logistic", eta)
        else:  # squared-hinge generalized Hessian on the active margin set
            m = np.maximum(0.0, 1.0 - y * eta)
            grad = XJ.T @ (-2.0 * y * m)
            w = 2.0 * (m > 0.0).astype(np.float64)
        gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gnorm <= GRAD_TOL:
            converged = True
            break
        H = (XJ * w[:, None]).T @ XJ
        H[np.diag_indices_from(H)] += 1e-12
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        for _ in range(50):
            cand = beta - t * step
            e = XJ @ cand
            v = value(e)
            if v <= cur - 1e-4 * t * float(grad @ step):
                beta, eta, cur = cand, e, v
                break
            t *= 0.5
        else:
            break
        if float(np.max(np.abs(beta))) > SEPARATION_GUARD:
            converged = False
            break
    return beta, converged


def _refit_absolute(d, XJ, support, init=None):
    y = d.y
    _qr_full_rank(XJ, support)
    beta = np.linalg.lstsq(XJ, y, rcond=None)[0] if init is None else init.copy()
    # smoothed IRLS: minimize sum sqrt(r^2 + mu^2) for a decreasing schedule
    for mu in 10.0 ** np.arange(0, -9, -1):
        for _ in range(20):
            r = y - XJ @ beta
            w = 1.0 / np.sqrt(r * r + mu * mu)
            sw = np.sqrt(w)
            new = np.linalg.lstsq(XJ * sw[:, None], y * sw, rcond=None)[0]
            if np.max(np.abs(new - beta)) <= 1e-12 * max(1.0, np.max(np.abs(beta))):
                beta = new
                break
            beta = new
    # subgradient polish, keeping the best objective seen
    best = beta.copy()
    best_obj = float(np.sum(np.abs(y - XJ @ best)))
    cur = best.copy()
    step0 = max(1e-3, 1e-3 * np.max(np.abs(best)))
    for k in range(1, 301):
        g = -XJ.T @ np.sign(y - XJ @ cur)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        cur = cur - (step0 / (k * gn)) * g
        obj = float(np.sum(np.abs(y - XJ @ cur)))
        if obj < best_obj:
            best, best_obj = cur.copy(), obj
    return best, True


def refit_ml(d: Dataset, J: SupportSet, init: np.ndarray | None = None) -> RefitResult:
    """Unpenalized minimum-loss estimator restricted to the support J.

    Raises RankDeficient when X_J loses column rank; callers drop such
    candidates.  For logistic fits that run away (separated data) the
    iterate is returned with converged=False.  ``init`` (aligned with J's
    sorted indices) warm-starts the iterative families; the net selection
    step passes the parent prefix's solution, which typically cuts Newton to
    one or two steps.
    """
    validate_dataset(d)
    if len(J) == 0:
        return RefitResult(support=J, beta_J=np.zeros(0), loss=null_loss(d),
                           converged=True, rank_ok=True)
    idx = J.as_array()
    if idx[-1] >= d.p:
        raise IndexError(f"support index {idx[-1]} out of range for p={d.p}")
    XJ = d.X[:, idx]
    if d.family == "quadratic":
        beta, converged = _refit_quadratic(d, XJ, J)
    elif d.family == "absolute":
        beta, converged = _refit_absolute(d, XJ, J, init=init)
    else:
        beta, converged = _damped_newton(d, XJ, J, d.family, init=init)
    loss = loss_value(d.family, XJ @ beta, d.y)
    return RefitResult(support=J, beta_J=beta, loss=loss, converged=converged,
                       rank_ok=True)


class RefitCache:
    """Memoized refits for one dataset, keyed by support.

    Supports at most ``max_support`` indices (default floor(n/2)) are
    accepted; larger or rank-deficient candidates raise.  Reads are safe to
    share; inserts happen under the GIL per entry.
    """

    def __init__(self, d: Dataset, max_support: int | None = None):
        self.dataset = d
        self.max_support = max_support if max_support is not None else d.n // 2
        self._cache: dict[tuple[int, ...], RefitResult] = {}

    def peek(self, J: SupportSet) -> RefitResult | None:
        return self._cache.get(J.indices)

    def get(self, J: SupportSet, parent: RefitResult | None = None) -> RefitResult:
        """Cached refit; ``parent`` (a refit of a subset of J) seeds the
        iterative solvers."""
        key = J.indices
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if len(J) > max(self.max_support, 1 if self.dataset.intercept else 0):
            raise RankDeficient(J)
        init = None
        if parent is not None and len(parent.support) and parent.support.issubset(J):
            init = np.zeros(len(J))
            pos = {j: k for k, j in enumerate(J.indices)}
            for j, b in zip(parent.support.indices, parent.beta_J):
                init[pos[j]] = b
        res = refit_ml(self.dataset, J, init=init)
        self._cache[key] = res
        return res

    def __len__(self):
        return len(self._cache)
