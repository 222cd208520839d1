"""Coordinate-descent sweep kernels.

The cyclic soft-threshold sweep is the hot inner loop of every Lasso fit
(quadratic directly; logistic and absolute through their quadratic
subproblems), so it is compiled with numba when available.  Set the
environment variable ``SSNET_NUMBA=0`` to force the pure-numpy fallback;
``benchmarks/kernel_bench.py`` times the two paths against each other.

Both kernels minimize

    weight/2 * ||z - X beta||^2 + sum_j lam_j |beta_j|

performing cyclic sweeps in ascending column order.  ``resid`` must hold
z - X beta on entry and is updated in place together with ``beta``.  New
coefficients come out of the soft-threshold map, so zeros are exact.
``obj_out[s]`` receives the subproblem objective after sweep s; the return
value is the number of sweeps executed (early exit once the largest
coefficient move in a sweep drops to ``delta_tol * max(1, |beta|_inf)``).
"""

from __future__ import annotations

import os

import numpy as np


def _cd_sweeps_impl(X, resid, beta, colsq, lamj, weight, max_sweeps, delta_tol, obj_out):
    n, p = X.shape
    sweeps = 0
    for s in range(max_sweeps):
        max_delta = 0.0
        max_beta = 0.0
        for j in range(p):
            bj = beta[j]
            dot = 0.0
            for i in range(n):
                dot += X[i, j] * resid[i]
            rho = weight * (dot + colsq[j] * bj)
            lj = lamj[j]
            if rho > lj:
                bnew = (rho - lj) / (weight * colsq[j])
            elif rho < -lj:
                bnew = (rho + lj) / (weight * colsq[j])
            else:
                bnew = 0.0
            diff = bnew - bj
            if diff != 0.0:
                for i in range(n):
                    resid[i] -= diff * X[i, j]
                beta[j] = bnew
            ad = abs(diff)
            if ad > max_delta:
                max_delta = ad
            ab = abs(bnew)
            if ab > max_beta:
                max_beta = ab
        rss = 0.0
        for i in range(n):
            rss += resid[i] * resid[i]
        pen = 0.0
        for j in range(p):
            pen += lamj[j] * abs(beta[j])
        obj_out[s] = 0.5 * weight * rss + pen
        sweeps = s + 1
        if max_delta <= delta_tol * max(1.0, max_beta):
            break
    return sweeps


def _cd_sweeps_idx_impl(X, resid, beta, colsq, lamj, weight, idx, max_sweeps,
                        delta_tol):
    """Sweep only the columns listed in idx (active-set cycling); no
    objective tracking.  Returns sweeps executed."""
    n = X.shape[0]
    m = idx.shape[0]
    sweeps = 0
    for s in range(max_sweeps):
        max_delta = 0.0
        max_beta = 0.0
        for jj in range(m):
            j = idx[jj]
            bj = beta[j]
            dot = 0.0
            for i in range(n):
                dot += X[i, j] * resid[i]
            rho = weight * (dot + colsq[j] * bj)
            lj = lamj[j]
            if rho > lj:
                bnew = (rho - lj) / (weight * colsq[j])
            elif rho < -lj:
                bnew = (rho + lj) / (weight * colsq[j])
            else:
                bnew = 0.0
            diff = bnew - bj
            if diff != 0.0:
                for i in range(n):
                    resid[i] -= diff * X[i, j]
                beta[j] = bnew
            ad = abs(diff)
            if ad > max_delta:
                max_delta = ad
            ab = abs(bnew)
            if ab > max_beta:
                max_beta = ab
        sweeps = s + 1
        if max_delta <= delta_tol * max(1.0, max_beta):
            break
    return sweeps


def cd_sweeps_idx_numpy(X, resid, beta, colsq, lamj, weight, idx, max_sweeps,
                        delta_tol):
    sweeps = 0
    for s in range(max_sweeps):
        max_delta = 0.0
        for j in idx:
            bj = beta[j]
            xj = X[:, j]
            rho = weight * (xj @ resid + colsq[j] * bj)
            lj = lamj[j]
            if rho > lj:
                bnew = (rho - lj) / (weight * colsq[j])
            elif rho < -lj:
                bnew = (rho + lj) / (weight * colsq[j])
            else:
                bnew = 0.0
            diff = bnew - bj
            if diff != 0.0:
                resid -= diff * xj
                beta[j] = bnew
            max_delta = max(max_delta, abs(diff))
        sweeps = s + 1
        mb = np.max(np.abs(beta[idx])) if len(idx) else 0.0
        if max_delta <= delta_tol * max(1.0, mb):
            break
    return sweeps


def cd_sweeps_numpy(X, resid, beta, colsq, lamj, weight, max_sweeps, delta_tol, obj_out):
    """Vectorized-per-coordinate numpy version of the sweep kernel."""
    p = X.shape[1]
    sweeps = 0
    for s in range(max_sweeps):
        max_delta = 0.0
        for j in range(p):
            bj = beta[j]
            xj = X[:, j]
            rho = weight * (xj @ resid + colsq[j] * bj)
            lj = lamj[j]
            if rho > lj:
                bnew = (rho - lj) / (weight * colsq[j])
            elif rho < -lj:
                bnew = (rho + lj) / (weight * colsq[j])
            else:
                bnew = 0.0
            diff = bnew - bj
            if diff != 0.0:
                resid -= diff * xj
                beta[j] = bnew
            max_delta = max(max_delta, abs(diff))
        obj_out[s] = 0.5 * weight * (resid @ resid) + lamj @ np.abs(beta)
        sweeps = s + 1
        if max_delta <= delta_tol * max(1.0, np.max(np.abs(beta)) if p else 1.0):
            break
    return sweeps


def _env_wants_numba():
    return os.environ.get("SSNET_NUMBA", "1").strip().lower() not in ("0", "false", "off", "no")


cd_sweeps_numba = None
cd_sweeps_idx_numba = None
if _env_wants_numba():
    try:
        from numba import njit

        cd_sweeps_numba = njit(cache=True)(_cd_sweeps_impl)
        cd_sweeps_idx_numba = njit(cache=True)(_cd_sweeps_idx_impl)
    except ImportError:
        cd_sweeps_numba = None

if cd_sweeps_numba is not None:
    cd_sweeps = cd_sweeps_numba
    cd_sweeps_idx = cd_sweeps_idx_numba
    BACKEND = "numba"
else:
    cd_sweeps = cd_sweeps_numpy
    cd_sweeps_idx = cd_sweeps_idx_numpy
    BACKEND = "numpy"
