"""Convex contrast functions, their (sub)gradients and GLM cumulants.

The quadratic contrast is (y - eta)^2 / 2, so the gradient of the total loss
matches the GLM form X'(gdot(X b) - y) with cumulant eta^2 / 2.  The absolute
contrast implements the median case of quantile regression.  The squared
hinge expects labels in {-1, +1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import BadLabel, DimensionMismatch

SMOOTH = {"quadratic": True, "logistic": True, "absolute": False, "squared-hinge": True}


@dataclass(frozen=True)
class LossFamily:
    """A contrast family with its smoothness flag and Lipschitz constant
    (None when no finite global constant applies, e.g. quadratic without a
    coefficient-ball radius)."""

    kind: str
    smooth: bool
    lipschitz_L: float | None

    def __post_init__(self):
        if self.kind not in SMOOTH:
            raise BadLabel(f"unknown loss family {self.kind!r}")
        if self.smooth != SMOOTH[self.kind]:
            raise ValueError(f"smooth flag inconsistent with kind {self.kind!r}")


def loss_family(kind, X=None, radius=1.0):
    """Build a LossFamily.

    The absolute contrast is 1-Lipschitz and the logistic one 2-Lipschitz in
    the linear predictor.  The squared-hinge constant grows with the design:
    we store the bound 2 * max_i(1 + ||x_i|| * radius), which requires X.
    """
    if kind == "absolute":
        L = 1.0
    elif kind == "logistic":
        L = 2.0
    elif kind == "squared-hinge":
        if X is None:
            L = None
        else:
            row_norms = np.linalg.norm(np.asarray(X, dtype=np.float64), axis=1)
            L = float(2.0 * np.max(1.0 + row_norms * radius))
    elif kind == "quadratic":
        L = None
    else:
        raise BadLabel(f"unknown loss family {kind!r}")
    return LossFamily(kind=kind, smooth=SMOOTH[kind], lipschitz_L=L)


@dataclass(frozen=True)
class CumulantEval:
    """Cumulant value and derivative at a single linear-predictor value."""

    value: float
    derivative: float


def cumulant(kind, eta):
    eta = float(eta)
    return CumulantEval(value=float(gamma_value(kind, eta)),
                        derivative=float(gamma_dot(kind, eta)))


def gamma_value(kind, eta):
    """Cumulant gamma(eta), overflow-safe for logistic."""
    eta = np.asarray(eta, dtype=np.float64)
    if kind == "quadratic":
        return 0.5 * eta * eta
    if kind == "logistic":
        # log(1 + e^eta) = max(eta, 0) + log1p(e^{-|eta|})
        return np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))
    raise BadLabel(f"no cumulant for family {kind!r}")


def gamma_dot(kind, eta):
    eta = np.asarray(eta, dtype=np.float64)
    if kind == "quadratic":
        return eta
    if kind == "logistic":
        return expit(eta)
    raise BadLabel(f"no cumulant for family {kind!r}")


def gamma_ddot(kind, eta):
    eta = np.asarray(eta, dtype=np.float64)
    if kind == "quadratic":
        return np.ones_like(eta)
    if kind == "logistic":
        s = expit(eta)
        return s * (1.0 - s)
    raise BadLabel(f"no cumulant for family {kind!r}")


def _check_labels(kind, y):
    if kind == "logistic" and not np.isin(y, (0.0, 1.0)).all():
        raise BadLabel("logistic labels must lie in {0, 1}")
    if kind == "squared-hinge" and not np.isin(y, (-1.0, 1.0)).all():
        raise BadLabel("squared-hinge labels must lie in {-1, +1}")


def loss_value(kind, eta, y):
    """Total loss sum_i phi(eta_i, y_i) for the given contrast family."""
    eta = np.asarray(eta, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if eta.shape != y.shape:
        raise DimensionMismatch("eta and y must have the same length")
    _check_labels(kind, y)
    if kind == "quadratic":
        r = y - eta
        return float(0.5 * np.dot(r, r))
    if kind == "logistic":
        return float(np.sum(gamma_value("logistic", eta) - y * eta))
    if kind == "absolute":
        return float(np.sum(np.abs(y - eta)))
    if kind == "squared-hinge":
        m = np.maximum(0.0, 1.0 - y * eta)
        return float(np.dot(m, m))
    raise BadLabel(f"unknown loss family {kind!r}")


def dloss_deta(kind, eta, y):
    """Componentwise derivative of phi with respect to eta (a subgradient for
    the absolute contrast: sign of the residual, 0 at exact zeros)."""
    eta = np.asarray(eta, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if kind == "quadratic":
        return eta - y
    if kind == "logistic":
        return expit(eta) - y
    if kind == "absolute":
        return np.sign(eta - y)
    if kind == "squared-hinge":
        return -2.0 * y * np.maximum(0.0, 1.0 - y * eta)
    raise BadLabel(f"unknown loss family {kind!r}")


def loss_gradient(kind, X, y, beta):
    """Gradient (subgradient for the absolute contrast) of the total loss."""
    X = np.asarray(X, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if X.shape[1] != beta.shape[0] or X.shape[0] != np.asarray(y).shape[0]:
        raise DimensionMismatch("X, y and beta dimensions disagree")
    eta = X @ beta
    return X.T @ dloss_deta(kind, eta, np.asarray(y, dtype=np.float64))


def logistic_convexity_constant(X, probe_betas):
    """Smallest logistic curvature gdd(x_i' b) over all rows and all probe
    coefficient vectors.

    This estimates the strong-convexity constant c over a finite probe set,
    not the exact infimum over the full coefficient ball; it always lies in
    (0, 1/4].
    """
    X = np.asarray(X, dtype=np.float64)
    if len(probe_betas) == 0:
        raise ValueError("probe set must be nonempty")
    c = np.inf
    for b in probe_betas:
        v = np.asanyarray(getattr(b, "values", b), dtype=np.float64)
        eta = X @ v
        c = min(c, float(np.min(gamma_ddot("logistic", eta))))
    return c
