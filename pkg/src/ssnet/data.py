"""Core data types: datasets, coefficient vectors, supports and lambda grids.

All types are immutable after construction and safe to share across workers.
The canonical internal column scale is unit norm; ``sqrt-n`` scaling (columns
centered, then scaled so that every squared column norm equals n) is accepted
on input and converted by the harness.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadLabel,
    BadStandardization,
    DimensionMismatch,
    NonFiniteData,
    TooFewObservations,
    ZeroColumn,
)

FAMILIES = ("quadratic", "logistic", "absolute", "squared-hinge")
STANDARDIZATIONS = ("unit-norm", "sqrt-n", "none")

_NORM_TOL = 1e-10
_ZERO_NORM = 1e-12


def standardize_design(X, mode="unit-norm"):
    """Scale design columns to the requested convention.

    ``unit-norm`` divides every column by its l2 norm.  ``sqrt-n`` first
    centers each column and then scales it so the squared norm equals n.
    Returns ``(X_out, scale)`` where ``scale`` is the per-column divisor, so
    ``X_out * scale`` recovers the (centered, for sqrt-n) input and a
    coefficient ``b`` on the standardized scale maps back as ``b / scale``.

    Raises ZeroColumn if any column norm falls below 1e-12.
    """
    if mode not in ("unit-norm", "sqrt-n"):
        raise ValueError(f"unknown standardization mode {mode!r}")
    X = np.asarray(X, dtype=np.float64)
    if not np.isfinite(X).all():
        raise NonFiniteData("design contains non-finite entries")
    n = X.shape[0]
    if mode == "sqrt-n":
        X = X - X.mean(axis=0)
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms < _ZERO_NORM)
    if bad.size:
        raise ZeroColumn(int(bad[0]))
    scale = norms if mode == "unit-norm" else norms / np.sqrt(n)
    return X / scale, scale


def coefficients_to_original_scale(beta, scale):
    """Map a coefficient vector from the standardized scale back, so that
    predictions on the pre-scaling design are unchanged."""
    return np.asarray(beta, dtype=np.float64) / np.asarray(scale, dtype=np.float64)


@dataclass(frozen=True)
class SupportSet:
    """A sorted, duplicate-free subset of predictor indices."""

    indices: tuple[int, ...]

    def __init__(self, indices=()):
        idx = tuple(sorted(int(j) for j in indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices in support")
        if any(j < 0 for j in idx):
            raise ValueError("negative index in support")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def as_array(self):
        return np.asarray(self.indices, dtype=np.intp)

    def union(self, other):
        return SupportSet(set(self.indices) | set(other.indices))

    def issubset(self, other):
        return set(self.indices) <= set(other.indices)


@dataclass(frozen=True)
class CoefficientVector:
    """Dense coefficient estimate; stored zeros are exact (soft-threshold
    output), so the support is the exact nonzero set."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> SupportSet:
        return SupportSet(np.flatnonzero(self.values))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly increasing grid of positive penalty values."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("lambda grid must be a nonempty 1-d array")
        if not np.isfinite(v).all() or (v <= 0).any():
            raise ValueError("lambda grid values must be positive and finite")
        if (np.diff(v) <= 0).any():
            raise ValueError("lambda grid must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class TrueModel:
    """Simulation-only ground truth: the true coefficient vector, its support
    and (for the linear family) the noise variance."""

    beta: np.ndarray
    sigma2: float | None = None

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=np.float64)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        if self.sigma2 is not None and not self.sigma2 >= 0:
            raise ValueError("sigma2 must be nonnegative (0 = noiseless)")

    @property
    def support(self) -> SupportSet:
        return SupportSet(np.flatnonzero(self.beta))

    @property
    def t(self) -> int:
        return len(self.support)

    @property
    def beta_min(self) -> float:
        s = self.support.as_array()
        if s.size == 0:
            return 0.0
        return float(np.min(np.abs(self.beta[s])))

    def rescaled(self, scale):
        """True coefficients on a standardized design X/scale (predictions
        X @ beta are preserved)."""
        return TrueModel(self.beta * np.asarray(scale), self.sigma2)


@dataclass(frozen=True)
class Dataset:
    """Design matrix, response and family tag: the single input object every
    fit consumes.

    ``standardization`` declares the state of the stored columns; it is
    checked by validate_dataset, not enforced silently.  ``intercept`` marks
    column 0 as an unpenalized constant column (off by default; the models
    studied here have none).
    """

    X: np.ndarray
    y: np.ndarray
    family: str = "quadratic"
    standardization: str = "none"
    intercept: bool = False
    scale: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.scale is not None:
            s = np.asarray(self.scale, dtype=np.float64)
            s.setflags(write=False)
            object.__setattr__(self, "scale", s)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def penalty_weights(self):
        w = np.ones(self.p)
        if self.intercept:
            w[0] = 0.0
        return w


def validate_dataset(d: Dataset) -> None:
    """Check every Dataset invariant; raises a typed error per violation."""
    if d.X.ndim != 2:
        raise DimensionMismatch("X must be a 2-d matrix")
    if d.y.ndim != 1 or d.y.shape[0] != d.X.shape[0]:
        raise DimensionMismatch(
            f"y has length {d.y.shape[0] if d.y.ndim == 1 else d.y.shape}, X has {d.X.shape[0]} rows"
        )
    if d.n < 2:
        raise TooFewObservations(f"need at least 2 observations, got {d.n}")
    if d.p < 1:
        raise DimensionMismatch("need at least 1 predictor")
    if not np.isfinite(d.X).all():
        raise NonFiniteData("X contains non-finite entries")
    if not np.isfinite(d.y).all():
        raise NonFiniteData("y contains non-finite entries")
    if d.family not in FAMILIES:
        raise BadLabel(f"unknown family {d.family!r}")
    if d.standardization not in STANDARDIZATIONS:
        raise BadStandardization(f"unknown standardization {d.standardization!r}")
    if d.family == "logistic":
        if not np.isin(d.y, (0.0, 1.0)).all():
            raise BadLabel("logistic responses must lie in {0, 1}")
    elif d.family == "squared-hinge":
        if not np.isin(d.y, (-1.0, 1.0)).all():
            raise BadLabel("squared-hinge responses must lie in {-1, +1}")
    if d.standardization != "none":
        target = 1.0 if d.standardization == "unit-norm" else np.sqrt(d.n)
        norms = np.linalg.norm(d.X, axis=0)
        start = 1 if d.intercept else 0
        if start < d.p:
            bad = np.flatnonzero(norms[start:] < _ZERO_NORM)
            if bad.size:
                raise ZeroColumn(int(bad[0]) + start)
            if np.max(np.abs(norms[start:] - target)) > _NORM_TOL * max(1.0, target):
                raise BadStandardization(
                    f"columns declared {d.standardization} but norms deviate from {target}"
                )


def make_dataset(X, y, family="quadratic", standardize=None, add_intercept=False):
    """Build a validated Dataset, optionally standardizing the columns.

    ``standardize`` is None (leave columns as-is), "unit-norm" or "sqrt-n".
    With ``add_intercept`` a constant column is prepended after scaling and
    exempted from the penalty.
    """
    X = np.asarray(X, dtype=np.float64)
    scale = None
    mode = "none"
    if standardize is not None and standardize != "none":
        X, scale = standardize_design(X, standardize)
        mode = standardize
    if add_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
        if scale is not None:
            scale = np.concatenate([[1.0], scale])
    d = Dataset(X=X, y=np.asarray(y, dtype=np.float64), family=family,
                standardization=mode, intercept=add_intercept, scale=scale)
    validate_dataset(d)
    return d


def _sniff_header(first_row):
    for tok in first_row:
        try:
            float(tok)
        except ValueError:
            return True
    return False


def load_csv(path_or_text, response="y", family="quadratic", standardize=None,
             add_intercept=False, has_header=None):
    """Read a dataset from CSV: one column is the response (named, or a
    0-based index when there is no header), the rest are predictors.

    Returns (Dataset, column_names).
    """
    if isinstance(path_or_text, io.StringIO):
        fh = path_or_text
        rows = list(csv.reader(fh))
    else:
        with open(path_or_text, newline="") as fh:
            rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise TooFewObservations("empty CSV")
    if has_header is None:
        has_header = _sniff_header(rows[0])
    if has_header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
        try:
            yi = names.index(str(response))
        except ValueError:
            raise DimensionMismatch(f"response column {response!r} not found in header")
    else:
        names = [f"x{j}" for j in range(len(rows[0]))]
        yi = int(response)
        names[yi] = "y"
        body = rows
    data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    y = data[:, yi]
    X = np.delete(data, yi, axis=1)
    xnames = [nm for j, nm in enumerate(names) if j != yi]
    d = make_dataset(X, y, family=family, standardize=standardize,
                     add_intercept=add_intercept)
    if add_intercept:
        xnames = ["(intercept)"] + xnames
    return d, xnames
