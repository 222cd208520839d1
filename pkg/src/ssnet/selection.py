"""Screening-Selection, Thresholded Lasso and the net variant.

Screening fits the Lasso and orders its nonzero coefficients by decreasing
absolute value; selection minimizes the information criterion

    loss_J + lam^2/2 * |J|

over the nested family of prefixes of that ordering (the net variant pools
the families of a whole penalty grid and evaluates a separate output grid of
criterion penalties over the pooled family).  The empty model is always a
candidate so the procedure can return "no signal".  Ties are broken toward
the smaller support, then lexicographically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CoefficientVector, Dataset, LambdaGrid, SupportSet
from .errors import MissingParameter, RankDeficient
from .refit import RefitCache, RefitResult
from .solver import LassoFit, SolverConfig, fit_lasso, fit_lasso_path

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class NestedFamily:
    """Prefixes of the magnitude ordering of one Lasso fit's support."""

    supports: tuple[SupportSet, ...]
    source_lambda: float

    def __len__(self):
        return len(self.supports)

    def __iter__(self):
        return iter(self.supports)


@dataclass(frozen=True)
class GicEntry:
    support: SupportSet
    loss: float
    penalty: float
    gic: float


@dataclass(frozen=True)
class GicTrace:
    entries: tuple[GicEntry, ...]
    chosen: int


@dataclass(frozen=True)
class SelectionResult:
    support: SupportSet
    coefficients: CoefficientVector
    trace: GicTrace
    method: str
    gic_lambda: float
    screening_converged: bool = True
    refit: RefitResult | None = field(default=None, compare=False)


def gic(loss: float, size: int, lam: float) -> float:
    """Information criterion value loss + lam^2/2 * size."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return float(loss) + 0.5 * lam * lam * size


def magnitude_order(beta: CoefficientVector, intercept: bool = False):
    """Nonzero coordinates sorted by decreasing |beta_j|, ties by ascending
    index; an unpenalized intercept coordinate is excluded."""
    v = beta.values
    nz = np.flatnonzero(v)
    if intercept:
        nz = nz[nz != 0]
    order = sorted(nz, key=lambda j: (-abs(v[j]), j))
    return [int(j) for j in order]


def nested_family(d: Dataset, fit: LassoFit, max_size: int | None = None) -> NestedFamily:
    """Build the prefix family from a fit, truncating at max_size and at the
    first prefix whose design submatrix loses column rank."""
    if max_size is None:
        max_size = d.n // 2
    order = magnitude_order(fit.beta, d.intercept)
    order = order[:max(max_size, 0)]
    base = [0] if d.intercept else []
    supports = []
    # incremental column orthonormalization; first failure truncates the tail
    Q = np.empty((d.n, 0))
    if d.intercept:
        q0 = d.X[:, 0]
        Q = (q0 / np.linalg.norm(q0)).reshape(-1, 1)
    for j in order:
        x = d.X[:, j]
        r = x - Q @ (Q.T @ x)
        r = r - Q @ (Q.T @ r)  # second pass for numerical safety
        nrm = np.linalg.norm(r)
        if nrm <= _RANK_TOL * max(np.linalg.norm(x), 1e-300):
            break
        Q = np.column_stack([Q, r / nrm])
        base = base + [j]
        supports.append(SupportSet(base))
    return NestedFamily(supports=tuple(supports), source_lambda=fit.lam)


def _candidate_key(J: SupportSet):
    return (len(J), J.indices)


def _evaluate_chains(cache: RefitCache, null_support, chains):
    """Refit every candidate support, walking each nested chain in prefix
    order so a parent refit warm-starts its extension; rank-deficient
    members truncate their chain.  Returns deduplicated (support, loss)
    pairs in deterministic (size, lex) order."""
    seen = {}
    null_res = cache.get(null_support)
    seen[null_support.indices] = (null_support, null_res.loss)
    for chain in chains:
        parent = None
        for J in chain:
            cached = cache.peek(J)
            if cached is not None:
                parent = cached
                seen.setdefault(J.indices, (J, cached.loss))
                continue
            try:
                res = cache.get(J, parent=parent)
            except RankDeficient:
                break
            seen[J.indices] = (J, res.loss)
            parent = res
    return sorted(seen.values(), key=lambda t: _candidate_key(t[0]))


def _argmin_gic(pairs, lam):
    entries = []
    best = 0
    for i, (J, loss) in enumerate(pairs):
        size = len(J)
        val = gic(loss, size, lam)
        entries.append(GicEntry(support=J, loss=loss, penalty=0.5 * lam * lam * size,
                                gic=val))
        if val < entries[best].gic:
            best = i
    return GicTrace(entries=tuple(entries), chosen=best)


def _null_support(d: Dataset) -> SupportSet:
    return SupportSet((0,)) if d.intercept else SupportSet(())


def _result_from_trace(d, cache, trace, method, lam, screening_converged):
    chosen = trace.entries[trace.chosen].support
    res = cache.get(chosen)
    return SelectionResult(support=chosen,
                           coefficients=CoefficientVector(res.embed(d.p)),
                           trace=trace, method=method, gic_lambda=lam,
                           screening_converged=screening_converged, refit=res)


def threshold_lasso(d: Dataset, fit: LassoFit, tau: float,
                    cache: RefitCache | None = None) -> SelectionResult:
    """Keep coordinates with |beta_j| strictly above tau and refit."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    cache = cache or RefitCache(d)
    v = fit.beta.values
    keep = np.flatnonzero(np.abs(v) > tau)
    if d.intercept and 0 not in keep:
        keep = np.concatenate([[0], keep])
    J = SupportSet(keep)
    res = cache.get(J)  # propagates RankDeficient
    val = gic(res.loss, len(J), fit.lam)
    trace = GicTrace(entries=(GicEntry(J, res.loss, 0.5 * fit.lam ** 2 * len(J), val),),
                     chosen=0)
    return SelectionResult(support=J, coefficients=CoefficientVector(res.embed(d.p)),
                           trace=trace, method="TL", gic_lambda=fit.lam,
                           screening_converged=fit.converged, refit=res)


def select_ss(d: Dataset, lam: float, cfg: SolverConfig | None = None,
              max_size: int | None = None, cache: RefitCache | None = None,
              fit: LassoFit | None = None) -> SelectionResult:
    """Screening-Selection at a single penalty: Lasso at lam, then the
    criterion with penalty lam^2/2 over the nested family plus the empty
    model."""
    if fit is None:
        fit = fit_lasso(d, lam, cfg)
    cache = cache or RefitCache(d, max_support=max_size)
    family = nested_family(d, fit, max_size=max_size)
    pairs = _evaluate_chains(cache, _null_support(d), [list(family)])
    trace = _argmin_gic(pairs, lam)
    return _result_from_trace(d, cache, trace, "SS", lam, fit.converged)


def select_ssnet(d: Dataset, input_grid: LambdaGrid, output_grid: LambdaGrid,
                 cfg: SolverConfig | None = None, max_size: int | None = None,
                 cache: RefitCache | None = None, fits=None):
    """Net variant: pool the nested families of every input-grid fit, then
    minimize the criterion at each output-grid penalty over the pooled
    family (refits are shared across output penalties).  ``fits`` may carry
    an already-computed path for the input grid."""
    if fits is None:
        fits = fit_lasso_path(d, input_grid, cfg)
    cache = cache or RefitCache(d, max_support=max_size)
    chains = []
    all_converged = True
    for fit in fits:
        all_converged = all_converged and fit.converged
        chains.append(list(nested_family(d, fit, max_size=max_size)))
    pairs = _evaluate_chains(cache, _null_support(d), chains)
    results = []
    for lam_k in output_grid:
        trace = _argmin_gic(pairs, float(lam_k))
        results.append(_result_from_trace(d, cache, trace, "SSnet", float(lam_k),
                                          all_converged))
    return results


def safest_lambda(family: str, n: int, p: int, sigma2: float | None = None,
                  c: float | None = None) -> float:
    """Smallest asymptotically admissible penalty, on the unit-column-norm
    scale: sqrt(2 sigma^2 log p) for the linear family and
    sqrt(log p / (2 c)) for the logistic one (c defaults to 1/4)."""
    if p < 2:
        raise MissingParameter("safest lambda needs p >= 2 (log p degenerate)")
    if family == "quadratic":
        if sigma2 is None:
            raise MissingParameter("linear safest lambda needs sigma2")
        return math.sqrt(2.0 * sigma2 * math.log(p))
    if family == "logistic":
        c = 0.25 if c is None else c
        if not c > 0:
            raise MissingParameter("logistic safest lambda needs c > 0")
        return math.sqrt(math.log(p) / (2.0 * c))
    raise MissingParameter(f"no safest-lambda formula for family {family!r}")
