import numpy as np
import pytest

from ssnet.data import Dataset, make_dataset
from ssnet.solver import (SolverConfig, default_lambda_grid, fit_lasso,
                          fit_lasso_path, kkt_residual, penalized_objective)

from conftest import unit_norm_columns


def grid_search_objective(d, lam, lo=-4.0, hi=4.0, m=81):
    """Brute-force minimum of the penalized quadratic objective over a cube
    grid of beta values (p <= 3)."""
    axes = [np.linspace(lo, hi, m)] * d.p
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d.p)
    pred = mesh @ d.X.T
    rss = 0.5 * np.sum((d.y[None, :] - pred) ** 2, axis=1)
    obj = rss + lam * np.sum(np.abs(mesh), axis=1)
    return float(np.min(obj))


def test_null_model_at_large_lambda(rng):
    X = unit_norm_columns(rng, 12, 5)
    y = rng.standard_normal(12)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    lam = float(np.max(np.abs(X.T @ y)))
    fit = fit_lasso(d, lam * 1.0001)
    assert fit.beta.support.indices == ()


def test_orthonormal_soft_threshold_closed_form(rng):
    Q = np.linalg.qr(rng.standard_normal((10, 2)))[0]
    y = Q @ np.array([2.0, -1.0])
    d = Dataset(X=Q, y=y, standardization="unit-norm")
    fit = fit_lasso(d, 0.5)
    np.testing.assert_allclose(fit.beta.values, [1.5, -0.5], atol=1e-10)


def test_quadratic_matches_grid_oracle(rng):
    for _ in range(10):
        n = int(rng.integers(5, 10))
        p = int(rng.integers(2, 4))
        X = rng.standard_normal((n, p))
        X /= np.linalg.norm(X, axis=0)
        # correlated columns
        X[:, -1] = 0.7 * X[:, 0] + 0.3 * X[:, -1]
        X /= np.linalg.norm(X, axis=0)
        beta = np.zeros(p)
        beta[0] = 1.5
        y = X @ beta + 0.3 * rng.standard_normal(n)
        d = Dataset(X=X, y=y, standardization="unit-norm")
        lam = 0.25
        fit = fit_lasso(d, lam)
        ours = penalized_objective(d, fit.beta, lam)
        oracle = grid_search_objective(d, lam)
        assert ours <= oracle + 1e-4


@pytest.mark.parametrize("family", ["quadratic", "logistic", "squared-hinge", "absolute"])
def test_kkt_certificate_recomputed(rng, family):
    n, p = 40, 12
    X = unit_norm_columns(rng, n, p)
    beta = np.zeros(p)
    beta[:3] = [6.0, -4.0, 3.0]
    eta = X @ beta
    if family == "logistic":
        y = (rng.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(float)
    elif family == "squared-hinge":
        y = np.where(eta + 0.3 * rng.standard_normal(n) > 0, 1.0, -1.0)
    else:
        y = eta + 0.5 * rng.standard_normal(n)
    d = Dataset(X=X, y=y, family=family, standardization="unit-norm")
    lam = 0.4
    fit = fit_lasso(d, lam)
    assert fit.converged, f"{family} did not converge: kkt={fit.kkt_residual}"
    tol = 1e-4 if family == "absolute" else 1e-6
    indep = kkt_residual(d, fit.beta, lam, dual=fit.dual)
    assert indep <= tol
    assert fit.kkt_residual <= tol


def test_quadratic_objective_monotone(rng):
    X = unit_norm_columns(rng, 30, 10)
    y = rng.standard_normal(30)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    fit = fit_lasso(d, 0.2)
    tr = fit.objective_trace
    assert tr is not None and len(tr) >= 1
    assert np.all(np.diff(tr) <= 1e-12)


def test_column_permutation_equivariance(rng):
    # the exact minimizer is permutation-equivariant; the iterate matches it
    # to solver tolerance, and the selected support matches exactly
    X = unit_norm_columns(rng, 20, 6)
    y = rng.standard_normal(20)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    perm = rng.permutation(6)
    dp = Dataset(X=X[:, perm], y=y, standardization="unit-norm")
    cfg = SolverConfig(kkt_tol=1e-12)
    f1 = fit_lasso(d, 0.3, cfg)
    f2 = fit_lasso(dp, 0.3, cfg)
    np.testing.assert_allclose(f1.beta.values[perm], f2.beta.values, atol=1e-10)
    assert (f1.beta.values[perm] != 0).tolist() == (f2.beta.values != 0).tolist()


def test_duality_style_bound(rng):
    X = unit_norm_columns(rng, 25, 8)
    y = rng.standard_normal(25)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    lam = 0.15
    fit = fit_lasso(d, lam)
    ours = penalized_objective(d, fit.beta, lam)
    for _ in range(100):
        probe = rng.standard_normal(8)
        assert ours <= penalized_objective(d, probe, lam) + 1e-6


def test_warm_start_path_order_and_certificates(rng):
    X = unit_norm_columns(rng, 50, 100)
    beta = np.zeros(100)
    beta[:4] = [5, -4, 3, 2]
    y = X @ beta + 0.5 * rng.standard_normal(50)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    grid = default_lambda_grid(d, 20)
    fits = fit_lasso_path(d, grid)
    assert len(fits) == 20
    for lam, fit in zip(grid, fits):
        assert fit.lam == lam
        assert kkt_residual(d, fit.beta, fit.lam) <= 1e-6
    # largest penalty at/above lam_max gives the null model
    assert fits[-1].beta.support.indices == ()


def test_path_support_mostly_monotone(rng):
    violations = total = 0
    for trial in range(5):
        X = unit_norm_columns(rng, 40, 30)
        beta = np.zeros(30)
        beta[:3] = [4, -3, 2]
        y = X @ beta + 0.5 * rng.standard_normal(40)
        d = Dataset(X=X, y=y, standardization="unit-norm")
        fits = fit_lasso_path(d, default_lambda_grid(d, 30))
        sizes = [len(f.beta.support) for f in fits]
        for a, b in zip(sizes, sizes[1:]):
            total += 1
            if a < b:  # support should shrink as lambda grows
                violations += 1
    assert violations <= 0.05 * total


def test_default_grid_m2_and_geometric(rng):
    X = unit_norm_columns(rng, 10, 4)
    y = rng.standard_normal(10)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    lam_max = float(np.max(np.abs(X.T @ y)))
    g2 = default_lambda_grid(d, 2)
    np.testing.assert_allclose(g2.values, [1e-3 * lam_max, lam_max], rtol=1e-12)
    g50 = default_lambda_grid(d, 50)
    ratios = g50.values[1:] / g50.values[:-1]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)
    assert g50.values[-1] == pytest.approx(lam_max)


def test_scale_equivariance_quadratic(rng):
    # doubling y and lambda doubles the solution exactly in floating point
    X = unit_norm_columns(rng, 20, 6)
    y = rng.standard_normal(20)
    d1 = Dataset(X=X, y=y, standardization="unit-norm")
    d2 = Dataset(X=X, y=2.0 * y, standardization="unit-norm")
    f1 = fit_lasso(d1, 0.3)
    f2 = fit_lasso(d2, 0.6)
    np.testing.assert_array_equal(2.0 * f1.beta.values, f2.beta.values)


def test_not_converged_is_flagged_not_raised(rng):
    X = unit_norm_columns(rng, 30, 10)
    y = rng.standard_normal(30)
    d = Dataset(X=X, y=y, standardization="unit-norm")
    cfg = SolverConfig(max_iter=1, kkt_tol=1e-14)
    fit = fit_lasso(d, 0.05, cfg)
    assert not fit.converged
    assert np.isfinite(fit.kkt_residual)


def test_unpenalized_intercept(rng):
    X = rng.standard_normal((30, 5))
    y = X @ np.array([2.0, 0, 0, 0, 0]) + 5.0 + 0.1 * rng.standard_normal(30)
    d = make_dataset(X, y, standardize="unit-norm", add_intercept=True)
    lam = float(np.max(np.abs(d.X.T @ y)))  # huge penalty: all penalized coords die
    fit = fit_lasso(d, lam)
    assert 0 in fit.beta.support
    assert fit.beta.values[0] != 0.0
