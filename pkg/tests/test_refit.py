import math

import numpy as np
import pytest

from ssnet.data import Dataset, SupportSet
from ssnet.errors import RankDeficient
from ssnet.losses import loss_value
from ssnet.refit import RefitCache, null_loss, refit_ml

from conftest import unit_norm_columns


def test_quadratic_noiseless_interpolation(rng):
    X = unit_norm_columns(rng, 12, 6)
    beta = np.zeros(6)
    beta[[0, 2, 4]] = [3.0, 1.5, 2.0]
    y = X @ beta
    res = refit_ml(Dataset(X=X, y=y, standardization="unit-norm"),
                   SupportSet([0, 2, 4]))
    np.testing.assert_allclose(res.beta_J, [3.0, 1.5, 2.0], atol=1e-10)
    assert res.loss == pytest.approx(0.0, abs=1e-18)


def test_quadratic_matches_normal_equations(rng):
    X = rng.standard_normal((8, 2))
    y = rng.standard_normal(8)
    d = Dataset(X=X, y=y)
    res = refit_ml(d, SupportSet([0, 1]))
    oracle = np.linalg.solve(X.T @ X, X.T @ y)
    np.testing.assert_allclose(res.beta_J, oracle, atol=1e-8)
    # normal equations hold at the refit
    np.testing.assert_allclose(X.T @ (y - X @ res.beta_J), 0.0, atol=1e-8)


def test_logistic_balanced_uninformative_column():
    X = np.ones((10, 1)) / math.sqrt(10)
    y = np.array([0.0, 1.0] * 5)
    d = Dataset(X=X, y=y, family="logistic")
    res = refit_ml(d, SupportSet([0]))
    assert res.converged
    assert abs(res.beta_J[0]) < 1e-6
    assert res.loss == pytest.approx(10 * math.log(2), rel=1e-9)


def test_null_loss_by_family(rng):
    X = unit_norm_columns(rng, 8, 3)
    y = rng.standard_normal(8)
    assert null_loss(Dataset(X=X, y=y)) == pytest.approx(0.5 * y @ y)
    yl = rng.integers(0, 2, 8).astype(float)
    assert null_loss(Dataset(X=X, y=yl, family="logistic")) == pytest.approx(8 * math.log(2))
    assert null_loss(Dataset(X=X, y=y, family="absolute")) == pytest.approx(np.sum(np.abs(y)))


def test_rank_deficient_raises(rng):
    X = rng.standard_normal((10, 3))
    X[:, 2] = X[:, 0] + X[:, 1]
    d = Dataset(X=X, y=rng.standard_normal(10))
    with pytest.raises(RankDeficient):
        refit_ml(d, SupportSet([0, 1, 2]))


@pytest.mark.parametrize("family", ["quadratic", "logistic"])
def test_nesting_monotonicity(rng, family):
    n, p = 40, 6
    X = unit_norm_columns(rng, n, p)
    beta = np.zeros(p)
    beta[:2] = [5.0, -4.0]
    eta = X @ beta
    if family == "logistic":
        y = (rng.uniform(size=n) < 1 / (1 + np.exp(-eta))).astype(float)
    else:
        y = eta + rng.standard_normal(n)
    d = Dataset(X=X, y=y, family=family)
    chain = [SupportSet([0]), SupportSet([0, 1]), SupportSet([0, 1, 3]),
             SupportSet([0, 1, 3, 5])]
    losses = []
    for J in chain:
        r = refit_ml(d, J)
        assert r.converged and r.rank_ok
        losses.append(r.loss)
    for a, b in zip(losses, losses[1:]):
        assert b <= a + 1e-8


def test_absolute_refit_matches_lp_oracle(rng):
    # LAD regression is a linear program; the smoothed-IRLS + polish result
    # must land within 1e-6 of the exact optimum
    from scipy.optimize import linprog

    n, p = 25, 3
    X = unit_norm_columns(rng, n, p)
    y = X @ np.array([5.0, -4.0, 3.0]) + rng.standard_normal(n)
    d = Dataset(X=X, y=y, family="absolute")
    res = refit_ml(d, SupportSet([0, 1, 2]))
    c = np.concatenate([np.zeros(2 * p), np.ones(2 * n)])
    A_eq = np.hstack([X, -X, np.eye(n), -np.eye(n)])
    lp = linprog(c, A_eq=A_eq, b_eq=y, bounds=[(0, None)] * (2 * p + 2 * n),
                 method="highs")
    assert lp.success
    assert res.loss <= lp.fun + 1e-6


def test_absolute_nesting_monotone_loose(rng):
    n, p = 30, 5
    X = unit_norm_columns(rng, n, p)
    y = X @ np.array([4.0, -3.0, 0, 0, 0]) + rng.standard_normal(n)
    d = Dataset(X=X, y=y, family="absolute")
    l1 = refit_ml(d, SupportSet([0])).loss
    l2 = refit_ml(d, SupportSet([0, 1])).loss
    l3 = refit_ml(d, SupportSet([0, 1, 2])).loss
    assert l2 <= l1 + 1e-5 and l3 <= l2 + 1e-5


def test_loss_consistent_with_embedded_vector(rng):
    X = unit_norm_columns(rng, 15, 5)
    y = rng.standard_normal(15)
    d = Dataset(X=X, y=y)
    res = refit_ml(d, SupportSet([1, 3]))
    emb = res.embed(5)
    assert res.loss == loss_value("quadratic", X @ emb, y)


def test_squared_hinge_refit_gradient_small(rng):
    n, p = 40, 4
    X = unit_norm_columns(rng, n, p)
    beta = np.array([6.0, -5.0, 0, 0])
    y = np.where(X @ beta + 0.2 * rng.standard_normal(n) > 0, 1.0, -1.0)
    d = Dataset(X=X, y=y, family="squared-hinge")
    res = refit_ml(d, SupportSet([0, 1]))
    assert res.converged


def test_logistic_separation_guard():
    # perfectly separated tiny-scale predictor: the runaway passes the
    # coefficient guard long before the gradient flattens out
    X = 1e-3 * np.concatenate([-np.ones(5), np.ones(5)]).reshape(-1, 1)
    y = np.array([0.0] * 5 + [1.0] * 5)
    d = Dataset(X=X, y=y, family="logistic")
    res = refit_ml(d, SupportSet([0]))
    assert not res.converged
    assert np.isfinite(res.loss)


def test_empty_support_gives_null_loss(rng):
    X = unit_norm_columns(rng, 8, 3)
    y = rng.standard_normal(8)
    d = Dataset(X=X, y=y)
    res = refit_ml(d, SupportSet([]))
    assert res.loss == pytest.approx(null_loss(d))


def test_cache_dedup_and_cap(rng):
    X = unit_norm_columns(rng, 10, 6)
    d = Dataset(X=X, y=rng.standard_normal(10))
    cache = RefitCache(d)
    a = cache.get(SupportSet([0, 1]))
    b = cache.get(SupportSet([0, 1]))
    assert a is b and len(cache) == 1
    with pytest.raises(RankDeficient):
        cache.get(SupportSet(range(6)))  # above floor(n/2) = 5
