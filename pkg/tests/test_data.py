import io

import numpy as np
import pytest

from ssnet.data import (CoefficientVector, Dataset, LambdaGrid, SupportSet,
                        TrueModel, load_csv, make_dataset, standardize_design,
                        validate_dataset)
from ssnet.errors import (BadLabel, DimensionMismatch, TooFewObservations,
                          ZeroColumn)


def test_standardize_unit_norm_exact_column():
    X = np.zeros((4, 1))
    X[0, 0], X[1, 0] = 3.0, 4.0
    out, scale = standardize_design(X, "unit-norm")
    assert scale[0] == pytest.approx(5.0)
    assert out[0, 0] == pytest.approx(0.6)
    assert out[1, 0] == pytest.approx(0.8)


def test_standardize_identity_on_unit_column():
    X = np.zeros((3, 1))
    X[1, 0] = 1.0
    out, scale = standardize_design(X, "unit-norm")
    assert scale[0] == pytest.approx(1.0)
    np.testing.assert_allclose(out, X)


def test_standardize_round_trip_and_norms(rng):
    X = rng.standard_normal((5, 3))
    out, scale = standardize_design(X, "unit-norm")
    np.testing.assert_allclose(np.linalg.norm(out, axis=0), 1.0, atol=1e-10)
    np.testing.assert_allclose(out * scale, X, atol=1e-10)


def test_standardize_sqrt_n_centers_and_scales(rng):
    X = rng.standard_normal((40, 4)) + 3.0
    out, scale = standardize_design(X, "sqrt-n")
    np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(out, axis=0), np.sqrt(40), atol=1e-10)
    Xc = X - X.mean(axis=0)
    np.testing.assert_allclose(out * scale, Xc, atol=1e-10)


@pytest.mark.parametrize("mode", ["unit-norm", "sqrt-n"])
def test_standardize_idempotent(rng, mode):
    X = rng.standard_normal((20, 5)) * 7.0 + 1.0
    once, _ = standardize_design(X, mode)
    twice, s2 = standardize_design(once, mode)
    np.testing.assert_allclose(twice, once, atol=1e-12)
    np.testing.assert_allclose(s2, 1.0, atol=1e-12)


def test_standardize_zero_column():
    X = np.ones((5, 2))
    X[:, 1] = 0.0
    with pytest.raises(ZeroColumn) as exc:
        standardize_design(X, "unit-norm")
    assert exc.value.column == 1


def test_back_mapping_preserves_predictions(rng):
    X = rng.standard_normal((15, 4)) * 3.0
    out, scale = standardize_design(X, "unit-norm")
    beta = rng.standard_normal(4)
    np.testing.assert_allclose(out @ beta, X @ (beta / scale), atol=1e-10)


def test_validate_rejects_bad_logistic_label(rng):
    X = rng.standard_normal((6, 2))
    d = Dataset(X=X, y=np.array([0.0, 1.0, 0.5, 0.0, 1.0, 1.0]), family="logistic")
    with pytest.raises(BadLabel):
        validate_dataset(d)


def test_validate_rejects_single_observation():
    d = Dataset(X=np.ones((1, 2)), y=np.ones(1))
    with pytest.raises(TooFewObservations):
        validate_dataset(d)


def test_validate_accepts_quadratic(rng):
    X = rng.standard_normal((10, 3))
    d = make_dataset(X, rng.standard_normal(10), standardize="unit-norm")
    validate_dataset(d)  # no raise


def test_validate_hinge_labels(rng):
    X = rng.standard_normal((6, 2))
    good = Dataset(X=X, y=np.array([-1.0, 1, 1, -1, 1, -1]), family="squared-hinge")
    validate_dataset(good)
    bad = Dataset(X=X, y=np.array([0.0, 1, 1, -1, 1, -1]), family="squared-hinge")
    with pytest.raises(BadLabel):
        validate_dataset(bad)


def test_validate_dimension_mismatch(rng):
    d = Dataset(X=rng.standard_normal((5, 2)), y=np.zeros(4))
    with pytest.raises(DimensionMismatch):
        validate_dataset(d)


def test_validate_declared_scaling_checked(rng):
    from ssnet.errors import BadStandardization

    X = 2.0 * rng.standard_normal((10, 3))  # columns nowhere near unit norm
    d = Dataset(X=X, y=rng.standard_normal(10), standardization="unit-norm")
    with pytest.raises(BadStandardization):
        validate_dataset(d)


def test_dataset_immutable(rng):
    d = make_dataset(rng.standard_normal((5, 2)), np.zeros(5))
    with pytest.raises(ValueError):
        d.X[0, 0] = 1.0


def test_support_set_sorted_unique():
    s = SupportSet([4, 1, 2])
    assert s.indices == (1, 2, 4)
    with pytest.raises(ValueError):
        SupportSet([1, 1])


def test_coefficient_vector_exact_support():
    cv = CoefficientVector(np.array([0.0, -1.5, 0.0, 2.0]))
    assert cv.support.indices == (1, 3)


def test_lambda_grid_invariants():
    LambdaGrid(np.array([0.1, 1.0, 2.0]))
    with pytest.raises(ValueError):
        LambdaGrid(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        LambdaGrid(np.array([-1.0, 1.0]))


def test_true_model_support_and_beta_min():
    tm = TrueModel(beta=np.array([3.0, 0.0, -1.5]), sigma2=2.0)
    assert tm.support.indices == (0, 2)
    assert tm.t == 2
    assert tm.beta_min == pytest.approx(1.5)


def test_load_csv_with_header():
    text = io.StringIO("y,a,b\n1.0,2.0,3.0\n0.5,1.0,-1.0\n2.0,0.0,4.0\n")
    d, names = load_csv(text, response="y")
    assert names == ["a", "b"]
    assert d.n == 3 and d.p == 2
    np.testing.assert_allclose(d.y, [1.0, 0.5, 2.0])


def test_load_csv_headerless_index_response():
    text = io.StringIO("1.0,2.0,3.0\n0.5,1.0,-1.0\n")
    d, names = load_csv(text, response=0, has_header=None)
    assert d.p == 2
    np.testing.assert_allclose(d.y, [1.0, 0.5])


def test_load_csv_intercept_flag(rng):
    rows = ["y,a,b"]
    X = rng.standard_normal((8, 2))
    yv = rng.standard_normal(8)
    for i in range(8):
        rows.append(f"{yv[i]},{X[i,0]},{X[i,1]}")
    d, names = load_csv(io.StringIO("\n".join(rows)), response="y",
                        standardize="unit-norm", add_intercept=True)
    assert d.intercept and names[0] == "(intercept)"
    np.testing.assert_allclose(d.X[:, 0], 1.0)
    assert d.penalty_weights()[0] == 0.0
