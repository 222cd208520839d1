import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit_norm_columns(rng, n, p):
    X = rng.standard_normal((n, p))
    return X / np.linalg.norm(X, axis=0)
