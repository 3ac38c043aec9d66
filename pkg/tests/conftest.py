import numpy as np
import pytest

from l0homotopy import Problem, normalize_columns


def random_problem(rng, d, K, s, sigma=0.0, dist="normal"):
    """Small random instance with unit-norm columns and known truth."""
    if dist == "normal":
        raw = rng.standard_normal((d, K))
    else:
        raw = rng.uniform(-1.0, 1.0, (d, K))
    D, pre = normalize_columns(raw)
    truth = np.zeros(K)
    idx = rng.choice(K, s, replace=False)
    truth[idx] = rng.standard_normal(s)
    x = raw @ truth
    if sigma > 0:
        x = x + rng.normal(0.0, sigma, d)
    truth *= pre
    return Problem(dictionary=D, signal=x, truth=truth)


def orthonormal_problem(rng, n, s):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    truth = np.zeros(n)
    idx = rng.choice(n, s, replace=False)
    truth[idx] = rng.standard_normal(s)
    return Problem(dictionary=Q, signal=Q @ truth, truth=truth)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
