import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transgauss.errors import (
    DegenerateBasisError,
    DimensionError,
    IllConditionedFitError,
    ParameterError,
)
from transgauss.kernel import (
    DiffConfig,
    determinant,
    directional_derivative,
    fit_polynomial,
    gram_schmidt,
    kahan_sum,
)


def square(n, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(-2.0, 2.0, size=(n, n))


@given(n=st.integers(1, 6), seed=st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_determinant_matches_numpy(n, seed):
    a = square(n, seed)
    assert determinant(a) == pytest.approx(np.linalg.det(a), rel=1e-9, abs=1e-12)


@given(n=st.integers(1, 4), s1=st.integers(0, 999), s2=st.integers(0, 999))
@settings(max_examples=40, deadline=None)
def test_determinant_multiplicative(n, s1, s2):
    a, b = square(n, s1), square(n, s2)
    lhs = determinant(a @ b)
    rhs = determinant(a) * determinant(b)
    scale = max(1.0, abs(rhs))
    assert abs(lhs - rhs) < 1e-9 * scale


def test_determinant_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        determinant(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        determinant(np.zeros((7, 7)))
    with pytest.raises(DimensionError):
        determinant(np.zeros((0, 0)))


def test_determinant_singular():
    m = np.array([[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0], [0, 1, 0, 1], [1, 0, 1, 0]])
    assert determinant(m) == pytest.approx(0.0, abs=1e-14)


def test_gram_schmidt_hand_case():
    out = gram_schmidt([np.array([1.0, 1.0]), np.array([0.0, 1.0])])
    s = math.sqrt(0.5)
    np.testing.assert_allclose(out[0], [s, s], atol=1e-15)
    np.testing.assert_allclose(out[1], [-s, s], atol=1e-15)


@given(seed=st.integers(0, 10_000), n=st.integers(2, 5))
@settings(max_examples=40, deadline=None)
def test_gram_schmidt_metric_orthonormal(seed, n):
    rng = np.random.default_rng(seed)
    vecs = rng.uniform(-1.0, 1.0, size=(n, n)) + 3.0 * np.eye(n)
    a = rng.uniform(-0.5, 0.5, size=(n, n))
    g = a @ a.T + np.eye(n)  # SPD metric
    basis = gram_schmidt(list(vecs), inner=g)
    mat = np.array(basis)
    np.testing.assert_allclose(mat @ g @ mat.T, np.eye(n), atol=1e-10)


def test_gram_schmidt_degenerate():
    with pytest.raises(DegenerateBasisError):
        gram_schmidt([np.array([1.0, 0.0]), np.array([2.0, 0.0])])


def test_fit_polynomial_roundtrip():
    coeffs = np.array([0.5, -1.25, 2.0])
    ts = np.array([0.1, 0.2, 0.3, 0.4])
    ys = coeffs[0] + coeffs[1] * ts + coeffs[2] * ts**2
    out = fit_polynomial(ts, ys, 2)
    np.testing.assert_allclose(out, coeffs, atol=1e-10)


def test_fit_polynomial_guard():
    # nearly coincident sample points blow up the Vandermonde condition
    ts = np.array([0.1, 0.1 + 1e-14, 0.2])
    with pytest.raises(IllConditionedFitError):
        fit_polynomial(ts, np.array([1.0, 1.0, 2.0]), 2)
    with pytest.raises(DimensionError):
        fit_polynomial(np.array([0.1, 0.2]), np.array([1.0, 2.0]), 2)


def test_directional_derivative_vector_valued():
    def fn(p):
        return np.array([p[0] ** 2, 0.0])

    out = directional_derivative(fn, np.array([3.0, 0.0]), np.array([1.0, 0.0]))
    np.testing.assert_allclose(out, [6.0, 0.0], atol=1e-9)


def test_directional_derivative_richardson_gain():
    # exp has every even error term; Richardson should beat the plain rule
    f = lambda p: math.exp(p[0])
    p, d = np.array([0.3]), np.array([1.0])
    plain = directional_derivative(f, p, d, DiffConfig(step=1e-3, richardson_levels=0))
    rich = directional_derivative(f, p, d, DiffConfig(step=1e-3, richardson_levels=2))
    truth = math.exp(0.3)
    assert abs(rich - truth) < abs(plain - truth) / 100.0


def test_diff_config_validation():
    with pytest.raises(ParameterError):
        DiffConfig(step=0.0)
    with pytest.raises(ParameterError):
        DiffConfig(step=1e-4, richardson_levels=7)


def test_kahan_sum_beats_naive_drift():
    vals = [0.1] * 10**6
    truth = math.fsum(vals)
    assert kahan_sum(vals) == truth  # compensation removes the drift entirely
    assert abs(sum(vals) - truth) > 1e-7  # ...which plain accumulation shows
    assert kahan_sum([]) == 0.0
