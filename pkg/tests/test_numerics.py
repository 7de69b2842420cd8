import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermolength.errors import (
    DimensionError,
    MonotonicityError,
    NumericError,
    RangeError,
    StabilityError,
)
from thermolength.numerics import (
    eig_general,
    gauss_legendre,
    integrate_1d,
    matrix_exp,
    monotone_inverse,
    solve_lyapunov,
)


def taylor_exp(A, terms=60):
    """Plain power series; fine for |A| of order one."""
    out = np.eye(len(A), dtype=complex)
    term = np.eye(len(A), dtype=complex)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def lyapunov_by_quadrature(A, X, horizon, panels):
    x, w = gauss_legendre(6).composite(0.0, horizon, panels)
    Y = np.zeros_like(X, dtype=float)
    for xi, wi in zip(x, w):
        F = matrix_exp(xi * A)
        Y += wi * (F.T @ X @ F)
    return Y


def random_stable(rng, n, margin=0.5):
    M = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(M).real) + margin
    return M - shift * np.eye(n)


# matrix_exp

def test_exp_zero_is_identity():
    assert np.array_equal(matrix_exp(np.zeros((3, 3))), np.eye(3))


def test_exp_rotation_generator():
    t = 0.7
    R = matrix_exp(np.array([[0.0, t], [-t, 0.0]]))
    assert np.allclose(R, [[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]], atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_exp_matches_taylor_series(rng, n):
    A = rng.normal(size=(n, n)) / n
    assert np.max(np.abs(matrix_exp(A) - taylor_exp(A))) < 1e-12


def test_exp_rejects_non_square():
    with pytest.raises(DimensionError):
        matrix_exp(np.zeros((2, 3)))


def test_exp_rejects_nan():
    with pytest.raises(NumericError):
        matrix_exp(np.array([[np.nan]]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_exp_of_commuting_sum_factorises(a, b):
    Q = np.linalg.qr(np.arange(16.0).reshape(4, 4) + np.eye(4) * 7)[0]
    A = Q @ np.diag(a) @ Q.T
    B = Q @ np.diag(b) @ Q.T
    lhs = matrix_exp(A + B)
    rhs = matrix_exp(A) @ matrix_exp(B)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))


# eig_general

def test_eig_general_residual(rng):
    A = rng.normal(size=(6, 6))
    w, V = eig_general(A)
    assert np.max(np.abs(A @ V - V * w)) < 1e-10


def test_eig_of_rotation_generator():
    w, _ = eig_general(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(sorted(w.imag), [-1.0, 1.0])


# solve_lyapunov

def test_lyapunov_scalar():
    # -2 y = -2  ->  y = 1 for A = -1, X = 2
    assert solve_lyapunov(np.array([[-1.0]]), np.array([[2.0]]))[0, 0] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_lyapunov_matches_quadrature_oracle(rng, n):
    A = random_stable(rng, n)
    X = rng.normal(size=(n, n))
    X = X @ X.T
    Y = solve_lyapunov(A, X)
    # slowest decay rate 2 * 0.5, so a horizon of 60 leaves e^-60
    Yq = lyapunov_by_quadrature(A, X, 60.0, 1200)
    assert np.linalg.norm(Y - Yq) / np.linalg.norm(Yq) < 1e-8


def test_lyapunov_residual(rng):
    A = random_stable(rng, 6)
    X = rng.normal(size=(6, 6))
    Y = solve_lyapunov(A, X)
    assert np.max(np.abs(A.T @ Y + Y @ A + X)) < 1e-10 * np.max(np.abs(Y))


def test_lyapunov_rejects_unstable():
    with pytest.raises(StabilityError) as info:
        solve_lyapunov(np.array([[0.1, 0.0], [0.0, -1.0]]), np.eye(2))
    assert info.value.eigenvalue.real == pytest.approx(0.1)


def test_lyapunov_shape_mismatch():
    with pytest.raises(DimensionError):
        solve_lyapunov(-np.eye(2), np.eye(3))


def test_lyapunov_defective_drift():
    # Jordan block: eigen-transform methods fail here
    A = np.array([[-1.0, 1.0], [0.0, -1.0]])
    X = np.eye(2)
    Yq = lyapunov_by_quadrature(A, X, 50.0, 800)
    assert np.allclose(solve_lyapunov(A, X), Yq, rtol=1e-9, atol=1e-12)


# quadrature

def test_integrate_constant_and_linear():
    assert integrate_1d(lambda t: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert integrate_1d(lambda t: t, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)


def test_integrate_sine():
    val = integrate_1d(math.sin, 0.0, math.pi, gauss_legendre(5), panels=64)
    assert abs(val - 2.0) < 1e-10


def test_integrate_reports_bad_abscissa():
    with pytest.raises(NumericError) as info:
        integrate_1d(lambda t: 1.0 / (t - 0.5) if t > 0.5 else np.nan, 0.0, 1.0, panels=4)
    assert 0.0 <= info.value.where <= 0.5


def test_gauss_rule_exact_for_polynomials():
    rule = gauss_legendre(4)
    for k in range(8):
        assert np.dot(rule.weights, rule.nodes**k) == pytest.approx(1.0 / (k + 1), rel=1e-14)


# monotone_inverse

U = np.linspace(0.0, 1.0, 1001)


def test_inverse_identity():
    assert monotone_inverse(U, U, 0.3) == pytest.approx(0.3, abs=1e-12)


def test_inverse_square():
    assert monotone_inverse(U, U**2, 0.25) == pytest.approx(0.5, abs=1e-6)


def test_inverse_flat_segment_returns_left_end():
    s = np.where(U < 0.4, U, np.where(U <= 0.6, 0.4, U - 0.2))
    assert monotone_inverse(U, s, 0.4) == pytest.approx(0.4, abs=1e-12)


def test_inverse_out_of_range():
    with pytest.raises(RangeError):
        monotone_inverse(U, U, 1.5)


def test_inverse_non_monotone():
    with pytest.raises(MonotonicityError):
        monotone_inverse(U, np.sin(4 * U), 0.2)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 4.0), st.floats(0.0, 1.0))
def test_inverse_round_trip(power, frac):
    s = U**power + 0.3 * U
    target = frac * s[-1]
    u = monotone_inverse(U, s, target)
    assert abs(u**power + 0.3 * u - target) < 1e-6


def test_inverse_vectorised_and_ordered():
    s = np.expm1(U)
    y = np.linspace(0.0, s[-1], 57)
    out = monotone_inverse(U, s, y)
    assert np.all(np.diff(out) > 0)
    assert np.allclose(out, np.log1p(y), atol=1e-6)
