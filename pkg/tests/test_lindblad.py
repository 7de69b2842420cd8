import numpy as np
import pytest

from thermolength import models
from thermolength.errors import ArgumentError, ConsistencyError, StabilityError
from thermolength.gaussian import thermal_covariance
from thermolength.lindblad import (
    LindbladModel,
    detailed_balance_gap,
    dissipative_integral,
    drift_diffusion,
    open_combined_metric,
    open_metrics,
    open_weights,
    steady_covariance,
    thermal_damping,
)
from thermolength.metrics import min_eigenvalue_ratio, underline_X
from thermolength.numerics import gauss_legendre, matrix_exp

SINGLE = models.single_oscillator()


def test_no_dissipation_is_not_hurwitz():
    lm = LindbladModel(SINGLE, lambda p: np.zeros((1, 2), dtype=complex))
    with pytest.raises(StabilityError):
        drift_diffusion(lm, [1.0, 1.0])


@pytest.mark.parametrize("gamma,w", [(0.1, 1.0), (0.5, 2.0)])
def test_damped_drift_eigenvalues(gamma, w):
    lm = models.damped_ho_lindblad(1.0, gamma)
    A, D = drift_diffusion(lm, [1.3, w])
    ev = np.sort_complex(np.linalg.eigvals(A))
    assert np.allclose(ev, [-gamma / 2 - 1j * w, -gamma / 2 + 1j * w], atol=1e-12)
    assert np.all(np.linalg.eigvalsh(D) >= -1e-14)


def test_diffusion_psd_random_jumps(rng):
    for _ in range(10):
        C = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        lm = LindbladModel(models.coupled_oscillators(1.0, 0.4), lambda p, C=C: C)
        _, D = drift_diffusion(lm, [1.0, 1.0, 0.4], check=False)
        assert np.min(np.linalg.eigvalsh(D)) >= -1e-12


def test_vanishing_rate_rejected():
    with pytest.raises(StabilityError):
        drift_diffusion(models.damped_ho_lindblad(1.0, 1e-12), [1.0, 1.0])
    with pytest.raises(ArgumentError):
        thermal_damping(SINGLE, 0.0)


@pytest.mark.parametrize("beta", [0.8, 1.5, 4.0])
def test_steady_state_is_gibbs(beta):
    lm = models.damped_ho_lindblad(1.0, 0.1)
    sigma = steady_covariance(lm, [beta, 1.3])
    assert np.allclose(sigma, thermal_covariance(SINGLE, [beta, 1.3]).sigma, atol=1e-10)


def test_steady_state_independent_of_rate():
    a = steady_covariance(models.damped_ho_lindblad(1.0, 0.1), [2.0, 1.0])
    b = steady_covariance(models.damped_ho_lindblad(1.0, 1.0), [2.0, 1.0])
    assert np.allclose(a, b, atol=1e-12)


def test_coupled_detailed_balance():
    lm = thermal_damping(models.coupled_oscillators(1.0, 0.4), 0.2)
    assert detailed_balance_gap(lm, [2.0, 1.2, 0.5]) < 1e-10


def test_zero_temperature_bath_breaks_balance():
    # emission only: relaxes to the vacuum, not the Gibbs state at beta = 1
    lm = LindbladModel(SINGLE, lambda p: np.array([[np.sqrt(0.1) * np.sqrt(p[1] / 2), 1j * np.sqrt(0.1) / np.sqrt(2 * p[1])]]))
    assert detailed_balance_gap(lm, [1.0, 1.0]) > 1e-3
    with pytest.raises(ConsistencyError):
        detailed_balance_gap(lm, [1.0, 1.0], raise_on_fail=True)
    with pytest.raises(ConsistencyError):
        open_metrics(lm, [1.0, 1.0])


def test_dissipative_integral_zero_and_linear():
    lm = models.damped_ho_lindblad(1.0, 0.3)
    p = [1.0, 1.2]
    assert not np.any(dissipative_integral(lm, p, np.zeros((2, 2)), underline=False))
    X = np.diag([2.4, 0.0])
    Y = dissipative_integral(lm, p, X, underline=False)
    assert np.allclose(dissipative_integral(lm, p, 2 * X, underline=False), 2 * Y, rtol=1e-13)


def test_dissipative_integral_matches_quadrature():
    gamma = 0.4
    lm = models.damped_ho_lindblad(1.0, gamma)
    p = [1.0, 1.2]
    X = np.array([[2.4, 0.3], [0.3, 0.5]])
    A, _ = drift_diffusion(lm, p)
    x, w = gauss_legendre(6).composite(0.0, 120.0, 2400)
    Yq = sum(wi * matrix_exp(xi * A).T @ X @ matrix_exp(xi * A) for xi, wi in zip(x, w))
    Y = dissipative_integral(lm, p, X, underline=False)
    assert np.linalg.norm(Y - Yq) / np.linalg.norm(Yq) < 1e-8
    assert np.max(np.abs(A.T @ Y + Y @ A + X)) < 1e-10
    st = thermal_covariance(SINGLE, p)
    assert np.allclose(dissipative_integral(lm, p, X), underline_X(st, Y))


def test_open_metrics_symmetric_psd(fig1_curve):
    lm = thermal_damping(models.coupled_oscillators(1.0, 0.4), 0.1)
    for p in fig1_curve.point(np.linspace(0, 1, 9)):
        m, g = open_metrics(lm, p)
        assert not m[0].any() and not m[:, 0].any()
        for M in (m, g):
            assert np.array_equal(M, M.T)
            assert min_eigenvalue_ratio(M) >= -1e-9


def test_open_metrics_direct_route_agrees():
    lm = thermal_damping(models.coupled_oscillators(1.0, 0.4), 0.2)
    p = [1.5, 1.2, 0.5]
    m1, g1 = open_metrics(lm, p)
    m2, g2 = open_metrics(lm, p, method="direct")
    assert np.allclose(m1, m2, rtol=1e-7)
    assert np.allclose(g1, g2, rtol=1e-7)


@pytest.mark.parametrize("beta", [0.5, 1.3, 3.0])
def test_open_scaling_reduction(beta):
    lm = thermal_damping(models.scaling_oscillator(1.0), 0.2)
    m, g = open_metrics(lm, [beta, 0.9])
    assert g[1, 1] == pytest.approx(beta**2 * m[1, 1], rel=1e-9)


def test_open_m_scales_with_relaxation_time():
    p = [1.2, 1.0]
    m1 = open_metrics(models.damped_ho_lindblad(1.0, 20.0), p)[0][1, 1]
    m2 = open_metrics(models.damped_ho_lindblad(1.0, 40.0), p)[0][1, 1]
    # fast relaxation: Lyapunov solution ~ 1 / gamma
    assert m1 / m2 == pytest.approx(2.0, rel=1e-2)


def test_open_weights():
    var_w, eff_w = open_weights(4.0, 0.8, -0.5)
    assert var_w == 32.0
    assert eff_w == pytest.approx(0.8 / 2.0)


def test_open_combined_endpoints():
    lm = models.damped_ho_lindblad(1.0, 0.2)
    p = [1.5, 1.1]
    m, g = open_metrics(lm, p)
    assert np.allclose(open_combined_metric(lm, p, 1.0, 4.0, 0.8, -0.5), 32.0 * m)
    assert np.allclose(open_combined_metric(lm, p, 0.0, 4.0, 0.8, -0.5), 0.4 * g)
