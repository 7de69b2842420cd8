"""Gaussian Lindblad dynamics and the slow-driving metrics of open cycles.

Jump operators are linear, ``L_k = c_k^T R``; their coefficient rows are
stacked into an ``m x 2D`` complex matrix ``C``.  With
``Gamma = sum_k c_k c_k^dagger`` the second moments obey

    d sigma / dt = A sigma + sigma A^T + D,
    A = J (G - Im Gamma),   D = J Re(Gamma) J^T,

where ``J`` is the real symplectic form.  The dissipative integrals
``int_0^inf exp(v A^T) X exp(v A) dv`` are Lyapunov solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, ConsistencyError, StabilityError
from .gaussian import QuadraticModel, symplectic_form, thermal_covariance, williamson
from .metrics import _finish, bar_X, min_eigenvalue_ratio, modal_g, modal_m, underline_X
from .numerics import hurwitz_margin, max_norm, solve_lyapunov

DETAILED_BALANCE_TOL = 1e-8


@dataclass(frozen=True)
class LindbladModel:
    """A quadratic model plus jump coefficients ``jumps(point) -> C``."""

    model: QuadraticModel
    jumps: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    @property
    def n_params(self):
        return self.model.n_params

    @property
    def modes(self):
        return self.model.modes


def thermal_damping(model, gamma, check_point=None):
    """Amplitude damping of every normal mode at rate ``gamma``.

    Each normal mode ``a_k`` of ``G(lambda)`` gets an emission channel with
    rate ``gamma (n_k + 1)`` and an absorption channel with rate
    ``gamma n_k``, ``n_k`` the Bose occupation at ``(beta, nu_k)``.  This
    satisfies detailed balance, so the steady state is the Gibbs state.
    """
    if not gamma > 0:
        raise ArgumentError(f"damping rate must be positive, got {gamma!r}")
    if model.classical:
        raise ArgumentError("Lindblad dynamics needs a quantum model")

    def jumps(point):
        point = np.asarray(point, dtype=float)
        S, nu = williamson(model.G(point[1:]))
        Sinv = np.linalg.inv(S)
        n = 1.0 / np.expm1(point[0] * nu)
        rows = []
        for k in range(len(nu)):
            a = (Sinv[2 * k] + 1j * Sinv[2 * k + 1]) / np.sqrt(2.0)
            rows.append(np.sqrt(gamma * (n[k] + 1.0)) * a)
            rows.append(np.sqrt(gamma * n[k]) * a.conj())
        return np.array(rows)

    out = LindbladModel(model, jumps, label=f"{model.label or 'model'}+damping(gamma={gamma!r})")
    if check_point is not None:
        detailed_balance_gap(out, check_point, raise_on_fail=True)
    return out


def drift_diffusion(lmodel, point, check=True):
    """``(A, D)`` at a control point; raises StabilityError if ``A`` is not Hurwitz."""
    point = np.asarray(point, dtype=float)
    G = lmodel.model.G(point[1:])
    C = np.atleast_2d(np.asarray(lmodel.jumps(point), dtype=complex))
    n = G.shape[0]
    if C.shape[1] != n:
        raise ArgumentError(f"jump rows have length {C.shape[1]}, expected {n}")
    J = symplectic_form(n // 2)
    Gamma = C.T @ C.conj()
    A = J @ (G - Gamma.imag)
    D = J @ Gamma.real @ J.T
    D = 0.5 * (D + D.T)
    if check:
        scale = max(max_norm(A), 1.0)
        real_max, worst = hurwitz_margin(A)
        if real_max >= -1e-8 * scale:
            raise StabilityError(
                f"drift is not Hurwitz (eigenvalue {worst:.6g}); the dissipation is too weak or absent",
                eigenvalue=worst,
            )
    return A, D


def steady_covariance(lmodel, point):
    """Fixed point of ``A sigma + sigma A^T + D = 0``."""
    A, D = drift_diffusion(lmodel, point)
    # solve_lyapunov solves A'^T Y + Y A' = -X; take A' = A^T
    sigma = solve_lyapunov(A.T, D)
    return 0.5 * (sigma + sigma.T)


def detailed_balance_gap(lmodel, point, raise_on_fail=False):
    """Max deviation between the steady covariance and the Gibbs covariance."""
    sigma = steady_covariance(lmodel, point)
    thermal = thermal_covariance(lmodel.model, point).sigma
    gap = max_norm(sigma - thermal) / max(1.0, max_norm(thermal))
    if raise_on_fail and gap > DETAILED_BALANCE_TOL:
        raise ConsistencyError(
            f"steady state differs from the Gibbs state by {gap:.3e}; no detailed balance",
            measured=gap,
        )
    return gap


def dissipative_integral(lmodel, point, X, underline=True):
    """``Y = int_0^inf F_v^T X F_v dv`` with ``F_v = exp(v A)``.

    With ``underline=True`` returns ``(sigma - i J/2) Y (sigma + i J/2)``
    (the open-system counterpart of ``underline_X``), else ``Y`` itself.
    """
    A, _ = drift_diffusion(lmodel, point)
    X = np.asarray(X, dtype=float)
    Y = solve_lyapunov(A, 0.5 * (X + X.T))
    if not underline:
        return Y
    state = thermal_covariance(lmodel.model, point)
    return underline_X(state, Y)


def open_metrics(lmodel, point, method="modal", check_balance=True):
    """Symmetrised open-system metrics ``(m, g)``.

    ``m`` has a zero temperature row.  ``method="direct"`` builds
    ``bar_X`` by imaginary-time quadrature instead of the normal-mode
    closed form.
    """
    point = np.asarray(point, dtype=float)
    if check_balance:
        detailed_balance_gap(lmodel, point, raise_on_fail=True)
    model = lmodel.model
    state = thermal_covariance(model, point)
    forces = model.forces(point)
    A, _ = drift_diffusion(lmodel, point)
    lyap = [solve_lyapunov(A, X) for X in forces]
    k = len(forces)
    if method == "modal":
        mt = modal_m(state, forces[1:], lyap[1:])
        gt = modal_g(state, forces, lyap)
    elif method == "direct":
        under = [underline_X(state, Y) for Y in lyap]
        bars = [bar_X(state, X) for X in forces]
        mt = np.array([[0.5 * np.trace(forces[a] @ under[b]) for b in range(1, k)] for a in range(1, k)])
        gt = np.array([[0.5 * state.beta * np.trace(bars[a] @ under[b]) for b in range(k)] for a in range(k)])
    else:
        raise ArgumentError(f"unknown method {method!r}")
    m = np.zeros((k, k))
    # the unsymmetrised tensors need not be symmetric; symmetrise explicitly
    m[1:, 1:] = _finish(0.5 * (mt.real + mt.real.T) + 0j, "open m")
    gs = 0.5 * (gt + gt.T)
    g = _finish(gs, "open g")
    for name, M in (("open m", m), ("open g", g)):
        if np.any(M) and min_eigenvalue_ratio(M) < -1e-9:
            raise ConsistencyError(f"{name} is not positive semidefinite", measured=min_eigenvalue_ratio(M))
    return m, g


def open_weights(beta_c, beta_h, work):
    """Prefactors of the open-cycle objective for a cycle of duration ``tau``.

    ``Var(W~) = (var_w / tau) int m`` and ``delta_eta = (eff_w / tau) int g``
    with ``var_w = 2 beta_c^2`` and ``eff_w = eta_C / (beta_c |W|)``.
    """
    if not work < 0:
        from .errors import CycleDirectionError

        raise CycleDirectionError(f"adiabatic work {work!r} is not negative: not a work-extracting cycle")
    eta_c = 1.0 - beta_h / beta_c
    return 2.0 * beta_c**2, eta_c / (beta_c * abs(work))


def open_combined_metric(lmodel, point, eps, beta_c, beta_h, work, method="modal"):
    """``eps var_w m + (1 - eps) eff_w g`` with the open-cycle prefactors."""
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps!r}")
    var_w, eff_w = open_weights(beta_c, beta_h, work)
    m, g = open_metrics(lmodel, point, method)
    return eps * var_w * m + (1.0 - eps) * eff_w * g
