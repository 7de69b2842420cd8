"""Thermal Gaussian states of quadratic Hamiltonians ``H = R^T G R / 2``.

Quadratures are ordered ``R = (x_1, p_1, ..., x_D, p_D)`` with
``[x, p] = i`` (hbar = k_B = 1).  A control point is a 1-D array
``(beta, lambda_1, ..., lambda_d)``; index 0 is always the inverse
temperature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import ArgumentError, DimensionError, PositivityError
from .numerics import matrix_exp, max_norm


def symplectic_form(D):
    """Block-diagonal ``Omega = (+) [[0, 1], [-1, 0]]`` for ``D`` modes."""
    if int(D) != D or D < 1:
        raise ArgumentError(f"number of modes must be a positive integer, got {D!r}")
    return np.kron(np.eye(int(D)), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_pd(G, what="G"):
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
        raise DimensionError(f"{what} must be a 2D x 2D matrix, got {G.shape}")
    if max_norm(G - G.T) > 1e-12 * max(1.0, max_norm(G)):
        raise PositivityError(f"{what} is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (G + G.T))
    if w[0] <= 1e-14 * max(1.0, w[-1]):
        raise PositivityError(f"{what} is not positive definite (smallest eigenvalue {w[0]:.3e})")
    return 0.5 * (G + G.T)


def williamson(G):
    """Symplectic diagonalisation of a positive-definite ``G``.

    Returns ``(S, nu)`` with ``S.T @ G @ S = diag(nu_1, nu_1, nu_2, nu_2, ...)``,
    ``S @ Omega @ S.T = Omega`` and ``nu`` sorted in descending order.
    """
    G = _check_pd(G)
    n = G.shape[0]
    w, O = np.linalg.eigh(G)
    root = (O * np.sqrt(w)) @ O.T
    iroot = (O / np.sqrt(w)) @ O.T
    J = symplectic_form(n // 2)
    K = root @ J @ root
    K = 0.5 * (K - K.T)
    T, Z = scipy.linalg.schur(K, output="real")

    nu = []
    cols = []
    for k in range(0, n, 2):
        b = 0.5 * (T[k, k + 1] - T[k + 1, k])
        if b >= 0:
            cols.append((k, k + 1))
        else:
            cols.append((k + 1, k))
        nu.append(abs(b))
    order = np.argsort(nu, kind="stable")[::-1]
    nu = np.array(nu)[order]
    perm = [c for i in order for c in cols[i]]
    Z = Z[:, perm]
    S = iroot @ Z * np.repeat(np.sqrt(nu), 2)[None, :]
    return S, nu


@dataclass(frozen=True)
class QuadraticModel:
    """A D-mode quadratic system controlled by ``d`` mechanical parameters.

    ``coefficients(lam)`` returns ``G(lam)``; ``derivative(lam, j)`` returns
    ``dG/dlambda_j`` for ``j = 1..d``.  If no derivative is given, central
    differences with step ``fd_step`` are used.  ``classical=True`` switches
    the thermal state to the Boltzmann distribution of the same quadratic
    form (no commutator terms).
    """

    modes: int
    coefficients: Callable[[np.ndarray], np.ndarray]
    names: Sequence[str]
    derivative_fn: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    classical: bool = False
    fd_step: float = 1e-6
    label: str = ""

    @property
    def n_params(self):
        return len(self.names)

    def G(self, lam):
        G = np.asarray(self.coefficients(np.asarray(lam, dtype=float)), dtype=float)
        if G.shape != (2 * self.modes, 2 * self.modes):
            raise DimensionError(f"G has shape {G.shape}, expected {(2 * self.modes,) * 2}")
        return G

    def derivative(self, lam, j):
        if not 1 <= j <= self.n_params:
            raise ArgumentError(f"parameter index must be in 1..{self.n_params}, got {j}")
        lam = np.asarray(lam, dtype=float)
        if self.derivative_fn is not None:
            return np.asarray(self.derivative_fn(lam, j), dtype=float)
        e = np.zeros_like(lam)
        e[j - 1] = self.fd_step
        return (self.G(lam + e) - self.G(lam - e)) / (2 * self.fd_step)

    def forces(self, point):
        """Force matrices ``[G / beta, dG/dlambda_1, ..., dG/dlambda_d]``."""
        point = np.asarray(point, dtype=float)
        beta, lam = point[0], point[1:]
        G = self.G(lam)
        return [G / beta] + [self.derivative(lam, j) for j in range(1, self.n_params + 1)]


@dataclass(frozen=True, eq=False)
class ThermalGaussianState:
    """Zero-mean Gaussian Gibbs state ``exp(-beta H) / Z``."""

    beta: float
    G: np.ndarray
    sigma: np.ndarray
    lnZ: float
    S: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None
    classical: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self):
        return self.sigma.shape[0]

    @property
    def omega(self):
        return symplectic_form(self.dim // 2)

    def correlation(self):
        """Two-point function ``<R_a R_b> = sigma + i Omega / 2``.

        Zero commutator part for classical states.
        """
        if self.classical:
            return self.sigma.astype(complex)
        return self.sigma + 0.5j * self.omega

    def occupations(self):
        """Bose occupations of the normal modes (quantum states only)."""
        return 1.0 / np.expm1(self.beta * self.nu)


def thermal_state(G, beta, classical=False):
    if not beta > 0:
        raise ArgumentError(f"inverse temperature must be positive, got {beta!r}")
    G = _check_pd(G)
    if classical:
        sigma = np.linalg.inv(G) / beta
        sigma = 0.5 * (sigma + sigma.T)
        sign, logdet = np.linalg.slogdet(beta * G)
        return ThermalGaussianState(float(beta), G, sigma, -0.5 * logdet, classical=True)
    S, nu = williamson(G)
    y = beta * nu
    # 1/2 coth(y/2) = 1/2 + 1/(e^y - 1)
    pop = 0.5 + 1.0 / np.expm1(y)
    sigma = (S * np.repeat(pop, 2)[None, :]) @ S.T
    sigma = 0.5 * (sigma + sigma.T)
    # -ln(2 sinh(y/2)) without overflow
    lnZ = float(np.sum(-0.5 * y - np.log1p(-np.exp(-y))))
    return ThermalGaussianState(float(beta), G, sigma, lnZ, S=S, nu=nu)


def thermal_covariance(model, point):
    """Thermal state of ``model`` at control point ``(beta, lambda...)``."""
    point = np.asarray(point, dtype=float)
    if point.shape != (model.n_params + 1,):
        raise DimensionError(
            f"control point must have {model.n_params + 1} entries, got {point.shape}"
        )
    return thermal_state(model.G(point[1:]), point[0], classical=model.classical)


def mean_energy(state):
    return 0.5 * float(np.trace(state.G @ state.sigma))


def relative_entropy(state1, state2):
    """``S(pi_1 || pi_2)`` for two Gaussian Gibbs states (KL divergence if classical)."""
    if state1.dim != state2.dim:
        raise ArgumentError(f"state dimensions differ: {state1.dim} vs {state2.dim}")
    return (
        state2.beta * 0.5 * float(np.trace(state2.G @ state1.sigma))
        - state1.beta * 0.5 * float(np.trace(state1.G @ state1.sigma))
        + state2.lnZ
        - state1.lnZ
    )


def imaginary_time_propagator(G, omega, x):
    """``exp(i x Omega G)``, the Heisenberg propagator of ``R`` at imaginary time."""
    return matrix_exp(1j * x * (np.asarray(omega) @ np.asarray(G)))


def physicality_gap(state):
    """Smallest eigenvalue of ``sigma + i Omega / 2`` (>= 0 for physical states)."""
    return float(np.linalg.eigvalsh(state.sigma + 0.5j * state.omega)[0])
