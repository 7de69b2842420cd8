"""Thermodynamic metric tensors on the manifold of Gaussian Gibbs states.

Two tensors matter here:

* the fluctuation metric ``m``, the symmetrised covariance of the
  conjugate forces, which controls work variance;
* the Kubo-Mori metric ``g``, which controls entropy production and hence
  the efficiency deficit.

For a quadratic Hamiltonian both reduce to traces of 2D x 2D matrices.
Two routes are provided: the literal matrix formulas built from
``underline_X`` and ``bar_X`` (``method="direct"``), and a normal-mode
evaluation (``method="modal"``, the default) that carries the Bose
factors analytically and stays accurate deep in the quantum regime,
where the direct route suffers cancellation of ``exp(2 beta nu)`` terms.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError, ConsistencyError, CycleDirectionError, NumericError
from .gaussian import thermal_covariance
from .numerics import gauss_legendre, matrix_exp, max_norm

_U = np.array([[1.0, 1.0], [1.0j, -1.0j]]) / np.sqrt(2.0)


def underline_X(state, X):
    """``(sigma - i Omega/2) X (sigma + i Omega/2)``.

    Its trace against another force gives twice the (unsymmetrised)
    quantum covariance of the two quadratic observables.
    """
    X = np.asarray(X)
    if X.shape != state.sigma.shape:
        raise ArgumentError(f"force has shape {X.shape}, state has {state.sigma.shape}")
    C = state.correlation()
    return C.T @ X @ C


def _bar_X_quadrature(state, X, panels):
    J = state.omega
    rule = gauss_legendre(5)
    x, w = rule.composite(0.0, state.beta, panels)
    out = np.zeros(X.shape, dtype=complex)
    gen = 1j * (J @ state.G)
    for xi, wi in zip(x, w):
        P = matrix_exp(xi * gen)
        out += wi * (P.T @ X @ P)
    return out


def _modal_basis(state):
    if "V" not in state._cache:
        D = state.dim // 2
        W = np.kron(np.eye(D), _U)
        state._cache["V"] = state.S @ W
    return state._cache["V"]


def _bar_X_spectral(state, X):
    V = _modal_basis(state)
    lam = 1j * np.tile([1.0, -1.0], state.dim // 2) * np.repeat(state.nu, 2)
    Y = V.T @ X @ V
    kappa = -1j * (lam[:, None] + lam[None, :])  # e^{i x (l_a + l_b)} = e^{-x kappa}
    kappa = kappa.real
    beta = state.beta
    small = np.abs(beta * kappa) < 1e-8
    safe = np.where(small, 1.0, kappa)
    I = np.where(small, beta * (1 - 0.5 * beta * kappa), -np.expm1(-beta * safe) / safe)
    Vinv = np.linalg.inv(V)
    return Vinv.T @ (Y * I) @ Vinv


def bar_X(state, X, panels=None, method="quadrature", rtol=1e-9, max_panels=1024):
    """Imaginary-time average ``int_0^beta P(x)^T X P(x) dx`` with ``P(x) = exp(i x Omega G)``.

    ``method="quadrature"`` uses composite Gauss-Legendre; when ``panels`` is
    None the panel count is doubled from 4 until the relative change drops
    below ``rtol``.  ``method="spectral"`` integrates the eigen-decomposed
    propagator in closed form.
    """
    X = np.asarray(X, dtype=float)
    if state.classical:
        return state.beta * X.astype(complex)
    if method == "spectral":
        return _bar_X_spectral(state, X)
    if method != "quadrature":
        raise ArgumentError(f"unknown method {method!r}")
    if panels is not None:
        return _bar_X_quadrature(state, X, panels)
    n = 4
    prev = _bar_X_quadrature(state, X, n)
    while n < max_panels:
        n *= 2
        cur = _bar_X_quadrature(state, X, n)
        delta = max_norm(cur - prev) / max(max_norm(cur), 1e-300)
        if delta < rtol:
            return cur
        prev = cur
    raise NumericError(f"bar_X quadrature did not settle, last change {delta:.3e}", delta=delta)


def _log_bose(state):
    """log of (n+1, n) per normal mode, interleaved like the modal basis."""
    y = state.beta * state.nu
    l1 = -np.log1p(-np.exp(-y))  # log(n + 1)
    l0 = -y + l1  # log(n)
    return np.column_stack([l1, l0]).ravel()


def _partner(n):
    return np.arange(n) ^ 1


def _modal_tensors(state, left, right):
    V = _modal_basis(state)
    Y = [V.T @ X @ V for X in left]
    p = _partner(state.dim)
    # Qp[a, b] = (V^H X V)[b, partner(a)]
    Qp = [(V.conj().T @ X @ V)[:, p].T for X in right]
    return Y, Qp


def modal_m(state, left, right=None):
    """Unsymmetrised ``tr(X_j underline X_k) / 2`` in the normal-mode basis.

    ``right`` holds the matrices that enter the underline slot (the forces
    themselves for a closed system, their Lyapunov transforms for an open
    one).  Returns a complex matrix; callers take the real part.
    """
    right = left if right is None else right
    Y, Qp = _modal_tensors(state, left, right)
    N = np.exp(_log_bose(state))
    NN = N[:, None] * N[None, :]
    out = np.empty((len(left), len(right)), dtype=complex)
    for a in range(len(left)):
        for b in range(len(right)):
            out[a, b] = 0.5 * np.sum(NN * Y[a] * Qp[b])
    return out


def modal_g(state, left, right=None):
    """Unsymmetrised ``beta tr(bar X_j underline X_k) / 2`` in the normal-mode basis.

    The Bose factors and the imaginary-time integral are combined in log
    space, so the result stays accurate when ``beta nu`` is large.
    """
    right = left if right is None else right
    Y, Qp = _modal_tensors(state, left, right)
    w = _imag_time_weights(state)
    out = np.empty((len(left), len(right)), dtype=complex)
    for a in range(len(left)):
        for b in range(len(right)):
            out[a, b] = 0.5 * state.beta * np.sum(w * Y[a] * Qp[b])
    return out


def _imag_time_weights(state):
    """``N_a N_b int_0^beta exp(-x (s_a nu_a + s_b nu_b)) dx`` in log-safe form."""
    beta = state.beta
    nu = np.repeat(state.nu, 2)
    s = np.tile([1.0, -1.0], state.dim // 2)
    kappa = s[:, None] * nu[:, None] + s[None, :] * nu[None, :]
    logN = _log_bose(state)
    ak = np.abs(kappa)
    small = beta * ak < 1e-8
    safe = np.where(small, 1.0, ak)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_int = np.where(
            kappa > 0,
            np.log(-np.expm1(-beta * safe)) - np.log(safe),
            beta * safe + np.log(-np.expm1(-beta * safe)) - np.log(safe),
        )
        log_int = np.where(small, np.log(beta) + np.log1p(-0.5 * beta * kappa), log_int)
    return np.exp(logN[:, None] + logN[None, :] + log_int)


def _finish(M, what, check_symmetry=True):
    scale = max(max_norm(M.real), 1e-300)
    imag = max_norm(M.imag)
    if imag > 1e-8 * scale:
        raise ConsistencyError(f"{what} has imaginary residue {imag:.3e}", measured=imag / scale)
    M = M.real
    asym = max_norm(M - M.T)
    if check_symmetry and asym > 1e-8 * scale:
        raise ConsistencyError(f"{what} asymmetry {asym:.3e} exceeds tolerance", measured=asym / scale)
    return 0.5 * (M + M.T)


def _classical_cov(state, forces):
    s = state.sigma
    k = len(forces)
    out = np.empty((k, k))
    for a in range(k):
        A = forces[a] @ s
        for b in range(a, k):
            out[a, b] = out[b, a] = 0.5 * np.trace(A @ forces[b] @ s)
    return out


def _quantum_m(state, mech, method):
    k = len(mech)
    out = np.zeros((k, k), dtype=complex)
    if method == "modal":
        m = modal_m(state, mech)
        out = 0.5 * (m + m.T)
    elif method == "direct":
        under = [underline_X(state, X) for X in mech]
        for a in range(k):
            for b in range(k):
                out[a, b] = 0.25 * (np.trace(mech[a] @ under[b]) + np.trace(mech[b] @ under[a]))
    else:
        raise ArgumentError(f"unknown method {method!r}")
    return out


def _quantum_g(state, forces, method, panels=None):
    k = len(forces)
    out = np.zeros((k, k), dtype=complex)
    beta = state.beta
    if method == "modal":
        out = modal_g(state, forces)
    elif method in ("direct", "spectral"):
        kind = "quadrature" if method == "direct" else "spectral"
        bars = [bar_X(state, X, panels=panels, method=kind) for X in forces]
        under = [underline_X(state, X) for X in forces]
        for a in range(k):
            for b in range(k):
                out[a, b] = 0.5 * beta * np.trace(bars[a] @ under[b])
    else:
        raise ArgumentError(f"unknown method {method!r}")
    return out


def metric_pair_from_state(state, forces, method="modal"):
    """``(m, g)`` at a state, given the full force list ``[X_0, X_1, ...]``."""
    k = len(forces)
    m = np.zeros((k, k))
    if state.classical:
        cov = _classical_cov(state, forces)
        m[1:, 1:] = cov[1:, 1:]
        return m, state.beta**2 * cov
    m[1:, 1:] = _finish(_quantum_m(state, forces[1:], method), "m")
    g = _finish(_quantum_g(state, forces, method), "g")
    return m, g


def metric_pair(model, point, method="modal"):
    """Fluctuation and Kubo-Mori metrics at one control point."""
    state = thermal_covariance(model, point)
    return metric_pair_from_state(state, model.forces(point), method)


def metric_m(model, point, method="modal"):
    """Fluctuation metric; row and column 0 (temperature) are zero by convention."""
    state = thermal_covariance(model, point)
    forces = model.forces(point)
    k = len(forces)
    m = np.zeros((k, k))
    if state.classical:
        m[1:, 1:] = _classical_cov(state, forces)[1:, 1:]
    else:
        m[1:, 1:] = _finish(_quantum_m(state, forces[1:], method), "m")
    return m


def metric_g(model, point, method="modal", panels=None):
    """Kubo-Mori metric including the temperature direction.

    ``method`` is ``"modal"`` (normal-mode closed form), ``"direct"``
    (quadrature of the imaginary-time propagator) or ``"spectral"``
    (eigen closed form of the same propagator integral).
    """
    state = thermal_covariance(model, point)
    forces = model.forces(point)
    if state.classical:
        return state.beta**2 * _classical_cov(state, forces)
    return _finish(_quantum_g(state, forces, method, panels), "g")


def metric_classical_fisher(model, point):
    """Fisher-Rao metric of the classical Boltzmann distribution in ``(beta, lambda)`` coordinates.

    Uses ``F_jk = tr(s^-1 d_j s s^-1 d_k s) / 2`` with the classical
    covariance ``s = G^-1 / beta``.
    """
    point = np.asarray(point, dtype=float)
    beta, lam = point[0], point[1:]
    G = model.G(lam)
    sigma = np.linalg.inv(G) / beta
    eig = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    if eig[0] <= 0:
        from .errors import PositivityError

        raise PositivityError("classical covariance is singular")
    derivs = [-sigma / beta]
    for j in range(1, model.n_params + 1):
        derivs.append(-beta * sigma @ model.derivative(lam, j) @ sigma)
    inv = np.linalg.inv(sigma)
    k = len(derivs)
    F = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            F[a, b] = F[b, a] = 0.5 * np.trace(inv @ derivs[b] @ inv @ derivs[a])
    return F


def to_temperature_coordinates(M, beta):
    """Re-express a tensor from ``(beta, lambda)`` to ``(T, lambda)`` coordinates."""
    J = np.eye(M.shape[0])
    J[0, 0] = -beta**2  # d beta / d T
    return J.T @ M @ J


def combined_metric(model, point, eps, beta_c, work, method="modal"):
    """Scalarised metric ``eps beta_c^2 m + (1 - eps) g / (2 beta_c |W|)``.

    For classical models the Fisher-Rao form is used, with the mechanical
    block weighted by ``eps (T / T_c)^2`` and the whole tensor by the
    efficiency weight.
    """
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"eps must lie in [0, 1], got {eps!r}")
    if not work < 0:
        raise CycleDirectionError(
            f"adiabatic work {work!r} is not negative: not a work-extracting cycle"
        )
    eff = (1.0 - eps) / (2.0 * beta_c * abs(work))
    if model.classical:
        point = np.asarray(point, dtype=float)
        F = metric_classical_fisher(model, point)
        mask = np.ones_like(F)
        mask[0, :] = mask[:, 0] = 0.0
        ratio = beta_c / point[0]  # T / T_c
        return (eps * ratio**2 * mask + eff) * F
    m, g = metric_pair(model, point, method)
    return eps * beta_c**2 * m + eff * g


def min_eigenvalue_ratio(M):
    """Smallest eigenvalue relative to the spectral norm (``>= -1e-9`` for a metric)."""
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    return float(w[0] / scale)


def adiabatic_work(model, curve, panels=128, rtol=1e-12, max_panels=4096):
    """Quasi-static work ``1/2 oint tr(X_j sigma) dlambda^j`` around a closed curve.

    Composite Gauss-Legendre in t with panel doubling until the relative
    change is below ``rtol``.
    """
    curve.check_closed()
    rule = gauss_legendre(5)

    def estimate(n):
        t, w = rule.composite(0.0, 1.0, n)
        pts = curve.point(t)
        vel = curve.velocity(t)
        total = 0.0
        for wi, p, v in zip(w, pts, vel):
            state = thermal_covariance(model, p)
            lam = p[1:]
            rate = sum(
                0.5 * np.sum(model.derivative(lam, j) * state.sigma) * v[j]
                for j in range(1, model.n_params + 1)
                if v[j] != 0.0
            )
            total += wi * rate
        return total

    prev = estimate(panels)
    n = panels
    while n < max_panels:
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return float(cur)
        prev = cur
    return float(prev)
