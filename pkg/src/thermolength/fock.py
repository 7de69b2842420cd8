"""Brute-force evaluation in a truncated Fock basis.

Deliberately simple: build ``x`` and ``p`` from ladder operators, assemble
``H = R^T G R / 2`` as a dense matrix, diagonalise and sum.  Used only to
validate the Gaussian closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, TruncationError

TAIL_TOL = 1e-10


def _ladder(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1)


@dataclass(frozen=True)
class FockModel:
    """A one- or two-mode quadratic model in a truncated Fock basis.

    Products ``R_a R_b`` are formed with two extra levels per mode and then
    truncated, so quadratic operators are exact on the kept block.  Each
    mode uses a reference frequency (``scales``) for its ladder operators;
    choosing it near the physical frequency keeps the thermal weight in
    low levels.
    """

    model: object
    n_max: int
    scales: tuple = ()

    # n_max is the highest occupation number kept per mode (n_max + 1 levels)

    def __post_init__(self):
        if self.model.modes not in (1, 2):
            raise ArgumentError("Fock oracle supports one or two modes")
        if self.n_max < 2:
            raise ArgumentError("n_max must be at least 2")
        if not self.scales:
            object.__setattr__(self, "scales", (1.0,) * self.model.modes)

    @property
    def levels(self):
        return self.n_max + 1

    @property
    def dim(self):
        return self.levels**self.model.modes

    def quadratures(self, extra=2):
        """``[x_1, p_1, ...]`` on the enlarged basis of ``n_max + 1 + extra`` levels per mode."""
        n = self.levels + extra
        a = _ladder(n)
        ops = []
        eye = np.eye(n)
        for k, s in enumerate(self.scales):
            x = (a + a.T) / np.sqrt(2 * s)
            p = 1j * np.sqrt(s / 2) * (a.T - a)
            for op in (x, p):
                if self.model.modes == 1:
                    ops.append(op)
                elif k == 0:
                    ops.append(np.kron(op, eye))
                else:
                    ops.append(np.kron(eye, op))
        return ops, n

    def _keep(self, n):
        idx = np.arange(n)
        if self.model.modes == 1:
            return idx < self.levels
        i, j = np.meshgrid(idx, idx, indexing="ij")
        return ((i < self.levels) & (j < self.levels)).ravel()

    def quadratic(self, M):
        """Truncated matrix of ``R^T M R / 2``."""
        ops, n = self.quadratures()
        keep = self._keep(n)
        out = 0
        for a in range(len(ops)):
            for b in range(len(ops)):
                if M[a, b] != 0:
                    out = out + M[a, b] * (ops[a] @ ops[b])
        out = 0.5 * np.asarray(out, dtype=complex)[np.ix_(keep, keep)]
        return 0.5 * (out + out.conj().T)

    def hamiltonian(self, lam):
        return self.quadratic(self.model.G(np.asarray(lam, dtype=float)))

    def force(self, point, j):
        point = np.asarray(point, dtype=float)
        if j == 0:
            return self.hamiltonian(point[1:]) / point[0]
        return self.quadratic(self.model.derivative(point[1:], j))

    def boundary_mask(self):
        """Basis states with at least one mode among the top two levels."""
        n = self.levels
        top = np.arange(n) >= n - 2
        if self.model.modes == 1:
            return top
        i, j = np.meshgrid(top, top, indexing="ij")
        return (i | j).ravel()


def adapted(model, point, n_max):
    """Fock model whose ladder scales follow the diagonal of ``G`` at ``point``."""
    G = model.G(np.asarray(point, dtype=float)[1:])
    scales = tuple(float(np.sqrt(G[2 * k, 2 * k] / G[2 * k + 1, 2 * k + 1])) for k in range(model.modes))
    return FockModel(model, n_max, scales)


@dataclass
class ThermalFock:
    rho: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    probs: np.ndarray
    tail_mass: float


def thermal_density(fock, point, check=True):
    """Gibbs state ``exp(-beta H) / Z`` in the truncated basis."""
    point = np.asarray(point, dtype=float)
    beta = point[0]
    H = fock.hamiltonian(point[1:])
    E, V = np.linalg.eigh(H)
    logw = -beta * (E - E[0])
    p = np.exp(logw)
    p /= p.sum()
    rho = (V * p) @ V.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    tail = float(np.real(np.sum(np.diag(rho)[fock.boundary_mask()])))
    if check and tail >= TAIL_TOL:
        # occupations fall off roughly like exp(-beta gap) per level
        gap = E[1] - E[0] if len(E) > 1 else 0.0
        r = min(max(np.exp(-beta * gap), 1e-3), 0.9999)
        need = int(np.ceil(1.1 * np.log(TAIL_TOL) / np.log(r))) + 4
        raise TruncationError(
            f"thermal weight {tail:.3e} in the top Fock levels (n_max={fock.n_max})",
            tail_mass=tail,
            suggested_n_max=max(need, 2 * fock.n_max),
        )
    return ThermalFock(rho, E, V, p, tail)


def _forces_eigen(fock, point, th, indices):
    out = []
    for j in indices:
        X = fock.force(point, j)
        Xe = th.vectors.conj().T @ X @ th.vectors
        mean = np.sum(th.probs * np.real(np.diag(Xe)))
        out.append(Xe - mean * np.eye(len(Xe)))
    return out


def metric_m_fock(fock, point, check=True):
    """Symmetrised force covariance ``Tr(pi {dX_j, dX_k}) / 2`` (mechanical block, row 0 zero)."""
    point = np.asarray(point, dtype=float)
    th = thermal_density(fock, point, check)
    d = fock.model.n_params
    dX = _forces_eigen(fock, point, th, range(1, d + 1))
    m = np.zeros((d + 1, d + 1))
    for a in range(d):
        for b in range(d):
            # Tr(pi A B) = sum_mn p_m A_mn B_nm
            m[a + 1, b + 1] = np.real(np.sum(th.probs[:, None] * dX[a] * dX[b].T))
    return 0.5 * (m + m.T)


def metric_g_fock(fock, point, check=True):
    """Kubo-Mori metric ``beta sum_mn p_m (dX_j)_mn (dX_k)_nm w(E_m - E_n)``."""
    point = np.asarray(point, dtype=float)
    beta = point[0]
    th = thermal_density(fock, point, check)
    d = fock.model.n_params
    dX = _forces_eigen(fock, point, th, range(0, d + 1))
    E = th.energies - th.energies[0]
    p = th.probs
    D = E[:, None] - E[None, :]  # E_m - E_n
    small = np.abs(beta * D) < 1e-4
    safe = np.where(small, 1.0, D)
    # p_m (e^{beta D} - 1) / D = (p_n - p_m) / D
    K = np.where(small, 0.0, (p[None, :] - p[:, None]) / safe)
    # series: p_m (beta + beta^2 D / 2 + beta^3 D^2 / 6)
    series = p[:, None] * (beta + 0.5 * beta**2 * D + beta**3 * D**2 / 6.0)
    K = np.where(small, series, K)
    g = np.zeros((d + 1, d + 1))
    for a in range(d + 1):
        for b in range(d + 1):
            g[a, b] = beta * np.real(np.sum(K * dX[a] * dX[b].T))
    return 0.5 * (g + g.T)


def metric_g_fock_quadrature(fock, point, nodes=64, check=True):
    """Same metric by explicit Gauss-Legendre quadrature over imaginary time.

    ``g_jk = beta int_0^beta Tr(pi e^{xH} dX_j e^{-xH} dX_k) dx``.
    """
    point = np.asarray(point, dtype=float)
    beta = point[0]
    th = thermal_density(fock, point, check)
    d = fock.model.n_params
    dX = _forces_eigen(fock, point, th, range(0, d + 1))
    E = th.energies - th.energies[0]
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * beta * (x + 1)
    w = 0.5 * beta * w
    D = E[:, None] - E[None, :]
    K = np.zeros_like(D)
    for xi, wi in zip(x, w):
        K += wi * np.exp(xi * D - beta * E[:, None] + np.log(1.0 / np.sum(np.exp(-beta * E))))
    g = np.zeros((d + 1, d + 1))
    for a in range(d + 1):
        for b in range(d + 1):
            g[a, b] = beta * np.real(np.sum(K * dX[a] * dX[b].T))
    return 0.5 * (g + g.T)


def covariance_fock(fock, point, check=True):
    """``sigma_ab = Re Tr(pi R_a R_b)`` from the truncated state."""
    th = thermal_density(fock, point, check)
    ops, n = fock.quadratures()
    keep = fock._keep(n)
    k = len(ops)
    s = np.empty((k, k))
    for a in range(k):
        for b in range(k):
            prod = (ops[a] @ ops[b])[np.ix_(keep, keep)]
            s[a, b] = np.real(np.trace(th.rho @ prod))
    return 0.5 * (s + s.T)


def log_partition_fock(fock, point):
    point = np.asarray(point, dtype=float)
    th = thermal_density(fock, point)
    beta = point[0]
    return float(-beta * th.energies[0] + np.log(np.sum(np.exp(-beta * (th.energies - th.energies[0])))))


def relative_entropy_fock(fock, point1, point2):
    """``Tr pi_1 (ln pi_1 - ln pi_2)`` from the two spectral decompositions."""
    t1 = thermal_density(fock, point1)
    t2 = thermal_density(fock, point2)
    lnZ1 = log_partition_fock(fock, point1)
    lnZ2 = log_partition_fock(fock, point2)
    b1, b2 = float(point1[0]), float(point2[0])
    E1 = np.sum(t1.probs * t1.energies)
    H2 = t2.vectors @ np.diag(t2.energies) @ t2.vectors.conj().T
    E12 = np.real(np.trace(t1.rho @ H2))
    return float(-b1 * E1 - lnZ1 + b2 * E12 + lnZ2)


def var_work_step(fock, point_n, point_next, check=True):
    """Energy-change variance ``Tr(dH^2 pi) - Tr(dH pi)^2`` of one quench."""
    point_n = np.asarray(point_n, dtype=float)
    point_next = np.asarray(point_next, dtype=float)
    th = thermal_density(fock, point_n, check)
    dH = fock.hamiltonian(point_next[1:]) - fock.hamiltonian(point_n[1:])
    mean = np.real(np.trace(th.rho @ dH))
    second = np.real(np.trace(th.rho @ dH @ dH))
    return float(second - mean * mean)


@dataclass
class TruncationReport:
    n_max: int
    drift: float
    passed: bool
    tail_mass: float


def truncation_check(fock, point, tol=1e-8):
    """Compare ``m``, ``g`` and ``<H>`` at ``n_max`` and ``2 n_max``."""
    point = np.asarray(point, dtype=float)

    def scalars(f):
        m = metric_m_fock(f, point, check=False)
        g = metric_g_fock(f, point, check=False)
        th = thermal_density(f, point, check=False)
        return np.concatenate([m.ravel(), g.ravel(), [np.sum(th.probs * th.energies)]]), th.tail_mass

    a, tail = scalars(fock)
    b, _ = scalars(FockModel(fock.model, 2 * fock.n_max, fock.scales))
    scale = np.maximum(np.abs(b), 1e-300)
    rel = np.where(np.abs(b) > 1e-12 * np.max(np.abs(b)), np.abs(a - b) / scale, 0.0)
    drift = float(np.max(rel))
    return TruncationReport(fock.n_max, drift, drift < tol, tail)
