"""Built-in quadratic systems and cyclic protocols."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ControlCurve
from .errors import ArgumentError, PositivityError
from .gaussian import QuadraticModel


def single_oscillator(classical=False):
    """One mode, ``H = (omega^2 x^2 + p^2) / 2``, controlled by ``omega``."""

    def G(lam):
        w = lam[0]
        return np.diag([w * w, 1.0])

    def dG(lam, j):
        return np.diag([2.0 * lam[0], 0.0])

    return QuadraticModel(1, G, ("omega",), dG, classical=classical,
                          label="classical-ho" if classical else "single-ho")


def classical_ho():
    """Classical unit-mass oscillator with frequency control."""
    return single_oscillator(classical=True)


def scaling_oscillator(omega0=1.0, classical=False):
    """``H = c H_0`` with ``H_0`` an oscillator of frequency ``omega0``; ``c`` is the control."""
    if not omega0 > 0:
        raise ArgumentError(f"omega0 must be positive, got {omega0!r}")
    G0 = np.diag([omega0 * omega0, 1.0])

    def G(lam):
        return lam[0] * G0

    def dG(lam, j):
        return G0.copy()

    return QuadraticModel(1, G, ("c",), dG, classical=classical, label="scaling-ho")


def coupled_oscillators(omega0=1.0, kappa0=0.4):
    """Two equal oscillators with a position-position spring, controls ``(omega, kappa)``.

    ``H = sum_i (p_i^2 + omega^2 x_i^2) / 2 + kappa (x_1 - x_2)^2 / 2``.
    Normal-mode frequencies are ``omega`` and ``sqrt(omega^2 + 2 kappa)``.
    ``omega0`` and ``kappa0`` only record the base values of a protocol.
    """
    if not omega0 > 0:
        raise ArgumentError(f"omega0 must be positive, got {omega0!r}")

    def G(lam):
        w, k = lam
        if not (w * w > 0 and w * w + 2 * k > 0):
            raise PositivityError(f"coupled oscillators unstable at omega={w!r}, kappa={k!r}")
        return np.array(
            [
                [w * w + k, 0.0, -k, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [-k, 0.0, w * w + k, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )

    def dG(lam, j):
        if j == 1:
            return np.diag([2.0 * lam[0], 0.0, 2.0 * lam[0], 0.0])
        out = np.zeros((4, 4))
        out[0, 0] = out[2, 2] = 1.0
        out[0, 2] = out[2, 0] = -1.0
        return out

    return QuadraticModel(2, G, ("omega", "kappa"), dG, label="coupled-ho")


def _check_betas(beta_c, beta_h):
    if not 0 < beta_h < beta_c:
        raise ArgumentError(f"need 0 < beta_h < beta_c, got beta_h={beta_h!r}, beta_c={beta_c!r}")


def harmonic_protocol(beta_c, beta_h, omega0=1.0, kappa0=None):
    """``beta = beta_c + (beta_h - beta_c) sin^2(pi t)`` with the mechanical
    parameters modulated as ``x0 (1 + sin^2(pi t + pi/4))``.

    With ``kappa0=None`` the curve lives in ``(beta, omega)``; otherwise in
    ``(beta, omega, kappa)``.
    """
    _check_betas(beta_c, beta_h)
    base = [omega0] if kappa0 is None else [omega0, kappa0]
    base = np.array(base, dtype=float)
    db = beta_h - beta_c

    def path(t):
        t = np.asarray(t, dtype=float)
        beta = beta_c + db * np.sin(np.pi * t) ** 2
        shape = 1.0 + np.sin(np.pi * t + np.pi / 4) ** 2
        return np.column_stack([beta] + [b * shape for b in base])

    def velocity(t):
        t = np.asarray(t, dtype=float)
        dbeta = db * np.pi * np.sin(2 * np.pi * t)
        dshape = np.pi * np.sin(2 * np.pi * t + np.pi / 2)
        return np.column_stack([dbeta] + [b * dshape for b in base])

    names = ("beta", "omega") if kappa0 is None else ("beta", "omega", "kappa")
    return ControlCurve(path, float(beta_c), float(beta_h), velocity, names)


def classical_protocol(T_c, T_h, omega0=1.0):
    """Classical oscillator cycle ``1/T = beta_c + (beta_h - beta_c) sin^2(pi t)``,
    ``omega = omega0 (1 + sin^2(pi t + pi/4))``."""
    if not 0 < T_c < T_h:
        raise ArgumentError(f"need 0 < T_c < T_h, got T_c={T_c!r}, T_h={T_h!r}")
    return harmonic_protocol(1.0 / T_c, 1.0 / T_h, omega0)


def damped_ho_lindblad(omega0=1.0, gamma=0.1):
    """Single oscillator under thermal amplitude damping at rate ``gamma``."""
    from .lindblad import thermal_damping

    return thermal_damping(single_oscillator(), gamma)


@dataclass(frozen=True)
class Preset:
    """Named parameter set of a built-in experiment."""

    name: str
    omega0: float
    kappa0: float | None
    T_c: tuple
    delta_T: float
    N: int
    classical: bool = False
    sweep: str = "T_c"
    omega0_values: tuple = ()
    kappa0_values: tuple = ()

    def model(self, omega0=None, kappa0=None):
        if self.classical:
            return classical_ho()
        return coupled_oscillators(omega0 or self.omega0, self.kappa0 if kappa0 is None else kappa0)

    def curve(self, T_c, omega0=None, kappa0=None):
        w0 = omega0 or self.omega0
        T_h = T_c + (self.delta_T if self.delta_T else w0)
        if self.classical:
            return classical_protocol(T_c, T_h, w0)
        k0 = (self.kappa0 if kappa0 is None else kappa0)
        return harmonic_protocol(1.0 / T_c, 1.0 / T_h, w0, k0)

    def cells(self):
        """``(label, model, curve)`` for every sweep cell of the preset."""
        out = []
        if self.sweep == "omega0":
            for w0 in self.omega0_values:
                out.append((f"omega0={w0!r}", self.model(w0), self.curve(self.T_c[0], w0)))
        elif self.sweep == "kappa0":
            for k0 in self.kappa0_values:
                out.append((f"kappa0={k0!r}", self.model(kappa0=k0), self.curve(self.T_c[0], kappa0=k0)))
        else:
            for T_c in self.T_c:
                out.append((f"T_c={T_c!r}", self.model(), self.curve(T_c)))
        return out


PRESETS = {
    "fig1": Preset("fig1", 1.0, 0.4, (0.25,), 1.0, 50),
    "fig1-right": Preset("fig1-right", 1.0, 0.1, (0.25,), 1.0, 50, sweep="omega0",
                         omega0_values=(0.5, 1.0, 1.5, 2.0)),
    "fig2-left": Preset("fig2-left", 2.0, 0.8, (0.5, 1.0, 2.0), 2.0, 50),
    "fig2-right": Preset("fig2-right", 1.0, 0.4, (0.25,), 1.0, 50, sweep="kappa0",
                         kappa0_values=(0.1, 0.2, 0.4, 0.8)),
    "classical-ho": Preset("classical-ho", 1.0, None, (0.25, 0.5, 1.0), 1.0, 50, classical=True),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ArgumentError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
