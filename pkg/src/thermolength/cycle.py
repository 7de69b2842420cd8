"""Exact N-step quench / equilibrate cycles of Gaussian models.

Along the sample points ``t_n = (n - 1) / (N - 1)`` of a closed curve the
system is quenched from ``lambda_n`` to ``lambda_{n+1}`` in the state
``pi(Lambda_n)`` and then relaxes fully to ``pi(Lambda_{n+1})``.  Every
moment is exact (Gaussian identities), so these totals are the reference
for the slow-driving approximations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .gaussian import relative_entropy, thermal_covariance


@dataclass
class CycleLedger:
    N: int
    work_steps: np.ndarray
    heat_steps: np.ndarray
    var_steps: np.ndarray
    entropy_steps: np.ndarray
    beta_c: float
    beta_h: float
    W: float
    Q_in: float
    var_W: float
    S_irr: float
    engine: bool
    eta: float | None = None
    delta_eta: float | None = None
    notes: list = field(default_factory=list)

    @property
    def carnot(self):
        return 1.0 - self.beta_h / self.beta_c

    def identity_gap(self):
        """``|S_irr - beta_c W - (beta_c - beta_h) Q_in|`` and its tolerance scale."""
        rhs = self.beta_c * self.W + (self.beta_c - self.beta_h) * self.Q_in
        return abs(self.S_irr - rhs), max(1.0, abs(self.beta_c * self.W))

    def summary(self):
        gap, scale = self.identity_gap()
        return {
            "N": self.N,
            "W": self.W,
            "Q_in": self.Q_in,
            "var_W": self.var_W,
            "S_irr": self.S_irr,
            "eta": self.eta,
            "delta_eta": self.delta_eta,
            "engine": self.engine,
            "identity_gap": gap / scale,
            "notes": list(self.notes),
        }

    def to_json(self, steps=False):
        """JSON lines: one summary record, optionally one record per step."""
        lines = [json.dumps({"record": "cycle", **self.summary()}, sort_keys=True)]
        if steps:
            for n in range(len(self.work_steps)):
                rec = {
                    "record": "step",
                    "n": n + 1,
                    "work": float(self.work_steps[n]),
                    "heat": float(self.heat_steps[n]),
                    "var": float(self.var_steps[n]),
                    "entropy": float(self.entropy_steps[n]),
                }
                lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"


def _step_variance(dG, state):
    """``Var(R^T dG R / 2)`` in a Gaussian state."""
    C = state.correlation()
    if state.classical:
        return 0.5 * float(np.trace(dG @ state.sigma @ dG @ state.sigma))
    return 0.5 * float(np.real(np.trace(dG @ C.T @ dG @ C)))


def run_cycle(model, curve, N):
    """Run the N-point quench/equilibrate cycle of ``model`` along ``curve``.

    Heat taken in is weighted by ``delta_beta(t_{n+1})``, with the
    relaxation heat measured by the post-quench Hamiltonian ``H(lambda_{n+1})``:
    ``Q_in = sum_n delta_beta(t_{n+1}) tr(G_{n+1} (sigma_{n+1} - sigma_n)) / 2``.
    A cycle with ``W > 0`` or ``Q_in <= 0`` is flagged as not an engine and
    its efficiency is left undefined.
    """
    if int(N) != N or N < 2:
        raise ArgumentError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    curve.check_closed()
    t = np.linspace(0.0, 1.0, N)
    pts = curve.point(t)
    pts[-1] = pts[0]
    dbeta = curve.delta_beta(t)
    states = [thermal_covariance(model, p) for p in pts]
    Gs = [s.G for s in states]
    n_steps = N - 1
    work = np.empty(n_steps)
    heat = np.empty(n_steps)
    var = np.empty(n_steps)
    ent = np.empty(n_steps)
    for n in range(n_steps):
        a, b = states[n], states[n + 1]
        dG = Gs[n + 1] - Gs[n]
        work[n] = 0.5 * float(np.sum(dG * a.sigma))
        heat[n] = 0.5 * float(np.sum(Gs[n + 1] * (b.sigma - a.sigma)))
        var[n] = _step_variance(dG, a)
        ent[n] = relative_entropy(a, b)
    W = float(math.fsum(work))
    Q_in = float(math.fsum(dbeta[1:] * heat))
    ledger = CycleLedger(
        N, work, heat, var, ent, curve.beta_c, curve.beta_h,
        W, Q_in, float(math.fsum(var)), float(math.fsum(ent)), engine=False,
    )
    if np.min(ent) < -1e-12:
        ledger.notes.append(f"negative step entropy {np.min(ent):.3e}")
    if W <= 0 and Q_in > 0:
        ledger.engine = True
        ledger.eta = -W / Q_in
        eta_c = ledger.carnot
        ledger.delta_eta = 1.0 - ledger.eta / eta_c if eta_c > 0 else None
    else:
        ledger.notes.append("not a work-extracting engine; efficiency undefined")
    return ledger


@dataclass
class ConvergenceRow:
    N: int
    scaled_var: float
    var_limit: float
    scaled_deta: float | None
    deta_limit: float

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class ConvergenceTable:
    rows: list
    var_exponent: float
    deta_exponent: float

    def as_dict(self):
        return {
            "rows": [r.as_dict() for r in self.rows],
            "var_exponent": self.var_exponent,
            "deta_exponent": self.deta_exponent,
        }


def fit_exponent(N, values, limit):
    """Slope ``p`` of ``log |values - limit|`` against ``log N`` (remainder ~ N^-p)."""
    N = np.asarray(N, dtype=float)
    r = np.abs(np.asarray(values, dtype=float) - limit)
    if len(N) < 2 or np.any(r <= 0):
        return float("nan")
    slope = np.polyfit(np.log(N), np.log(r), 1)[0]
    return float(-slope)


def convergence_study(model, geometry, schedule, N_list):
    """Compare discrete-cycle totals with their geometric limits.

    For each ``N`` reports ``N beta_c^2 Var(W)`` and ``2 N beta_c |W| delta_eta``
    next to ``int beta_c^2 m`` and ``int g`` along ``curve o schedule``.
    """
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ArgumentError("N list must be increasing")
    r = schedule.rate(geometry.nodes)
    with np.errstate(divide="ignore", invalid="ignore"):
        var_lim = geometry.curve.beta_c**2 * float(np.dot(geometry.weights, np.where(geometry.qm == 0, 0, geometry.qm / r)))
        g_lim = float(np.dot(geometry.weights, np.where(geometry.qg == 0, 0, geometry.qg / r)))
    curve = geometry.curve.reparameterized(schedule)
    bc = geometry.curve.beta_c
    rows = []
    for N in N_list:
        led = run_cycle(model, curve, N)
        sv = N * bc**2 * led.var_W
        sd = 2 * N * bc * abs(geometry.work) * led.delta_eta if led.delta_eta is not None else None
        rows.append(ConvergenceRow(N, sv, var_lim, sd, g_lim))
    var_p = fit_exponent(N_list, [r.scaled_var for r in rows], var_lim)
    deta_vals = [r.scaled_deta for r in rows]
    deta_p = fit_exponent(N_list, deta_vals, g_lim) if None not in deta_vals else float("nan")
    return ConvergenceTable(rows, var_p, deta_p)
