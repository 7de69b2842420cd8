"""Thermodynamic length, optimal driving speed and Pareto sweeps.

The cycle geometry is tabulated once per curve: the quadratic forms

    q_m(u) = m_jk(Lambda(u)) dLambda^j/du dLambda^k/du
    q_g(u) = g_jk(Lambda(u)) dLambda^j/du dLambda^k/du

at composite Gauss-Legendre nodes in the curve parameter ``u``.  The
combined form is ``q_eps = eps w_var q_m + (1 - eps) w_eff q_g`` and the
length is the integral of its square root.

A schedule ``psi`` maps time ``t`` to curve parameter ``u``.  Objectives of
any schedule are computed in the ``u`` domain on the fixed nodes,

    int_0^1 q(psi(t)) psi'(t)^2 dt = int_0^1 q(u) / r(u) du,

with ``r = d psi^{-1} / du``; all schedules are then compared with the same
quadrature.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ArgumentError,
    ConsistencyError,
    CycleDirectionError,
    DegenerateCycleError,
    MonotonicityError,
)
from .metrics import adiabatic_work, metric_pair
from .numerics import gauss_legendre, monotone_inverse

GRID = 1001
SLOW_DRIVING_LIMIT = 0.01


def _is_open(model):
    return hasattr(model, "jumps")


def metric_function(model, method="modal"):
    """``point -> (m, g)`` for a closed, classical or Lindblad model."""
    if _is_open(model):
        from .lindblad import open_metrics

        return lambda p: open_metrics(model, p, method)
    return lambda p: metric_pair(model, p, method)


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def quadratic_forms(metric_fn, curve, u, threads=None):
    """``(q_m, q_g)`` at the curve parameters ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    pts = curve.point(u)
    vel = curve.velocity(u)

    def one(k):
        m, g = metric_fn(pts[k])
        v = vel[k]
        return v @ m @ v, v @ g @ v

    out = np.array(_map(one, range(len(u)), threads), dtype=float).reshape(len(u), 2)
    return out[:, 0], out[:, 1]


@dataclass
class CycleGeometry:
    """Tabulated metric data of one closed curve.

    ``var_weight`` and ``eff_weight`` turn the line integrals into the
    dimensionless objectives per unit of ``1 / N``:
    ``Var(W~) = var_weight / N int q_m`` and
    ``delta_eta = eff_weight / N int q_g``.
    """

    model: object
    curve: object
    edges: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    qm: np.ndarray
    qg: np.ndarray
    work: float
    var_weight: float
    eff_weight: float
    metric_fn: Callable = field(repr=False, default=None)
    open_system: bool = False
    threads: Optional[int] = None
    _cum: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, model, curve, intervals=GRID - 1, order=4, method="modal", threads=None):
        curve.check_closed()
        work = adiabatic_work(model.model if _is_open(model) else model, curve)
        if not work < 0:
            raise CycleDirectionError(
                f"adiabatic work {work!r} is not negative: not a work-extracting cycle"
            )
        rule = gauss_legendre(order)
        nodes, weights = rule.composite(0.0, 1.0, intervals)
        metric_fn = metric_function(model, method)
        qm, qg = quadratic_forms(metric_fn, curve, nodes, threads)
        for name, q in (("q_m", qm), ("q_g", qg)):
            if np.min(q) < -1e-10 * max(np.max(np.abs(q)), 1e-300):
                raise ConsistencyError(f"{name} is negative somewhere on the curve", measured=float(np.min(q)))
        qm = np.maximum(qm, 0.0)
        qg = np.maximum(qg, 0.0)
        bc = curve.beta_c
        if _is_open(model):
            from .lindblad import open_weights

            var_w, eff_w = open_weights(bc, curve.beta_h, work)
        else:
            var_w, eff_w = bc**2, 1.0 / (2.0 * bc * abs(work))
        return cls(model, curve, np.linspace(0.0, 1.0, intervals + 1), nodes, weights,
                   qm, qg, float(work), var_w, eff_w, metric_fn, _is_open(model), threads)

    @property
    def order(self):
        return len(self.nodes) // (len(self.edges) - 1)

    def combine(self, eps, qm, qg):
        if not 0.0 <= eps <= 1.0:
            raise ArgumentError(f"eps must lie in [0, 1], got {eps!r}")
        out = np.zeros_like(qm)
        if eps > 0:
            out = out + eps * self.var_weight * qm
        if eps < 1:
            out = out + (1.0 - eps) * self.eff_weight * qg
        return out

    def q_eps(self, eps):
        return self.combine(eps, self.qm, self.qg)

    def evaluate(self, u):
        """Fresh ``(q_m, q_g)`` at arbitrary curve parameters."""
        qm, qg = quadratic_forms(self.metric_fn, self.curve, u, self.threads)
        return np.maximum(qm, 0.0), np.maximum(qg, 0.0)

    def speed(self, eps, u):
        qm, qg = self.evaluate(u)
        return np.sqrt(self.combine(eps, qm, qg))

    def cumulative(self, eps):
        """Arc length ``s(u)`` at the interval edges.

        Panels where the speed dips towards zero (kinks of ``sqrt(q)`` at
        points where the weighted velocity vanishes) are re-integrated
        adaptively with fresh metric evaluations.
        """
        key = float(eps)
        if key in self._cum:
            return self._cum[key]
        n = len(self.edges) - 1
        speed = np.sqrt(self.q_eps(eps)).reshape(n, -1)
        per = (self.weights.reshape(n, -1) * speed).sum(axis=1)
        for k in _low_speed_panels(speed):
            per[k] = adaptive_arc(lambda u: self.speed(eps, u), self.edges[k], self.edges[k + 1])
        out = np.concatenate([[0.0], np.cumsum(per)])
        self._cum[key] = out
        return out

    def length(self, eps):
        return float(self.cumulative(eps)[-1])

    def geometric_limits(self):
        """``(int w_var q_m, int q_g)``: the N -> infinity values of
        ``N Var(W~)`` and ``2 N beta_c |W| delta_eta`` for the identity schedule."""
        return float(self.var_weight * np.dot(self.weights, self.qm)), float(np.dot(self.weights, self.qg))


def _low_speed_panels(speed, ratio=0.1):
    """Panels (rows of node speeds) whose slowest node is far below the typical speed."""
    typical = np.median(speed)
    low = np.flatnonzero(speed.min(axis=1) < ratio * typical)
    near = np.concatenate([low - 1, low, low + 1])
    return sorted(set(near[(near >= 0) & (near < len(speed))].tolist()))


def adaptive_arc(speed_fn, a, b, rtol=1e-11, depth=30):
    """Adaptive 4-node Gauss-Legendre integral of a speed on ``[a, b]``."""
    rule = gauss_legendre(4)

    def panel(lo, hi):
        x = lo + (hi - lo) * rule.nodes
        return (hi - lo) * float(np.dot(rule.weights, speed_fn(x)))

    whole = panel(a, b)
    scale = abs(whole)

    def rec(lo, hi, est, level):
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        if level >= depth or abs(left + right - est) <= rtol * max(scale, 1e-300):
            return left + right
        return rec(lo, mid, left, level + 1) + rec(mid, hi, right, level + 1)

    return rec(a, b, whole, 0)


def speed_integrand(geometry, eps, t):
    """``sqrt(M^eps_jk dLambda^j/dt dLambda^k/dt)`` at curve parameters ``t``."""
    qm, qg = geometry.evaluate(t)
    q = geometry.combine(eps, qm, qg)
    return np.sqrt(q) if np.ndim(t) else float(np.sqrt(q[0]))


def thermodynamic_length(geometry, eps):
    return geometry.length(eps)


class Schedule:
    """Monotone time map ``phi: [0, 1] -> [0, 1]`` with ``phi(0) = 0``, ``phi(1) = 1``.

    Stored as samples on a uniform time grid with a monotone cubic
    interpolant.  ``rate(u)`` is the derivative of the inverse map
    ``d phi^{-1} / du``; schedules built from a metric carry it in closed
    form, others get it from the interpolant.
    """

    def __init__(self, t, phi, eps=None, length=None, dphi=None, rate=None):
        t = np.asarray(t, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if t.shape != phi.shape or t.ndim != 1 or len(t) < 2:
            raise ArgumentError("schedule samples must be matching 1-D arrays")
        if np.any(np.diff(phi) < 0):
            raise MonotonicityError("schedule is not nondecreasing")
        if t[0] != 0.0 or t[-1] != 1.0 or phi[0] != 0.0 or phi[-1] != 1.0:
            raise ArgumentError("schedule must map 0 -> 0 and 1 -> 1")
        self.t = t
        self.phi = phi
        self.eps = eps
        self.length = length
        self._interp = PchipInterpolator(t, phi)
        self._deriv = self._interp.derivative()
        self._dphi = dphi
        self._rate = rate

    @property
    def dphi(self):
        """``dphi/dt`` on the time grid (``dphi`` may be given as a callable)."""
        if self._dphi is None:
            self._dphi = self._deriv(self.t)
        elif callable(self._dphi):
            self._dphi = np.asarray(self._dphi(), dtype=float)
        return self._dphi

    @classmethod
    def identity(cls, grid=GRID):
        t = np.linspace(0.0, 1.0, grid)
        return cls(t, t.copy(), dphi=np.ones(grid), rate=lambda u: np.ones_like(u))

    @classmethod
    def from_function(cls, fn, grid=GRID):
        t = np.linspace(0.0, 1.0, grid)
        phi = np.asarray(fn(t), dtype=float)
        phi[0], phi[-1] = 0.0, 1.0
        return cls(t, phi)

    def __call__(self, t):
        out = self._interp(np.clip(t, 0.0, 1.0))
        return float(out) if np.ndim(t) == 0 else out

    def derivative(self, t):
        out = self._deriv(np.clip(t, 0.0, 1.0))
        return float(out) if np.ndim(t) == 0 else out

    def inverse(self, u):
        return monotone_inverse(self.t, self.phi, u, interpolant=self._interp)

    def rate(self, u, exact=True):
        """``d phi^{-1}/du`` at curve parameters ``u``.

        ``exact=False`` differentiates the stored interpolant even when a
        closed form is available.
        """
        u = np.asarray(u, dtype=float)
        if exact and self._rate is not None:
            return self._rate(u)
        t = self.inverse(u)
        with np.errstate(divide="ignore"):
            return 1.0 / self._deriv(t)


def optimal_schedule(geometry, eps, grid=GRID):
    """Constant-speed schedule: ``t = s(phi(t)) / L`` with ``s`` the arc length.

    ``grid`` must be at least 1001.  The derivative samples follow the
    implicit equation, ``dphi/dt = L / sqrt(q_eps(phi))``.
    """
    if grid < GRID:
        raise ArgumentError(f"grid must have at least {GRID} points, got {grid}")
    s = geometry.cumulative(eps)
    L = float(s[-1])
    if not L > 0:
        raise DegenerateCycleError(f"thermodynamic length vanishes for eps={eps!r}")
    u = geometry.edges
    S = PchipInterpolator(u, s)
    t = np.linspace(0.0, 1.0, grid)
    phi = monotone_inverse(u, s, t * L, interpolant=S)
    phi[0], phi[-1] = 0.0, 1.0
    phi = np.maximum.accumulate(phi)

    def dphi():
        speed = geometry.speed(eps, phi)
        with np.errstate(divide="ignore"):
            return np.where(speed > 0, L / speed, np.inf)

    nodes = geometry.nodes
    tab = np.sqrt(geometry.q_eps(eps)) / L

    def rate(x):
        x = np.asarray(x, dtype=float)
        if x.shape == nodes.shape and np.array_equal(x, nodes):
            return tab
        return geometry.speed(eps, x) / L

    return Schedule(t, phi, eps=eps, length=L, dphi=dphi, rate=rate)


@dataclass
class ObjectiveReport:
    eps: Optional[float]
    var_w: float
    delta_eta: float
    objective: float
    N: float
    slow_ratio: float
    slow_ok: bool
    singular: bool = False

    @property
    def delta_w(self):
        return math.sqrt(self.var_w)

    def as_dict(self):
        return {
            "eps": self.eps,
            "var_w": self.var_w,
            "delta_w": self.delta_w,
            "delta_eta": self.delta_eta,
            "objective": self.objective,
            "N": self.N,
            "slow_ratio": self.slow_ratio,
            "slow_ok": self.slow_ok,
            "singular": self.singular,
        }


def _weighted_ratio(q, r):
    """``q / r`` with ``0 / 0 = 0`` (no time spent on a null arc)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(q == 0, 0.0, q / r)


def slow_driving_check(schedule, N):
    """``(passed, max (|phi'| / N)^2)`` over the schedule's time grid."""
    ratio = float(np.max((np.abs(schedule.dphi) / N) ** 2))
    return ratio < SLOW_DRIVING_LIMIT, ratio


def _stalls(geometry, eps):
    """True if the eps-weighted speed vanishes where the efficiency rate does not.

    At ``eps = 1`` a curve whose mechanical velocity vanishes at isolated
    points (while the temperature still moves) forces an infinite speed
    there; the continuum efficiency deficit then diverges logarithmically.
    """
    if eps < 1 or not np.any(geometry.qm > 0):
        return False
    rel = geometry.qm / np.max(geometry.qm)
    return bool(np.any((rel < 1e-5) & (geometry.qg > 1e-8 * np.max(geometry.qg))))


def objective_value(geometry, schedule, N, eps=None):
    """Variance and efficiency deficit of ``curve o schedule`` at ``N`` steps.

    ``eps`` defaults to the schedule's own weight; the objective is
    ``eps Var(W~) + (1 - eps) delta_eta`` with zero-weight terms omitted.

    When the schedule stalls (see ``_stalls``) the efficiency deficit is
    evaluated for the stored 1001-point interpolant rather than the exact
    implicit map, which keeps it finite but grid dependent;
    ``singular=True`` marks such reports.
    """
    if N < 2:
        raise ArgumentError(f"N must be at least 2, got {N!r}")
    eps = schedule.eps if eps is None else eps
    if eps is None:
        raise ArgumentError("eps is required for schedules without a weight")
    w = geometry.weights
    r = schedule.rate(geometry.nodes)
    var = geometry.var_weight / N * float(np.dot(w, _weighted_ratio(geometry.qm, r)))
    singular = schedule.eps == eps and _stalls(geometry, eps)
    if singular:
        r = schedule.rate(geometry.nodes, exact=False)
    deta = geometry.eff_weight / N * float(np.dot(w, _weighted_ratio(geometry.qg, r)))
    obj = 0.0
    if eps > 0:
        obj += eps * var
    if eps < 1:
        obj += (1.0 - eps) * deta
    # slow-driving ratio sampled at the quadrature nodes, where dphi/dt = 1 / r
    with np.errstate(divide="ignore"):
        ratio = float(np.max((1.0 / r / N) ** 2))
    ok = ratio < SLOW_DRIVING_LIMIT
    return ObjectiveReport(eps, var, deta, obj, N, ratio, ok, singular)


@dataclass
class ParetoPoint:
    eps: float
    delta_eta: float
    delta_w: float
    length: float
    var_w: float
    objective: float
    slow_ok: bool
    singular: bool = False

    def as_dict(self):
        return dict(self.__dict__)


def pareto_sweep(geometry, eps_grid=None, N=50, threads=None):
    """Optimal schedule and objectives for each weight in ``eps_grid`` (sorted)."""
    eps_grid = np.linspace(0.0, 1.0, 51) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if np.any(np.diff(eps_grid) < 0):
        raise ArgumentError("eps grid must be sorted")
    if np.any((eps_grid < 0) | (eps_grid > 1)):
        raise ArgumentError("eps grid must lie in [0, 1]")

    def one(eps):
        sched = optimal_schedule(geometry, float(eps))
        rep = objective_value(geometry, sched, N)
        return ParetoPoint(float(eps), rep.delta_eta, rep.delta_w, sched.length,
                           rep.var_w, rep.objective, rep.slow_ok, rep.singular)

    return _map(one, list(eps_grid), threads)


def speed_profile(geometry, schedule, check_points=None):
    """Mean metric speed of ``curve o schedule`` on each grid interval.

    The arc length between consecutive samples is integrated afresh
    (4-node Gauss-Legendre on ``[phi_i, phi_{i+1}]``) and divided by the
    time step; for the optimal schedule every entry equals ``L_eps``.
    """
    eps = schedule.eps
    rule = gauss_legendre(4)
    a, b = schedule.phi[:-1], schedule.phi[1:]
    h = b - a
    u = (a[:, None] + h[:, None] * rule.nodes[None, :]).ravel()
    sp = geometry.speed(eps, u).reshape(len(a), -1)
    arc = h * (sp @ rule.weights)
    for k in _low_speed_panels(sp):
        arc[k] = adaptive_arc(lambda x: geometry.speed(eps, x), a[k], b[k])
    return arc / np.diff(schedule.t)


def coefficient_of_variation(x):
    x = np.asarray(x, dtype=float)
    return float(np.std(x) / np.mean(x))
