"""Closed control curves ``t -> (beta(t), lambda(t))`` on t in [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ArgumentError, TopologyError


@dataclass(frozen=True)
class ControlCurve:
    """A closed curve in control space.

    ``path`` maps an array of times of shape ``(n,)`` to points of shape
    ``(n, d + 1)``; column 0 is the inverse temperature.  ``velocity_fn``
    has the same signature and returns ``dLambda/dt``; when omitted,
    central differences with step ``fd_step`` are used (times are wrapped
    modulo 1, which is exact for a closed periodic curve).
    """

    path: Callable[[np.ndarray], np.ndarray]
    beta_c: float
    beta_h: float
    velocity_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    names: Sequence[str] = ()
    fd_step: float = 1e-6

    def __post_init__(self):
        if not 0 < self.beta_h <= self.beta_c:
            raise ArgumentError(
                f"need 0 < beta_h <= beta_c, got beta_h={self.beta_h!r}, beta_c={self.beta_c!r}"
            )

    def point(self, t):
        scalar = np.ndim(t) == 0
        out = np.asarray(self.path(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float)
        return out[0] if scalar else out

    def velocity(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.velocity_fn is not None:
            out = np.asarray(self.velocity_fn(t), dtype=float)
        else:
            h = self.fd_step
            out = (self.path(np.mod(t + h, 1.0)) - self.path(np.mod(t - h, 1.0))) / (2 * h)
        return out[0] if scalar else out

    @property
    def dim(self):
        return self.point(0.0).shape[0]

    @property
    def carnot(self):
        return 1.0 - self.beta_h / self.beta_c

    def delta_beta(self, t):
        """Normalised temperature profile, 0 at beta_c and 1 at beta_h."""
        beta = self.point(t)[..., 0]
        if self.beta_h == self.beta_c:
            return np.zeros_like(beta)
        return (beta - self.beta_c) / (self.beta_h - self.beta_c)

    def check_closed(self, tol=1e-12):
        a, b = self.point(0.0), self.point(1.0)
        gap = float(np.max(np.abs(a - b)))
        if gap > tol * max(1.0, float(np.max(np.abs(a)))):
            raise TopologyError(f"curve is not closed: |Lambda(1) - Lambda(0)| = {gap:.3e}")
        return gap

    def check_range(self, samples=10_001, tol=1e-12):
        """Verify beta_h <= beta(t) <= beta_c on a dense grid."""
        beta = self.point(np.linspace(0.0, 1.0, samples))[:, 0]
        lo, hi = beta.min(), beta.max()
        if lo < self.beta_h * (1 - tol) or hi > self.beta_c * (1 + tol):
            raise ArgumentError(
                f"beta(t) leaves [beta_h, beta_c]: range [{lo:.6g}, {hi:.6g}]"
            )
        return lo, hi

    def reparameterized(self, schedule):
        """The curve traversed as ``t -> Lambda(phi(t))``."""
        base = self

        def path(t):
            return base.path(schedule(t))

        def velocity(t):
            return base.velocity(schedule(t)) * schedule.derivative(t)[:, None]

        return ControlCurve(path, self.beta_c, self.beta_h, velocity, self.names)

    def shifted(self, offset):
        """Same closed curve with its start point moved to ``t = offset``."""
        base = self

        def path(t):
            return base.path(np.mod(t + offset, 1.0))

        def velocity(t):
            return base.velocity(np.mod(t + offset, 1.0))

        return ControlCurve(path, self.beta_c, self.beta_h, velocity, self.names)


def constant_curve(point, beta_c=None, beta_h=None):
    """A curve that sits at a single control point."""
    point = np.asarray(point, dtype=float)
    beta = point[0]

    def path(t):
        return np.tile(point, (len(t), 1))

    def velocity(t):
        return np.zeros((len(t), len(point)))

    return ControlCurve(path, beta_c or beta, beta_h or beta, velocity)
