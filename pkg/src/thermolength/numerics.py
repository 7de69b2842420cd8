"""Small dense matrix kernels and one-dimensional quadrature.

Everything here works on matrices of dimension at most ~16, so the
routines favour robustness and explicit residual checks over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.interpolate import PchipInterpolator

from .errors import (
    ConvergenceError,
    DimensionError,
    MonotonicityError,
    NumericError,
    RangeError,
    StabilityError,
)


def _square(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericError(f"{name} has non-finite entries")
    return A


def max_norm(A):
    return float(np.max(np.abs(A))) if np.size(A) else 0.0


def is_symmetric(A, tol=1e-12):
    A = np.asarray(A)
    return max_norm(A - A.T) <= tol * max(1.0, max_norm(A))


def matrix_exp(A):
    """Matrix exponential (Pade scaling and squaring)."""
    A = _square(A)
    return scipy.linalg.expm(A)


def eig_general(A, rtol=1e-9):
    """Eigenvalues and right eigenvectors of a general square matrix.

    The decomposition is checked against ``A V = V diag(w)``; a residual
    above ``rtol * max|A|`` raises :class:`ConvergenceError`.
    """
    A = _square(A)
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    residual = max_norm(A @ V - V * w)
    if residual > rtol * max(max_norm(A), 1e-300):
        raise ConvergenceError(
            f"eigen-decomposition residual {residual:.3e} too large", residual=residual
        )
    return w, V


def hurwitz_margin(A):
    """Largest real part among the eigenvalues of ``A`` and the eigenvalue itself."""
    w = np.linalg.eigvals(np.asarray(A))
    k = int(np.argmax(w.real))
    return float(w[k].real), complex(w[k])


def solve_lyapunov(A, X, rtol=1e-10):
    """Solve ``A^T Y + Y A = -X`` for Hurwitz ``A``.

    ``Y`` equals the integral of ``exp(v A^T) X exp(v A)`` over v in [0, inf).
    """
    A = _square(A, "A")
    X = _square(X, "X")
    if A.shape != X.shape:
        raise DimensionError(f"A {A.shape} and X {X.shape} differ in shape")
    scale = max(max_norm(A), 1.0)
    real_max, worst = hurwitz_margin(A)
    if real_max >= -1e-12 * scale:
        raise StabilityError(
            f"A is not Hurwitz: eigenvalue {worst:.6g} has real part >= 0",
            eigenvalue=worst,
        )
    Y = scipy.linalg.solve_continuous_lyapunov(A.T, -X)
    if np.isrealobj(A) and np.isrealobj(X):
        Y = Y.real
    if is_symmetric(X, 1e-14):
        Y = 0.5 * (Y + Y.T)
    residual = max_norm(A.T @ Y + Y @ A + X)
    # rounding floor of any backward-stable solver is ~eps*|A|*|Y|
    if residual > rtol * max(1.0, max_norm(X), scale * max_norm(Y)):
        raise ConvergenceError(f"Lyapunov residual {residual:.3e}", residual=residual)
    return Y


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a rule on [0, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise DimensionError("nodes and weights must be matching 1-D arrays")
        if np.any(np.diff(nodes) <= 0) or nodes[0] < 0 or nodes[-1] > 1:
            raise MonotonicityError("nodes must be strictly increasing inside [0, 1]")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-14:
            raise ArithmeticError("weights must be positive and sum to one")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.nodes)

    def composite(self, a, b, panels):
        """Absolute nodes and weights of the composite rule on [a, b]."""
        if panels < 1:
            raise ValueError("panels must be >= 1")
        edges = np.linspace(a, b, panels + 1)
        h = np.diff(edges)
        x = (edges[:-1, None] + h[:, None] * self.nodes[None, :]).ravel()
        w = (h[:, None] * self.weights[None, :]).ravel()
        return x, w


@lru_cache(maxsize=32)
def gauss_legendre(n=5):
    """``n``-point Gauss-Legendre rule mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w)


def integrate_1d(f, a, b, rule=None, panels=1):
    """Composite quadrature of a scalar function on [a, b]."""
    rule = rule or gauss_legendre(5)
    x, w = rule.composite(a, b, panels)
    values = np.array([f(xi) for xi in x])
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = float(x[np.argmax(bad)])
        raise NumericError(f"integrand is not finite at x={where!r}", where=where)
    return np.tensordot(w, values, axes=(0, 0))


def _check_monotone(u, s):
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    if u.shape != s.shape or u.ndim != 1 or len(u) < 2:
        raise DimensionError("samples must be two matching 1-D arrays of length >= 2")
    if np.any(np.diff(u) <= 0):
        raise MonotonicityError("abscissae must be strictly increasing")
    if np.any(np.diff(s) < 0):
        k = int(np.argmax(np.diff(s) < 0))
        raise MonotonicityError(f"profile decreases between samples {k} and {k + 1}")
    return u, s


def monotone_inverse(u, s, target, *, interpolant=None, iterations=60):
    """Invert a nondecreasing sampled profile ``s(u)``.

    The profile is interpolated with a monotone piecewise cubic (PCHIP)
    and the preimage of each target is found by bisection inside its
    bracketing interval.  On a flat stretch the leftmost preimage is
    returned.  ``target`` may be a scalar or an array.
    """
    u, s = _check_monotone(u, s)
    scalar = np.ndim(target) == 0
    y = np.atleast_1d(np.asarray(target, dtype=float))
    span = s[-1] - s[0]
    slack = 1e-12 * max(abs(s[0]), abs(s[-1]), span, 1e-300)
    if np.any(y < s[0] - slack) or np.any(y > s[-1] + slack):
        raise RangeError(f"target outside profile range [{s[0]!r}, {s[-1]!r}]")
    y = np.clip(y, s[0], s[-1])
    P = interpolant if interpolant is not None else PchipInterpolator(u, s)

    idx = np.searchsorted(s, y, side="left")
    out = np.empty_like(y)
    exact = s[np.minimum(idx, len(s) - 1)] == y
    out[exact] = u[idx[exact]]
    todo = ~exact
    if np.any(todo):
        k = idx[todo]
        lo = u[k - 1].copy()
        hi = u[k].copy()
        yt = y[todo]
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = P(mid) < yt
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out[todo] = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out
