"""Closed-form upper bounds on mean-field SI trajectories.

Two bounds are provided, both starting from the same ``x0``:

* the linearization ``x_lin(t) = exp(beta t A) x0``, which exceeds 1 and
  grows without limit;
* the transformation bound ``x_hat(t) = f(y_hat(t))`` where ``y_hat`` solves
  the linear system obtained by replacing ``f`` in the transformed dynamics
  with its tangent line at ``y(0)``. It stays in [0, 1], tends to 1, and
  satisfies ``x(t) <= x_hat(t) <= x_lin(t)`` componentwise.

``y_hat`` can be evaluated three ways: the general expression (any ``x0``),
a form for ``x0 < 1`` that uses ``diag(1 - x0)^{-1}``, and a form for
binary ``x0``. Nodes with ``x0_i = 1`` carry ``y_hat_i = inf``; their
columns of ``A diag(1 - x0)`` vanish, so series arithmetic only ever sees
the finite part of ``g(x0)``.

Every grid time is evaluated independently from ``t = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, _check_grid, check_nontrivial, transform_b, transform_f, transform_g
from .graph import matvec
from .linalg import (
    DEFAULT_SERIES,
    ExpmActionParams,
    dominant_eigenpair,
    expm_action,
    expm_action_integral,
)

METHODS = (
    "linearization",
    "transformation_general",
    "transformation_interior",
    "transformation_binary",
    "transformation_asymptotic",
)


@dataclass(frozen=True)
class BoundResult:
    """A bound evaluated on a grid.

    Attributes
    ----------
    trajectory : Trajectory
        ``x_lin`` or ``x_hat`` (probability kind; ``x_lin`` may exceed 1).
    method : str
        One of :data:`METHODS`.
    terms : ndarray of int
        Series terms used at each grid time (max over the series involved).
    capped : ndarray of bool
        Whether any series hit its term cap at that time.
    transformed : Trajectory or None
        ``y_hat`` for the transformation methods.
    """

    trajectory: Trajectory
    method: str
    terms: np.ndarray
    capped: np.ndarray
    transformed: Trajectory | None = None

    @property
    def times(self):
        return self.trajectory.times

    @property
    def states(self):
        return self.trajectory.states


def _is_binary(x0):
    return bool(np.all((x0 == 0) | (x0 == 1)))


def linearization_bound(g, beta, x0, grid, params=DEFAULT_SERIES):
    """``exp(beta t A) x0`` at every grid time."""
    x0 = np.asarray(x0, dtype=np.float64)
    grid = _check_grid(grid)
    states = np.empty((len(grid), g.n))
    terms = np.empty(len(grid), dtype=np.int64)
    capped = np.zeros(len(grid), dtype=bool)
    for k, t in enumerate(grid):
        r = expm_action(g, None, beta * t, x0, params)
        states[k], terms[k], capped[k] = r.vector, r.terms, r.capped
    return BoundResult(Trajectory(grid, states), "linearization", terms, capped)


def evc_asymptote(g, beta, x0, t, eig=None):
    """Dominant-mode approximation ``xi exp(beta lambda t) v`` of ``x_lin(t)``.

    ``v`` is the unit Perron vector of ``A`` and ``xi = v @ x0``. This tracks
    the linearization only for large ``t``, where it is already far above 1.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if not np.any(x0 > 0):
        raise ValueError("x0 must be nonzero")
    eig = eig or dominant_eigenpair(g)
    xi = eig.right @ x0
    return xi * np.exp(beta * eig.value * t) * eig.right


# -- y_hat at a single time ---------------------------------------------------

def _y_general(g, beta, x0, t, params):
    keep = 1.0 - x0
    src = x0 == 1
    g0 = transform_g(x0)
    g0[src] = 0.0
    first = expm_action(g, keep, beta * t, g0, params)
    second = expm_action_integral(g, keep, beta * t, matvec(g, transform_b(x0)), params)
    y = first.vector + second.vector
    y[src] = np.inf
    return y, max(first.terms, second.terms), first.capped or second.capped


def _y_interior(g, beta, x0, t, params):
    if np.any(x0 >= 1):
        raise ValueError("interior form needs every x0_i < 1")
    keep = 1.0 - x0
    w = x0 / keep
    r = expm_action(g, keep, beta * t, w, params)
    return transform_g(x0) + (r.vector - w), r.terms, r.capped


def _y_binary(g, beta, x0, t, params):
    if not _is_binary(x0):
        raise ValueError("binary form needs every x0_i in {0, 1}")
    src = x0 == 1
    r = expm_action_integral(g, 1.0 - x0, beta * t, matvec(g, x0), params)
    y = r.vector.copy()
    y[src] = np.inf
    return y, r.terms, r.capped


_PATHS = {
    "general": (_y_general, "transformation_general"),
    "interior": (_y_interior, "transformation_interior"),
    "binary": (_y_binary, "transformation_binary"),
}


def _resolve_path(x0, path):
    if path == "auto":
        if _is_binary(x0):
            return "binary"
        return "interior" if np.all(x0 < 1) else "general"
    if path not in _PATHS:
        raise ValueError(f"unknown path {path!r}")
    return path


def transformed_state(g, beta, x0, t, params=DEFAULT_SERIES, path="auto"):
    """``y_hat(t)`` as a vector (``inf`` at source nodes)."""
    x0 = check_nontrivial(x0)
    fn, _ = _PATHS[_resolve_path(x0, path)]
    return fn(g, beta, x0, float(t), params)[0]


def transformation_bound(g, beta, x0, grid, params=DEFAULT_SERIES, path="auto"):
    """Evaluate ``y_hat`` and ``x_hat = f(y_hat)`` on a grid.

    Parameters
    ----------
    g : Graph
    beta : float
    x0 : array_like
        Nontrivial initial infection probabilities.
    grid : array_like
        Output times.
    params : ExpmActionParams
    path : {"auto", "general", "interior", "binary"}
        ``"auto"`` picks the binary form for 0/1 vectors, the interior
        form when every entry is below 1, and the general form otherwise.
    """
    x0 = check_nontrivial(x0)
    grid = _check_grid(grid)
    path = _resolve_path(x0, path)
    fn, method = _PATHS[path]
    ys = np.empty((len(grid), g.n))
    terms = np.empty(len(grid), dtype=np.int64)
    capped = np.zeros(len(grid), dtype=bool)
    for k, t in enumerate(grid):
        ys[k], terms[k], capped[k] = fn(g, beta, x0, t, params)
    xs = transform_f(ys)
    return BoundResult(
        Trajectory(grid, xs),
        method,
        terms,
        capped,
        transformed=Trajectory(grid, ys, "transformed"),
    )


def transformation_bound_interior(g, beta, x0, grid, params=DEFAULT_SERIES):
    return transformation_bound(g, beta, x0, grid, params, path="interior")


def transformation_bound_binary(g, beta, x0, grid, params=DEFAULT_SERIES):
    return transformation_bound(g, beta, x0, grid, params, path="binary")


def transformation_asymptote(g, beta, x0, t, eig=None):
    """Dominant-mode form of ``y_hat(t)`` for ``x0 < 1``.

    ``xi exp(beta mu t) v - diag(1 - x0)^{-1} x0 + g(x0)``, where ``mu``,
    ``v`` and ``u`` are the Perron value and right/left vectors of
    ``W = A diag(1 - x0)`` (``u @ v = 1``) and ``xi = u @ diag(1-x0)^{-1} x0``.
    Pass ``eig`` to reuse a precomputed pair (it must carry ``left``).
    """
    x0 = check_nontrivial(x0)
    if np.any(x0 >= 1):
        raise ValueError("asymptote needs every x0_i < 1")
    keep = 1.0 - x0
    if eig is None or eig.left is None:
        eig = dominant_eigenpair(g, keep, want_left=True)
    w = x0 / keep
    xi = eig.left @ w
    return xi * np.exp(beta * eig.value * t) * eig.right - w + transform_g(x0)


@dataclass(frozen=True)
class DerivativeReport:
    """Finite-difference check of ``d y_hat/dt = exp(beta t A D) beta A x0``.

    ``finite_difference`` and ``closed_form`` are restricted to non-source
    nodes (sources have ``y_hat = inf``); ``linear_rate`` is
    ``d x_lin/dt = exp(beta t A) beta A x0`` on the same nodes.
    """

    nodes: np.ndarray
    finite_difference: np.ndarray
    closed_form: np.ndarray
    linear_rate: np.ndarray
    max_discrepancy: float


_FINE_SERIES = ExpmActionParams(rtol=1e-16)


def bound_derivative_check(g, beta, x0, t, h, params=_FINE_SERIES, path="auto"):
    """Compare a central difference of ``y_hat`` with its closed-form derivative."""
    if not t > h > 0:
        raise ValueError("need t > h > 0")
    x0 = check_nontrivial(x0)
    ax0 = beta * matvec(g, x0)
    closed = expm_action(g, 1.0 - x0, beta * t, ax0, params).vector
    linear = expm_action(g, None, beta * t, ax0, params).vector
    up = transformed_state(g, beta, x0, t + h, params, path)
    down = transformed_state(g, beta, x0, t - h, params, path)
    nodes = np.flatnonzero(x0 < 1)
    fd = (up[nodes] - down[nodes]) / (2 * h)
    disc = float(np.max(np.abs(fd - closed[nodes]), initial=0.0))
    return DerivativeReport(nodes, fd, closed[nodes], linear[nodes], disc)


def default_horizon(g, beta, x0, fraction=0.999, params=DEFAULT_SERIES, max_doublings=60):
    """Smallest time (to ~0.1%) at which ``sum(x_hat)`` reaches ``fraction * n``.

    ``x_hat`` is the slower of the two bounds, so both have saturated there.
    """
    x0 = check_nontrivial(x0)
    target = fraction * g.n

    def reached(t):
        return transform_f(transformed_state(g, beta, x0, t, params)).sum() >= target

    if reached(0.0):
        return 0.0
    hi = 1.0 / beta
    for _ in range(max_doublings):
        if reached(hi):
            break
        hi *= 2
    else:
        raise RuntimeError("bound never reaches the target fraction; is the graph connected?")
    lo = hi / 2 if hi > 1.0 / beta else 0.0
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if reached(mid) else (mid, hi)
    return hi


def default_grid(g, beta, x0, points=200, fraction=0.999, params=DEFAULT_SERIES):
    """``points`` uniform times on ``[0, T]`` with ``T`` from :func:`default_horizon`."""
    return np.linspace(0.0, default_horizon(g, beta, x0, fraction, params), points)
