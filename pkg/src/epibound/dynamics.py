"""Mean-field SI/SIS dynamics and the scalar change of variables.

The probability of infection ``x`` and the transformed coordinate
``y = -log(1 - x)`` are related by :func:`transform_g` and its inverse
:func:`transform_f`. Integration uses an explicit adaptive Runge-Kutta
scheme (scipy's DOP853) with tight default tolerances, since these
trajectories are the reference the closed-form bounds are measured against.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """The adaptive integrator could not reach the end of the grid."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t={t_reached:.6g})")
        self.t_reached = t_reached


@dataclass(frozen=True)
class ModelParams:
    """Infection rate per link and curing rate (SIS only)."""

    beta: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


@dataclass(frozen=True)
class Trajectory:
    """States sampled on a strictly increasing time grid.

    ``states[k]`` is the state vector at ``times[k]``. ``kind`` is
    ``"probability"`` (entries in [0, 1]) or ``"transformed"`` (entries in
    [0, inf]). ``clamped`` records the largest correction applied when
    projecting raw integrator output onto [0, 1]; it should stay at
    roundoff level.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str = "probability"
    clamped: float = 0.0
    extra: dict = field(default_factory=dict, repr=False)

    def total(self):
        return self.states.sum(axis=1)

    def at(self, k):
        return self.states[k]


def _check_unit(x, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(x)) or np.any(x < 0) or np.any(x > 1):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


def transform_g(x):
    """``-log(1 - x)``, with ``g(1) = inf``."""
    x = _check_unit(x)
    with np.errstate(divide="ignore"):
        out = -np.log1p(-x)
    return out[()] if out.ndim == 0 else out


def transform_f(y):
    """``1 - exp(-y)`` for ``y`` in [0, inf]; the inverse of :func:`transform_g`."""
    y = np.asarray(y, dtype=np.float64)
    if np.any(np.isnan(y)) or np.any(y < 0):
        raise ValueError("y must be nonnegative")
    out = -np.expm1(-y)
    return out[()] if out.ndim == 0 else out


def transform_b(x):
    """``x + (1 - x) log(1 - x)`` with ``0 log 0 = 0``; rises from 0 to 1."""
    x = _check_unit(x)
    r = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, x + r * np.log1p(-x), 1.0)
    return out[()] if out.ndim == 0 else out


def _check_grid(grid):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a nonempty 1-d array")
    if grid[0] < 0:
        raise ValueError("grid times must be nonnegative (time origin is 0)")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def check_nontrivial(x0):
    """Reject the all-healthy and all-infected initial conditions."""
    x0 = _check_unit(x0, "x0")
    if not np.any(x0 > 0):
        raise ValueError("x0 = 0 is a trivial initial condition")
    if np.all(x0 == 1):
        raise ValueError("x0 = 1 is a trivial initial condition")
    return x0


def _solve(rhs, y0, grid, rtol, atol):
    t_end = grid[-1]
    if t_end == 0:
        return np.array([y0]), np.array([0.0])
    sol = solve_ivp(
        rhs, (0.0, t_end), y0, method="DOP853", t_eval=grid, rtol=rtol, atol=atol,
    )
    if sol.status != 0:
        t_done = np.asarray(sol.t)
        reached = float(t_done[-1]) if t_done.size else 0.0
        raise IntegrationError(sol.message, reached)
    return sol.y.T, sol.t


def _clamp(raw):
    clamped = np.clip(raw, 0.0, 1.0)
    return clamped, float(np.max(np.abs(clamped - raw), initial=0.0))


def solve_si(g, beta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, hazard=False):
    """Integrate the SI system, optionally with the cumulative hazards.

    With ``hazard=True`` the state is augmented by ``H`` with
    ``dH_i/dt = beta * (A x)_i``, integrated by the same scheme and steps
    as ``x``. Returns ``(x_states, H_states or None, raw_clamp)``.
    """
    a = g.adjacency
    n = g.n

    if hazard:
        def rhs(t, z):
            x = z[:n]
            ax = beta * a.dot(x)
            return np.concatenate([(1.0 - x) * ax, ax])

        z0 = np.concatenate([x0, np.zeros(n)])
    else:
        def rhs(t, x):
            return beta * (1.0 - x) * a.dot(x)

        z0 = x0
    states, _ = _solve(rhs, z0, grid, rtol, atol)
    x, clamp = _clamp(states[:, :n])
    h = states[:, n:] if hazard else None
    return x, h, clamp


def integrate_si(g, beta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate ``dx_i/dt = beta (1 - x_i) sum_j a_ij x_j`` on ``grid``.

    Parameters
    ----------
    g : Graph
    beta : float
        Infection rate per link.
    x0 : array_like
        Initial infection probabilities; the trivial vectors 0 and 1 are
        rejected.
    grid : array_like
        Strictly increasing nonnegative output times (origin at 0).
    rtol, atol : float
        Per-step error tolerances of the adaptive integrator.

    Returns
    -------
    Trajectory
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    x0 = check_nontrivial(x0)
    grid = _check_grid(grid)
    x, _, clamp = solve_si(g, beta, x0, grid, rtol, atol)
    return Trajectory(grid, x, "probability", clamp)


def integrate_sis(g, beta, delta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate the SIS system ``dx_i/dt = beta (1 - x_i)(A x)_i - delta x_i``.

    ``beta = 0`` is allowed here (pure curing).
    """
    if beta < 0 or delta < 0:
        raise ValueError("rates must be nonnegative")
    x0 = _check_unit(x0, "x0")
    grid = _check_grid(grid)
    a = g.adjacency

    def rhs(t, x):
        return beta * (1.0 - x) * a.dot(x) - delta * x

    states, _ = _solve(rhs, x0, grid, rtol, atol)
    x, clamp = _clamp(states)
    return Trajectory(grid, x, "probability", clamp)


def integrate_transformed(g, beta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate ``dy_i/dt = beta sum_j a_ij f(y_j)`` from ``y(0) = g(x0)``.

    Requires every ``x0_i < 1`` so that ``y(0)`` is finite.
    """
    x0 = check_nontrivial(x0)
    if np.any(x0 >= 1):
        raise ValueError("transformed integration needs x0 < 1 componentwise")
    grid = _check_grid(grid)
    a = g.adjacency

    def rhs(t, y):
        return beta * a.dot(-np.expm1(-y))

    states, _ = _solve(rhs, transform_g(x0), grid, rtol, atol)
    return Trajectory(grid, states, "transformed")
