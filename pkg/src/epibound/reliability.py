"""Hazard rates, survival and residual life of the time to infection.

Under the mean-field SI dynamics a susceptible node ``i`` is infected at the
hazard rate ``h_i(t) = beta (A x(t))_i``, so

    P{T_i > t} = (1 - x_i(0)) exp(-H_i(t)),   H_i(t) = int_0^t h_i(s) ds,

which must agree with ``1 - x_i(t)``, and ``y_i(t) = -log(1 - x_i(t))``
obeys ``dy_i/dt = h_i``. Along an SI trajectory ``x`` only grows, hence the
hazards are nondecreasing and residual lives are stochastically decreasing
with age.

Everything here refers to the mean-field model. :func:`empirical_survival`
summarizes samples from the stochastic process and is a diagnostic only;
the two notions differ by the mean-field error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    Trajectory,
    _check_grid,
    check_nontrivial,
    integrate_transformed,
    solve_si,
    transform_g,
)
from .graph import matvec


def hazard_from_state(g, beta, x):
    """``beta * A @ x``: the infection hazard of every node given ``x``."""
    return beta * matvec(g, np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class HazardCurve:
    """Hazards ``h`` and cumulative hazards ``H``, both (G, n), on ``times``."""

    times: np.ndarray
    hazard: np.ndarray
    cumulative: np.ndarray


def _si_with_hazard(g, beta, x0, grid, rtol, atol):
    if not beta > 0:
        raise ValueError("beta must be positive")
    x0 = check_nontrivial(x0)
    grid = _check_grid(grid)
    x, big_h, clamp = solve_si(g, beta, x0, grid, rtol, atol, hazard=True)
    return x0, grid, x, big_h, clamp


def hazard_curve(g, beta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Hazard and cumulative hazard along the SI trajectory from ``x0``.

    ``H`` is integrated jointly with ``x`` (``dH/dt = beta A x``) by the same
    adaptive scheme, so it is as accurate as ``x`` itself.
    """
    _, grid, x, big_h, _ = _si_with_hazard(g, beta, x0, grid, rtol, atol)
    return HazardCurve(grid, beta * (g.adjacency @ x.T).T, big_h)


def survival_curve(g, beta, x0, grid, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``P{T_i > t} = (1 - x_i(0)) exp(-H_i(t))`` on ``grid``.

    Returns
    -------
    Trajectory
        Survival probabilities. ``extra["one_minus_x"]`` holds ``1 - x(t)``
        from the same integration, which the survival must reproduce.
    """
    x0, grid, x, big_h, clamp = _si_with_hazard(g, beta, x0, grid, rtol, atol)
    surv = (1.0 - x0) * np.exp(-big_h)
    return Trajectory(grid, surv, "probability", clamp, {"one_minus_x": 1.0 - x})


@dataclass(frozen=True)
class IdentityReport:
    """Discrepancies of the transformed-coordinate identities.

    ``level`` is ``max |y(t) - (g(x0) + H(t))|`` and ``rate`` is
    ``max |dy/dt - h(t)|`` with ``dy/dt`` from finite differences of ``y``.
    ``y`` comes from integrating the transformed system directly.
    """

    times: np.ndarray
    level: float
    rate: float
    survival: float


def transformed_identity_check(g, beta, x0, grid, step=1e-4, rtol=1e-11, atol=1e-13):
    """Check ``y = -log P{T > 0} + H`` and ``dy/dt = h`` numerically.

    Central differences of width ``step`` are used where ``t >= step``, and a
    second-order forward difference otherwise.
    """
    x0 = check_nontrivial(x0)
    if np.any(x0 >= 1):
        raise ValueError("identity check needs x0 < 1 componentwise")
    grid = _check_grid(grid)
    central = grid >= step
    stencil = np.concatenate([
        grid,
        grid[central] - step,
        grid + step,
        grid[~central] + 2 * step,
    ])
    fine = np.unique(stencil)
    where = {t: k for k, t in enumerate(fine)}

    def at(ts):
        return [where[t] for t in ts]

    y = integrate_transformed(g, beta, x0, fine, rtol, atol).states
    _, _, x, big_h, _ = _si_with_hazard(g, beta, x0, fine, rtol, atol)
    base = at(grid)
    level = np.max(np.abs(y[base] - (transform_g(x0) + big_h[base])))

    dy = np.empty((len(grid), g.n))
    c = np.flatnonzero(central)
    dy[c] = (y[at(grid[c] + step)] - y[at(grid[c] - step)]) / (2 * step)
    f = np.flatnonzero(~central)
    dy[f] = (-3 * y[at(grid[f])] + 4 * y[at(grid[f] + step)] - y[at(grid[f] + 2 * step)]) / (2 * step)
    h = beta * (g.adjacency @ x[base].T).T
    rate = np.max(np.abs(dy - h))
    surv = np.max(np.abs((1.0 - x0) * np.exp(-big_h[base]) - (1.0 - x[base])))
    return IdentityReport(grid, float(level), float(rate), float(surv))


def residual_life_distribution(g, beta, x0, age, lookahead, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``P{T_{i,t} > t'} = exp(-(H_i(t + t') - H_i(t)))`` for ``t = age``.

    Parameters
    ----------
    age : float
        Time ``t >= 0`` at which node ``i`` is known to be uninfected.
    lookahead : array_like
        Nonnegative increasing ``t'`` values.

    Returns
    -------
    ndarray (len(lookahead), n)
    """
    if age < 0:
        raise ValueError("age must be nonnegative")
    ahead = np.asarray(lookahead, dtype=np.float64)
    if ahead.ndim != 1 or np.any(ahead < 0) or np.any(np.diff(ahead) <= 0):
        raise ValueError("lookahead must be nonnegative and strictly increasing")
    fine = np.unique(np.concatenate([[0.0, age], age + ahead]))
    _, _, _, big_h, _ = _si_with_hazard(g, beta, x0, fine, rtol, atol)
    start = big_h[np.searchsorted(fine, age)]
    ends = big_h[np.searchsorted(fine, age + ahead)]
    return np.exp(-(ends - start))


def empirical_survival(samples, grid):
    """Fraction of replicas with ``T_i > t`` and its binomial standard error.

    Parameters
    ----------
    samples : ndarray (R, n)
        Infection times from the stochastic simulation.
    grid : array_like

    Returns
    -------
    survival, stderr : ndarray (G, n)
    """
    samples = np.asarray(samples, dtype=np.float64)
    grid = _check_grid(grid)
    surv = (samples[None, :, :] > grid[:, None, None]).mean(axis=1)
    return surv, np.sqrt(surv * (1.0 - surv) / samples.shape[0])
