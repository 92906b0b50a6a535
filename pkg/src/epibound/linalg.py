"""Sparse kernels: truncated Taylor action of ``exp(tau * M)`` and Perron pairs.

``M`` is always ``A @ diag(scale)`` for a graph adjacency ``A`` and a
per-node scale in ``[0, 1]`` (or ``A`` itself). Both ``M`` and the vectors
fed to the series are nonnegative in every use here, so the plain Taylor
sum has no cancellation; this is the swappable kernel if that changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import degree_summary


class SeriesError(FloatingPointError):
    """Non-finite partial sum while summing a matrix-exponential series."""


class EigenError(RuntimeError):
    """Power iteration failed to converge.

    Attributes
    ----------
    vector : ndarray
        Last normalized iterate.
    residual : float
        ``max |M v - mu v|`` at the last iterate.
    """

    def __init__(self, message, vector, residual):
        super().__init__(message)
        self.vector = vector
        self.residual = residual


@dataclass(frozen=True)
class ExpmActionParams:
    """Stopping rule for the truncated series.

    The sum stops at the first term whose max-norm is at most ``rtol``
    times the running partial sum's max-norm, or after ``max_terms``
    terms. ``max_terms=None`` uses ``10 * (1 + ceil(tau * d_max))``; the
    maximum degree bounds the spectral radius of every ``M`` used here.
    """

    rtol: float = 1e-16
    max_terms: int | None = None

    def __post_init__(self):
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")
        if self.max_terms is not None and self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")

    def cap(self, g, tau):
        if self.max_terms is not None:
            return self.max_terms
        return 10 * (1 + math.ceil(tau * degree_summary(g).max))


DEFAULT_SERIES = ExpmActionParams()


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series plus its diagnostics."""

    vector: np.ndarray
    terms: int
    capped: bool


def _operator(g, scale):
    a = g.adjacency
    if scale is None:
        return a.dot
    s = np.asarray(scale, dtype=np.float64)
    if s.shape != (g.n,):
        raise ValueError(f"scale has shape {s.shape}, expected ({g.n},)")
    return lambda v: a.dot(s * v)


def _sum_series(apply, tau, first, cap, rtol, shift):
    # sum_{k>=0} tau^(k+shift)/(k+shift)! M^k w, with first = tau^shift/shift! * w
    partial = first.copy()
    term = first
    k = 0
    # overflow shows up as a non-finite partial sum and is raised below
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            if not np.all(np.isfinite(partial)):
                raise SeriesError(f"non-finite partial sum after {k + 1} terms")
            if k >= 1 or shift:
                tnorm = np.max(np.abs(term), initial=0.0)
                if tnorm <= rtol * np.max(np.abs(partial), initial=0.0):
                    return SeriesResult(partial, k + 1, False)
            if k + 1 >= cap:
                return SeriesResult(partial, k + 1, True)
            k += 1
            term = apply(term) * (tau / (k + shift))
            partial = partial + term


def expm_action(g, scale, tau, v0, params=DEFAULT_SERIES):
    """Evaluate ``exp(tau * M) @ v0`` by truncated Taylor series.

    Parameters
    ----------
    g : Graph
    scale : array_like or None
        Column scaling of ``A``; ``None`` means ``M = A``.
    tau : float
        Nonnegative series argument (``beta * t`` for the epidemic bounds).
    v0 : array_like
        Vector of length ``g.n``.
    params : ExpmActionParams

    Returns
    -------
    SeriesResult
        ``capped`` is set when the term cap was reached before the
        relative tolerance; the caller decides whether that is acceptable.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (g.n,):
        raise ValueError(f"vector has shape {v0.shape}, expected ({g.n},)")
    if tau == 0:
        return SeriesResult(v0.copy(), 1, False)
    return _sum_series(_operator(g, scale), tau, v0, params.cap(g, tau), params.rtol, 0)


def expm_action_integral(g, scale, tau, w, params=DEFAULT_SERIES):
    """Evaluate ``sum_k tau^(k+1)/(k+1)! M^k w``.

    Equal to the integral of ``exp(s M) w`` over ``[0, tau]``; summed
    directly so a singular ``M`` needs no special handling.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (g.n,):
        raise ValueError(f"vector has shape {w.shape}, expected ({g.n},)")
    if tau == 0:
        return SeriesResult(np.zeros(g.n), 1, False)
    return _sum_series(_operator(g, scale), tau, tau * w, params.cap(g, tau), params.rtol, 1)


@dataclass(frozen=True)
class EigenPair:
    """Dominant eigenvalue with right vector (unit 2-norm) and optional left vector.

    The left vector, when present, is scaled so that ``left @ right == 1``.
    """

    value: float
    right: np.ndarray
    left: np.ndarray | None = None
    iterations: int = 0
    residual: float = 0.0


def _power(apply, n, tol, max_iters):
    # Iterating on M + I keeps the Perron root strictly dominant in modulus
    # even for bipartite (periodic) graphs, where plain iteration oscillates.
    x = np.ones(n) / math.sqrt(n)
    resid = math.inf
    for it in range(1, max_iters + 1):
        mx = apply(x)
        y = mx + x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise EigenError("iteration collapsed to the zero vector", x, resid)
        y /= norm
        my = apply(y)
        mu = float(y @ my)
        resid = float(np.max(np.abs(my - mu * y)))
        diff = float(np.max(np.abs(y - x)))
        x = y
        if diff < tol and resid < 10 * tol:
            return mu, x, it, resid
    raise EigenError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(residual {resid:.3g})",
        x,
        resid,
    )


def dominant_eigenpair(g, scale=None, want_left=False, tol=1e-10, max_iters=100_000):
    """Perron eigenpair of ``M = A @ diag(scale)`` by shifted power iteration.

    Starts from the all-ones vector. Converged when successive normalized
    iterates differ by less than ``tol`` in max-norm and the residual
    ``max |M v - mu v|`` is below ``10 * tol``. The eigenvalue is the
    Rayleigh quotient of the final iterate.

    Raises
    ------
    EigenError
        On non-convergence, carrying the last iterate and its residual.
    """
    a = g.adjacency
    if scale is None:
        right_op = a.dot
        left_op = a.dot
    else:
        s = np.asarray(scale, dtype=np.float64)
        right_op = lambda v: a.dot(s * v)  # noqa: E731
        left_op = lambda v: s * a.dot(v)  # noqa: E731  (M^T = diag(s) A)
    mu, v, iters, resid = _power(right_op, g.n, tol, max_iters)
    left = None
    if want_left:
        _, u, _, _ = _power(left_op, g.n, tol, max_iters)
        u = u / (u @ v)
        left = u
    return EigenPair(value=mu, right=v, left=left, iterations=iters, residual=resid)


def spectral_radius_bounds(g):
    """Return ``(max(mean degree, sqrt(max degree)), max degree)``."""
    ds = degree_summary(g)
    return max(ds.mean, math.sqrt(ds.max)), float(ds.max)
