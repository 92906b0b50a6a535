"""Exact stochastic SI (and minimal SIS) simulation and a master-equation oracle.

SI replicas are simulated as first-passage percolation. Every directed
adjacency entry ``i -> j`` gets an independent ``Exponential(beta)`` delay,
drawn up front, and node ``j`` is infected at ``T_j = min_i (T_i + w_ij)``
over its neighbors. By memorylessness this has exactly the law of the
continuous-time Markov SI process (a susceptible node is infected at rate
``beta`` times its number of infected neighbors). A fixed number of random
draws per replica also makes the compiled and pure-Python kernels agree bit
for bit.

Seeding is counter based. Replica ``r`` of master seed ``s`` draws stream
``k`` from ``numpy.random.default_rng([s, r, k])``, so results do not depend
on batch size or schedule, and two runs sharing a master seed share their
random numbers (used for common random numbers across policies).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _backend
from .dynamics import Trajectory, _check_grid, _check_unit, _solve

STREAM_DELAYS = 0
STREAM_INITIAL = 1
STREAM_EVENTS = 2

MAX_ORACLE_NODES = 12


@dataclass(frozen=True)
class Seed:
    """Seed of one replica, derived from a master seed and a replica index."""

    master: int
    replica: int

    def __post_init__(self):
        if self.master < 0 or self.replica < 0:
            raise ValueError("seeds must be nonnegative")

    def rng(self, stream=0):
        return np.random.default_rng([int(self.master), int(self.replica), int(stream)])


# -- initial laws ----------------------------------------------------------

@dataclass(frozen=True)
class FixedSet:
    """The same initial infected nodes in every replica."""

    nodes: tuple

    def __init__(self, nodes):
        object.__setattr__(self, "nodes", tuple(sorted({int(i) for i in nodes})))

    def draw(self, rng, n, blocked=None):
        mask = np.zeros(n, dtype=np.uint8)
        mask[list(self.nodes)] = 1
        if blocked is not None and np.any(mask & blocked):
            raise ValueError("an initial infected node is immunized")
        return mask


@dataclass(frozen=True)
class UniformSource:
    """A single source drawn uniformly from the non-immunized nodes."""

    def draw(self, rng, n, blocked=None):
        alive = np.arange(n) if blocked is None else np.flatnonzero(blocked == 0)
        mask = np.zeros(n, dtype=np.uint8)
        if alive.size:
            k = min(int(rng.random() * alive.size), alive.size - 1)
            mask[alive[k]] = 1
        return mask


@dataclass(frozen=True)
class RandomSet:
    """``size`` distinct initial infected nodes drawn uniformly."""

    size: int

    def draw(self, rng, n, blocked=None):
        alive = np.arange(n) if blocked is None else np.flatnonzero(blocked == 0)
        if not 0 <= self.size <= alive.size:
            raise ValueError("initial set larger than the available nodes")
        mask = np.zeros(n, dtype=np.uint8)
        mask[rng.choice(alive, size=self.size, replace=False)] = 1
        return mask


@dataclass(frozen=True)
class Bernoulli:
    """Independent per-node infection with probabilities ``x0``."""

    x0: np.ndarray

    def __init__(self, x0):
        object.__setattr__(self, "x0", _check_unit(x0, "x0"))

    def draw(self, rng, n, blocked=None):
        if self.x0.shape != (n,):
            raise ValueError("x0 has the wrong length")
        mask = (rng.random(n) < self.x0).astype(np.uint8)
        if blocked is not None:
            mask[blocked.astype(bool)] = 0
        return mask


def as_initial(initial):
    """Accept a law object or a plain collection of node ids (a fixed set)."""
    if hasattr(initial, "draw"):
        return initial
    return FixedSet(initial)


def _blocked_mask(n, blocked):
    mask = np.zeros(n, dtype=np.uint8)
    if blocked is not None:
        mask[np.asarray(list(blocked), dtype=np.int64)] = 1
    return mask


# -- SI --------------------------------------------------------------------

def _delays(g, beta, seed):
    return seed.rng(STREAM_DELAYS).standard_exponential(len(g.indices)) / beta


def simulate_si_replica(g, beta, initial, horizon, seed, blocked=None):
    """Infection times of one SI replica.

    Parameters
    ----------
    g : Graph
    beta : float
        Infection rate per link.
    initial : iterable of int
        Initially infected nodes (nonempty, not all nodes).
    horizon : float
        Infections later than this are reported as ``inf``.
    seed : Seed
    blocked : iterable of int, optional
        Immunized nodes, which are never infected and never transmit.

    Returns
    -------
    ndarray
        ``T_i`` for every node: 0 for initial nodes, ``inf`` if not infected
        by ``horizon``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    src = FixedSet(initial).draw(None, g.n)
    if not 0 < src.sum() < g.n:
        raise ValueError("initial set must be nonempty and not every node")
    out = np.empty((1, g.n))
    _backend.first_passage_batch(
        g.indptr, g.indices, _delays(g, beta, seed)[None, :], src[None, :],
        _blocked_mask(g.n, blocked), float(horizon), out,
    )
    return out[0]


@dataclass(frozen=True)
class EnsembleResult:
    """Monte Carlo summary of R replicas on a time grid.

    Attributes
    ----------
    times : ndarray (G,)
    mean : ndarray (G,)
        Mean number of infected nodes.
    stderr : ndarray (G,)
        Standard error of ``mean`` (``nan`` when R = 1).
    probabilities : ndarray (G, n)
        Empirical per-node infection probabilities.
    replicas : int
    samples : ndarray (R, n) or None
        Infection times (``inf`` when not infected by the last grid time).
        Not kept for SIS runs, where nodes can be infected repeatedly.
    """

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    probabilities: np.ndarray
    replicas: int
    samples: np.ndarray | None = None

    @property
    def node_stderr(self):
        """Binomial standard error of each entry of ``probabilities``."""
        p = self.probabilities
        return np.sqrt(p * (1.0 - p) / self.replicas)


def _count_stats(counts):
    r = counts.shape[0]
    mean = counts.mean(axis=0)
    if r > 1:
        stderr = counts.std(axis=0, ddof=1) / np.sqrt(r)
    else:
        stderr = np.full(counts.shape[1], np.nan)
    return mean, stderr


def summarize_times(samples, grid):
    """Aggregate infection-time samples into an :class:`EnsembleResult`."""
    samples = np.asarray(samples, dtype=np.float64)
    grid = _check_grid(grid)
    r, n = samples.shape
    ng = len(grid)
    # first grid index at which each node counts as infected (ng = never)
    first = np.searchsorted(grid, samples, side="left")
    node_hits = np.bincount(
        (np.arange(n) * (ng + 1) + first).ravel(), minlength=n * (ng + 1)
    ).reshape(n, ng + 1)
    probs = np.cumsum(node_hits[:, :ng], axis=1).T / r
    rep_hits = np.bincount(
        (np.arange(r)[:, None] * (ng + 1) + first).ravel(), minlength=r * (ng + 1)
    ).reshape(r, ng + 1)
    counts = np.cumsum(rep_hits[:, :ng], axis=1)
    mean, stderr = _count_stats(counts)
    return EnsembleResult(grid, mean, stderr, probs, r, samples)


def run_ensemble(g, beta, initial, replicas, grid, master_seed, blocked=None, batch=256):
    """Run ``replicas`` independent SI replicas and summarize them on ``grid``.

    Parameters
    ----------
    g : Graph
    beta : float
    initial : FixedSet, UniformSource, RandomSet, Bernoulli or iterable of int
        Initial law; random laws are redrawn per replica.
    replicas : int
    grid : array_like
        Output times; the simulation horizon is ``grid[-1]``.
    master_seed : int
    blocked : iterable of int, optional
        Immunized nodes.
    batch : int
        Replicas handed to the kernel at once. Does not affect results.

    Returns
    -------
    EnsembleResult
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    if not beta > 0:
        raise ValueError("beta must be positive")
    grid = _check_grid(grid)
    law = as_initial(initial)
    n, nnz = g.n, len(g.indices)
    block = _blocked_mask(n, blocked)
    samples = np.empty((replicas, n))
    for start in range(0, replicas, batch):
        stop = min(start + batch, replicas)
        weights = np.empty((stop - start, nnz))
        sources = np.empty((stop - start, n), dtype=np.uint8)
        for k, r in enumerate(range(start, stop)):
            seed = Seed(master_seed, r)
            weights[k] = _delays(g, beta, seed)
            sources[k] = law.draw(seed.rng(STREAM_INITIAL), n, block)
        _backend.first_passage_batch(
            g.indptr, g.indices, weights, sources, block, float(grid[-1]),
            samples[start:stop],
        )
    return summarize_times(samples, grid)


# -- SIS -------------------------------------------------------------------

def _fenwick(weights):
    n = len(weights)
    fen = np.zeros(n + 1, dtype=np.int64)
    fen[1:] = weights
    for i in range(1, n + 1):
        j = i + (i & -i)
        if j <= n:
            fen[j] += fen[i]
    return fen


def simulate_sis_counts(g, beta, delta, infected0, grid, seed, buffer=3 * 4096, node_sum=None):
    """One SIS replica (Gillespie); infected counts at the grid times.

    Infected nodes recover at rate ``delta``; a susceptible node is infected
    at rate ``beta`` times its number of infected neighbors. Each event
    consumes three uniforms from the replica's event stream.

    ``node_sum`` (G, n), if given, accumulates the infected indicators.
    """
    grid = _check_grid(grid)
    n = g.n
    infected = np.asarray(infected0, dtype=np.uint8).copy()
    inf_list = np.zeros(n, dtype=np.int64)
    live = np.flatnonzero(infected)
    inf_list[: live.size] = live
    pos = np.full(n, -1, dtype=np.int64)
    pos[live] = np.arange(live.size)
    weight = np.asarray(g.adjacency.dot(infected.astype(np.int64)), dtype=np.int64)
    weight[infected == 1] = 0
    fen = _fenwick(weight)
    clock = np.zeros(1)
    ints = np.array([0, live.size, weight.sum(), 0], dtype=np.int64)
    counts = np.zeros(len(grid), dtype=np.int64)
    if node_sum is None:
        node_sum = np.zeros((len(grid), n), dtype=np.int64)
    rng = seed.rng(STREAM_EVENTS)
    buf = np.empty(0)
    while not ints[3]:
        buf = np.concatenate([buf, rng.random(buffer)])
        used = _backend.sis_advance(
            g.indptr, g.indices, infected, inf_list, pos, weight, fen, clock, ints,
            grid, buf, float(beta), float(delta), counts, node_sum,
        )
        buf = buf[used:]
    return counts


def run_sis_ensemble(g, beta, delta, initial, replicas, grid, master_seed):
    """Monte Carlo SIS ensemble; same seeding scheme as :func:`run_ensemble`."""
    if replicas < 1:
        raise ValueError("need at least one replica")
    if beta < 0 or delta < 0:
        raise ValueError("rates must be nonnegative")
    grid = _check_grid(grid)
    law = as_initial(initial)
    node_sum = np.zeros((len(grid), g.n), dtype=np.int64)
    counts = np.empty((replicas, len(grid)), dtype=np.int64)
    for r in range(replicas):
        seed = Seed(master_seed, r)
        x0 = law.draw(seed.rng(STREAM_INITIAL), g.n)
        counts[r] = simulate_sis_counts(g, beta, delta, x0, grid, seed, node_sum=node_sum)
    mean, stderr = _count_stats(counts)
    return EnsembleResult(grid, mean, stderr, node_sum / replicas, replicas)


# -- exact oracle ----------------------------------------------------------

def si_generator(g, beta):
    """Sparse generator ``Q`` of the 2^n-state SI chain (rows: from-state).

    State ``s`` is a bitmask of infected nodes; ``s -> s | (1 << i)`` has rate
    ``beta * |neighbors(i) & s|`` for ``i`` not in ``s``.
    """
    n = g.n
    if n > MAX_ORACLE_NODES:
        raise ValueError(f"oracle limited to n <= {MAX_ORACLE_NODES} (got {n})")
    states = np.arange(1 << n, dtype=np.int64)
    nbr = np.array([int(np.sum(1 << g.neighbors(i).astype(np.int64))) for i in range(n)],
                   dtype=np.int64)
    rows, cols, rates = [], [], []
    for i in range(n):
        bit = np.int64(1) << i
        k = np.bitwise_count(states & nbr[i]).astype(np.float64)
        ok = ((states & bit) == 0) & (k > 0)
        rows.append(states[ok])
        cols.append(states[ok] | bit)
        rates.append(beta * k[ok])
    rows, cols, rates = (np.concatenate(v) for v in (rows, cols, rates))
    out = np.zeros(1 << n)
    np.add.at(out, rows, rates)
    q = sp.coo_matrix((rates, (rows, cols)), shape=(1 << n, 1 << n)).tocsr()
    return q - sp.diags(out, format="csr")


def master_equation_oracle(g, beta, x0, grid, rtol=1e-10, atol=1e-13):
    """Exact per-node infection marginals of the stochastic SI process.

    Solves the forward equations ``dp/dt = Q^T p`` of the full 2^n-state
    chain (n at most 12) from the product law with marginals ``x0``.

    Returns
    -------
    Trajectory
        ``states[k, i] = P{X_i(times[k]) = 1}``.
    """
    x0 = _check_unit(x0, "x0")
    grid = _check_grid(grid)
    n = g.n
    if x0.shape != (n,):
        raise ValueError("x0 has the wrong length")
    qt = si_generator(g, beta).T.tocsr()
    bits = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    p0 = np.prod(np.where(bits == 1, x0, 1.0 - x0), axis=1)
    probs, _ = _solve(lambda t, p: qt.dot(p), p0, grid, rtol, atol)
    marg = np.clip(probs @ bits, 0.0, 1.0)
    return Trajectory(grid, marg, "probability")
