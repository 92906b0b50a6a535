"""Node rankings for immunization and their evaluation by simulation.

Four policies rank nodes and immunize the top K:

* ``preventive``: ``exp(alpha beta t* A) 1`` with ``alpha = 1 - c/n``, the
  walk-weighted "infectivity" each node receives when every node starts
  infected with probability ``c/n``. It does not depend on the sources.
* ``reactive``: the transformation-bound coordinate ``y_hat(t*)`` given the
  known initial state; sources are never selected.
* ``evc``: the Perron eigenvector of ``A``.
* ``degree``: node degrees.

Ties are broken by ascending node id. The default ranking time is
``t* = 1 / (beta lambda)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import transformed_state
from .dynamics import check_nontrivial
from .linalg import DEFAULT_SERIES, dominant_eigenpair, expm_action
from .stochastic import FixedSet, UniformSource, run_ensemble

POLICIES = ("preventive", "reactive", "evc", "degree")
TIE_DIGITS = 12


def default_t_star(g, beta, eig=None):
    """``1 / (beta * lambda(A))``: one e-folding of the dominant mode."""
    eig = eig or dominant_eigenpair(g)
    return 1.0 / (beta * eig.value)


def preventive_scores(g, beta, c, t_star, params=DEFAULT_SERIES, full=False):
    """Preventive ranking scores ``exp(alpha beta t* A) 1``, ``alpha = 1 - c/n``.

    With ``full=True`` the affine terms are kept, giving
    ``(1/alpha - 1) exp(alpha beta t* A) 1 - (1/alpha - 1 + log alpha) 1``,
    which is ``y_hat(t*)`` for ``x0 = (c/n) 1``. Both rank nodes identically.
    """
    n = g.n
    if not 0 < c < n:
        raise ValueError("need 0 < c < n")
    if not t_star > 0:
        raise ValueError("t* must be positive")
    alpha = 1.0 - c / n
    walks = expm_action(g, None, alpha * beta * t_star, np.ones(n), params).vector
    if not full:
        return walks
    k = 1.0 / alpha - 1.0
    return k * walks - (k + np.log(alpha))


def reactive_scores(g, beta, x0, t_star, params=DEFAULT_SERIES):
    """``y_hat(t*)`` from the known initial state; sources score ``-inf``."""
    if not t_star > 0:
        raise ValueError("t* must be positive")
    x0 = check_nontrivial(x0)
    y = transformed_state(g, beta, x0, t_star, params)
    y[x0 == 1] = -np.inf
    return y


def evc_scores(g, eig=None):
    """Components of the unit Perron eigenvector of ``A``."""
    if not g.is_connected():
        raise ValueError("eigenvector centrality needs a connected graph")
    return (eig or dominant_eigenpair(g)).right.copy()


def degree_scores(g):
    return g.degrees.astype(np.float64)


@dataclass(frozen=True)
class PolicySelection:
    """The K nodes chosen by a policy, best first.

    Attributes
    ----------
    policy : str
    t_star : float or None
        Ranking time (``None`` for ``evc`` and ``degree``).
    k : int
    selected : tuple of int
    scores : ndarray
    """

    policy: str
    t_star: float | None
    k: int
    selected: tuple
    scores: np.ndarray


def _tie_key(scores):
    # Quantize relative to the largest finite magnitude so that roundoff-level
    # differences count as ties and fall back to the id order.
    finite = np.isfinite(scores)
    scale = np.max(np.abs(scores[finite]), initial=0.0) or 1.0
    key = np.where(finite, np.round(scores / scale, TIE_DIGITS), scores)
    return key


def select_top_k(scores, k, excluded=(), policy="custom", t_star=None):
    """The ``k`` highest-scoring nodes not in ``excluded``.

    Ties (scores equal to ``TIE_DIGITS`` significant digits relative to the
    largest score) are broken by ascending node id.
    """
    scores = np.asarray(scores, dtype=np.float64)
    excluded = {int(i) for i in excluded}
    n = len(scores)
    if not 0 <= k <= n - len(excluded):
        raise ValueError(f"budget K={k} exceeds the {n - len(excluded)} eligible nodes")
    order = np.lexsort((np.arange(n), -_tie_key(scores)))
    chosen = [int(i) for i in order if int(i) not in excluded][:k]
    return PolicySelection(policy, t_star, int(k), tuple(chosen), scores)


def immunize(g, selection):
    """Remove the selected nodes; returns the induced subgraph on the rest.

    The result keeps original ids in ``labels`` and may be disconnected.
    """
    keep = np.setdiff1d(np.arange(g.n), np.asarray(selection.selected, dtype=np.int64))
    return g.subgraph(keep)


def select_policy(g, beta, policy, k, sources=(), t_star=None, c=1.0, params=DEFAULT_SERIES, eig=None):
    """Score and select for one of :data:`POLICIES`.

    Known ``sources`` are excluded from every policy's selection; the
    reactive policy also uses them as a binary ``x0``. ``c`` is the expected
    number of initial infectives assumed by the preventive policy.
    """
    sources = tuple(int(i) for i in sources)
    if policy in ("preventive", "reactive") and t_star is None:
        t_star = default_t_star(g, beta, eig)
    if policy == "preventive":
        return select_top_k(preventive_scores(g, beta, c, t_star, params), k, sources, policy, t_star)
    if policy == "reactive":
        x0 = np.zeros(g.n)
        x0[list(sources)] = 1.0
        scores = reactive_scores(g, beta, x0, t_star, params)
        return select_top_k(scores, k, sources, policy, t_star)
    if policy == "evc":
        return select_top_k(evc_scores(g, eig), k, sources, policy)
    if policy == "degree":
        return select_top_k(degree_scores(g), k, sources, policy)
    raise ValueError(f"unknown policy {policy!r}")


@dataclass(frozen=True)
class Scenario:
    """Where outbreaks start when a policy is evaluated.

    ``preventive``: one source drawn uniformly per replica among the
    non-immunized nodes. ``reactive``: the fixed ``sources``.
    """

    kind: str
    sources: tuple = ()

    def __post_init__(self):
        if self.kind not in ("preventive", "reactive"):
            raise ValueError("scenario must be 'preventive' or 'reactive'")
        if self.kind == "reactive" and not self.sources:
            raise ValueError("reactive scenario needs sources")


def evaluate_policy(g, beta, selections, scenario, replicas, grid, master_seed):
    """Simulate the outbreak after each policy's immunization.

    Immunized nodes are kept in the graph but blocked (never infected, never
    transmitting), which is the same process as simulating on the residual
    graph. Every policy uses the same replica seeds, so the transmission
    delays are shared across policies (common random numbers).

    Parameters
    ----------
    selections : dict of str to PolicySelection
    scenario : Scenario

    Returns
    -------
    dict of str to EnsembleResult
        Mean infected counts are over all ``n`` original nodes.
    """
    if scenario.kind == "reactive":
        law = FixedSet(scenario.sources)
        for name, sel in selections.items():
            hit = set(sel.selected) & set(law.nodes)
            if hit:
                raise ValueError(f"policy {name!r} immunizes source(s) {sorted(hit)}")
    else:
        law = UniformSource()
    return {
        name: run_ensemble(g, beta, law, replicas, grid, master_seed, blocked=sel.selected)
        for name, sel in selections.items()
    }
