"""Experiment runners: each turns a :class:`RunConfig` into a result table
and a manifest describing every automatic choice that was made."""
from __future__ import annotations

import numpy as np

from . import __version__, _backend
from .bounds import default_horizon, linearization_bound, transformation_bound
from .dynamics import integrate_si, integrate_sis
from .graph import make_graph
from .linalg import dominant_eigenpair
from .reliability import (
    hazard_curve,
    residual_life_distribution,
    survival_curve,
    transformed_identity_check,
)
from .results import ResultTable
from .stochastic import RandomSet, run_ensemble, run_sis_ensemble
from .vaccination import (
    PolicySelection,
    Scenario,
    default_t_star,
    evaluate_policy,
    select_policy,
)


def build_graph(cfg):
    return make_graph(cfg.graph, seed=cfg.graph_seed)


def pick_source(g, spec):
    """Resolve a source spec (``node:I``, ``degree:D``, ``top-decile``) to a node id."""
    kind, _, arg = spec.partition(":")
    deg = g.degrees
    if kind == "node":
        i = int(arg)
        if not 0 <= i < g.n:
            raise ValueError(f"source node {i} out of range")
        return i
    if kind == "degree":
        hits = np.flatnonzero(deg == int(arg))
        if hits.size == 0:
            raise ValueError(f"no node has degree {arg}")
        return int(hits[0])
    if kind == "top-decile":
        top = np.flatnonzero(deg >= np.quantile(deg, 0.9))
        return int(top[np.argmin(deg[top])])
    raise ValueError(f"unknown source spec {spec!r}")


def parse_x0(g, spec):
    """``uniform:P`` or ``node:I:P`` (node I at P, the rest at 0)."""
    parts = spec.split(":")
    if parts[0] == "uniform" and len(parts) == 2:
        return np.full(g.n, float(parts[1]))
    if parts[0] == "node" and len(parts) == 3:
        x0 = np.zeros(g.n)
        x0[int(parts[1])] = float(parts[2])
        return x0
    raise ValueError(f"unknown x0 spec {spec!r}")


def saturation_time(g, beta, x0, fraction=0.99, max_doublings=40):
    """First time the mean-field SI total reaches ``fraction * n`` (linear interpolation)."""
    target = fraction * g.n
    horizon = 10.0 / beta
    for _ in range(max_doublings):
        grid = np.linspace(0.0, horizon, 2001)
        total = integrate_si(g, beta, x0, grid).total()
        hit = np.flatnonzero(total >= target)
        if hit.size:
            k = hit[0]
            if k == 0:
                return 0.0
            w = (target - total[k - 1]) / (total[k] - total[k - 1])
            return float(grid[k - 1] + w * (grid[k] - grid[k - 1]))
        horizon *= 2
    raise RuntimeError("mean-field total never reaches the target; is the graph connected?")


def _graph_info(g):
    return {"n": g.n, "m": g.m, **{k: v for k, v in g.info.items()}}


def _manifest(cfg, g, **extra):
    return {
        "config": cfg.as_dict(),
        "version": __version__,
        "kernels": _backend.NAME,
        "graph": _graph_info(g),
        **extra,
    }


# -- bound comparison --------------------------------------------------------

def bound_curves(g, beta, source, grid, replicas, seed):
    """Totals of the ODE, simulation mean, and both bounds on ``grid``."""
    x0 = np.zeros(g.n)
    x0[source] = 1.0
    sim = run_ensemble(g, beta, [source], replicas, grid, seed)
    return {
        "ode": (integrate_si(g, beta, x0, grid).total(), None),
        "simulation": (sim.mean, sim.stderr),
        "linearization": (linearization_bound(g, beta, x0, grid).trajectory.total(), None),
        "transformation": (transformation_bound(g, beta, x0, grid).trajectory.total(), None),
    }


def run_bound_compare(cfg):
    g = build_graph(cfg)
    src = pick_source(g, cfg.source)
    x0 = np.zeros(g.n)
    x0[src] = 1.0
    table = ResultTable()
    horizons = {}
    for beta in cfg.betas:
        horizon = cfg.horizon or default_horizon(g, beta, x0)
        horizons[repr(beta)] = horizon
        grid = np.linspace(0.0, horizon, cfg.points)
        exp = f"bound-compare:beta={beta!r}"
        for method, (vals, err) in bound_curves(g, beta, src, grid, cfg.replicas, cfg.seed).items():
            table.add_curve(exp, method, grid, vals, err, seed=cfg.seed if err is not None else None)
    return table, _manifest(cfg, g, source=src, horizons=horizons)


# -- vaccination -------------------------------------------------------------

def policy_comparison(g, beta, scenario, ks, policies, replicas, grid, seed,
                      t_star=None, c=1.0, eig=None):
    """For each K, select with every policy and simulate.

    Returns ``{K: (selections, results)}``. A ``none`` contender (no
    immunization) is always included.
    """
    if "reactive" in policies and scenario.kind != "reactive":
        raise ValueError("the reactive policy needs a reactive scenario")
    eig = eig or dominant_eigenpair(g)
    out = {}
    for k in ks:
        sels = {"none": PolicySelection("none", None, 0, (), np.zeros(g.n))}
        for p in policies:
            sels[p] = select_policy(g, beta, p, k, scenario.sources, t_star, c, eig=eig)
        out[k] = (sels, evaluate_policy(g, beta, sels, scenario, replicas, grid, seed))
    return out


def run_policy(cfg):
    g = build_graph(cfg)
    beta = cfg.betas[0]
    eig = dominant_eigenpair(g)
    if cfg.scenario == "reactive":
        src = pick_source(g, cfg.source)
        scenario = Scenario("reactive", (src,))
        x0 = np.zeros(g.n)
        x0[src] = 1.0
    else:
        scenario = Scenario("preventive")
        x0 = np.full(g.n, cfg.c / g.n)
    horizon = cfg.horizon or 2.0 * saturation_time(g, beta, x0)
    grid = np.linspace(0.0, horizon, cfg.points)
    t_star = cfg.t_star or default_t_star(g, beta, eig)
    runs = policy_comparison(g, beta, scenario, cfg.ks, cfg.policies, cfg.replicas, grid,
                             cfg.seed, t_star, cfg.c, eig)
    table = ResultTable()
    chosen = {}
    for k, (sels, results) in runs.items():
        exp = f"policy:{cfg.scenario}:K={k}"
        for name, res in results.items():
            table.add_curve(exp, name, grid, res.mean, res.stderr, k=sels[name].k, seed=cfg.seed)
        chosen[str(k)] = {name: list(s.selected) for name, s in sels.items()}
    extra = {
        "beta": beta,
        "horizon": horizon,
        "horizon_rule": "twice the mean-field time to 99% infected from the scenario's x0",
        "t_star": t_star,
        "spectral_radius": eig.value,
        "scenario": {"kind": scenario.kind, "sources": list(scenario.sources),
                     "source_degrees": [int(g.degrees[s]) for s in scenario.sources]},
        "selected": chosen,
    }
    return table, _manifest(cfg, g, **extra)


# -- SIS ---------------------------------------------------------------------

def run_sis_demo(cfg):
    g = build_graph(cfg)
    beta = cfg.betas[0]
    horizon = cfg.horizon or 100.0
    grid = np.linspace(0.0, horizon, cfg.points)
    lam = dominant_eigenpair(g).value
    table = ResultTable()
    x0 = np.full(g.n, cfg.initial_infected / g.n)
    exp = f"sis-demo:beta={beta!r}"
    for delta in cfg.deltas:
        sim = run_sis_ensemble(g, beta, delta, RandomSet(cfg.initial_infected), cfg.replicas,
                               grid, cfg.seed)
        table.add_curve(exp, f"simulation:delta={delta!r}", grid, sim.mean, sim.stderr, seed=cfg.seed)
        mf = integrate_sis(g, beta, delta, x0, grid).total()
        table.add_curve(exp, f"mean-field:delta={delta!r}", grid, mf)
    extra = {
        "beta": beta,
        "horizon": horizon,
        "spectral_radius": lam,
        "threshold": 1.0 / lam,
        "effective_rates": {repr(d): (beta / d if d > 0 else None) for d in cfg.deltas},
    }
    return table, _manifest(cfg, g, **extra)


# -- reliability -------------------------------------------------------------

def run_reliability(cfg):
    g = build_graph(cfg)
    beta = cfg.betas[0]
    x0 = parse_x0(g, cfg.x0)
    horizon = cfg.horizon or 40.0
    grid = np.linspace(0.0, horizon, cfg.points)
    width = len(str(g.n - 1))
    exp = f"reliability:beta={beta!r}"
    table = ResultTable()

    hc = hazard_curve(g, beta, x0, grid)
    surv = survival_curve(g, beta, x0, grid)
    for i in range(g.n):
        tag = f"node={i:0{width}d}"
        table.add_curve(exp, f"hazard:{tag}", grid, hc.hazard[:, i])
        table.add_curve(exp, f"cumulative-hazard:{tag}", grid, hc.cumulative[:, i])
        table.add_curve(exp, f"survival:{tag}", grid, surv.states[:, i])
        table.add_curve(exp, f"one-minus-x:{tag}", grid, surv.extra["one_minus_x"][:, i])

    residual = {}
    for age in cfg.ages:
        r = residual_life_distribution(g, beta, x0, age, grid)
        residual[age] = r
        for i in range(g.n):
            table.add_curve(exp, f"residual:age={age!r}:node={i:0{width}d}", grid, r[:, i])

    ages = sorted(residual)
    ordering = all(np.all(residual[b] <= residual[a] + 1e-9) for a, b in zip(ages, ages[1:]))
    hazard_monotone = bool(np.all(np.diff(hc.hazard, axis=0) >= -1e-9))
    checks = {"hazard_nondecreasing": hazard_monotone, "residual_ordering": bool(ordering),
              "survival_vs_ode": float(np.max(np.abs(surv.states - surv.extra["one_minus_x"])))}
    if np.all(x0 < 1):
        rep = transformed_identity_check(g, beta, x0, grid)
        checks.update(identity_level=rep.level, identity_rate=rep.rate)
    for name in sorted(checks):
        table.add_curve(exp, f"check:{name}", [0.0], [float(checks[name])])
    return table, _manifest(cfg, g, beta=beta, horizon=horizon, checks=checks)


RUNNERS = {
    "bound-compare": run_bound_compare,
    "policy": run_policy,
    "sis-demo": run_sis_demo,
    "reliability": run_reliability,
}
