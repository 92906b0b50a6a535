"""Run configuration: INI files plus command-line overrides.

Example::

    [graph]
    spec = ba:2000:2
    seed = 1

    [model]
    beta = 0.05
    delta = 1.0, 0.8

    [scenario]
    kind = reactive
    source = top-decile

    [policy]
    policies = reactive, evc, degree
    k = 30
    t_star = auto

    [simulation]
    replicas = 2000
    seed = 12345
    horizon = auto
    points = 101

    [output]
    dir = results

Lists are comma separated. ``auto`` leaves a value to the runner, which
records what it chose in the run manifest.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, replace

EXPERIMENTS = ("bound-compare", "policy", "sis-demo", "reliability")

DESK_REPLICAS = 2000
PAPER_REPLICAS = 10_000

_DEFAULT_GRAPH = {
    "bound-compare": "er:50:d=6",
    "policy": "ba:2000:2",
    "sis-demo": "er:2000:lambda=16.159",
    "reliability": "er:20:d=4",
}
_DEFAULT_BETA = {
    "bound-compare": (0.01, 0.05),
    "policy": (0.05,),
    "sis-demo": (0.06,),
    "reliability": (0.05,),
}


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _words(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _auto_float(text):
    text = str(text).strip().lower()
    return None if text in ("", "auto") else float(text)


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one experiment run.

    ``horizon`` and ``t_star`` are ``None`` for automatic choices.
    ``source`` selects fixed sources: ``node:I``, ``degree:D`` (lowest-id
    node of degree D), or ``top-decile`` (lowest-id node of the smallest
    degree within the top 10% of degrees). ``x0`` (reliability only) is
    ``uniform:P`` or ``node:I:P``.
    """

    experiment: str
    graph: str
    graph_seed: int = 1
    betas: tuple = (0.05,)
    deltas: tuple = (1.0, 0.8)
    scenario: str = "preventive"
    source: str = "node:0"
    c: float = 1.0
    initial_infected: int = 1000
    x0: str = "uniform:0.01"
    policies: tuple = ("preventive", "evc", "degree")
    ks: tuple = (20, 200)
    t_star: float | None = None
    replicas: int = DESK_REPLICAS
    seed: int = 12345
    horizon: float | None = None
    points: int = 101
    ages: tuple = (0.0, 5.0, 10.0)
    output_dir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.betas or any(b < 0 for b in self.betas):
            raise ValueError("beta values must be nonnegative")
        if any(d < 0 for d in self.deltas):
            raise ValueError("delta values must be nonnegative")
        if self.experiment != "sis-demo" and any(b <= 0 for b in self.betas):
            raise ValueError("beta must be positive")
        if self.replicas < 1:
            raise ValueError("replicas must be at least 1")
        if self.points < 2:
            raise ValueError("need at least two grid points")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.t_star is not None and self.t_star <= 0:
            raise ValueError("t_star must be positive")
        if any(k < 0 for k in self.ks):
            raise ValueError("K values must be nonnegative")
        if self.scenario not in ("preventive", "reactive"):
            raise ValueError("scenario must be 'preventive' or 'reactive'")
        if self.seed < 0 or self.graph_seed < 0:
            raise ValueError("seeds must be nonnegative")

    def as_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def defaults(experiment):
    kw = {"experiment": experiment, "graph": _DEFAULT_GRAPH[experiment],
          "betas": _DEFAULT_BETA[experiment]}
    if experiment == "policy":
        kw["points"] = 101
    if experiment == "bound-compare":
        kw["points"] = 200
    if experiment == "sis-demo":
        kw.update(horizon=100.0, replicas=100)
    if experiment == "reliability":
        kw.update(horizon=40.0, points=81)
    return RunConfig(**kw)


_KEYS = {
    ("graph", "spec"): ("graph", str),
    ("graph", "seed"): ("graph_seed", int),
    ("model", "beta"): ("betas", _floats),
    ("model", "delta"): ("deltas", _floats),
    ("scenario", "kind"): ("scenario", str),
    ("scenario", "source"): ("source", str),
    ("scenario", "c"): ("c", float),
    ("scenario", "initial_infected"): ("initial_infected", int),
    ("scenario", "x0"): ("x0", str),
    ("policy", "policies"): ("policies", _words),
    ("policy", "k"): ("ks", _ints),
    ("policy", "t_star"): ("t_star", _auto_float),
    ("simulation", "replicas"): ("replicas", int),
    ("simulation", "seed"): ("seed", int),
    ("simulation", "horizon"): ("horizon", _auto_float),
    ("simulation", "points"): ("points", int),
    ("reliability", "ages"): ("ages", _floats),
    ("output", "dir"): ("output_dir", str),
}


def load_config(experiment, path=None, **overrides):
    """Defaults for ``experiment``, updated by the INI file, then ``overrides``.

    Unknown sections or keys are rejected. ``None`` overrides are ignored.
    """
    cfg = defaults(experiment)
    updates = {}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        for section in parser.sections():
            for key, text in parser.items(section):
                try:
                    name, conv = _KEYS[(section, key)]
                except KeyError:
                    raise ValueError(f"unknown config key [{section}] {key}") from None
                try:
                    updates[name] = conv(text)
                except ValueError as exc:
                    raise ValueError(f"bad value for [{section}] {key}: {text!r}") from exc
    updates.update({k: v for k, v in overrides.items() if v is not None})
    return replace(cfg, **updates)
