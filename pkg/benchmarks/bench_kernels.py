"""Time the compiled and pure-Python simulation kernels on the same inputs.

Usage::

    python benchmarks/bench_kernels.py [--n 2000] [--si-replicas 50] [--sis-replicas 3]

Both kernels consume identical random inputs, so the script also checks
that they return identical results.
"""
import argparse
import time
from contextlib import contextmanager

import numpy as np

from epibound import _backend, _pykernels
from epibound.graph import barabasi_albert
from epibound.stochastic import RandomSet, run_ensemble, run_sis_ensemble

try:
    from epibound import _kernels
except ImportError:
    _kernels = None


@contextmanager
def use(module):
    saved = _backend.first_passage_batch, _backend.sis_advance
    _backend.first_passage_batch = module.first_passage_batch
    _backend.sis_advance = module.sis_advance
    try:
        yield
    finally:
        _backend.first_passage_batch, _backend.sis_advance = saved


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--si-replicas", type=int, default=50)
    ap.add_argument("--sis-replicas", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    g = barabasi_albert(args.n, 2, seed=1)
    grid = np.linspace(0.0, 40.0, 101)
    sis_grid = np.linspace(0.0, 20.0, 41)
    cases = {
        "SI first passage": lambda: run_ensemble(g, 0.05, [0], args.si_replicas, grid, 1).mean,
        "SIS Gillespie": lambda: run_sis_ensemble(
            g, 0.1, 1.0, RandomSet(args.n // 10), args.sis_replicas, sis_grid, 1).mean,
    }
    kernels = {"python": _pykernels}
    if _kernels is None:
        print("compiled kernels not built; timing the pure-Python ones only")
    else:
        kernels["cython"] = _kernels

    print(f"BA graph n={g.n} m={g.m}, best of {args.repeat}")
    for case, fn in cases.items():
        results = {}
        for name, module in kernels.items():
            with use(module):
                results[name] = timed(fn, args.repeat)
            print(f"  {case:<18} {name:<7} {results[name][0] * 1e3:10.1f} ms")
        if len(results) == 2:
            py, cy = results["python"], results["cython"]
            same = np.array_equal(py[1], cy[1])
            print(f"  {case:<18} speedup {py[0] / cy[0]:8.1f}x   identical output: {same}")


if __name__ == "__main__":
    main()
