import contextlib
import time

import numpy as np
import pytest
from hypothesis import settings

from epibound import graph

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

_CRITERIA = []


@contextlib.contextmanager
def _record(cid, description):
    start = time.perf_counter()
    entry = {"id": cid, "desc": description, "status": "FAIL", "detail": ""}
    _CRITERIA.append(entry)
    try:
        yield entry
    except pytest.skip.Exception as exc:
        entry["status"] = "SKIP"
        entry["detail"] = str(exc)
        raise
    except pytest.xfail.Exception as exc:
        # a known-unattainable criterion: reported as FAIL with the numbers
        entry["detail"] = f"expected failure, {exc}"
        entry["elapsed"] = time.perf_counter() - start
        raise
    except BaseException:
        entry["elapsed"] = time.perf_counter() - start
        raise
    else:
        if entry["status"] == "FAIL" and not entry["detail"]:
            entry["status"] = "PASS"
        entry["elapsed"] = time.perf_counter() - start


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for e in sorted(_CRITERIA, key=lambda e: e["id"]):
        took = f" ({e['elapsed']:.1f}s)" if "elapsed" in e else ""
        detail = f" -- {e['detail']}" if e["detail"] else ""
        tr.write_line(f"[{e['status']}] criterion {e['id']:>2}: {e['desc']}{took}{detail}")


@pytest.fixture
def triangle():
    return graph.complete_graph(3)


@pytest.fixture
def path2():
    return graph.path_graph(2)


@pytest.fixture
def path3():
    return graph.path_graph(3)


@pytest.fixture
def star4():
    return graph.star_graph(4)


@pytest.fixture
def er20():
    return graph.connected_erdos_renyi(20, 4, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
