"""Long-format result tables and run manifests."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

HEADER = ("experiment", "method", "time", "value", "stderr", "K", "seed")


@dataclass(frozen=True)
class Row:
    experiment: str
    method: str
    time: float
    value: float
    stderr: float | None = None
    k: int | None = None
    seed: int | None = None

    def cells(self):
        return (
            self.experiment,
            self.method,
            _num(self.time),
            _num(self.value),
            _num(self.stderr),
            "" if self.k is None else str(self.k),
            "" if self.seed is None else str(self.seed),
        )


def _num(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


class ResultTable:
    """Rows kept sorted by (experiment, method, time)."""

    def __init__(self, rows=()):
        self.rows = []
        self.extend(rows)

    def extend(self, rows):
        self.rows.extend(rows)
        self.rows.sort(key=lambda r: (r.experiment, r.method, r.time))

    def add_curve(self, experiment, method, times, values, stderr=None, k=None, seed=None):
        err = [None] * len(times) if stderr is None else stderr
        self.extend(
            Row(experiment, method, float(t), float(v), None if e is None else float(e), k, seed)
            for t, v, e in zip(times, values, err)
        )

    def select(self, experiment=None, method=None):
        return [
            r for r in self.rows
            if (experiment is None or r.experiment == experiment)
            and (method is None or r.method == method)
        ]

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(HEADER)
            for r in self.rows:
                w.writerow(r.cells())


def read_csv(path):
    """Read a table written by :meth:`ResultTable.write_csv`."""
    def num(s):
        return None if s == "" else float(s)

    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader)) != HEADER:
            raise ValueError(f"{path}: unexpected header")
        for e, m, t, v, se, k, s in reader:
            rows.append(Row(e, m, float(t), float(v), num(se),
                            None if k == "" else int(k), None if s == "" else int(s)))
    return ResultTable(rows)


def write_manifest(path, manifest):
    text = json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False, default=_jsonable)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
