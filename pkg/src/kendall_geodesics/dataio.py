"""Reading and writing landmark growth data as CSV.

Schema: header ``leaf_id,group,t,x1,y1,...,xk,yk``, one row per observation.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AllLandmarksCoincide, ParseError, SchemaError
from .shape_core import GrowthSeries, helmert_uncenter, preshape_from_landmarks

log = logging.getLogger(__name__)

@dataclass
class Dataset:
    series: list
    k: int
    provenance: dict = field(default_factory=dict)

    def groups(self) -> list:
        return sorted({s.group for s in self.series})

    def group(self, name: str) -> list:
        return [s for s in self.series if s.group == name]


def _check_header(header):
    if [h.strip() for h in header[:3]] != ["leaf_id", "group", "t"]:
        raise SchemaError("header must start with leaf_id,group,t")
    coords = [h.strip() for h in header[3:]]
    if len(coords) < 6 or len(coords) % 2:
        raise SchemaError("need x1,y1,...,xk,yk with k >= 3")
    k = len(coords) // 2
    expected = [f"{a}{j}" for j in range(1, k + 1) for a in "xy"]
    if coords != expected:
        raise SchemaError(f"landmark columns must be {','.join(expected)}")
    return k


def ingest(path) -> Dataset:
    """Parse a landmark CSV into time-sorted growth series of pre-shapes."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    k = _check_header(rows[0][1])
    width = 3 + 2 * k
    report = {"rows_read": 0, "dropped_rows": [], "dropped_series": []}
    obs: dict = {}
    groups: dict = {}
    for line, r in rows[1:]:
        report["rows_read"] += 1
        if len(r) != width:
            raise SchemaError(f"line {line}: expected {width} fields for k={k}, got {len(r)}")
        leaf, group = r[0].strip(), r[1].strip()
        vals = []
        for col, cell in enumerate(r[2:], start=3):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", line, col) from None
        t, xy = vals[0], np.array(vals[1:]).reshape(k, 2)
        if groups.setdefault(leaf, group) != group:
            raise SchemaError(f"line {line}: leaf {leaf!r} appears in groups {groups[leaf]!r} and {group!r}")
        try:
            z = preshape_from_landmarks(xy)
        except AllLandmarksCoincide:
            log.warning("line %d: all landmarks coincide; row dropped", line)
            report["dropped_rows"].append({"line": line, "reason": "all landmarks coincide"})
            continue
        entries = obs.setdefault(leaf, {})
        if t in entries:
            report["dropped_rows"].append({"line": line, "reason": "duplicate time stamp"})
            continue
        entries[t] = z
    series = []
    for leaf, entries in obs.items():
        if len(entries) < 2:
            report["dropped_series"].append({"leaf_id": leaf, "reason": "fewer than 2 observations"})
            continue
        times = np.array(sorted(entries))
        series.append(GrowthSeries(leaf, groups[leaf], times, np.array([entries[t] for t in times])))
    report["series"] = len(series)
    return Dataset(series, k, {"source": str(path), "report": report})


def export_csv(series, path) -> None:
    """Write series as centred landmark configurations; :func:`ingest` reads them back."""
    series = list(series)
    if not series:
        raise ValueError("nothing to export")
    k = series[0].k
    header = ["leaf_id", "group", "t"] + [f"{a}{j}" for j in range(1, k + 1) for a in "xy"]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for s in series:
            for t, z in zip(s.times, s.shapes):
                lm = helmert_uncenter(z)
                cells = [repr(float(c)) for p in lm for c in (p.real, p.imag)]
                w.writerow([s.leaf_id, s.group, repr(float(t))] + cells)
