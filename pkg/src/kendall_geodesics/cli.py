"""Command-line interface.

Subcommands::

    kendall-geodesics ingest-check DATA.csv
    kendall-geodesics test DATA.csv --test geodesics --groups A B [--modes young young]
    kendall-geodesics simulate CONFIG.txt --out DIR
    kendall-geodesics plot-data DATA.csv --which geodesics --out FILE.csv
    kendall-geodesics version

Exit status is 0 on success, 1 when a computation fails and 2 for usage,
input or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import Dataset, ingest
from .errors import ConfigError, InsufficientObservations, ParseError, SchemaError, ShapeError, ZeroVariance
from .inference import (
    ChartCoordinates,
    MODES,
    geodesic_tangent_coords,
    growth_direction,
    leaf_descriptor_geodesic,
    pca_reduce,
    relevant_shapes,
    test_common_directions,
    test_common_geodesics,
    test_common_means,
)
from .monte_carlo import SimConfig, consistency_csv, consistency_experiment, robustness_csv, robustness_experiment
from .shape_core import procrustes_mean, tangent_coords
from .ziezold_mean import mean_geodesic

log = logging.getLogger(__name__)

TESTS = ("geodesics", "means", "directions")
TARGETS = ("mean-geodesic", "gpc")


# ---------------------------------------------------------------------------
# tests


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj.ravel()]
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def run_test(dataset: Dataset, test: str, groupA: str, groupB: str, modeA: str = "young",
             modeB: str = "young", pca_threshold: float = 0.95, restarts: int = 3, seed: int = 0) -> dict:
    """Run one of the three two-sample tests and return a JSON-ready dict."""
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}; expected one of {TESTS}")
    for g in (groupA, groupB):
        if not dataset.group(g):
            raise SchemaError(f"group {g!r} not in dataset (have {dataset.groups()})")
    A, B = dataset.group(groupA), dataset.group(groupB)
    modes = (modeA, modeB)
    if test == "geodesics":
        res = test_common_geodesics(A, B, modes, pca_threshold, restarts, seed)
    elif test == "means":
        res = test_common_means(A, B, modes, pca_threshold)
    else:
        res = test_common_directions(A, B, modes, pca_threshold)
    diag = res.diagnostics
    series = []
    for i, leaf in enumerate(diag["leaf_ids"]):
        entry = {"leaf_id": leaf, "coordinates": diag["coordinates"][i]}
        if test == "geodesics":
            d = diag["descriptors"][i]
            entry.update(residual_objective=diag["residual_objectives"][i], descriptor={"x": d.x, "v": d.v})
        elif test == "directions":
            entry["direction"] = diag["directions"][i]
        series.append(entry)
    out = {
        "test": test,
        "groups": [groupA, groupB],
        "modes": [modeA, modeB],
        **res.as_dict(),
        "dropped": diag["dropped"],
        "series": series,
        "config": {"pca_threshold": pca_threshold, "restarts": restarts, "seed": seed,
                   "source": dataset.provenance.get("source")},
    }
    return _jsonable(out)


# ---------------------------------------------------------------------------
# simulation


def _ints(text):
    return tuple(int(t) for t in text.replace(",", " ").split())


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _pairs(text):
    out = []
    for tok in text.replace(",", " ").split():
        a, _, b = tok.partition("x")
        out.append((int(a), int(b)))
    return tuple(out)


_CONFIG_PARSERS = {
    "seed": int,
    "replicates": int,
    "sample_sizes": _pairs,
    "covariance_factors": _floats,
    "box_dims": _floats,
    "noise_sigma": float,
    "k": int,
    "consistency_ns": _ints,
    "consistency_replicates": int,
    "gpc_restarts": int,
    "t_half_range": float,
    "targets": lambda s: tuple(t.strip() for t in s.split(",") if t.strip()),
}

DEFAULT_CONFIG = """\
# simulation settings; every key except seed is optional
seed = 2013
replicates = 1000
sample_sizes = 10x10, 30x30, 10x30, 10x50
covariance_factors = 1, 3, 9
box_dims = 1, 2, 3
noise_sigma = 0.02
k = 4
consistency_ns = 25, 50, 100, 200, 400, 800
consistency_replicates = 100
gpc_restarts = 0
t_half_range = 0.6
targets = mean-geodesic, gpc
"""


def parse_config(text: str) -> tuple[SimConfig, tuple]:
    """Parse ``key = value`` lines into a :class:`SimConfig` and a target list."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = (s.strip() for s in line.partition("="))
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value", key)
        if key not in _CONFIG_PARSERS:
            raise ConfigError("unknown key", key)
        if key in values:
            raise ConfigError("duplicate key", key)
        try:
            values[key] = _CONFIG_PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"bad value {val!r} ({exc})", key) from None
    if "seed" not in values:
        raise ConfigError("missing required key", "seed")
    targets = values.pop("targets", TARGETS)
    for t in targets:
        if t not in TARGETS:
            raise ConfigError(f"unknown target {t!r}", "targets")
    try:
        cfg = SimConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc), None) from None
    return cfg, targets


def run_simulation(config_path, out_dir) -> dict:
    """Run both experiments and write robustness.csv, consistency.csv and summary.json."""
    cfg, targets = parse_config(Path(config_path).read_text())
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = robustness_experiment(cfg)
    cons = [consistency_experiment(cfg, t) for t in targets]
    (out / "robustness.csv").write_text(robustness_csv(rows))
    (out / "consistency.csv").write_text(consistency_csv(cons))
    summary = {
        "config": {f.name: getattr(cfg, f.name) for f in fields(cfg)},
        "targets": list(targets),
        "robustness": [{"n1": r.n1, "n2": r.n2, "covariance_factor": r.factor, "ks": r.ks,
                        "rejection_05": r.rejection_05} for r in rows],
        "consistency": [{"target": c.target, "slope": c.slope, "slope_se": c.slope_se,
                         "median_error": c.median_error} for c in cons],
    }
    summary = _jsonable(summary)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# ---------------------------------------------------------------------------
# plot data


def _descriptor_items(dataset, modes):
    items = []
    for s in dataset.series:
        for mode in modes:
            try:
                shapes = relevant_shapes(s, mode)
            except InsufficientObservations:
                continue
            items.append((s, mode, shapes))
    if len(items) < 2:
        raise ZeroVariance("fewer than two descriptors to display")
    return items


def tangent_coordinates(dataset: Dataset, which: str, modes=MODES, restarts: int = 3, seed: int = 0):
    """Chart coordinates of every (series, mode) descriptor and their labels."""
    items = _descriptor_items(dataset, modes)
    labels = [(s.leaf_id, s.group, mode) for s, mode, _ in items]
    if which == "geodesics":
        descs = [leaf_descriptor_geodesic(s, mode, restarts, seed) for s, mode, _ in items]
        coords = geodesic_tangent_coords(mean_geodesic(descs).mean, descs)
        return coords, labels
    mean = procrustes_mean(np.concatenate([sh for *_, sh in items]))
    resid = [np.array([tangent_coords(mean, z) for z in sh]) for *_, sh in items]
    if which == "means":
        rows = np.array([r.mean(axis=0) for r in resid])
        return ChartCoordinates(mean, rows, np.eye(rows.shape[1])), labels
    if which == "directions":
        dirs = np.array([growth_direction(r) for r in resid])
        m = dirs.mean(axis=0)
        m = m / np.linalg.norm(m)
        if np.mean(dirs @ m) < 0:
            m = -m
        rows = dirs - np.outer(dirs @ m, m)
        return ChartCoordinates(m, rows, np.eye(rows.shape[1])), labels
    raise ValueError(f"unknown descriptor {which!r}; expected one of {TESTS}")


def emit_tangent_plot_data(dataset: Dataset, which: str, modes=MODES, restarts: int = 3, seed: int = 0) -> str:
    """CSV of the two leading principal coordinates of each descriptor."""
    coords, labels = tangent_coordinates(dataset, which, modes, restarts, seed)
    try:
        X = pca_reduce(coords, threshold=1.0).matrix
    except ZeroVariance:
        X = coords.matrix
    if X.shape[1] < 2:
        X = np.hstack([X, np.zeros((X.shape[0], 2 - X.shape[1]))])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["leaf_id", "group", "mode", "pc1", "pc2"])
    for (leaf, group, mode), row in zip(labels, X):
        w.writerow([leaf, group, mode, repr(float(row[0])), repr(float(row[1]))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry point


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kendall-geodesics", description="Inference on geodesics of planar shape space.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("ingest-check", help="parse a landmark CSV and print the parse report")
    q.add_argument("data")
    q.add_argument("--out")

    q = sub.add_parser("test", help="two-sample test of growth patterns")
    q.add_argument("data")
    q.add_argument("--test", choices=TESTS, default="geodesics")
    q.add_argument("--groups", nargs=2, required=True, metavar=("A", "B"))
    q.add_argument("--modes", nargs=2, choices=MODES, default=["young", "young"], metavar=("MODE_A", "MODE_B"))
    q.add_argument("--pca-threshold", type=float, default=0.95)
    q.add_argument("--restarts", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")

    q = sub.add_parser("simulate", help="run the Monte Carlo studies from a config file")
    q.add_argument("config")
    q.add_argument("--out", required=True, help="output directory")

    q = sub.add_parser("plot-data", help="tangent-space coordinates of descriptors as CSV")
    q.add_argument("data")
    q.add_argument("--which", choices=TESTS, default="geodesics")
    q.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    q.add_argument("--restarts", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")

    sub.add_parser("version", help="print the package version")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "version":
            print(__version__)
        elif args.command == "ingest-check":
            ds = ingest(args.data)
            report = {"k": ds.k, "groups": ds.groups(), **ds.provenance["report"]}
            _write(json.dumps(report, indent=2) + "\n", args.out)
        elif args.command == "test":
            if not 0 < args.pca_threshold <= 1:
                raise ConfigError("must lie in (0, 1]", "--pca-threshold")
            ds = ingest(args.data)
            out = run_test(ds, args.test, *args.groups, *args.modes, pca_threshold=args.pca_threshold,
                           restarts=args.restarts, seed=args.seed)
            _write(json.dumps(out, indent=2) + "\n", args.out)
        elif args.command == "simulate":
            run_simulation(args.config, args.out)
        elif args.command == "plot-data":
            ds = ingest(args.data)
            _write(emit_tangent_plot_data(ds, args.which, tuple(args.modes), args.restarts, args.seed), args.out)
    except (ConfigError, ParseError, SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
