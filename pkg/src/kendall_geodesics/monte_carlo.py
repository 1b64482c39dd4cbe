"""Synthetic data and simulation studies.

Every random draw comes from a generator seeded by a tuple
``(seed, experiment, cell, replicate)``, so results do not depend on the order
in which replicates are executed.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats
from scipy.spatial.transform import Rotation

from .geodesic_space import PreGeodesic, fit_gpc, make_pregeodesic, point_on_geodesic
from .inference import geodesic_chart_basis, hotelling_t2
from .shape_core import GrowthSeries, cinner
from .ziezold_mean import (
    GroupElement,
    apply_group,
    mean_geodesic,
    project_to_pregeodesics,
    ziezold_distance,
)

# stand-ins for the unpublished panel settings of the robustness figure
DEFAULT_SIZES = ((10, 10), (30, 30), (10, 30), (10, 50))
DEFAULT_FACTORS = (1.0, 3.0, 9.0)
ECDF_LEVELS = (0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)

_TARGET_CODES = {"mean-geodesic": 1, "gpc": 2}


@dataclass
class SimConfig:
    seed: int
    replicates: int = 1000
    sample_sizes: Sequence = DEFAULT_SIZES
    covariance_factors: Sequence = DEFAULT_FACTORS
    box_dims: Sequence = (1.0, 2.0, 3.0)
    noise_sigma: float = 0.02
    k: int = 4
    consistency_ns: Sequence = (25, 50, 100, 200, 400, 800)
    consistency_replicates: int = 100
    gpc_restarts: int = 0
    t_half_range: float = 0.6

    def __post_init__(self):
        if self.replicates < 1 or self.consistency_replicates < 1:
            raise ValueError("replicates must be at least 1")
        if any(min(pair) < 2 for pair in self.sample_sizes):
            raise ValueError("all sample sizes must be at least 2")
        if len(self.box_dims) != 3 or min(self.box_dims) <= 0:
            raise ValueError("box_dims must be three positive numbers")
        if self.k < 3:
            raise ValueError("k must be at least 3")


def substream(*key) -> np.random.Generator:
    return np.random.default_rng([int(k) for k in key])


# ---------------------------------------------------------------------------
# generators


def random_preshape(rng, k: int) -> np.ndarray:
    z = rng.normal(size=k - 1) + 1j * rng.normal(size=k - 1)
    return z / np.linalg.norm(z)


def random_pregeodesic(rng, k: int) -> PreGeodesic:
    m = k - 1
    return make_pregeodesic(rng.normal(size=m) + 1j * rng.normal(size=m), rng.normal(size=m) + 1j * rng.normal(size=m))


def _horizontal_noise(rng, P, sigma):
    xi = rng.normal(size=P.shape) + 1j * rng.normal(size=P.shape)
    xi = xi - cinner(xi, P)[..., None] * P
    return sigma * xi


def sample_shapes_on_geodesic(g: PreGeodesic, ts, sigma: float, rng=None) -> np.ndarray:
    """Points ``g(t)`` perturbed by isotropic horizontal tangent noise, renormalised."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    P = point_on_geodesic(g, np.asarray(ts, dtype=float))
    if sigma == 0:
        return P
    if rng is None:
        rng = np.random.default_rng()
    Z = P + _horizontal_noise(rng, P, sigma)
    return Z / np.linalg.norm(Z, axis=-1, keepdims=True)


def perturb_pregeodesic(P: PreGeodesic, sigma: float, rng, randomize_group: bool = True) -> PreGeodesic:
    """Gaussian tangent perturbation of a geodesic, optionally moved within its orbit."""
    basis = geodesic_chart_basis(P)
    amb = P.as_real() + sigma * (basis @ rng.normal(size=basis.shape[1]))
    Q = project_to_pregeodesics(*PreGeodesic.from_real(amb))
    if randomize_group:
        Q = apply_group(GroupElement.random(rng), Q)
    return Q


def geodesic_at_distance(P: PreGeodesic, delta: float, rng) -> PreGeodesic:
    """A geodesic at Ziezold distance ``delta`` from ``P`` in a random tangent direction."""
    basis = geodesic_chart_basis(P)
    u = basis @ rng.normal(size=basis.shape[1])
    u /= np.linalg.norm(u)

    def moved(s):
        return project_to_pregeodesics(*PreGeodesic.from_real(P.as_real() + s * u))

    hi = delta
    while ziezold_distance(P, moved(hi)) < delta:
        hi *= 2
        if hi > 50:
            raise ValueError(f"cannot reach Ziezold distance {delta}")
    s = optimize.brentq(lambda s: ziezold_distance(P, moved(s)) - delta, 0.0, hi, xtol=1e-14)
    return moved(s)


def sample_growth_series(
    g: PreGeodesic,
    n_series: int,
    n_obs: int,
    sigma: float,
    rng,
    group: str = "A",
    start_range=(-0.3, 0.1),
    step: float = 0.1,
    prefix: str | None = None,
) -> list[GrowthSeries]:
    """Growth series whose shapes move along ``g`` with tangent noise.

    Series ``j`` starts at a uniform arc parameter in ``start_range`` and moves
    ``step`` per observation; every shape is also given a random rotation.
    """
    out = []
    for j in range(n_series):
        t0 = rng.uniform(*start_range)
        ts = t0 + step * np.arange(n_obs)
        Z = sample_shapes_on_geodesic(g, ts, sigma, rng)
        Z = Z * np.exp(1j * rng.uniform(0, 2 * np.pi, size=n_obs))[:, None]
        out.append(GrowthSeries(f"{prefix or group}-{j:03d}", group, np.arange(n_obs, dtype=float), Z))
    return out


def synthetic_leaf_dataset(seed: int, sizes=(21, 11, 12), separation: float = 0.5, sigma: float = 0.005,
                           n_obs: int = 8, k: int = 4) -> dict:
    """Two clone groups sharing one geodesic and a reference group on another.

    The reference geodesic is at Ziezold distance ``separation`` from the
    clones' geodesic.  Both geodesics are fixed by ``seed``; the series are
    drawn from the substream ``(seed, 1)``.
    """
    rng = substream(seed, 0)
    clone = random_pregeodesic(rng, k)
    reference = geodesic_at_distance(clone, separation, rng)
    rng = substream(seed, 1)
    return {
        "clone1": sample_growth_series(clone, sizes[0], n_obs, sigma, rng, "clone1"),
        "clone2": sample_growth_series(clone, sizes[1], n_obs, sigma, rng, "clone2"),
        "reference": sample_growth_series(reference, sizes[2], n_obs, sigma, rng, "reference"),
        "geodesics": {"clone": clone, "reference": reference},
    }


def random_rotation(seed) -> np.ndarray:
    return Rotation.random(random_state=np.random.default_rng(seed)).as_matrix()


def sample_uniform_box(n: int, dims, rotation_seed, scale: float = 1.0, rng=None) -> np.ndarray:
    """Uniform deviates in a centred box of side lengths ``scale * dims``, randomly rotated.

    The population covariance is ``R diag(scale^2 dims^2 / 12) R^T``.
    """
    dims = np.asarray(dims, dtype=float)
    if dims.shape != (3,) or np.any(dims <= 0):
        raise ValueError("dims must be three positive numbers")
    if rng is None:
        rng = np.random.default_rng()
    U = (rng.uniform(size=(n, 3)) - 0.5) * dims * scale
    return U @ random_rotation(rotation_seed).T


# ---------------------------------------------------------------------------
# experiments


@dataclass
class RobustnessRow:
    n1: int
    n2: int
    factor: float
    ks: float
    rejection_05: float
    ecdf: dict
    p_values: np.ndarray = field(repr=False, default=None)


def robustness_experiment(cfg: SimConfig) -> list[RobustnessRow]:
    """Null distribution of Hotelling p-values for non-normal 3D data.

    Both groups are drawn from one randomly rotated box (rotation fixed per
    cell); group one's box is scaled so its covariance is ``factor`` times
    that of group two.
    """
    rows = []
    cell = 0
    for n1, n2 in cfg.sample_sizes:
        for factor in cfg.covariance_factors:
            cell += 1
            rot = (cfg.seed, 10, cell)
            pv = np.empty(cfg.replicates)
            for r in range(cfg.replicates):
                rng = substream(cfg.seed, 11, cell, r)
                A = sample_uniform_box(n1, cfg.box_dims, rot, np.sqrt(factor), rng)
                B = sample_uniform_box(n2, cfg.box_dims, rot, 1.0, rng)
                pv[r] = hotelling_t2(A, B).p_value
            ks = float(stats.kstest(pv, "uniform").statistic)
            ecdf = {u: float(np.mean(pv <= u)) for u in ECDF_LEVELS}
            rows.append(RobustnessRow(n1, n2, float(factor), ks, ecdf[0.05], ecdf, pv))
    return rows


def robustness_csv(rows: list[RobustnessRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n1", "n2", "covariance_factor", "level", "ecdf", "ks_distance"])
    for row in rows:
        for u, F in row.ecdf.items():
            w.writerow([row.n1, row.n2, repr(row.factor), repr(u), repr(F), repr(row.ks)])
    return buf.getvalue()


@dataclass
class ConsistencyResult:
    target: str
    ns: np.ndarray
    median_error: np.ndarray
    errors: np.ndarray = field(repr=False)
    slope: float = np.nan
    slope_se: float = np.nan


def _loglog_slope(ns, med):
    x, y = np.log(ns), np.log(med)
    res = stats.linregress(x, y)
    return float(res.slope), float(res.stderr)


def consistency_experiment(cfg: SimConfig, target: str = "mean-geodesic", sigma: float | None = None) -> ConsistencyResult:
    """Median Ziezold error of the estimated geodesic against sample size.

    ``target="mean-geodesic"`` estimates the Ziezold mean of perturbed copies of
    a fixed geodesic; ``target="gpc"`` fits the first GPC to shapes scattered
    around it.  The log-log slope of median error on n should be close to -1/2.
    """
    if target not in _TARGET_CODES:
        raise ValueError(f"unknown target {target!r}")
    ns = np.asarray(cfg.consistency_ns, dtype=int)
    if ns.size < 4 or ns.max() < 10 * ns.min():
        raise ValueError("need at least 4 sample sizes spanning a decade")
    sigma = cfg.noise_sigma if sigma is None else sigma
    code = _TARGET_CODES[target]
    truth = random_pregeodesic(substream(cfg.seed, 20, code), cfg.k)
    errors = np.empty((ns.size, cfg.consistency_replicates))
    for i, n in enumerate(ns):
        for r in range(cfg.consistency_replicates):
            rng = substream(cfg.seed, 21, code, n, r)
            if target == "mean-geodesic":
                inputs = [perturb_pregeodesic(truth, sigma, rng) for _ in range(n)]
                est = mean_geodesic(inputs).mean
            else:
                ts = rng.uniform(-cfg.t_half_range, cfg.t_half_range, size=n)
                shapes = sample_shapes_on_geodesic(truth, ts, sigma, rng)
                est = fit_gpc(shapes, restarts=cfg.gpc_restarts, seed=r).geodesic
            errors[i, r] = ziezold_distance(est, truth)
    med = np.median(errors, axis=1)
    out = ConsistencyResult(target, ns, med, errors)
    if np.all(med > 0):
        out.slope, out.slope_se = _loglog_slope(ns, med)
    return out


def consistency_csv(results: Sequence[ConsistencyResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target", "n", "median_error", "slope"])
    for res in results:
        for n, m in zip(res.ns, res.median_error):
            w.writerow([res.target, int(n), repr(float(m)), repr(res.slope)])
    return buf.getvalue()
