import numpy as np
import pytest
from scipy import stats

from kendall_geodesics.geodesic_space import rho
from kendall_geodesics.monte_carlo import (
    SimConfig,
    consistency_csv,
    consistency_experiment,
    geodesic_at_distance,
    perturb_pregeodesic,
    random_pregeodesic,
    robustness_csv,
    robustness_experiment,
    sample_growth_series,
    sample_shapes_on_geodesic,
    sample_uniform_box,
    substream,
    synthetic_leaf_dataset,
)
from kendall_geodesics.ziezold_mean import ziezold_distance

# mean rho^2 of sample_shapes_on_geodesic at k = 4, sigma = 0.01 from 10^5
# draws (seed 1); agrees with (2k - 5) sigma^2
NOISE_FLOOR_K4 = 2.99e-4


def test_substreams_are_reproducible():
    a = substream(1, 2, 3).normal(size=5)
    assert np.array_equal(a, substream(1, 2, 3).normal(size=5))
    assert not np.array_equal(a, substream(1, 2, 4).normal(size=5))


def test_noise_free_samples_lie_on_geodesic(rng):
    g = random_pregeodesic(rng, 5)
    Z = sample_shapes_on_geodesic(g, rng.uniform(-1, 1, 50), 0.0, rng)
    assert np.max(rho(Z, g)) < 1e-12
    Z = sample_shapes_on_geodesic(g, rng.uniform(-1, 1, 50), 0.1, rng)
    assert np.allclose(np.linalg.norm(Z, axis=1), 1.0)


def test_noise_floor(rng):
    g = random_pregeodesic(rng, 4)
    Z = sample_shapes_on_geodesic(g, rng.uniform(-1, 1, 10_000), 0.01, rng)
    assert 0.5 * NOISE_FLOOR_K4 <= np.mean(rho(Z, g) ** 2) <= 1.5 * NOISE_FLOOR_K4


def test_equal_parameters_are_exchangeable(rng):
    g = random_pregeodesic(rng, 4)
    Z = sample_shapes_on_geodesic(g, np.full(2000, 0.3), 0.05, rng)
    r = rho(Z, g)
    assert stats.ks_2samp(r[:1000], r[1000:]).pvalue > 0.001
    assert stats.ks_2samp(r[::2], r[1::2]).pvalue > 0.001


def test_uniform_box_moments(rng):
    X = sample_uniform_box(100_000, (1, 1, 1), 5, 1.0, rng)
    assert np.allclose(np.cov(X.T), np.eye(3) / 12, atol=0.05 / 12)
    assert np.all(np.abs(X.mean(0)) < 3 * np.sqrt(1 / 12) / np.sqrt(X.shape[0]))
    dims = (1.0, 2.0, 3.0)
    C1 = np.cov(sample_uniform_box(100_000, dims, 9, 1.0, substream(1)).T)
    C3 = np.cov(sample_uniform_box(100_000, dims, 9, 3.0, substream(1)).T)
    assert np.allclose(C3, 9 * C1, rtol=1e-10)


def test_uniform_box_rejects_bad_dims():
    with pytest.raises(ValueError):
        sample_uniform_box(5, (1, -1, 1), 0)


def test_simconfig_validation():
    with pytest.raises(ValueError):
        SimConfig(seed=0, replicates=0)
    with pytest.raises(ValueError):
        SimConfig(seed=0, sample_sizes=((1, 5),))
    with pytest.raises(ValueError):
        SimConfig(seed=0, k=2)


def test_geodesic_at_distance(rng):
    P = random_pregeodesic(rng, 4)
    for delta in (0.05, 0.5, 1.0):
        assert ziezold_distance(P, geodesic_at_distance(P, delta, rng)) == pytest.approx(delta, abs=1e-10)


def test_perturbation_is_feasible(rng):
    P = random_pregeodesic(rng, 6)
    Q = perturb_pregeodesic(P, 0.1, rng)
    assert np.abs(Q.constraint_residual()).max() < 1e-12


def test_growth_series_and_leaf_dataset(rng):
    g = random_pregeodesic(rng, 4)
    series = sample_growth_series(g, 3, 5, 0.0, rng, "G")
    assert [s.leaf_id for s in series] == ["G-000", "G-001", "G-002"]
    assert all(np.max(rho(s.shapes, g)) < 1e-12 for s in series)
    d = synthetic_leaf_dataset(4)
    assert (len(d["clone1"]), len(d["clone2"]), len(d["reference"])) == (21, 11, 12)
    assert ziezold_distance(d["geodesics"]["clone"], d["geodesics"]["reference"]) == pytest.approx(0.5, abs=1e-10)


def test_robustness_deterministic_and_shaped():
    cfg = SimConfig(seed=11, replicates=50, sample_sizes=((10, 10), (10, 30)), covariance_factors=(1.0, 9.0))
    a, b = robustness_experiment(cfg), robustness_experiment(cfg)
    assert robustness_csv(a) == robustness_csv(b)
    assert len(a) == 4
    for row in a:
        assert 0 <= row.ks <= 1 and row.p_values.shape == (50,)
        assert row.ecdf[0.05] == row.rejection_05


def test_consistency_noise_free():
    cfg = SimConfig(seed=2, consistency_ns=(5, 10, 20, 50), consistency_replicates=3)
    for target in ("mean-geodesic", "gpc"):
        res = consistency_experiment(cfg, target, sigma=0.0)
        assert np.all(res.errors < 1e-6)


def test_consistency_slope_stable_under_more_replicates():
    # the 40-replicate run uses a subset of the 80-replicate streams
    ns = (10, 20, 40, 80, 160)
    a = consistency_experiment(SimConfig(seed=5, consistency_ns=ns, consistency_replicates=40), "gpc")
    b = consistency_experiment(SimConfig(seed=5, consistency_ns=ns, consistency_replicates=80), "gpc")
    assert np.array_equal(a.errors, b.errors[:, :40])
    assert abs(a.slope - b.slope) <= 2 * max(a.slope_se, b.slope_se)
    assert consistency_csv([a]).splitlines()[0] == "target,n,median_error,slope"


def test_consistency_rejects_bad_input():
    with pytest.raises(ValueError):
        consistency_experiment(SimConfig(seed=0), "intrinsic")
    with pytest.raises(ValueError):
        consistency_experiment(SimConfig(seed=0, consistency_ns=(10, 20, 30, 40)), "gpc")
