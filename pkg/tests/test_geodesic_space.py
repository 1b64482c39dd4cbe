import numpy as np
import pytest

from kendall_geodesics.errors import DegenerateDirection, IdenticalShapes, NonUniqueFoot
from kendall_geodesics.geodesic_space import (
    PreGeodesic,
    _objective_and_grad,
    directional_derivative_fd,
    fit_gpc,
    foot_point,
    geodesic_through,
    gpc_objective,
    make_pregeodesic,
    point_on_geodesic,
    rho,
    riemannian_gradient,
    tangent_project,
)
from kendall_geodesics.monte_carlo import sample_shapes_on_geodesic
from kendall_geodesics.shape_core import cinner, inner, shape_distance
from kendall_geodesics.ziezold_mean import GroupElement, apply_group, ziezold_distance

from conftest import rand_geo, rand_shape, unit


def grid_rho(p, g, n=20_000):
    ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
    q = np.exp(1j * ts)[:, None] * p
    m = inner(q, g.x) ** 2 + inner(q, g.v) ** 2
    return np.arccos(np.sqrt(np.clip(m.max(), 0, 1)))


def test_make_pregeodesic_idempotent(rng):
    g = rand_geo(rng)
    h = make_pregeodesic(g.x, g.v)
    assert np.allclose(h.x, g.x, atol=1e-14) and np.allclose(h.v, g.v, atol=1e-14)


def test_make_pregeodesic_degenerate(rng):
    x = rand_shape(rng)
    with pytest.raises(DegenerateDirection):
        make_pregeodesic(x, 1j * x)


def test_make_pregeodesic_constraints(rng):
    for k in (3, 4, 7):
        for _ in range(20):
            g = make_pregeodesic(rng.normal(size=k - 1) + 1j * rng.normal(size=k - 1),
                                 rng.normal(size=k - 1) + 1j * rng.normal(size=k - 1))
            assert np.abs(g.constraint_residual()).max() < 1e-12
            assert g.quotient_dim == 4 * k - 10


def test_point_on_geodesic(rng):
    g = rand_geo(rng)
    assert np.allclose(point_on_geodesic(g, 0.0), g.x)
    assert np.allclose(point_on_geodesic(g, np.pi / 2), g.v)
    for t in rng.uniform(-3, 3, 20):
        vel = -np.sin(t) * g.x + np.cos(t) * g.v
        assert abs(inner(point_on_geodesic(g, t), vel)) < 1e-14


def test_real_stacking_roundtrip(rng):
    g = rand_geo(rng, 6)
    h = PreGeodesic.from_real(g.as_real())
    assert np.array_equal(h.x, g.x) and np.array_equal(h.v, g.v)


def test_rho_hand_examples():
    g = PreGeodesic(unit(4, 0), unit(4, 1))
    assert rho(unit(4, 0), g) == pytest.approx(0, abs=1e-7)
    assert rho(unit(4, 2), g) == pytest.approx(np.pi / 2)
    assert rho((unit(4, 0) + unit(4, 2)) / np.sqrt(2), g) == pytest.approx(np.pi / 4)


def test_rho_grid_oracle(rng):
    for _ in range(50):
        k = int(rng.integers(3, 8))
        p, g = rand_shape(rng, k), rand_geo(rng, k)
        assert abs(rho(p, g) - grid_rho(p, g)) < 1e-6


def test_rho_vectorised(rng):
    g = rand_geo(rng)
    P = np.array([rand_shape(rng) for _ in range(5)])
    assert np.allclose(rho(P, g), [rho(p, g) for p in P])


def test_rho_invariances(rng):
    g = rand_geo(rng)
    p = rand_shape(rng)
    base = rho(p, g)
    for _ in range(100):
        s = rng.uniform(0, 2 * np.pi)
        h = apply_group(GroupElement.random(rng), g)
        assert rho(np.exp(1j * s) * p, g) == pytest.approx(base, abs=1e-10)
        assert rho(p, h) == pytest.approx(base, abs=1e-10)


def test_foot_point_on_geodesic(rng):
    g = rand_geo(rng)
    t, s = foot_point(point_on_geodesic(g, 0.4), g)
    assert np.mod(t - 0.4, np.pi) == pytest.approx(0, abs=1e-9) or np.mod(t - 0.4, np.pi) == pytest.approx(np.pi)
    assert abs(np.sin(s)) < 1e-9


def test_foot_point_equidistant():
    with pytest.raises(NonUniqueFoot):
        foot_point(unit(4, 2), PreGeodesic(unit(4, 0), unit(4, 1)))


def test_foot_point_grid_oracle(rng):
    ts = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    for _ in range(30):
        p, g = rand_shape(rng), rand_geo(rng)
        t, s = foot_point(p, g)
        c = np.abs(cinner(point_on_geodesic(g, ts), p))
        tg = ts[np.argmax(c)]
        gap = np.mod(t - tg, np.pi)
        assert min(gap, np.pi - gap) < 2 * np.pi / 1000
        assert shape_distance(point_on_geodesic(g, t), p) == pytest.approx(rho(p, g), abs=1e-10)
        # s rotates p onto the foot point's phase
        assert inner(np.exp(1j * s) * p, point_on_geodesic(g, t)) == pytest.approx(np.cos(rho(p, g)), abs=1e-10)


def test_geodesic_through(rng):
    z = rand_shape(rng)
    with pytest.raises(IdenticalShapes):
        geodesic_through(z, z)
    g = rand_geo(rng)
    h = geodesic_through(point_on_geodesic(g, 0.0), point_on_geodesic(g, 0.3))
    assert ziezold_distance(g, h) < 1e-8
    for _ in range(100):
        p1, p2 = rand_shape(rng), rand_shape(rng)
        h = geodesic_through(p1, p2)
        assert rho(p1, h) < 1e-7 and rho(p2, h) < 1e-7


def test_analytic_gradient_matches_finite_differences(rng):
    g = rand_geo(rng, 5)
    P = np.array([rand_shape(rng, 5) for _ in range(8)])
    f, gx, gv = riemannian_gradient(P, g)
    assert f == pytest.approx(gpc_objective(P, g))
    for _ in range(5):
        dx, dv = tangent_project(g, rand_shape(rng, 5), rand_shape(rng, 5))
        analytic = inner(gx, dx) + inner(gv, dv)
        assert analytic == pytest.approx(directional_derivative_fd(P, g, dx, dv), abs=1e-7)


def test_gradient_is_tangent(rng):
    g = rand_geo(rng)
    P = np.array([rand_shape(rng) for _ in range(5)])
    _, gx, gv = riemannian_gradient(P, g)
    Z = np.stack([g.x, g.v], axis=1)
    L = Z.conj().T @ np.stack([gx, gv], axis=1)
    assert np.abs(L + L.conj().T).max() < 1e-12


def test_fit_gpc_exact_data(rng):
    g = rand_geo(rng)
    shapes = point_on_geodesic(g, rng.uniform(-1, 1, 5)) * np.exp(1j * rng.uniform(0, 6, 5))[:, None]
    fit = fit_gpc(shapes)
    assert fit.objective < 1e-12
    assert ziezold_distance(fit.geodesic, g) < 1e-6
    assert fit.wellposed and fit.converged
    assert fit.objective == pytest.approx(np.sum(fit.residuals ** 2), rel=1e-12, abs=1e-30)


def test_fit_gpc_two_points(rng):
    for _ in range(5):
        p1, p2 = rand_shape(rng), rand_shape(rng)
        fit = fit_gpc([p1, p2])
        assert ziezold_distance(fit.geodesic, geodesic_through(p1, p2)) < 1e-8


def test_fit_gpc_monotone_and_noise_floor(rng):
    k, sigma, n = 4, 0.01, 200
    g = rand_geo(rng, k)
    shapes = sample_shapes_on_geodesic(g, rng.uniform(-0.6, 0.6, n), sigma, rng)
    fit = fit_gpc(shapes, restarts=2, seed=1)
    h = np.asarray(fit.history)
    assert np.all(np.diff(h) <= 1e-14)
    assert fit.objective / n <= 1.1 * sigma ** 2 * 2 * (k - 2)


def test_fit_gpc_rotation_equivariant(rng):
    g = rand_geo(rng)
    shapes = sample_shapes_on_geodesic(g, rng.uniform(-0.5, 0.5, 30), 0.02, rng)
    a = fit_gpc(shapes, seed=3).geodesic
    b = fit_gpc(np.exp(0.9j) * shapes, seed=3).geodesic
    assert ziezold_distance(a, b) < 1e-8


def test_objective_gradient_at_zero_residual(rng):
    g = rand_geo(rng)
    P = point_on_geodesic(g, np.array([0.1, 0.5]))
    f, gx, gv = _objective_and_grad(P, g.x, g.v)
    assert f < 1e-20 and np.all(np.isfinite(gx)) and np.all(np.isfinite(gv))
