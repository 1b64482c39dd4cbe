"""
Shapes, geodesics and first geodesic principal components
=========================================================

Four landmarks on a quadrangle are turned into pre-shapes, joined by a
geodesic, and a first geodesic principal component is fitted to noisy
shapes scattered around a known geodesic.
"""
import numpy as np

from kendall_geodesics import (
    fit_gpc,
    geodesic_through,
    point_on_geodesic,
    preshape_from_landmarks,
    rho,
    shape_distance,
    ziezold_distance,
)
from kendall_geodesics.monte_carlo import random_pregeodesic, sample_shapes_on_geodesic

rng = np.random.default_rng(1)

# a square and a kite, given as (x, y) landmark pairs
square = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
kite = np.array([[0, 2], [-1, 0], [0, -1], [1, 0]], dtype=float)
z1 = preshape_from_landmarks(square)
z2 = preshape_from_landmarks(kite)
print("shape distance square-kite:", shape_distance(z1, z2))

# translating, scaling or rotating the kite does not change its shape
turned = 3.0 * kite @ np.array([[0, -1], [1, 0]]) + 5.0
print("after a similarity transform:", shape_distance(z2, preshape_from_landmarks(turned)))

# the geodesic through both passes through each of them
g = geodesic_through(z1, z2)
print("rho of the endpoints:", rho(z1, g), rho(z2, g))

# halfway along, the shape is equally far from both
mid = point_on_geodesic(g, 0.5 * shape_distance(z1, z2))
print("midpoint distances:", shape_distance(mid, z1), shape_distance(mid, z2))

# noisy shapes around a random geodesic and the fitted component
truth = random_pregeodesic(rng, 4)
shapes = sample_shapes_on_geodesic(truth, rng.uniform(-0.6, 0.6, 200), 0.01, rng)
fit = fit_gpc(shapes, restarts=3, seed=0)
print(f"GPC objective per shape: {fit.objective / len(shapes):.2e} "
      f"(noise floor about {3 * 0.01 ** 2:.1e})")
print("distance of the fit to the truth:", ziezold_distance(fit.geodesic, truth))
