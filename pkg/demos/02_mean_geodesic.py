"""
Averaging geodesics
===================

Geodesics are compared after optimal positioning, which removes the
rotation of the landmarks and the choice of start point and direction along
the geodesic.  The Ziezold mean averages a sample of geodesics.
"""
import numpy as np

from kendall_geodesics import GroupElement, mean_geodesic, optimal_position, ziezold_distance
from kendall_geodesics.geodesic_space import rho
from kendall_geodesics.monte_carlo import perturb_pregeodesic, random_pregeodesic
from kendall_geodesics.ziezold_mean import ambient_distance, apply_group

rng = np.random.default_rng(2)
P = random_pregeodesic(rng, 5)

# the same geodesic, represented differently
Q = apply_group(GroupElement(t=1.0, phi=2.0, eps=-1), P)
print("ambient distance of two representatives:", ambient_distance(P, Q))
print("after optimal positioning:", optimal_position(P, Q).dist)

# shapes on P are on Q as well
shape = np.cos(0.3) * P.x + np.sin(0.3) * P.v
print("rho to the other representative:", rho(shape, Q))

# a sample of perturbed copies, each in an arbitrary representation
sample = [perturb_pregeodesic(P, 0.05, rng) for _ in range(40)]
res = mean_geodesic(sample)
print(f"mean found in {res.iterations} iterations, objective {res.objective:.4f}")
print("objective never increased:", res.monotone)
print("distance of the mean to P:", ziezold_distance(res.mean, P))
