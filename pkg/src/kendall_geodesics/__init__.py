"""Statistics on geodesics of Kendall's planar shape space.

Fit first geodesic principal components, average geodesics with the Ziezold
mean and compare growth patterns of landmark shapes with Hotelling tests.
"""
__version__ = "0.1.0"

from .errors import ShapeError
from .geodesic_space import (
    PreGeodesic,
    fit_gpc,
    foot_point,
    geodesic_through,
    make_pregeodesic,
    point_on_geodesic,
    rho,
)
from .inference import (
    hotelling_t2,
    pca_reduce,
    test_common_directions,
    test_common_geodesics,
    test_common_means,
)
from .shape_core import (
    GrowthSeries,
    helmert_center,
    preshape_from_landmarks,
    procrustes_mean,
    shape_distance,
    tangent_coords,
    to_preshape,
)
from .ziezold_mean import (
    GroupElement,
    mean_geodesic,
    optimal_position,
    project_to_pregeodesics,
    ziezold_distance,
)

__all__ = [
    "ShapeError",
    "PreGeodesic",
    "fit_gpc",
    "foot_point",
    "geodesic_through",
    "make_pregeodesic",
    "point_on_geodesic",
    "rho",
    "hotelling_t2",
    "pca_reduce",
    "test_common_directions",
    "test_common_geodesics",
    "test_common_means",
    "GrowthSeries",
    "helmert_center",
    "preshape_from_landmarks",
    "procrustes_mean",
    "shape_distance",
    "tangent_coords",
    "to_preshape",
    "GroupElement",
    "mean_geodesic",
    "optimal_position",
    "project_to_pregeodesics",
    "ziezold_distance",
]
