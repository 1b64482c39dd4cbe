"""Geodesics of planar shape space and first geodesic principal components.

A geodesic is represented by a pre-geodesic ``(x, v)``: a horizontal great
circle ``x cos t + v sin t`` on the pre-shape sphere with
``<x,x> = <v,v> = 1`` and ``<x,v> = <x,iv> = 0``.  Equivalently ``[x v]`` is an
orthonormal 2-frame of complex (k-1)-space.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    AntipodalShapes,
    DegenerateDirection,
    IdenticalShapes,
    NonUniqueFoot,
)
from .shape_core import (
    align_rotation,
    cinner,
    inner,
    norm,
    procrustes_mean,
    shape_distance,
    tangent_residual,
)


@dataclass(frozen=True, eq=False)
class PreGeodesic:
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=complex))

    @property
    def k(self) -> int:
        return self.x.size + 1

    @property
    def quotient_dim(self) -> int:
        """Dimension 4k - 10 of the space of shape-space geodesics."""
        return 4 * self.k - 10

    def constraint_residual(self) -> np.ndarray:
        """The constraint map ``(1-<x,x>, 1-<v,v>, 2<x,v>, 2<x,iv>)``."""
        x, v = self.x, self.v
        return np.array([1 - inner(x, x), 1 - inner(v, v), 2 * inner(x, v), 2 * inner(x, 1j * v)])

    def as_real(self) -> np.ndarray:
        """Stack as ``[Re x, Im x, Re v, Im v]`` in R^{4(k-1)}."""
        return np.concatenate([self.x.real, self.x.imag, self.v.real, self.v.imag])

    @classmethod
    def from_real(cls, vec) -> "PreGeodesic":
        m = len(vec) // 4
        return cls(vec[:m] + 1j * vec[m:2 * m], vec[2 * m:3 * m] + 1j * vec[3 * m:])

    def __iter__(self):
        return iter((self.x, self.v))

    def __repr__(self):
        return f"PreGeodesic(k={self.k}, x={np.round(self.x, 4)}, v={np.round(self.v, 4)})"


def make_pregeodesic(x, v) -> PreGeodesic:
    """Gram-Schmidt a pair into a pre-geodesic."""
    x = np.asarray(x, dtype=complex)
    v = np.asarray(v, dtype=complex)
    nx = norm(x)
    if not nx > 0:
        raise DegenerateDirection("base point has zero norm")
    x = x / nx
    # removing the complex projection removes both <v,x> and <v,ix> components
    r = v - cinner(v, x) * x
    nr = norm(r)
    if nr < 1e-12 * max(norm(v), 1.0):
        raise DegenerateDirection("direction lies in the real span of x and ix")
    return PreGeodesic(x, r / nr)


def point_on_geodesic(g: PreGeodesic, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)[..., None]
    return np.cos(t) * g.x + np.sin(t) * g.v


def _rho_parts(p, x, v):
    # p may be (n, k-1); returns the quantities of the closed form
    ip = 1j * np.asarray(p)
    a, b = inner(p, x), inner(ip, x)
    c, d = inner(p, v), inner(ip, v)
    A2 = a * a + c * c
    B2 = b * b + d * d
    D = 2 * (a * b + c * d)
    half = 0.5 * (A2 - B2)
    amp = np.hypot(half, 0.5 * D)
    return a, b, c, d, A2, B2, D, amp


def _rho_from_parts(p, x, v, parts):
    # the closed form gives the optimal rotation s; rho is then measured from
    # the residual of e^{is} p off the plane of the great circle, which stays
    # accurate near zero where arccos(sqrt(m)) loses half the digits
    a, b, c, d, A2, B2, D, _ = parts
    s = 0.5 * np.arctan2(D, A2 - B2)
    cs, sn = np.cos(s), np.sin(s)
    qx = a * cs + b * sn
    qv = c * cs + d * sn
    q = np.exp(1j * s)[..., None] * p
    r = q - qx[..., None] * x - qv[..., None] * v
    out = np.arctan2(np.sqrt(inner(r, r)), np.hypot(qx, qv))
    return out, s, q, qx, qv


def rho(p, g: PreGeodesic):
    """Distance in shape space from the shape of ``p`` to the geodesic ``g``.

    Vectorised over leading axes of ``p``.
    """
    p = np.asarray(p, dtype=complex)
    return _rho_from_parts(p, g.x, g.v, _rho_parts(p, g.x, g.v))[0]


class FootPoint(NamedTuple):
    t: float
    s: float


def foot_point(p, g: PreGeodesic) -> FootPoint:
    """Arc parameter ``t`` of the nearest geodesic point and optimal rotation ``s``.

    ``point_on_geodesic(g, t)`` is the point of the great circle nearest to
    ``e^{is} p``.
    """
    a, b, c, d, A2, B2, D, amp = _rho_parts(p, g.x, g.v)
    if amp < 1e-10:
        raise NonUniqueFoot("the optimal rotation of p is not unique")
    s = 0.5 * np.arctan2(D, A2 - B2)
    cs, sn = np.cos(s), np.sin(s)
    alpha = a * cs + b * sn
    beta = c * cs + d * sn
    if np.hypot(alpha, beta) < 1e-10:
        raise NonUniqueFoot("p is orthogonal to the great circle")
    t = np.arctan2(beta, alpha)
    return FootPoint(float(np.mod(t, 2 * np.pi)), float(s))


def geodesic_through(p1, p2) -> PreGeodesic:
    """The unique geodesic joining two shapes closer than pi/2."""
    dist = shape_distance(p1, p2)
    if dist < 1e-12:
        raise IdenticalShapes("shapes coincide; geodesic not determined")
    if dist >= np.pi / 2 - 1e-10:
        raise AntipodalShapes("shapes are at maximal distance; geodesic not unique")
    p1 = np.asarray(p1, dtype=complex)
    aligned = align_rotation(p1, p2).aligned
    return make_pregeodesic(p1, aligned)


# ---------------------------------------------------------------------------
# first geodesic principal component


def gpc_objective(shapes, g: PreGeodesic) -> float:
    return float(np.sum(rho(shapes, g) ** 2))


def _objective_and_grad(P, x, v):
    """Sum of squared rho and its Euclidean gradient in (x, v)."""
    r, s, q, qx, qv = _rho_from_parts(P, x, v, _rho_parts(P, x, v))
    f = float(np.sum(r * r))
    sc = np.sin(r) * np.cos(r)
    # d(rho^2)/dm = -rho / (sin rho cos rho), which tends to -1 as rho -> 0
    dm = np.where(r > 1e-8, -r / np.where(sc > 0, sc, 1.0), -1.0)
    gx = np.sum((2 * dm * qx)[:, None] * q, axis=0)
    gv = np.sum((2 * dm * qv)[:, None] * q, axis=0)
    return f, gx, gv


def directional_derivative_fd(shapes, g: PreGeodesic, dx, dv, h: float = 1e-6) -> float:
    """Central difference of the objective along ``(dx, dv)`` through the retraction."""
    fp = gpc_objective(shapes, make_pregeodesic(g.x + h * dx, g.v + h * dv))
    fm = gpc_objective(shapes, make_pregeodesic(g.x - h * dx, g.v - h * dv))
    return (fp - fm) / (2 * h)


def tangent_project(g: PreGeodesic, dx, dv):
    """Orthogonal projection of an ambient pair onto the tangent space at ``g``."""
    Z = np.stack([g.x, g.v], axis=1)
    G = np.stack([np.asarray(dx, dtype=complex), np.asarray(dv, dtype=complex)], axis=1)
    ZG = Z.conj().T @ G
    G = G - Z @ (0.5 * (ZG + ZG.conj().T))
    return G[:, 0], G[:, 1]


def riemannian_gradient(shapes, g: PreGeodesic):
    """Objective and gradient projected to the tangent space of the 2-frames."""
    f, gx, gv = _objective_and_grad(np.atleast_2d(shapes), g.x, g.v)
    return (f, *tangent_project(g, gx, gv))


@dataclass
class GpcFit:
    geodesic: PreGeodesic
    objective: float
    residuals: np.ndarray
    foot_params: np.ndarray
    wellposed: bool
    converged: bool = True
    iterations: int = 0
    history: list = field(default_factory=list)
    restart_objectives: list = field(default_factory=list)


def _initial_geodesic(P) -> PreGeodesic:
    m = procrustes_mean(P)
    R = np.array([tangent_residual(m, z) for z in P])
    Rr = np.concatenate([R.real, R.imag], axis=1)
    _, _, vt = np.linalg.svd(Rr, full_matrices=False)
    half = P.shape[1]
    return make_pregeodesic(m, vt[0, :half] + 1j * vt[0, half:])


def _descend(P, g, max_iter, rtol):
    """Riemannian gradient descent with BB steps and Armijo backtracking."""
    n = P.shape[0]
    f, gx, gv = riemannian_gradient(P, g)
    history = [f]
    step = 1.0 / n
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        gn2 = inner(gx, gx) + inner(gv, gv)
        if f < 1e-28 or gn2 < 1e-30:
            converged = True
            break
        if prev is not None:
            sx, sv, yx, yv = prev
            sy = inner(sx, yx) + inner(sv, yv)
            if sy > 0:
                step = (inner(sx, sx) + inner(sv, sv)) / sy
        alpha = step
        while True:
            cand = make_pregeodesic(g.x - alpha * gx, g.v - alpha * gv)
            fc = gpc_objective(P, cand)
            if fc <= f - 1e-4 * alpha * gn2 or alpha < 1e-20:
                break
            alpha *= 0.5
        if fc > f:
            converged = True
            break
        fc, ngx, ngv = riemannian_gradient(P, cand)
        prev = (cand.x - g.x, cand.v - g.v, ngx - gx, ngv - gv)
        decrease = f - fc
        g, f, gx, gv = cand, fc, ngx, ngv
        history.append(f)
        if decrease <= rtol * max(history[-2], 1e-300):
            converged = True
            break
    return g, f, history, converged, it


def _finish(P, g, f, history, converged, it):
    res = rho(P, g)
    feet = []
    for p in P:
        try:
            feet.append(foot_point(p, g).t)
        except NonUniqueFoot:
            feet.append(np.nan)
    return GpcFit(
        geodesic=g,
        objective=float(np.sum(res ** 2)),
        residuals=res,
        foot_params=np.array(feet),
        wellposed=bool(np.all(res < np.pi / 4)),
        converged=converged,
        iterations=it,
        history=history,
    )


def fit_gpc(
    shapes: Sequence,
    restarts: int = 3,
    seed: int = 0,
    max_iter: int = 500,
    rtol: float = 1e-12,
    start: PreGeodesic | None = None,
) -> GpcFit:
    """First geodesic principal component of a sample of pre-shapes.

    Starts from the Procrustes mean and the leading Procrustes residual
    direction; each of ``restarts`` extra runs starts from the geodesic through
    a random pair of data points.  The fit with the lowest objective wins.
    """
    P = np.atleast_2d(np.asarray(shapes, dtype=complex))
    if P.shape[0] < 2:
        raise ValueError("need at least two shapes")
    starts = [start if start is not None else _initial_geodesic(P)]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        i, j = rng.choice(P.shape[0], size=2, replace=False)
        try:
            starts.append(geodesic_through(P[i], P[j]))
        except (IdenticalShapes, AntipodalShapes, DegenerateDirection):
            continue
    best = None
    objectives = []
    for g0 in starts:
        fit = _finish(P, *_descend(P, g0, max_iter, rtol))
        objectives.append(fit.objective)
        if best is None or fit.objective < best.objective - 1e-15:
            best = fit
    best.restart_objectives = objectives
    if not best.converged:
        warnings.warn("fit_gpc did not converge; returning best iterate", RuntimeWarning)
    return best
