"""Ziezold distance between geodesics and the Ziezold mean geodesic.

Pre-geodesics ``P = (x, v)`` are compared by the Euclidean distance
``d(P, Q)^2 = |x - y|^2 + |v - w|^2`` of the ambient pair space; the Ziezold
distance minimises ``d`` over the left action of the unit circle
(``h_t: P -> e^{it} P``) and the right action of O(2) rotating/reflecting the
frame ``(x, v)`` within its plane.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateProjection
from .geodesic_space import PreGeodesic
from .shape_core import inner

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class GroupElement:
    """``h_t`` from the left together with ``g_{phi, eps}`` from the right."""

    t: float = 0.0
    phi: float = 0.0
    eps: int = 1

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        object.__setattr__(self, "t", float(np.mod(self.t, TWO_PI)))
        object.__setattr__(self, "phi", float(np.mod(self.phi, TWO_PI)))

    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.phi), np.sin(self.phi)
        return np.array([[c, -self.eps * s], [s, self.eps * c]])

    def inverse(self) -> "GroupElement":
        # g_{phi,+1}^{-1} = g_{-phi,+1}; reflections are involutions
        if self.eps == 1:
            return GroupElement(-self.t, -self.phi, 1)
        return GroupElement(-self.t, self.phi, -1)

    def then(self, other: "GroupElement") -> "GroupElement":
        """The element acting as ``self`` followed by ``other``."""
        m = self.matrix() @ other.matrix()
        eps = int(round(np.linalg.det(m)))
        return GroupElement(self.t + other.t, np.arctan2(m[1, 0], m[0, 0]), eps)

    @classmethod
    def random(cls, rng) -> "GroupElement":
        return cls(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI), int(rng.choice([-1, 1])))


def _act(t, phi, eps, y, w):
    c, s = np.cos(phi), np.sin(phi)
    h = np.exp(1j * t)
    return h * (y * c + w * s), h * eps * (w * c - y * s)


def apply_group(g: GroupElement, P: PreGeodesic) -> PreGeodesic:
    return PreGeodesic(*_act(g.t, g.phi, g.eps, P.x, P.v))


def ambient_distance(P, Q) -> float:
    """Euclidean distance of the pairs in C^{k-1} x C^{k-1}."""
    (x, v), (y, w) = P, Q
    dx = np.asarray(x) - np.asarray(y)
    dv = np.asarray(v) - np.asarray(w)
    return float(np.sqrt(inner(dx, dx) + inner(dv, dv)))


class Position(NamedTuple):
    aligned: PreGeodesic
    g: GroupElement
    dist: float


_DEGENERATE = 1e-12
_FALLBACK_GRID = np.linspace(0, np.pi, 16, endpoint=False)


def _coefficients(x, v, Y, W, eps):
    A = inner(x, Y) + eps * inner(v, W)
    B = inner(x, W) - eps * inner(v, Y)
    C = inner(x, 1j * Y) + eps * inner(v, 1j * W)
    D = inner(x, 1j * W) - eps * inner(v, 1j * Y)
    return A, B, C, D


def _candidate_angles(A, B, C, D):
    """Stationary rotation angles t from the quadratic in tan t.

    Returns (J, 4 + len(grid)) angles and a mask of which are admissible.
    """
    ab = A * C + B * D
    diff = A * A + B * B - C * C - D * D
    regular = np.abs(ab) > _DEGENERATE
    safe = np.where(regular, ab, 1.0)
    alpha = -diff / (2 * safe)
    # roots of tan^2 t - 2 alpha tan t - 1 = 0; product of roots is -1
    r1 = alpha + np.where(alpha >= 0, 1.0, -1.0) * np.sqrt(alpha * alpha + 1)
    t1 = np.arctan(r1)
    t2 = np.arctan(-1.0 / r1)
    roots = np.stack([t1, t1 + np.pi, t2, t2 + np.pi], axis=-1)
    axis = np.broadcast_to(np.array([0.0, np.pi, 0.0, np.pi]), roots.shape)
    roots = np.where(regular[:, None], roots, axis)
    grid = np.broadcast_to(_FALLBACK_GRID, (A.shape[0], _FALLBACK_GRID.size))
    cands = np.concatenate([roots, grid], axis=1)
    arbitrary = (~regular) & (np.abs(diff) <= _DEGENERATE)
    mask = np.ones(cands.shape, dtype=bool)
    mask[:, 4:] = arbitrary[:, None]
    return cands, mask


def _optimal_position_batch(x, v, Y, W):
    """Vectorised optimal positioning of the rows ``(Y_j, W_j)`` to ``(x, v)``."""
    Y = np.atleast_2d(Y)
    W = np.atleast_2d(W)
    J = Y.shape[0]
    best_val = np.full(J, -np.inf)
    best_t = np.zeros(J)
    best_phi = np.zeros(J)
    best_eps = np.ones(J, dtype=int)
    for eps in (1, -1):
        A, B, C, D = _coefficients(x, v, Y, W, eps)
        cands, mask = _candidate_angles(A, B, C, D)
        ct, st = np.cos(cands), np.sin(cands)
        u1 = A[:, None] * ct + C[:, None] * st
        u2 = B[:, None] * ct + D[:, None] * st
        val = np.where(mask, np.hypot(u1, u2), -np.inf)
        j = np.argmax(val, axis=1)
        rows = np.arange(J)
        v_best = val[rows, j]
        better = v_best > best_val
        best_val = np.where(better, v_best, best_val)
        best_t = np.where(better, cands[rows, j], best_t)
        best_phi = np.where(better, np.arctan2(u2[rows, j], u1[rows, j]), best_phi)
        best_eps = np.where(better, eps, best_eps)
    Ys, Ws = _act(best_t[:, None], best_phi[:, None], best_eps[:, None], Y, W)
    dist = np.sqrt(inner(x - Ys, x - Ys) + inner(v - Ws, v - Ws))
    return Ys, Ws, best_t, best_phi, best_eps, dist


def optimal_position(P: PreGeodesic, Q: PreGeodesic) -> Position:
    """Group translate of ``Q`` closest to ``P`` in the ambient metric."""
    Ys, Ws, t, phi, eps, dist = _optimal_position_batch(P.x, P.v, Q.x[None], Q.v[None])
    g = GroupElement(t[0], phi[0], int(eps[0]))
    return Position(PreGeodesic(Ys[0], Ws[0]), g, float(dist[0]))


def ziezold_distance(P: PreGeodesic, Q: PreGeodesic) -> float:
    return optimal_position(P, Q).dist


def frechet_objective(inputs: Sequence[PreGeodesic], candidate: PreGeodesic) -> float:
    X, V = _stack(inputs)
    *_, dist = _optimal_position_batch(candidate.x, candidate.v, X, V)
    return float(np.sum(dist ** 2))


# ---------------------------------------------------------------------------
# projection onto the pre-geodesics


def project_to_pregeodesics(x, v) -> PreGeodesic:
    """Nearest pre-geodesic to an arbitrary ambient pair.

    The pre-geodesics are exactly the orthonormal complex 2-frames, so the
    nearest point in Frobenius norm is the unitary polar factor of ``[x v]``.
    """
    M = np.stack([np.asarray(x, dtype=complex), np.asarray(v, dtype=complex)], axis=1)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise DegenerateProjection("x and v are complex-linearly dependent; projection not unique")
    Z = U @ Vh
    return PreGeodesic(Z[:, 0], Z[:, 1])


def kkt_residual(x, v, P: PreGeodesic) -> float:
    """Residual of the Lagrange conditions for projecting ``(x, v)`` onto ``P``.

    Stationarity holds iff ``[x v]`` lies in the span of the frame and the
    multiplier matrix ``Z^H [x v]`` is Hermitian.
    """
    M = np.stack([np.asarray(x, dtype=complex), np.asarray(v, dtype=complex)], axis=1)
    Z = np.stack([P.x, P.v], axis=1)
    L = Z.conj().T @ M
    perp = M - Z @ L
    return float(np.linalg.norm(perp) + np.linalg.norm(L - L.conj().T))


def fixed_point_residual(x, v, P: PreGeodesic) -> float:
    """Residual of the coordinate-wise fixed-point equations of the projection."""
    x = np.asarray(x, dtype=complex)
    v = np.asarray(v, dtype=complex)
    z, e = P.x, P.v
    rz = x - inner(x, e) * e - inner(x, 1j * e) * 1j * e - inner(x, z) * z
    re = v - inner(v, z) * z - inner(v, 1j * z) * 1j * z - inner(v, e) * e
    return float(np.sqrt(inner(rz, rz) + inner(re, re)))


def alternating_projection(x, v, max_iter: int = 1000, tol: float = 1e-12) -> PreGeodesic:
    """Alternate the two fixed-point equations (block-coordinate descent).

    Each half-step solves for one vector with the other held fixed.  Its limit
    satisfies the fixed-point equations but need not be the nearest
    pre-geodesic; :func:`project_to_pregeodesics` is the exact projection.
    """
    x = np.asarray(x, dtype=complex)
    v = np.asarray(v, dtype=complex)
    z = x / np.sqrt(inner(x, x))
    e = v - np.vdot(z, v) * z
    ne = np.sqrt(inner(e, e))
    if ne < 1e-12:
        raise DegenerateProjection("v lies in the complex span of x")
    e = e / ne
    for _ in range(max_iter):
        uz = x - np.vdot(e, x) * e
        nz = np.sqrt(inner(uz, uz))
        ue = v - np.vdot(uz / nz, v) * (uz / nz)
        ne = np.sqrt(inner(ue, ue))
        if nz < 1e-14 or ne < 1e-14:
            raise DegenerateProjection("a multiplier vanished; projection is arbitrary")
        z_new, e_new = uz / nz, ue / ne
        change = np.sqrt(inner(z_new - z, z_new - z) + inner(e_new - e, e_new - e))
        z, e = z_new, e_new
        if change < tol:
            return PreGeodesic(z, e)
    raise RuntimeError("alternating projection did not converge")


# ---------------------------------------------------------------------------
# mean geodesic


@dataclass
class ZiezoldMeanResult:
    mean: PreGeodesic
    objective: float
    iterations: int
    aligned_inputs: list
    converged: bool
    history: list = field(default_factory=list)
    start_index: int = 0
    start_objectives: list = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        h = np.asarray(self.history)
        return bool(np.all(np.diff(h) <= 1e-12 * np.maximum(h[:-1], 1.0)))


def _stack(inputs):
    X = np.array([np.asarray(P.x, dtype=complex) for P in inputs])
    V = np.array([np.asarray(P.v, dtype=complex) for P in inputs])
    return X, V


def _iterate_mean(X, V, start: PreGeodesic, max_iter, tol):
    P = start
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Ys, Ws, *_, dist = _optimal_position_batch(P.x, P.v, X, V)
        history.append(float(np.sum(dist ** 2)))
        nxt = project_to_pregeodesics(Ys.mean(axis=0), Ws.mean(axis=0))
        step = ziezold_distance(P, nxt)
        P = nxt
        if step < tol:
            converged = True
            break
    Ys, Ws, *_, dist = _optimal_position_batch(P.x, P.v, X, V)
    history.append(float(np.sum(dist ** 2)))
    aligned = [PreGeodesic(y, w) for y, w in zip(Ys, Ws)]
    return ZiezoldMeanResult(P, history[-1], it, aligned, converged, history)


def mean_geodesic(
    inputs: Sequence[PreGeodesic],
    start: PreGeodesic | None = None,
    multistart: bool = False,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> ZiezoldMeanResult:
    """Ziezold mean geodesic by alternating optimal positioning and projection.

    Each iteration puts every input into optimal position to the current
    iterate, averages the pairs and projects the average back onto the
    pre-geodesics.  With ``multistart`` every input (at most 25 of them) is tried
    as the starting point and the lowest objective wins, ties going to the
    lowest index.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("empty sample")
    X, V = _stack(inputs)
    if start is not None:
        starts = [start]
    elif multistart:
        starts = inputs[:25]
    else:
        starts = inputs[:1]
    best = None
    objectives = []
    for idx, s in enumerate(starts):
        res = _iterate_mean(X, V, s, max_iter, tol)
        res.start_index = idx
        objectives.append(res.objective)
        if best is None or res.objective < best.objective * (1 - 1e-12) - 1e-15:
            best = res
    best.start_objectives = objectives
    if not best.converged:
        warnings.warn("mean_geodesic did not converge", RuntimeWarning)
    if not best.monotone:
        warnings.warn("mean_geodesic objective increased between iterations", RuntimeWarning)
    return best
