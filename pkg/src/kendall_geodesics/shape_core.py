"""Planar landmark shapes as points of complex projective space.

A configuration of k planar landmarks is a complex k-vector.  Centering with
the sub-Helmert matrix gives a complex (k-1)-vector, and dividing by its norm
gives a pre-shape.  Two pre-shapes have the same shape iff they differ by a
unit complex factor.

Throughout, the real inner product of complex vectors is
``<a, b> = Re(sum(a * conj(b)))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    AlignmentUndefined,
    AllLandmarksCoincide,
    DegenerateMean,
    ZeroNorm,
)

_ALIGN_TOL = 1e-12


def inner(a, b):
    """Real inner product ``Re(sum(a * conj(b)))`` over the last axis."""
    return np.real(np.sum(np.asarray(a) * np.conj(b), axis=-1))


def cinner(a, b):
    """Complex inner product ``sum(a * conj(b))`` over the last axis."""
    return np.sum(np.asarray(a) * np.conj(b), axis=-1)


def norm(a):
    return np.sqrt(inner(a, a))


def helmert_matrix(k: int) -> np.ndarray:
    """The (k-1) x k sub-Helmert matrix.

    Row j (1-based) has j leading entries 1/sqrt(j(j+1)), then -j/sqrt(j(j+1)),
    then zeros.  Rows are orthonormal and orthogonal to the all-ones vector.
    """
    if k < 2:
        raise ValueError("need at least two landmarks")
    H = np.zeros((k - 1, k))
    for j in range(1, k):
        c = 1.0 / np.sqrt(j * (j + 1))
        H[j - 1, :j] = c
        H[j - 1, j] = -j * c
    return H


def as_configuration(landmarks) -> np.ndarray:
    """Accept complex k-vectors or real (k, 2) arrays; return complex k-vector."""
    z = np.asarray(landmarks)
    if np.iscomplexobj(z):
        z = z.ravel()
    elif z.ndim == 2 and z.shape[1] == 2:
        z = z[:, 0] + 1j * z[:, 1]
    else:
        z = z.ravel().astype(complex)
    if z.size < 3:
        raise ValueError(f"need k >= 3 landmarks, got {z.size}")
    return z.astype(complex)


def helmert_center(landmarks) -> np.ndarray:
    """Remove translation by multiplying with the sub-Helmert matrix."""
    z = as_configuration(landmarks)
    w = helmert_matrix(z.size) @ z
    scale = max(np.max(np.abs(z)), 1.0)
    if norm(w) < 1e-14 * scale:
        raise AllLandmarksCoincide("all landmarks coincide; no pre-shape exists")
    return w


def helmert_uncenter(w) -> np.ndarray:
    """Inverse of :func:`helmert_center` onto centered k-landmark configurations."""
    w = np.asarray(w, dtype=complex)
    return helmert_matrix(w.size + 1).T @ w


def to_preshape(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    n = norm(w)
    if not n > 0:
        raise ZeroNorm("cannot normalise a zero vector")
    return w / n


def preshape_from_landmarks(landmarks) -> np.ndarray:
    return to_preshape(helmert_center(landmarks))


def shape_distance(z, w) -> float:
    """Geodesic distance in shape space, in [0, pi/2]."""
    c = np.abs(cinner(z, w))
    return np.arccos(np.clip(c, 0.0, 1.0))


class Alignment(NamedTuple):
    aligned: np.ndarray
    t: float
    undefined: bool


def align_rotation(target, z) -> Alignment:
    """Rotate ``z`` by ``e^{it}`` to maximise ``<e^{it} z, target>``.

    When ``z`` and ``target`` are complex-orthogonal every rotation is optimal;
    then ``t = 0`` and ``undefined`` is set instead of raising.
    """
    z = np.asarray(z, dtype=complex)
    c = cinner(z, target)
    if np.abs(c) < _ALIGN_TOL:
        return Alignment(z.copy(), 0.0, True)
    t = -float(np.angle(c))
    return Alignment(np.exp(1j * t) * z, t, False)


def _fix_phase(z):
    # deterministic representative: largest-modulus coordinate real positive
    j = int(np.argmax(np.abs(z)))
    return z * np.exp(-1j * np.angle(z[j]))


def procrustes_mean(shapes: Sequence) -> np.ndarray:
    """Full Procrustes mean: dominant eigenvector of ``sum_j z_j z_j^H``."""
    Z = np.atleast_2d(np.asarray(shapes, dtype=complex))
    if Z.shape[0] == 0:
        raise ValueError("empty sample")
    S = Z.T @ Z.conj()
    vals, vecs = np.linalg.eigh(S)
    if vals.size > 1 and vals[-1] - vals[-2] <= 1e-10 * abs(vals[-1]):
        raise DegenerateMean("dominant eigenvalue is not simple")
    return _fix_phase(vecs[:, -1] / np.linalg.norm(vecs[:, -1]))


def tangent_residual(mean, z) -> np.ndarray:
    """Complex Procrustes residual of ``z`` at ``mean``."""
    al = align_rotation(mean, z)
    if al.undefined:
        raise AlignmentUndefined("shape is complex-orthogonal to the mean")
    a = al.aligned
    return a - cinner(a, mean) * np.asarray(mean)


def tangent_coords(mean, z) -> np.ndarray:
    """Procrustes residual as a real vector ``[Re r, Im r]`` of length 2(k-1)."""
    r = tangent_residual(mean, z)
    return np.concatenate([r.real, r.imag])


def from_tangent_coords(mean, coords) -> np.ndarray:
    """Recover the aligned pre-shape from its Procrustes residual."""
    mean = np.asarray(mean, dtype=complex)
    m = mean.size
    r = np.asarray(coords[:m]) + 1j * np.asarray(coords[m:])
    return mean * np.sqrt(max(1.0 - inner(r, r), 0.0)) + r


def real_vec(z) -> np.ndarray:
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag], axis=-1)


def complex_vec(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = x.shape[-1] // 2
    return x[..., :m] + 1j * x[..., m:]


@dataclass
class GrowthSeries:
    """Time-ordered pre-shapes of one growing object."""

    leaf_id: str
    group: str
    times: np.ndarray
    shapes: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        shapes = np.atleast_2d(np.asarray(self.shapes, dtype=complex))
        if times.shape[0] != shapes.shape[0]:
            raise ValueError("times and shapes differ in length")
        if times.shape[0] < 2:
            raise ValueError(f"series {self.leaf_id!r} needs at least 2 observations")
        order = np.argsort(times, kind="stable")
        times, shapes = times[order], shapes[order]
        if np.any(np.diff(times) <= 0):
            raise ValueError(f"series {self.leaf_id!r} has repeated time stamps")
        self.times, self.shapes = times, shapes

    def __len__(self):
        return self.times.shape[0]

    @property
    def k(self) -> int:
        return self.shapes.shape[1] + 1
