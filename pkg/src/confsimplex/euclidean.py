"""Euclidean tetrahedra from their six edge lengths."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._frames import angles_from_frames, frame
from .core import DegenerateSimplex, as_lengths, length_matrix

DEGENERACY_RTOL = 1e-12


def cayley_menger_det(lengths: Sequence[float]) -> float:
    """Bordered Cayley-Menger determinant; equals ``288 * vol**2``.

    Positive exactly when the lengths embed as a nondegenerate tetrahedron.
    Homogeneous of degree 6 in the lengths.
    """
    l = np.asarray(lengths, dtype=float)
    cm = np.ones((5, 5))
    cm[0, 0] = 0.0
    cm[1:, 1:] = length_matrix(l) ** 2
    return float(np.linalg.det(cm))


def _check(l: np.ndarray) -> None:
    det = cayley_menger_det(l)
    if det <= DEGENERACY_RTOL * np.mean(l) ** 6:
        raise DegenerateSimplex(f"Cayley-Menger determinant {det:.3e} is not positive for lengths {l.tolist()}")


def is_realizable(lengths: Sequence[float]) -> bool:
    try:
        _check(as_lengths(lengths))
    except DegenerateSimplex:
        return False
    return True


def volume_euclidean(lengths: Sequence[float]) -> float:
    l = as_lengths(lengths)
    _check(l)
    return float(np.sqrt(cayley_menger_det(l) / 288.0))


def tangent_gram(lmat: np.ndarray, base: int) -> np.ndarray:
    """Gram matrix of the edge vectors leaving vertex ``base``."""
    others = [j for j in range(4) if j != base]
    d = lmat[base, others]
    sq = lmat[np.ix_(others, others)] ** 2
    return 0.5 * (d[:, None] ** 2 + d[None, :] ** 2 - sq)


def embed_euclidean(lengths: Sequence[float]) -> np.ndarray:
    """Vertex coordinates as a 4x3 array.

    Vertex 1 sits at the origin, vertex 2 on the positive x axis, vertex 3
    in the upper half of the xy plane and vertex 4 above that plane.
    """
    l = as_lengths(lengths)
    _check(l)
    ys = frame(tangent_gram(length_matrix(l), 0))
    if ys is None:
        raise DegenerateSimplex(f"edge-vector Gram matrix is not positive definite for lengths {l.tolist()}")
    return np.vstack([np.zeros(3), ys])


def dihedral_angles_euclidean(lengths: Sequence[float]) -> np.ndarray:
    """Interior dihedral angles in pair order 12, 13, 14, 23, 24, 34."""
    l = as_lengths(lengths)
    _check(l)
    return angles_from_frames(length_matrix(l), tangent_gram, DegenerateSimplex)
