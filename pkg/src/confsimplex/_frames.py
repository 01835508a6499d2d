"""Dihedral angles from vertex-based embeddings.

Both kernels reduce to the same picture: put one vertex at the origin of
its tangent space, embed the three neighbours by a Cholesky factor of their
tangent Gram matrix, and read off each dihedral angle along an edge through
that vertex from the normals of the two incident faces.  The Euclidean and
hyperbolic kernels differ only in how the tangent Gram matrix is formed.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import PAIR_INDEX

TangentGram = Callable[[np.ndarray, int], np.ndarray]

# Base vertex used for each edge (the smaller endpoint) and its neighbours.
_OTHERS = tuple(tuple(j for j in range(4) if j != b) for b in range(4))


def frame(gram: np.ndarray) -> np.ndarray | None:
    """Rows are neighbour coordinates in canonical gauge, or None if not positive definite."""
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return None


def angles_from_frames(lmat: np.ndarray, tangent_gram: TangentGram, error: type[Exception]) -> np.ndarray:
    angles = np.empty(6)
    for base in range(3):
        ys = frame(tangent_gram(lmat, base))
        if ys is None:
            raise error(f"tangent Gram matrix at vertex {base + 1} is not positive definite")
        others = _OTHERS[base]
        vol6 = abs(np.linalg.det(ys))
        for a in range(3):
            j = others[a]
            if j < base:
                continue
            k, m = [others[c] for c in range(3) if c != a]
            ya = ys[a]
            yk = ys[others.index(k)]
            ym = ys[others.index(m)]
            n1 = np.cross(ya, yk)
            n2 = np.cross(ya, ym)
            angles[PAIR_INDEX[base, j]] = np.arctan2(np.linalg.norm(ya) * vol6, n1 @ n2)
    return angles
