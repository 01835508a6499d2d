"""Index conventions, shared value types and errors.

Edge-indexed vectors always use the pair order (12, 13, 14, 23, 24, 34);
vertex-indexed vectors use (1, 2, 3, 4).  Internally vertices are 0-based.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_LABELS: tuple[str, ...] = ("12", "13", "14", "23", "24", "34")

# PAIR_INDEX[i, j] -> position of the unordered pair {i, j} in PAIRS (-1 on the diagonal).
PAIR_INDEX = np.full((4, 4), -1, dtype=int)
for _e, (_i, _j) in enumerate(PAIRS):
    PAIR_INDEX[_i, _j] = PAIR_INDEX[_j, _i] = _e
del _e, _i, _j


class Geometry(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"

    @classmethod
    def parse(cls, value: "Geometry | str") -> "Geometry":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown geometry {value!r}; expected 'euclidean' or 'hyperbolic'") from None


class ConfSimplexError(Exception):
    """Base class for all library errors."""


class DegenerateSimplex(ConfSimplexError):
    """Euclidean edge lengths do not span a nondegenerate tetrahedron."""


class NotRealizable(ConfSimplexError):
    """Edge lengths do not bound a hyperbolic tetrahedron."""


class QuadratureFailure(ConfSimplexError):
    pass


class NumericalInstability(ConfSimplexError):
    """A finite-difference Hessian came out too asymmetric to trust."""


class NotConverged(ConfSimplexError):
    """Newton iteration hit its iteration cap; ``result`` holds the best iterate."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class LineSearchFailure(NotConverged):
    """Damping underflowed without decreasing the residual."""


def as_lengths(lengths: Sequence[float]) -> np.ndarray:
    arr = np.asarray(lengths, dtype=float)
    if arr.shape != (6,):
        raise ValueError(f"lengths: expected 6 values in pair order 12,13,14,23,24,34, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"lengths: all six edge lengths must be finite and positive, got {arr.tolist()}")
    return arr


def as_radii(radii: Sequence[float]) -> np.ndarray:
    arr = np.asarray(radii, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"radii: expected 4 values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"radii: all four radii must be finite and positive, got {arr.tolist()}")
    return arr


def length_matrix(lengths: np.ndarray) -> np.ndarray:
    """Symmetric 4x4 matrix of edge lengths with zero diagonal."""
    m = np.zeros((4, 4))
    for e, (i, j) in enumerate(PAIRS):
        m[i, j] = m[j, i] = lengths[e]
    return m


def solid_angles(angles: Sequence[float]) -> np.ndarray:
    """Vertex solid angles ``S_i = -pi + sum_{j != i} alpha_ij``."""
    a = np.asarray(angles, dtype=float)
    return np.array([
        a[0] + a[1] + a[2],
        a[0] + a[3] + a[4],
        a[1] + a[3] + a[5],
        a[2] + a[4] + a[5],
    ]) - np.pi
