"""Hyperbolic tetrahedra (curvature -1) from their six edge lengths.

Vertices live on the hyperboloid ``<v, v> = -1`` with Minkowski form of
signature (-, +, +, +).  Everything near-Euclidean is computed from
``cosh(l) - 1 = 2 sinh(l/2)**2`` so that small simplices keep full relative
precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import euclidean
from ._frames import angles_from_frames, frame
from ._quadrature import adaptive_gauss_legendre
from .core import NotRealizable, as_lengths, length_matrix

REALIZABILITY_RTOL = 1e-12


@dataclass(frozen=True)
class HyperbolicVolume:
    value: float
    abs_error_estimate: float
    path: str | None = None

    def __float__(self) -> float:
        return self.value


def gram_from_lengths(lengths: Sequence[float]) -> np.ndarray:
    """``G[i, i] = 1`` and ``G[i, j] = cosh(l_ij)``, i.e. ``-<v_i, v_j>``."""
    l = np.asarray(lengths, dtype=float)
    return np.cosh(length_matrix(l))


def _cosh_m1(x: np.ndarray) -> np.ndarray:
    return 2.0 * np.sinh(0.5 * x) ** 2


def tangent_gram(lmat: np.ndarray, base: int) -> np.ndarray:
    """Spatial Gram matrix of the other vertices when ``base`` sits at (1, 0, 0, 0).

    Entry (j, k) is ``cosh l_bj cosh l_bk - cosh l_jk``.
    """
    others = [j for j in range(4) if j != base]
    a = _cosh_m1(lmat[base, others])
    c = _cosh_m1(lmat[np.ix_(others, others)])
    return a[:, None] + a[None, :] - c + np.outer(a, a)


def _check(lmat: np.ndarray) -> np.ndarray:
    g = tangent_gram(lmat, 0)
    ys = frame(g)
    if ys is None or np.prod(np.diag(ys)) ** 2 <= REALIZABILITY_RTOL * np.prod(np.diag(g)):
        raise NotRealizable(
            f"lengths {lmat[np.triu_indices(4, 1)].tolist()} do not bound a hyperbolic tetrahedron"
        )
    return ys


def is_realizable(lengths: Sequence[float]) -> bool:
    try:
        _check(length_matrix(as_lengths(lengths)))
    except NotRealizable:
        return False
    return True


def embed_hyperboloid(lengths: Sequence[float]) -> np.ndarray:
    """Vertices as rows of a 4x4 array ``(x0, x1, x2, x3)`` on the hyperboloid.

    Vertex 1 is (1, 0, 0, 0); the spatial parts follow the same canonical
    gauge as :func:`confsimplex.euclidean.embed_euclidean`.
    """
    l = as_lengths(lengths)
    lmat = length_matrix(l)
    ys = _check(lmat)
    pts = np.zeros((4, 4))
    pts[0, 0] = 1.0
    pts[1:, 0] = np.cosh(l[:3])
    pts[1:, 1:] = ys
    return pts


def minkowski(u: np.ndarray, v: np.ndarray) -> float:
    return float(-u[0] * v[0] + u[1:] @ v[1:])


def hyperbolic_distance(u: np.ndarray, v: np.ndarray) -> float:
    # asinh of the chord is stable for nearby points, unlike arccosh(-<u, v>)
    d = u - v
    chord2 = max(minkowski(d, d), 0.0)
    return float(2.0 * np.arcsinh(0.5 * np.sqrt(chord2)))


def dihedral_angles_hyperbolic(lengths: Sequence[float]) -> np.ndarray:
    """Interior dihedral angles in pair order 12, 13, 14, 23, 24, 34."""
    l = as_lengths(lengths)
    lmat = length_matrix(l)
    _check(lmat)
    return angles_from_frames(lmat, tangent_gram, NotRealizable)


def _angles_unchecked(l: np.ndarray) -> np.ndarray:
    return angles_from_frames(length_matrix(l), tangent_gram, NotRealizable)


def _volume_path(l: np.ndarray) -> tuple[str, list[tuple[np.ndarray, np.ndarray]]]:
    """Legs of a realizable path from the degenerate point to ``l``.

    The scaling path ``t * l`` needs every shrunken copy to be realizable,
    which holds when the shape of ``l`` is Euclidean-realizable.  Otherwise
    (a hyperbolic-only shape) the path first grows a regular simplex with
    edge ``geomean(l)`` and then moves straight to ``l`` in length space.
    """
    zero = np.zeros(6)
    if euclidean.is_realizable(l):
        return "scaling", [(zero, l)]
    base = np.full(6, float(np.exp(np.mean(np.log(l)))))
    return "regular_then_straight", [(zero, base), (base, l)]


def volume_hyperbolic(
    lengths: Sequence[float],
    tol: float = 1e-9,
    method: str = "parts",
) -> HyperbolicVolume:
    """Volume by integrating the Schlafli formula ``dV = -1/2 sum l_ij d(alpha_ij)``.

    The integral runs along a path ``gamma`` from the degenerate point
    (where V vanishes) to ``l``; normally the scaling path ``t * l``.  With
    ``method="parts"`` it is integrated by parts once,

        V = 1/2 (int alpha(gamma) . dgamma - l . alpha(l)),

    so no angle is differentiated.  ``method="derivative"`` integrates
    ``-1/2 gamma . d alpha(gamma)/dt`` with a central-difference derivative
    (step ``1e-6 t`` on the first leg); it is noisier and kept as a
    cross-check.  Each leg is integrated by adaptive Gauss-Legendre.
    """
    l = as_lengths(lengths)
    _check(length_matrix(l))
    path, legs = _volume_path(l)

    # the central-difference integrand is only good to about eps / 1e-6
    noise_floor = 1e-8 * float(np.max(l)) if method == "derivative" else 0.0
    total = 0.0
    err = 0.0
    for k, (a, b) in enumerate(legs):
        delta = b - a
        if method == "parts":

            def integrand(t: float) -> float:
                return float(delta @ _angles_unchecked(a + t * delta))

        elif method == "derivative":

            def integrand(t: float) -> float:
                h = 1e-6 * (t if k == 0 else 1.0)
                da = (_angles_unchecked(a + (t + h) * delta) - _angles_unchecked(a + (t - h) * delta)) / (2 * h)
                return float(-(a + t * delta) @ da)

        else:
            raise ValueError(f"unknown volume method {method!r}")
        try:
            value, e = adaptive_gauss_legendre(
                integrand, 0.0, 1.0, tol=2.0 * tol / len(legs), noise_floor=noise_floor
            )
        except NotRealizable as exc:
            raise NotRealizable(f"volume path ({path}) left the realizable region: {exc}") from exc
        total += value
        err += e
    if method == "parts":
        total -= float(l @ _angles_unchecked(l))
    return HyperbolicVolume(0.5 * total, 0.5 * err, path)


def klein_vertices(lengths: Sequence[float]) -> np.ndarray:
    pts = embed_hyperboloid(lengths)
    return pts[:, 1:] / pts[:, :1]


def mc_volume_klein(lengths: Sequence[float], samples: int = 1_000_000, seed: int = 0) -> HyperbolicVolume:
    """Monte Carlo volume in the Klein model.

    The geodesic tetrahedron is a straight Euclidean tetrahedron in the
    Klein ball, where the hyperbolic volume element is ``(1 - |x|^2)^-2 dx``.
    Points are drawn uniformly from it through flat Dirichlet barycentric
    weights.  The error estimate is one standard error.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    k = klein_vertices(lengths)
    euclid_vol = abs(np.linalg.det(k[1:] - k[0])) / 6.0
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    chunk = 200_000
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        w = rng.dirichlet(np.ones(4), size=n)
        x = w @ k
        f = (1.0 - np.einsum("ij,ij->i", x, x)) ** -2
        total += f.sum()
        total_sq += (f * f).sum()
        done += n
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return HyperbolicVolume(euclid_vol * mean, euclid_vol * np.sqrt(var / samples), "klein_monte_carlo")
