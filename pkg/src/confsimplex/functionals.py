"""The curvature functionals S (on radii) and R (on edge lengths).

``S(r) = sum r_i S_i`` in E^3 and ``2 vol + sum r_i S_i`` in H^3, where
``S_i`` are the vertex solid angles.  ``R(l) = sum l_ij alpha_ij`` (plus
``2 vol`` in H^3) is the Schlafli-consistent edge functional, so that
``grad R = alpha`` and ``S(r) = R(i(r)) - pi * sum(r)``.

Second derivatives are fourth-order central differences of the analytic
gradients (solid angles for S, dihedral angles for R) with step ``1e-5``
times the geometric mean of the input.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import euclidean, hyperbolic
from .core import Geometry, NumericalInstability, as_lengths, as_radii, solid_angles

FD_REL_STEP = 1e-5
ASYMMETRY_LIMIT = 1e-6

JACOBIAN_I = np.array(
    [
        [1, 1, 0, 0],
        [1, 0, 1, 0],
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1, 0, 1],
        [0, 0, 1, 1],
    ],
    dtype=float,
)
JACOBIAN_I.flags.writeable = False


def map_i(r: Sequence[float]) -> np.ndarray:
    """Conformal edge lengths ``l_ij = r_i + r_j`` in pair order."""
    return JACOBIAN_I @ np.asarray(r, dtype=float)


def jacobian_i() -> np.ndarray:
    return JACOBIAN_I.copy()


def dihedral_angles(lengths: Sequence[float], g: Geometry | str) -> np.ndarray:
    if Geometry.parse(g) is Geometry.EUCLIDEAN:
        return euclidean.dihedral_angles_euclidean(lengths)
    return hyperbolic.dihedral_angles_hyperbolic(lengths)


def is_realizable(lengths: Sequence[float], g: Geometry | str) -> bool:
    if Geometry.parse(g) is Geometry.EUCLIDEAN:
        return euclidean.is_realizable(lengths)
    return hyperbolic.is_realizable(lengths)


def _volume_term(l: np.ndarray, g: Geometry, quad_tol: float) -> float:
    if g is Geometry.EUCLIDEAN:
        return 0.0
    return 2.0 * hyperbolic.volume_hyperbolic(l, tol=quad_tol).value


def eval_R(lengths: Sequence[float], g: Geometry | str, quad_tol: float = 1e-9) -> float:
    g = Geometry.parse(g)
    l = as_lengths(lengths)
    return float(l @ dihedral_angles(l, g)) + _volume_term(l, g, quad_tol)


def eval_R_paper_display(lengths: Sequence[float], g: Geometry | str, quad_tol: float = 1e-9) -> float:
    """``sum l_ij (pi - alpha_ij)`` (+ ``2 vol``): the variant whose gradient is ``pi - alpha`` only in E^3.

    Kept for comparison; :func:`eval_R` is the form whose gradient is the
    dihedral angles in both geometries.
    """
    g = Geometry.parse(g)
    l = as_lengths(lengths)
    return float(l @ (np.pi - dihedral_angles(l, g))) + _volume_term(l, g, quad_tol)


def grad_R(lengths: Sequence[float], g: Geometry | str) -> np.ndarray:
    return dihedral_angles(as_lengths(lengths), g)


def grad_S(r: Sequence[float], g: Geometry | str) -> np.ndarray:
    return solid_angles(dihedral_angles(map_i(as_radii(r)), g))


def eval_S(r: Sequence[float], g: Geometry | str, quad_tol: float = 1e-9) -> float:
    g = Geometry.parse(g)
    r = as_radii(r)
    l = map_i(r)
    return float(r @ solid_angles(dihedral_angles(l, g))) + _volume_term(l, g, quad_tol)


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, rel_step: float = FD_REL_STEP) -> np.ndarray:
    """Fourth-order central-difference Jacobian; column k is ``df/dx_k``.

    The five-point stencil matters near the boundary of the realizable cone,
    where the second-order truncation error alone breaks symmetry at 1e-5.
    """
    x = np.asarray(x, dtype=float)
    h = rel_step * float(np.exp(np.mean(np.log(x))))
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((8.0 * (f(x + e) - f(x - e)) - (f(x + 2 * e) - f(x - 2 * e))) / (12.0 * h))
    return np.column_stack(cols)


def _symmetrize(jac: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    scale = np.max(np.abs(jac))
    asym = float(np.max(np.abs(jac - jac.T)) / scale) if scale > 0 else 0.0
    if asym > ASYMMETRY_LIMIT:
        raise NumericalInstability(f"{what}: relative asymmetry {asym:.2e} exceeds {ASYMMETRY_LIMIT:.0e}")
    return 0.5 * (jac + jac.T), asym


def hessian_S(r: Sequence[float], g: Geometry | str, return_asymmetry: bool = False):
    """``H[i, j] = dS_i/dr_j``; with ``return_asymmetry`` also the pre-symmetrization asymmetry."""
    g = Geometry.parse(g)
    r = as_radii(r)
    jac = fd_jacobian(lambda x: solid_angles(dihedral_angles(map_i(x), g)), r)
    hess, asym = _symmetrize(jac, "hessian_S")
    return (hess, asym) if return_asymmetry else hess


def hessian_R(lengths: Sequence[float], g: Geometry | str, return_asymmetry: bool = False):
    """``H[e, f] = d alpha_e / d l_f`` over edge pairs."""
    g = Geometry.parse(g)
    l = as_lengths(lengths)
    jac = fd_jacobian(lambda x: dihedral_angles(x, g), l)
    hess, asym = _symmetrize(jac, "hessian_R")
    return (hess, asym) if return_asymmetry else hess
