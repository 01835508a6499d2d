"""Independent oracles shared by the test modules.

None of these reuse the library's embedding or angle code paths.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

ARCCOS_THIRD = float(np.arccos(1.0 / 3.0))


def lmat(lengths):
    m = np.zeros((4, 4))
    for e, (i, j) in enumerate(PAIRS):
        m[i, j] = m[j, i] = lengths[e]
    return m


def regular_tetrahedron(a: float) -> np.ndarray:
    """Explicit vertices of a regular tetrahedron with edge ``a``."""
    pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return pts * a / (2 * np.sqrt(2))


def signed_volume(pts: np.ndarray) -> float:
    return float(np.linalg.det(pts[1:] - pts[0]) / 6.0)


def pairwise(pts: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.norm(pts[i] - pts[j]) for i, j in PAIRS])


def embed_by_trilateration(lengths) -> np.ndarray:
    """Coordinates by successive trilateration (no Gram/Cholesky)."""
    L = lmat(lengths)
    p1 = np.zeros(3)
    p2 = np.array([L[0, 1], 0.0, 0.0])
    x3 = (L[0, 2] ** 2 - L[1, 2] ** 2 + L[0, 1] ** 2) / (2 * L[0, 1])
    p3 = np.array([x3, np.sqrt(L[0, 2] ** 2 - x3 ** 2), 0.0])
    x4 = (L[0, 3] ** 2 - L[1, 3] ** 2 + L[0, 1] ** 2) / (2 * L[0, 1])
    y4 = (L[0, 3] ** 2 - L[2, 3] ** 2 + p3 @ p3 - 2 * x4 * p3[0]) / (2 * p3[1])
    p4 = np.array([x4, y4, np.sqrt(L[0, 3] ** 2 - x4 ** 2 - y4 ** 2)])
    return np.vstack([p1, p2, p3, p4])


def euclidean_gram_angles(lengths) -> np.ndarray:
    """Dihedral angles from the inverse Gram matrix of edge vectors (cofactor route).

    Rows of P^-1 are the inward normals of faces opposite vertices 2..4 in
    the dual basis; the face opposite vertex 1 has minus their sum.
    """
    L = lmat(lengths)
    P = 0.5 * (L[0, 1:, None] ** 2 + L[0, None, 1:] ** 2 - L[1:, 1:] ** 2)
    D = np.zeros((4, 4))
    Pi = np.linalg.inv(P)
    D[1:, 1:] = Pi
    D[0, 1:] = D[1:, 0] = -Pi.sum(axis=1)
    D[0, 0] = Pi.sum()
    out = []
    for i, j in PAIRS:
        k, m = [x for x in range(4) if x not in (i, j)]
        out.append(np.arccos(-D[k, m] / np.sqrt(D[k, k] * D[m, m])))
    return np.array(out)


def hyperbolic_gram_angles(lengths) -> np.ndarray:
    """Dihedral angles from the inverse of the cosh Gram matrix."""
    Gi = np.linalg.inv(np.cosh(lmat(lengths)))
    out = []
    for i, j in PAIRS:
        k, m = [x for x in range(4) if x not in (i, j)]
        out.append(np.arccos(Gi[k, m] / np.sqrt(Gi[k, k] * Gi[m, m])))
    return np.array(out)


def _face_angle(a, b, c, hyperbolic):
    """Angle opposite side c in a triangle with sides a, b, c."""
    if hyperbolic:
        return np.arccos((np.cosh(a) * np.cosh(b) - np.cosh(c)) / (np.sinh(a) * np.sinh(b)))
    return np.arccos((a * a + b * b - c * c) / (2 * a * b))


def link_angles(lengths, hyperbolic: bool = False) -> np.ndarray:
    """Dihedral angles as angles of the spherical vertex-link triangle.

    Face angles come from the (hyperbolic) law of cosines; the dihedral angle
    along edge ij is the angle at corner j of the link of vertex i, by the
    spherical law of cosines.
    """
    L = lmat(lengths)
    out = []
    for i, j in PAIRS:
        k, m = [x for x in range(4) if x not in (i, j)]
        t_jk = _face_angle(L[i, j], L[i, k], L[j, k], hyperbolic)
        t_jm = _face_angle(L[i, j], L[i, m], L[j, m], hyperbolic)
        t_km = _face_angle(L[i, k], L[i, m], L[k, m], hyperbolic)
        out.append(np.arccos((np.cos(t_km) - np.cos(t_jk) * np.cos(t_jm)) / (np.sin(t_jk) * np.sin(t_jm))))
    return np.array(out)


def klein_cubature_volume(lengths, n: int = 64) -> float:
    """Deterministic hyperbolic volume: tensor Gauss-Legendre over the Klein tetrahedron.

    The unit cube is collapsed onto the reference simplex (Duffy map) and
    ``(1 - |x|^2)^-2`` is integrated with ``n`` nodes per direction.  The
    integrand is analytic on the closed tetrahedron (vertices lie inside the
    ball), so the rule converges geometrically.
    """
    from confsimplex.hyperbolic import klein_vertices

    k = klein_vertices(lengths)
    A = k[1:] - k[0]
    jac = abs(np.linalg.det(A))
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    a, b, c = np.meshgrid(x, x, x, indexing="ij")
    wa, wb, wc = np.meshgrid(w, w, w, indexing="ij")
    u = a
    v = (1 - a) * b
    s = (1 - a) * (1 - b) * c
    weight = wa * wb * wc * (1 - a) ** 2 * (1 - b)
    pts = k[0] + u[..., None] * A[0] + v[..., None] * A[1] + s[..., None] * A[2]
    f = (1.0 - np.einsum("...i,...i->...", pts, pts)) ** -2
    return float(jac * np.sum(weight * f))


def conformal(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.array([r[i] + r[j] for i, j in PAIRS])


def descartes_quantity(r) -> float:
    k = 1.0 / np.asarray(r, dtype=float)
    return float(k.sum() ** 2 - 2 * (k * k).sum())


def central_gradient(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def pair_permutation(sigma):
    """Index map on edge pairs induced by the vertex permutation ``sigma``."""
    pos = {frozenset(p): e for e, p in enumerate(PAIRS)}
    return np.array([pos[frozenset((sigma[i], sigma[j]))] for i, j in PAIRS])


ALL_PERMUTATIONS = list(itertools.permutations(range(4)))


@pytest.fixture(scope="session")
def euclidean_radii():
    from confsimplex.analysis import random_conformal_radii

    return random_conformal_radii(2024, 40, (0.1, 10.0), "euclidean")[0]


@pytest.fixture(scope="session")
def hyperbolic_radii():
    from confsimplex.analysis import random_conformal_radii

    return random_conformal_radii(2025, 40, (0.1, 3.0), "hyperbolic")[0]


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(criterion: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
