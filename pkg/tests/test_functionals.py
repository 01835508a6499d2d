"""S, R, their gradients and Hessians, and the map i."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confsimplex import (
    NumericalInstability,
    PAIRS,
    eval_R,
    eval_R_paper_display,
    eval_S,
    grad_R,
    grad_S,
    hessian_R,
    hessian_S,
    jacobian_i,
    map_i,
    solid_angles,
    volume_hyperbolic,
)
from confsimplex import functionals
from confsimplex.analysis import analyze_hessian
from confsimplex.functionals import dihedral_angles, fd_jacobian, is_realizable

from conftest import ARCCOS_THIRD, ALL_PERMUTATIONS, central_gradient, conformal, link_angles, pair_permutation

GEOMS = ("euclidean", "hyperbolic")

# -2 sqrt(2) / 3: the repeated eigenvalue of H(S) at the Euclidean unit regular simplex,
# frozen after matching a link-angle finite-difference oracle (test below).
REGULAR_EIGENVALUE = -0.9428090415820634


def radii_for(g, euclidean_radii, hyperbolic_radii):
    return euclidean_radii if g == "euclidean" else hyperbolic_radii


class TestMapI:
    def test_example(self):
        assert map_i([1, 2, 3, 4]).tolist() == [3, 4, 5, 5, 6, 7]

    def test_matches_pairs(self):
        r = np.array([0.3, 1.1, 2.7, 0.05])
        assert np.array_equal(map_i(r), [r[i] + r[j] for i, j in PAIRS])

    def test_linear(self):
        a, b = np.array([1.0, 2, 3, 4]), np.array([0.5, 0.1, 2, 7])
        assert np.allclose(map_i(2 * a + 3 * b), 2 * map_i(a) + 3 * map_i(b))

    def test_jacobian_structure(self):
        J = jacobian_i()
        assert J.shape == (6, 4)
        assert np.array_equal(J.sum(axis=1), [2] * 6)
        assert np.array_equal(J.sum(axis=0), [3] * 4)
        assert np.linalg.matrix_rank(J) == 4
        assert np.array_equal(J @ [1, 2, 3, 4], map_i([1, 2, 3, 4]))

    def test_jacobian_is_a_copy(self):
        J = jacobian_i()
        J[0, 0] = 99
        assert jacobian_i()[0, 0] == 1

    @pytest.mark.parametrize("bad", [[1, 2, 3], [1, 0, 1, 1], [1, -1, 1, 1], [1, np.nan, 1, 1], [1, np.inf, 1, 1]])
    def test_functionals_reject_bad_radii(self, bad):
        # map_i itself is a plain linear map; validation happens where radii are consumed
        with pytest.raises(ValueError, match="radii"):
            eval_S(bad, "euclidean")
        with pytest.raises(ValueError, match="radii"):
            hessian_S(bad, "hyperbolic")

    @pytest.mark.parametrize("bad", [[1, 2, 3, 4, 5], [1, 1, 1, 1, 1, 0], [1, 1, 1, 1, 1, np.nan]])
    def test_functionals_reject_bad_lengths(self, bad):
        with pytest.raises(ValueError, match="lengths"):
            eval_R(bad, "euclidean")

    def test_unknown_geometry(self):
        with pytest.raises(ValueError):
            eval_S([1, 1, 1, 1], "spherical")


class TestRegularDeskValues:
    def test_euclidean(self):
        r = [1.0] * 4
        s_i = 3 * ARCCOS_THIRD - np.pi
        assert np.allclose(dihedral_angles(map_i(r), "euclidean"), ARCCOS_THIRD, atol=1e-12, rtol=0)
        assert np.allclose(grad_S(r, "euclidean"), s_i, atol=1e-12, rtol=0)
        assert eval_S(r, "euclidean") == pytest.approx(4 * s_i, abs=1e-12)
        assert eval_R(map_i(r), "euclidean") == pytest.approx(12 * ARCCOS_THIRD, abs=1e-12)
        assert eval_S(r, "euclidean") == pytest.approx(2.2051424, abs=1e-7)
        assert eval_R(map_i(r), "euclidean") == pytest.approx(14.7715130, abs=1e-7)

    def test_hyperbolic_includes_volume(self):
        l = map_i([1.0] * 4)
        a = link_angles(l, hyperbolic=True)
        v = volume_hyperbolic(l).value
        assert eval_R(l, "hyperbolic") == pytest.approx(l @ a + 2 * v, abs=1e-10)
        s = solid_angles(a)
        assert eval_S([1.0] * 4, "hyperbolic") == pytest.approx(np.sum(s) + 2 * v, abs=1e-10)

    def test_supplementary_angle_form(self):
        l = map_i([1.0] * 4)
        assert eval_R_paper_display(l, "euclidean") == pytest.approx(12 * (np.pi - ARCCOS_THIRD), abs=1e-12)

    def test_regular_eigenvalue_against_link_oracle(self):
        def s_vec(r):
            return solid_angles(link_angles(conformal(r)))

        h = 1e-4
        jac = np.column_stack([(s_vec(np.eye(4)[k] * h + 1) - s_vec(1 - np.eye(4)[k] * h)) / (2 * h) for k in range(4)])
        oracle = np.sort(np.linalg.eigvalsh(0.5 * (jac + jac.T)))
        assert oracle[:3] == pytest.approx([REGULAR_EIGENVALUE] * 3, abs=1e-7)
        assert REGULAR_EIGENVALUE == pytest.approx(-2 * np.sqrt(2) / 3, abs=1e-15)
        ev = np.sort(np.linalg.eigvalsh(hessian_S([1.0] * 4, "euclidean")))
        assert ev[:3] == pytest.approx([REGULAR_EIGENVALUE] * 3, abs=1e-8)
        assert abs(ev[3]) < 1e-8


@pytest.mark.parametrize("g", GEOMS)
class TestIdentities:
    def test_pullback(self, g, euclidean_radii, hyperbolic_radii):
        for r in radii_for(g, euclidean_radii, hyperbolic_radii)[:15]:
            s = eval_S(r, g)
            assert abs(s - eval_R(map_i(r), g) + np.pi * np.sum(r)) < 1e-10 * abs(s)

    def test_grad_R_against_central_difference(self, g, euclidean_radii, hyperbolic_radii):
        for r in radii_for(g, euclidean_radii, hyperbolic_radii)[:10]:
            l = map_i(r)
            h = 1e-5 * np.exp(np.mean(np.log(l)))
            fd = central_gradient(lambda x: eval_R(x, g, quad_tol=1e-12), l, h)
            assert np.max(np.abs(fd - grad_R(l, g))) < 1e-6

    def test_grad_S_against_central_difference(self, g, euclidean_radii, hyperbolic_radii):
        for r in radii_for(g, euclidean_radii, hyperbolic_radii)[:10]:
            h = 1e-5 * np.exp(np.mean(np.log(r)))
            fd = central_gradient(lambda x: eval_S(x, g, quad_tol=1e-12), r, h)
            assert np.max(np.abs(fd - grad_S(r, g))) < 1e-6

    def test_grad_S_is_pulled_back_grad_R(self, g, euclidean_radii, hyperbolic_radii):
        for r in radii_for(g, euclidean_radii, hyperbolic_radii)[:10]:
            assert np.allclose(grad_S(r, g), jacobian_i().T @ grad_R(map_i(r), g) - np.pi, atol=1e-13)

    def test_chain_rule_for_hessians(self, g, euclidean_radii, hyperbolic_radii):
        J = jacobian_i()
        for r in radii_for(g, euclidean_radii, hyperbolic_radii)[:8]:
            hs = hessian_S(r, g)
            hr = hessian_R(map_i(r), g)
            assert np.max(np.abs(hs - J.T @ hr @ J)) < 1e-5

    def test_hessians_symmetric(self, g, euclidean_radii, hyperbolic_radii):
        r = radii_for(g, euclidean_radii, hyperbolic_radii)[0]
        for hess, asym in (hessian_S(r, g, return_asymmetry=True), hessian_R(map_i(r), g, return_asymmetry=True)):
            assert np.max(np.abs(hess - hess.T)) <= 1e-9 * np.max(np.abs(hess))
            assert 0 <= asym < functionals.ASYMMETRY_LIMIT

    def test_permutation_equivariance(self, g, euclidean_radii, hyperbolic_radii):
        r = radii_for(g, euclidean_radii, hyperbolic_radii)[3]
        a = dihedral_angles(map_i(r), g)
        s = grad_S(r, g)
        hs = hessian_S(r, g)
        for sigma in ALL_PERMUTATIONS[::5]:
            # vertex k of the permuted simplex is vertex sigma[k] of the original
            rp = r[list(sigma)]
            assert np.allclose(dihedral_angles(map_i(rp), g), a[pair_permutation(sigma)], atol=1e-12)
            assert np.allclose(grad_S(rp, g), s[list(sigma)], atol=1e-12)
            assert np.allclose(hessian_S(rp, g), hs[np.ix_(sigma, sigma)], atol=1e-7)


class TestEuclideanHomogeneity:
    def test_scale(self, euclidean_radii):
        for r in euclidean_radii[:10]:
            assert eval_S(3.7 * r, "euclidean") == pytest.approx(3.7 * eval_S(r, "euclidean"), rel=1e-12)

    def test_euler_identities(self, euclidean_radii):
        for r in euclidean_radii[:10]:
            l = map_i(r)
            assert eval_R(l, "euclidean") == pytest.approx(l @ grad_R(l, "euclidean"), rel=1e-14)
            assert eval_S(r, "euclidean") == pytest.approx(r @ grad_S(r, "euclidean"), rel=1e-13)

    def test_hessians_annihilate_scaling_direction(self, euclidean_radii):
        for r in euclidean_radii[:10]:
            hs = hessian_S(r, "euclidean")
            hr = hessian_R(map_i(r), "euclidean")
            assert np.linalg.norm(hs @ r) < 1e-7 * np.linalg.norm(hs) * np.linalg.norm(r)
            l = map_i(r)
            assert np.linalg.norm(hr @ l) < 1e-7 * np.linalg.norm(hr) * np.linalg.norm(l)

    def test_schlafli_is_closed(self, euclidean_radii):
        # sum l dalpha = 0 along any direction in length space
        rng = np.random.default_rng(4)
        for r in euclidean_radii[:10]:
            l = map_i(r)
            d = rng.normal(size=6)
            h = 1e-6 * np.min(l)
            da = (dihedral_angles(l + h * d, "euclidean") - dihedral_angles(l - h * d, "euclidean")) / (2 * h)
            assert abs(l @ da) < 1e-7 * np.linalg.norm(l)

    def test_supplementary_angle_gradient(self, euclidean_radii):
        l = map_i(euclidean_radii[5])
        h = 1e-5 * np.mean(l)
        fd = central_gradient(lambda x: eval_R_paper_display(x, "euclidean"), l, h)
        assert np.allclose(fd, np.pi - dihedral_angles(l, "euclidean"), atol=1e-7)


class TestRankStructure:
    def test_euclidean_R_rank_5(self, euclidean_radii):
        for r in euclidean_radii[:10]:
            l = map_i(r)
            rep = analyze_hessian(hessian_R(l, "euclidean"), reference_vector=l)
            assert rep.rank == 5
            assert rep.reference_angle < 1e-4

    def test_hyperbolic_R_rank_6_indefinite(self, hyperbolic_radii):
        for r in hyperbolic_radii[:10]:
            rep = analyze_hessian(hessian_R(map_i(r), "hyperbolic"))
            assert rep.rank == 6
            assert rep.classification == "indefinite"

    def test_hyperbolic_schlafli_volume_term(self, hyperbolic_radii):
        # sum l dalpha = -2 dV
        rng = np.random.default_rng(8)
        for r in hyperbolic_radii[:5]:
            l = map_i(r)
            d = rng.normal(size=6) * 1e-5
            if not (is_realizable(l + d, "hyperbolic") and is_realizable(l - d, "hyperbolic")):
                continue
            da = dihedral_angles(l + d, "hyperbolic") - dihedral_angles(l - d, "hyperbolic")
            dv = volume_hyperbolic(l + d, tol=1e-12).value - volume_hyperbolic(l - d, tol=1e-12).value
            assert l @ da == pytest.approx(-2 * dv, abs=1e-9)


class TestFiniteDifferences:
    def test_fd_jacobian_exact_on_cubics(self):
        A = np.array([[1.0, 2, 0], [0, 3, 1], [2, 0, 1]])
        f = lambda x: A @ x ** 3
        x = np.array([1.0, 2.0, 3.0])
        assert np.allclose(fd_jacobian(f, x), A * 3 * x ** 2, rtol=1e-9)

    def test_asymmetric_jacobian_rejected(self):
        with pytest.raises(NumericalInstability):
            functionals._symmetrize(np.array([[1.0, 0.0], [0.1, 1.0]]), "test")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.2, 5.0), min_size=4, max_size=4), st.permutations(range(4)))
def test_solid_angles_permute_with_radii(r, sigma):
    r = np.array(r)
    if not is_realizable(map_i(r), "euclidean"):
        return
    s = grad_S(r, "euclidean")
    assert np.allclose(grad_S(r[list(sigma)], "euclidean"), s[list(sigma)], atol=1e-11)
