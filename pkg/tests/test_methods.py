"""Fit methods: trivial examples, cross-route checks, and exhaustive oracles.

The simultaneous-diagonalization oracle builds covariance pairs with a known
common eigenbasis, ranks the candidate directions by brute force, and checks
the fits pick exactly those directions in that order.
"""

import numpy as np
import pytest

from dpca import eigencore as ec
from dpca import methods
from dpca.datamodel import CovarianceEstimate, DataMatrix, center, sample_covariance
from dpca.errors import DimensionError, InvalidInputError

from conftest import random_orthogonal, random_spd


def cov(mat, ridge=0.0):
    return CovarianceEstimate(matrix=np.asarray(mat, dtype=np.float64),
                              sample_count=0, ridge_applied=ridge)


def diagonalizable_pair(rng, dim, min_ratio_gap=1e-3):
    """Simultaneously diagonalizable SPD pair with well-separated ratios."""
    while True:
        basis = random_orthogonal(rng, dim)
        lam_x = rng.uniform(0.5, 10.0, size=dim)
        lam_y = rng.uniform(0.5, 10.0, size=dim)
        ratios = lam_x / lam_y
        if np.min(np.abs(np.subtract.outer(ratios, ratios))[~np.eye(dim, dtype=bool)]) > min_ratio_gap:
            cxx = (basis * lam_x) @ basis.T
            cyy = (basis * lam_y) @ basis.T
            return cov(cxx), cov(cyy), basis, lam_x, lam_y


class TestPcaFit:
    def test_diagonal_top1(self):
        model = methods.pca_fit(cov(np.diag([1.0, 5.0, 2.0])), 1)
        assert model.method == "pca"
        np.testing.assert_allclose(model.eigenvalues, [5.0])
        np.testing.assert_allclose(model.components[:, 0], [0.0, 1.0, 0.0], atol=1e-12)

    def test_full_basis_reconstructs(self, rng):
        a = random_spd(rng, 6)
        model = methods.pca_fit(cov(a), 6)
        recon = model.components @ np.diag(model.eigenvalues) @ model.components.T
        assert np.linalg.norm(recon - a) <= 1e-8 * np.linalg.norm(a)

    def test_matches_dense_reference(self, rng):
        a = random_spd(rng, 9)
        model = methods.pca_fit(cov(a), 4)
        vals, vecs = np.linalg.eigh(a)
        np.testing.assert_allclose(model.eigenvalues, vals[::-1][:4], rtol=1e-12)
        for j in range(4):
            assert abs(model.components[:, j] @ vecs[:, ::-1][:, j]) >= 1 - 1e-10

    def test_dimension_error(self, rng):
        with pytest.raises(DimensionError):
            methods.pca_fit(cov(random_spd(rng, 3)), 4)


class TestDpcaFit:
    def test_identity_background_equals_pca(self):
        cxx = cov(np.diag([1.0, 5.0, 2.0]))
        dpc = methods.dpca_fit(cxx, cov(np.eye(3)), 1)
        pc = methods.pca_fit(cxx, 1)
        assert abs(dpc.components[:, 0] @ pc.components[:, 0]) >= 1 - 1e-10

    def test_ratio_beats_variance_ordering(self):
        # plain PCA on the target alone would rank e2 first; the ratio flips it
        model = methods.dpca_fit(cov(np.diag([2.0, 8.0])), cov(np.diag([1.0, 16.0])), 2)
        np.testing.assert_allclose(model.eigenvalues, [2.0, 0.5], atol=1e-12)
        np.testing.assert_allclose(np.abs(model.components), np.eye(2), atol=1e-9)

    def test_remark1_degeneration_random(self, rng):
        for _ in range(20):
            a = random_spd(rng, 8)
            dpc = methods.dpca_fit(cov(a), cov(np.eye(8)), 3)
            pc = methods.pca_fit(cov(a), 3)
            for j in range(3):
                assert abs(dpc.components[:, j] @ pc.components[:, j]) >= 1 - 1e-10

    def test_rayleigh_consistency(self, rng):
        a, b = random_spd(rng, 10), random_spd(rng, 10)
        model = methods.dpca_fit(cov(a), cov(b), 4)
        for j in range(4):
            u = model.components[:, j]
            ratio = (u @ a @ u) / (u @ b @ u)
            assert ratio == pytest.approx(model.eigenvalues[j], rel=1e-8)

    def test_orthonormalize_flag(self, rng):
        a, b = random_spd(rng, 8), random_spd(rng, 8)
        plain = methods.dpca_fit(cov(a), cov(b), 3)
        ortho = methods.dpca_fit(cov(a), cov(b), 3, orthonormalize=True)
        gram = ortho.components.T @ ortho.components
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)
        # same leading direction, same spanned subspace
        assert abs(ortho.components[:, 0] @ plain.components[:, 0]) >= 1 - 1e-10
        proj = plain.components @ np.linalg.lstsq(plain.components, ortho.components, rcond=None)[0]
        np.testing.assert_allclose(proj, ortho.components, atol=1e-8)

    def test_mean_recorded(self, rng):
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        mean = np.arange(4.0)
        model = methods.dpca_fit(cov(a), cov(b), 2, target_mean=mean, background_mean=-mean)
        np.testing.assert_array_equal(model.target_mean, mean)
        np.testing.assert_array_equal(model.background_mean, -mean)


class TestDpcaWhitenedRoute:
    def test_identity_background_reduces_to_pca(self, rng):
        a = random_spd(rng, 6)
        wh = methods.dpca_fit_whitened(cov(a), cov(np.eye(6)), 2)
        pc = methods.pca_fit(cov(a), 2)
        for j in range(2):
            assert abs(wh.components[:, j] @ pc.components[:, j]) >= 1 - 1e-9

    def test_agrees_with_pencil_route(self, rng):
        cases = [
            (cov(np.diag([2.0, 8.0])), cov(np.diag([1.0, 16.0])), 2),
            (cov(np.diag([1.0, 5.0, 2.0])), cov(np.eye(3)), 1),
        ]
        for _ in range(10):
            dim = int(rng.integers(3, 12))
            cases.append((cov(random_spd(rng, dim)), cov(random_spd(rng, dim)), 3 if dim >= 3 else 1))
        for cxx, cyy, d in cases:
            one = methods.dpca_fit(cxx, cyy, d)
            two = methods.dpca_fit_whitened(cxx, cyy, d)
            np.testing.assert_allclose(one.eigenvalues, two.eigenvalues, rtol=1e-9, atol=1e-12)
            for j in range(d):
                assert abs(one.components[:, j] @ two.components[:, j]) >= 1 - 1e-8


class TestCpcaFit:
    def test_alpha_zero_is_pca(self, rng):
        a, b = random_spd(rng, 7), random_spd(rng, 7)
        cpc = methods.cpca_fit(cov(a), cov(b), 0.0, 3)
        pc = methods.pca_fit(cov(a), 3)
        np.testing.assert_allclose(cpc.eigenvalues, pc.eigenvalues, rtol=1e-12)
        np.testing.assert_allclose(cpc.components, pc.components, atol=1e-12)
        assert cpc.alpha == 0.0

    def test_diagonal_arithmetic(self):
        model = methods.cpca_fit(cov(np.diag([2.0, 8.0])), cov(np.diag([1.0, 16.0])), 1.0, 2)
        np.testing.assert_allclose(model.eigenvalues, [1.0, -8.0], atol=1e-12)
        np.testing.assert_allclose(model.components[:, 0], [1.0, 0.0], atol=1e-12)

    def test_algebraic_not_magnitude_ordering(self):
        # top eigenvalue is 1 even though |-8| is larger
        model = methods.cpca_fit(cov(np.diag([2.0, 8.0])), cov(np.diag([1.0, 16.0])), 1.0, 1)
        assert model.eigenvalues[0] == pytest.approx(1.0)

    def test_equivalence_at_pencil_eigenvalue(self, rng):
        for _ in range(20):
            a, b = random_spd(rng, 8), random_spd(rng, 8)
            pairs = ec.generalized_eig(a, b, 2)
            if pairs.eigenvalues[0] - pairs.eigenvalues[1] < 1e-3 * pairs.eigenvalues[0]:
                continue  # equivalence needs a unique top pair
            top_dpc = methods.dpca_fit(cov(a), cov(b), 1).components[:, 0]
            top_cpc = methods.cpca_fit(cov(a), cov(b), float(pairs.eigenvalues[0]), 1).components[:, 0]
            assert abs(top_dpc @ top_cpc) >= 1 - 1e-8

    def test_negative_alpha_rejected(self, rng):
        a = random_spd(rng, 3)
        with pytest.raises(InvalidInputError):
            methods.cpca_fit(cov(a), cov(a), -1.0, 1)


class TestDiagonalizableOracle:
    def test_dpca_picks_largest_ratios(self, rng):
        for _ in range(20):
            dim = int(rng.integers(2, 11))
            d = int(min(3, dim))
            cxx, cyy, basis, lam_x, lam_y = diagonalizable_pair(rng, dim)
            model = methods.dpca_fit(cxx, cyy, d)
            ranking = np.argsort(-(lam_x / lam_y))
            np.testing.assert_allclose(model.eigenvalues, (lam_x / lam_y)[ranking[:d]], rtol=1e-8)
            for j in range(d):
                assert abs(model.components[:, j] @ basis[:, ranking[j]]) >= 1 - 1e-8

    def test_cpca_picks_largest_differences(self, rng):
        for _ in range(20):
            dim = int(rng.integers(2, 11))
            d = int(min(3, dim))
            cxx, cyy, basis, lam_x, lam_y = diagonalizable_pair(rng, dim)
            alpha = float(rng.uniform(0.0, 5.0))
            scores = lam_x - alpha * lam_y
            gaps = np.abs(np.subtract.outer(scores, scores))[~np.eye(dim, dtype=bool)]
            if gaps.min() < 1e-6:
                continue  # reject near-tied scores
            model = methods.cpca_fit(cxx, cyy, alpha, d)
            ranking = np.argsort(-scores)
            np.testing.assert_allclose(model.eigenvalues, scores[ranking[:d]], rtol=1e-8, atol=1e-10)
            for j in range(d):
                assert abs(model.components[:, j] @ basis[:, ranking[j]]) >= 1 - 1e-8


class TestAlphaSelection:
    def test_grid_selection_count(self, rng):
        a, b = random_spd(rng, 6), random_spd(rng, 6)
        grid = np.geomspace(0.001, 1000, 15)
        sel = methods.cpca_select_alphas(cov(a), cov(b), grid, 2, 4, seed=0)
        assert sel.selected.shape == (4,)
        assert set(sel.selected).issubset(set(grid))
        assert sel.affinity.shape == (15, 15)
        np.testing.assert_allclose(sel.affinity, sel.affinity.T, atol=1e-12)
        np.testing.assert_allclose(np.diag(sel.affinity), 1.0, atol=1e-12)
        assert np.all((sel.affinity >= 0) & (sel.affinity <= 1))

    def test_duplicate_grid(self, rng):
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        sel = methods.cpca_select_alphas(cov(a), cov(b), [2.0, 2.0], 1, 2, seed=0)
        np.testing.assert_allclose(sel.affinity, np.ones((2, 2)), atol=1e-10)
        assert sel.selected.shape == (2,)
        np.testing.assert_allclose(sel.selected, [2.0, 2.0])

    def test_proportional_backgrounds_cluster_by_sign(self, rng):
        # with C_yy = c*C_xx every alpha on the same side of 1/c yields the
        # same subspace: top-d of C_xx below, bottom-d above
        a = random_spd(rng, 5)
        c = 2.0
        grid = [0.01, 0.1, 10.0, 100.0]  # two below 1/c = 0.5, two above
        sel = methods.cpca_select_alphas(cov(a), cov(c * a), grid, 2, 2, seed=0)
        assert sel.affinity[0, 1] >= 1 - 1e-8
        assert sel.affinity[2, 3] >= 1 - 1e-8
        # brute-force check of the subspaces on this small dimension
        vals, vecs = np.linalg.eigh(a)
        top = vecs[:, ::-1][:, :2]
        bottom = vecs[:, :2]
        low_alpha = methods.cpca_fit(cov(a), cov(c * a), 0.01, 2).components
        high_alpha = methods.cpca_fit(cov(a), cov(c * a), 100.0, 2).components
        assert methods.subspace_affinity(low_alpha, top) >= 1 - 1e-8
        assert methods.subspace_affinity(high_alpha, bottom) >= 1 - 1e-8

    def test_selection_errors(self, rng):
        a = random_spd(rng, 3)
        with pytest.raises(InvalidInputError):
            methods.cpca_select_alphas(cov(a), cov(a), [1.0], 1, 2)
        with pytest.raises(InvalidInputError):
            methods.cpca_select_alphas(cov(a), cov(a), [], 1, 1)

    def test_deterministic(self, rng):
        a, b = random_spd(rng, 5), random_spd(rng, 5)
        grid = np.geomspace(0.01, 100, 9)
        one = methods.cpca_select_alphas(cov(a), cov(b), grid, 2, 3, seed=11)
        two = methods.cpca_select_alphas(cov(a), cov(b), grid, 2, 3, seed=11)
        assert np.array_equal(one.selected, two.selected)
        assert np.array_equal(one.cluster_assignment, two.cluster_assignment)


class TestTransform:
    def test_identity_components(self, rng):
        raw = DataMatrix(rng.standard_normal((20, 4)) + 5.0)
        centered = center(raw)
        model = methods.pca_fit(cov(np.eye(4)), 4, target_mean=centered.mean)
        out = methods.transform(model, raw)
        # full orthonormal basis: coordinates are a rotation of the centered data
        np.testing.assert_allclose(out.coordinates @ model.components.T,
                                   centered.data.values, atol=1e-10)

    def test_single_axis_component(self, rng):
        raw = DataMatrix(rng.standard_normal((10, 3)))
        model = methods.ComponentModel(
            method="pca", components=np.eye(3)[:, :1], eigenvalues=np.array([1.0]),
            target_mean=np.zeros(3))
        out = methods.transform(model, raw)
        np.testing.assert_allclose(out.coordinates[:, 0], raw.values[:, 0])

    def test_column_variance_oracle(self, rng):
        raw = DataMatrix(rng.standard_normal((300, 6)) * [1, 2, 3, 4, 5, 6])
        centered = center(raw)
        cxx = sample_covariance(centered)
        model = methods.pca_fit(cxx, 3, target_mean=centered.mean)
        out = methods.transform(model, raw)
        for j in range(3):
            u = model.components[:, j]
            var = np.mean(out.coordinates[:, j] ** 2)  # coords are mean-free
            assert var == pytest.approx(u @ cxx.matrix @ u, rel=1e-10)

    def test_labels_pass_through(self, rng):
        raw = DataMatrix(rng.standard_normal((5, 2)), labels=[1, 0, 1, 0, 1])
        model = methods.pca_fit(cov(np.eye(2)), 1)
        out = methods.transform(model, raw)
        np.testing.assert_array_equal(out.labels, [1, 0, 1, 0, 1])

    def test_dimension_mismatch(self, rng):
        model = methods.pca_fit(cov(np.eye(3)), 2)
        with pytest.raises(DimensionError):
            methods.transform(model, DataMatrix(rng.standard_normal((4, 2))))


class TestPencilResidual:
    def test_valid_model_is_small(self, rng):
        a, b = random_spd(rng, 12), random_spd(rng, 12)
        model = methods.dpca_fit(cov(a), cov(b), 4)
        assert methods.pencil_residual(model, cov(a), cov(b)) <= 1e-7

    def test_perturbed_eigenvalue_grows(self, rng):
        a, b = random_spd(rng, 6), random_spd(rng, 6)
        model = methods.dpca_fit(cov(a), cov(b), 1)
        bumped = methods.ComponentModel(
            method="dpca", components=model.components,
            eigenvalues=model.eigenvalues + 1.0, target_mean=model.target_mean,
            floor_rel=model.floor_rel)
        u = model.components[:, 0]
        expected = np.linalg.norm(b @ u) / (np.linalg.norm(a) + (model.eigenvalues[0] + 1) * np.linalg.norm(b))
        assert methods.pencil_residual(bumped, cov(a), cov(b)) == pytest.approx(expected, rel=1e-6)

    def test_identical_pencil(self, rng):
        a = random_spd(rng, 5)
        model = methods.dpca_fit(cov(a), cov(a), 2)
        assert methods.pencil_residual(model, cov(a), cov(a)) <= 1e-12

    def test_wrong_method_tag(self, rng):
        a = random_spd(rng, 4)
        model = methods.pca_fit(cov(a), 2)
        with pytest.raises(InvalidInputError):
            methods.pencil_residual(model, cov(a), cov(a))


class TestComponentModelInvariants:
    def test_alpha_only_for_cpca(self):
        with pytest.raises(InvalidInputError):
            methods.ComponentModel(method="pca", components=np.eye(2),
                                   eigenvalues=np.array([2.0, 1.0]),
                                   target_mean=np.zeros(2), alpha=1.0)
        with pytest.raises(InvalidInputError):
            methods.ComponentModel(method="cpca", components=np.eye(2),
                                   eigenvalues=np.array([2.0, 1.0]),
                                   target_mean=np.zeros(2))

    def test_unit_columns_enforced(self):
        with pytest.raises(InvalidInputError):
            methods.ComponentModel(method="pca", components=2 * np.eye(2),
                                   eigenvalues=np.array([2.0, 1.0]),
                                   target_mean=np.zeros(2))

    def test_descending_enforced(self):
        with pytest.raises(InvalidInputError):
            methods.ComponentModel(method="pca", components=np.eye(2),
                                   eigenvalues=np.array([1.0, 2.0]),
                                   target_mean=np.zeros(2))
