"""Factor-model generators: degenerate cases, population covariance, recovery."""

import numpy as np
import pytest

from dpca import methods, synthgen
from dpca.datamodel import center, sample_covariance
from dpca.errors import DimensionError, InvalidInputError


def tiny_spec(seed=0, noise=0.0, background_std=0.0, shared_std=0.0, specific_std=0.0):
    return synthgen.random_spec(6, 2, 1,
                                background_coeff_std=background_std,
                                shared_coeff_std=shared_std,
                                specific_coeff_std=specific_std,
                                noise_std=noise, seed=seed,
                                background_mean=np.arange(6.0),
                                target_mean=np.arange(6.0) + 10.0)


class TestSpecValidation:
    def test_subspace_budget(self):
        with pytest.raises(DimensionError):
            synthgen.random_spec(4, 3, 2, 1.0, 1.0, 1.0, 0.1)

    def test_bases_orthonormal(self):
        spec = synthgen.random_spec(12, 4, 2, 1.0, 1.0, 1.0, 0.1, seed=3)
        stacked = np.hstack([spec.shared_basis, spec.specific_basis])
        assert np.linalg.norm(stacked.T @ stacked - np.eye(6)) <= 1e-10

    def test_negative_std_rejected(self):
        with pytest.raises(InvalidInputError):
            synthgen.random_spec(6, 2, 1, -1.0, 1.0, 1.0, 0.1)


class TestGenBackground:
    def test_degenerate_noiseless(self):
        spec = tiny_spec()
        data = synthgen.gen_background(spec, 5)
        np.testing.assert_allclose(data.values, np.tile(spec.background_mean, (5, 1)))

    def test_population_covariance(self):
        spec = synthgen.random_spec(10, 2, 1,
                                    background_coeff_std=[3.0, 2.0],
                                    shared_coeff_std=1.0, specific_coeff_std=1.0,
                                    noise_std=0.5, seed=7)
        data = synthgen.gen_background(spec, 20000)
        sample = sample_covariance(center(data)).matrix
        population = spec.background_population_covariance()
        rel = np.linalg.norm(sample - population) / np.linalg.norm(population)
        assert rel <= 0.05

    def test_seeded_reproducible(self):
        spec = synthgen.random_spec(5, 2, 1, 1.0, 1.0, 1.0, 0.3, seed=9)
        a = synthgen.gen_background(spec, 40)
        b = synthgen.gen_background(spec, 40)
        assert np.array_equal(a.values, b.values)

    def test_needs_samples(self):
        with pytest.raises(InvalidInputError):
            synthgen.gen_background(tiny_spec(), 0)


class TestGenTarget:
    def test_degenerate_single_cluster(self):
        spec = tiny_spec()
        data = synthgen.gen_target(spec, 4, [[0.0]])
        np.testing.assert_allclose(data.values, np.tile(spec.target_mean, (4, 1)))
        np.testing.assert_array_equal(data.labels, np.zeros(4))

    def test_balanced_labels(self):
        spec = tiny_spec(shared_std=1.0, specific_std=1.0, noise=0.1)
        for m in (10, 11):
            data = synthgen.gen_target(spec, m, [[1.0], [-1.0]])
            counts = np.bincount(data.labels, minlength=2)
            assert abs(counts[0] - counts[1]) <= 1

    def test_offset_dimension_checked(self):
        with pytest.raises(DimensionError):
            synthgen.gen_target(tiny_spec(), 10, [[1.0, 2.0]])

    def test_seeded_reproducible(self):
        spec = tiny_spec(shared_std=1.0, specific_std=0.5, noise=0.2)
        a = synthgen.gen_target(spec, 30, [[1.0], [-1.0]])
        b = synthgen.gen_target(spec, 30, [[1.0], [-1.0]])
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.labels, b.labels)

    def test_population_covariance_single_cluster(self):
        spec = synthgen.random_spec(8, 2, 1,
                                    background_coeff_std=1.0,
                                    shared_coeff_std=[4.0, 2.0],
                                    specific_coeff_std=1.5,
                                    noise_std=0.5, seed=21)
        data = synthgen.gen_target(spec, 20000, [[0.0]])
        sample = sample_covariance(center(data)).matrix
        b, s = spec.shared_basis, spec.specific_basis
        population = ((b * spec.shared_coeff_std ** 2) @ b.T
                      + (s * spec.specific_coeff_std ** 2) @ s.T
                      + spec.noise_std ** 2 * np.eye(8))
        rel = np.linalg.norm(sample - population) / np.linalg.norm(population)
        assert rel <= 0.05


class TestSubgroupConstruction:
    def test_pca_misses_dpca_finds(self):
        # shared variance dominates: PCA locks onto it, the ratio does not
        spec = synthgen.default_subgroup_spec(n_features=50, n_shared=3, n_specific=1, seed=4)
        pair = synthgen.gen_pair(spec, 1500, 2000, synthgen.spread_offsets(2, 1, 6.0))
        ct, cb = center(pair.target), center(pair.background)
        cxx, cyy = sample_covariance(ct), sample_covariance(cb)
        u_s = spec.specific_basis[:, 0]
        pc1 = methods.pca_fit(cxx, 1).components[:, 0]
        dpc1 = methods.dpca_fit(cxx, cyy, 1).components[:, 0]
        assert abs(pc1 @ u_s) <= 0.3
        assert abs(dpc1 @ u_s) >= 0.95

    def test_spread_offsets(self):
        np.testing.assert_allclose(synthgen.spread_offsets(2, 1, 6.0), [[-6.0], [6.0]])
        np.testing.assert_allclose(synthgen.spread_offsets(1, 2, 3.0), [[0.0, 0.0]])
        three = synthgen.spread_offsets(3, 1, 4.0)
        np.testing.assert_allclose(three[:, 0], [-4.0, 0.0, 4.0])

    def test_gen_pair_bundles_truth(self):
        spec = tiny_spec(shared_std=1.0, specific_std=1.0, noise=0.1)
        pair = synthgen.gen_pair(spec, 12, 8, [[1.0], [-1.0]])
        assert pair.target.m == 12
        assert pair.background.m == 8
        assert pair.truth is spec
        assert pair.background.labels is None
