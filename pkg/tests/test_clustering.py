import numpy as np
import pytest

from models.basis import ContourMatrix
from models.cluster import ClusterModel
from services.baseline_descriptors import EigencontourDescriptor, build_descriptor
from services.clustering import centroid_contours, kmeans, kmeans_plusplus, nearest_centroid
from services.eigenbasis import decode_batch, encode_batch, fit_eigenbasis
from tests.oracles import best_two_partition
from utils.errors import DimensionMismatch, InvalidParams, TooFewPoints


def blobs(rng, centers, per=10, spread=0.3):
    return np.vstack([rng.normal(center, spread, (per, len(center))) for center in centers])


class TestKMeans:

    def test_k_equals_l_gives_zero_inertia(self, rng):
        X = rng.uniform(0, 10, (12, 3))
        model = kmeans(X, 12, seed=0)
        assert model.inertia == pytest.approx(0.0, abs=1e-20)
        assert sorted(model.assignments.tolist()) == list(range(12))

    def test_single_cluster_is_the_mean(self, rng):
        X = rng.uniform(0, 10, (40, 4))
        model = kmeans(X, 1, seed=0)
        np.testing.assert_allclose(model.centroids[0], X.mean(axis=0), atol=1e-12)
        assert model.inertia == pytest.approx(float(np.sum((X - X.mean(axis=0)) ** 2)))

    def test_two_clusters_match_exhaustive_search(self, rng):
        X = blobs(rng, [[0.0, 0.0], [6.0, 6.0]], per=4)
        labels, inertia = best_two_partition(X)
        model = kmeans(X, 2, seed=5)
        assert model.inertia == pytest.approx(inertia, rel=1e-9)
        same = [a == b for a, b in zip(model.assignments, labels)]
        assert all(same) or not any(same)

    def test_inertia_never_increases(self, rng):
        for seed in range(100):
            X = rng.uniform(0, 10, (60, 4))
            model = kmeans(X, 5, seed=seed)
            history = model.inertia_history
            assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(history, history[1:]))
            assert model.inertia == pytest.approx(history[-1])

    def test_deterministic_under_seed(self, rng):
        X = rng.uniform(0, 10, (80, 6))
        first = kmeans(X, 7, seed=42)
        second = kmeans(X, 7, seed=42)
        assert first.centroids.tobytes() == second.centroids.tobytes()
        np.testing.assert_array_equal(first.assignments, second.assignments)

    def test_separated_blobs_are_recovered(self, rng):
        X = blobs(rng, [[0, 0], [20, 0], [0, 20]], per=15)
        model = kmeans(X, 3, seed=1)
        for start in range(0, 45, 15):
            assert len(set(model.assignments[start:start + 15].tolist())) == 1
        assert sorted(model.sizes.tolist()) == [15, 15, 15]

    def test_empty_cluster_is_reseeded(self, rng):
        X = blobs(rng, [[0, 0], [10, 10]], per=10)
        init = np.array([[0.0, 0.0], [10.0, 10.0], [1000.0, 1000.0]])
        model = kmeans(X, 3, init=init)
        assert np.all(model.sizes > 0)
        assert np.all(np.abs(model.centroids) < 100)

    def test_duplicate_points_seed_lowest_unchosen(self):
        X = np.ones((5, 2))
        seeds = kmeans_plusplus(X, 3, seed=0)
        np.testing.assert_array_equal(seeds, np.ones((3, 2)))

    def test_parameter_errors(self, rng):
        X = rng.uniform(0, 1, (5, 2))
        with pytest.raises(TooFewPoints):
            kmeans(X, 6)
        with pytest.raises(InvalidParams):
            kmeans(X, 0)
        with pytest.raises(DimensionMismatch):
            kmeans(X, 2, init=np.zeros((2, 3)))

    def test_max_iter_cap(self, rng):
        X = rng.uniform(0, 10, (200, 2))
        model = kmeans(X, 20, seed=3, max_iter=1)
        assert model.n_iter == 1
        assert len(model.inertia_history) == 2


class TestContourSpace:

    def test_clusters_match_reconstructed_contour_space(self, random_contours):
        A = ContourMatrix.from_radii([c.radii for c in random_contours])
        basis = fit_eigenbasis(A, 5)
        C = encode_batch(A.data.T, basis)
        R = decode_batch(C, basis, clamp=False)

        init = C[:4]
        in_coefficients = kmeans(C, 4, init=init)
        in_contours = kmeans(R, 4, init=decode_batch(init, basis, clamp=False))

        np.testing.assert_array_equal(in_coefficients.assignments, in_contours.assignments)
        assert in_coefficients.inertia == pytest.approx(in_contours.inertia, rel=1e-9)

    def test_centroid_contours_are_decoded_centroids(self, random_contours):
        A = ContourMatrix.from_radii([c.radii for c in random_contours])
        descriptor = EigencontourDescriptor(fit_eigenbasis(A, 6))
        model = kmeans(descriptor.encode_batch(A.data.T), 4, seed=0)
        contours = centroid_contours(model, descriptor)
        assert contours.shape == (4, 64)
        for row, centroid in zip(contours, model.centroids):
            np.testing.assert_allclose(row, descriptor.decode(centroid))

    def test_identical_contours_share_one_centroid(self):
        radii = np.linspace(5.0, 9.0, 32)
        A = ContourMatrix.from_radii([radii] * 6)
        descriptor = EigencontourDescriptor(fit_eigenbasis(A, 1))
        model = kmeans(descriptor.encode_batch(A.data.T), 1, seed=0)
        np.testing.assert_allclose(centroid_contours(model, descriptor)[0], radii, atol=1e-8)

    def test_zero_centroid_decodes_to_zero_radii(self):
        descriptor = build_descriptor('chebyshev', 4, 16)
        model = ClusterModel(centroids=np.zeros((1, 4)), assignments=[0], inertia=0.0)
        np.testing.assert_array_equal(centroid_contours(model, descriptor), np.zeros((1, 16)))

    def test_descriptor_dimension_mismatch(self):
        model = ClusterModel(centroids=np.zeros((2, 5)), assignments=[0, 1], inertia=0.0)
        with pytest.raises(DimensionMismatch):
            centroid_contours(model, build_descriptor('centroidal', 4, 16))


class TestNearestCentroid:

    @pytest.fixture
    def model(self):
        centroids = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0], [-1.0, 0.0]])
        return ClusterModel(centroids=centroids, assignments=[0, 1, 2, 3], inertia=0.0)

    def test_exact_centroid(self, model):
        assert nearest_centroid(np.array([5.0, 5.0]), model) == 2

    def test_tie_goes_to_smallest_index(self, model):
        # equidistant from centroids 0 and 1
        assert nearest_centroid(np.array([0.5, 3.0]), model) == 0
        # equidistant from 0 and 3
        assert nearest_centroid(np.array([-0.5, -3.0]), model) == 0

    def test_matches_linear_scan(self, rng):
        centroids = rng.normal(size=(30, 6))
        model = ClusterModel(centroids=centroids, assignments=np.arange(30), inertia=0.0)
        for _ in range(100):
            c = rng.normal(size=6)
            expected = min(range(30), key=lambda k: (float(np.sum((centroids[k] - c) ** 2)), k))
            assert nearest_centroid(c, model) == expected

    def test_dimension_mismatch(self, model):
        with pytest.raises(DimensionMismatch):
            nearest_centroid(np.zeros(3), model)


class TestPersistence:

    def test_round_trip(self, rng, tmp_path):
        model = kmeans(rng.uniform(0, 1, (20, 3)), 4, seed=9, descriptor_ref='abc')
        path = model.save(tmp_path / 'clusters.json', extra={'descriptor': {'kind': 'eigencontour'}})
        restored = ClusterModel.load(path)
        np.testing.assert_array_equal(restored.centroids, model.centroids)
        np.testing.assert_array_equal(restored.assignments, model.assignments)
        assert restored.seed == 9
        assert restored.descriptor_ref == 'abc'
        assert restored.inertia_history == model.inertia_history
