"""
K-means clustering of descriptor vectors.

Lloyd's algorithm with seeded k-means++ initialization. Distances are
Euclidean in the coefficient space, which for eigencontours equals the
distance between the (pre-clamp) reconstructed contours, so clusters found
here are the clusters of the contours themselves.
"""

from typing import Any, Optional

import numpy as np
from scipy.spatial.distance import cdist

from config import Config
from models.cluster import ClusterModel
from services.baseline_descriptors import DescriptorModel
from utils.errors import DimensionMismatch, InvalidParams, TooFewPoints
from utils.logger import get_logger

logger = get_logger(__name__)


def kmeans_plusplus(X: np.ndarray, K: int, seed: int) -> np.ndarray:
    """
    k-means++ seeding driven by numpy's default_rng(seed).

    Points already chosen have zero weight; once every remaining weight is
    zero (duplicate points) the lowest unchosen index is taken.
    """
    rng = np.random.default_rng(seed)
    L = X.shape[0]
    chosen = [int(rng.integers(0, L))]
    closest = cdist(X, X[chosen], 'sqeuclidean').ravel()
    for _ in range(1, K):
        total = closest.sum()
        if total > 0:
            index = int(rng.choice(L, p=closest / total))
        else:
            unchosen = np.setdiff1d(np.arange(L), chosen)
            index = int(unchosen[0])
        chosen.append(index)
        closest = np.minimum(closest, cdist(X, X[[index]], 'sqeuclidean').ravel())
    return X[chosen].copy()


def _assign(X: np.ndarray, centroids: np.ndarray):
    distances = cdist(X, centroids, 'sqeuclidean')
    # argmin keeps the smallest index on ties
    labels = np.argmin(distances, axis=1)
    return labels, distances[np.arange(X.shape[0]), labels]


def _inertia(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum(np.square(X - centroids[labels])))


def _update(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    K = centroids.shape[0]
    updated = centroids.copy()
    empty = []
    for j in range(K):
        members = X[labels == j]
        if len(members):
            updated[j] = members.mean(axis=0)
        else:
            empty.append(j)
    if empty:
        # reseed each empty cluster at the point farthest from its own centroid
        spread = np.sum(np.square(X - updated[labels]), axis=1)
        order = np.argsort(-spread, kind='stable')
        for j, index in zip(empty, order):
            logger.debug(f"Cluster {j} empty; reseeded at point {int(index)}")
            updated[j] = X[index]
    return updated


def kmeans(coeffs: np.ndarray, K: int, seed: Optional[int] = None,
           max_iter: Optional[int] = None, init: Optional[np.ndarray] = None,
           descriptor_ref: Optional[str] = None) -> ClusterModel:
    """
    Lloyd's algorithm.

    Args:
        coeffs: L x M descriptor rows
        K: Number of clusters, K <= L
        seed: Seed of the k-means++ initialization (default Config.SEED)
        max_iter: Iteration cap (default Config.MAX_ITER)
        init: Explicit K x M initial centroids (skips k-means++)
        descriptor_ref: Id of the descriptor that produced coeffs

    Returns:
        ClusterModel: Centroids, assignments, inertia and its history

    Raises:
        TooFewPoints: If K > L
        InvalidParams: If K < 1 or coefficients are not finite
    """
    X = np.atleast_2d(np.asarray(coeffs, dtype=float))
    L = X.shape[0]
    seed = Config.SEED if seed is None else int(seed)
    max_iter = Config.MAX_ITER if max_iter is None else int(max_iter)
    if K < 1:
        raise InvalidParams(f"K must be positive, got {K}")
    if K > L:
        raise TooFewPoints(f"Cannot form K={K} clusters from {L} points")
    if not np.all(np.isfinite(X)):
        raise InvalidParams("Coefficients must be finite")

    if init is None:
        centroids = kmeans_plusplus(X, K, seed)
    else:
        centroids = np.array(init, dtype=float)
        if centroids.shape != (K, X.shape[1]):
            raise DimensionMismatch(f"init has shape {centroids.shape}, expected {(K, X.shape[1])}")

    labels, _ = _assign(X, centroids)
    history = [_inertia(X, centroids, labels)]
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        centroids = _update(X, labels, centroids)
        new_labels, _ = _assign(X, centroids)
        history.append(_inertia(X, centroids, new_labels))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    inertia = _inertia(X, centroids, labels)
    if converged:
        logger.info(f"K-means K={K} converged after {n_iter} iterations, inertia={inertia:.6g}")
    else:
        logger.warning(f"K-means K={K} stopped at max_iter={max_iter}, inertia={inertia:.6g}")

    return ClusterModel(centroids=centroids, assignments=labels, inertia=inertia, seed=seed,
                        descriptor_ref=descriptor_ref, n_iter=n_iter, converged=converged,
                        inertia_history=history)


def nearest_centroid(c: Any, model: ClusterModel) -> int:
    """
    Index of the closest centroid; ties go to the smallest index.

    Raises:
        DimensionMismatch: If c and the centroids differ in dimension
    """
    vector = np.asarray(getattr(c, 'c', c), dtype=float).reshape(-1)
    if vector.size != model.M:
        raise DimensionMismatch(f"Vector has {vector.size} entries, centroids have M={model.M}")
    distances = np.sum(np.square(model.centroids - vector), axis=1)
    return int(np.argmin(distances))


def centroid_contours(model: ClusterModel, descriptor: DescriptorModel) -> np.ndarray:
    """
    Decode every centroid to a length-N radii vector (clamped at 0).

    Returns:
        np.ndarray: K x N radii

    Raises:
        DimensionMismatch: If the descriptor dimension differs from the model's
    """
    if descriptor.M != model.M:
        raise DimensionMismatch(f"Descriptor has M={descriptor.M}, cluster model has M={model.M}")
    return descriptor.decode_batch(model.centroids)
