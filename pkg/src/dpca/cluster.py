"""Small deterministic clustering utilities.

Used in two places: spectral clustering of the alpha-candidate affinity
matrix during automatic alpha selection, and the cluster-separation metrics
reported by the CLI ``compare`` command. Everything is seeded and single
threaded so repeated runs produce identical results.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError, InvalidInputError


def _pairwise_sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    p2 = np.sum(points * points, axis=1, keepdims=True)
    c2 = np.sum(centers * centers, axis=1, keepdims=True).T
    d = p2 + c2 - 2.0 * (points @ centers.T)
    np.maximum(d, 0.0, out=d)
    return d


def kmeans(points: np.ndarray, k: int, seed: int = 0, restarts: int = 8,
           max_iter: int = 100, tol: float = 1e-12) -> np.ndarray:
    """Lloyd's k-means with seeded restarts; returns integer labels.

    Ties in assignment go to the lowest cluster index, and a cluster left
    empty keeps its previous centroid, so degenerate inputs (e.g. all points
    identical) still terminate with a valid labeling.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionError("points must be 2-D")
    m = pts.shape[0]
    if not 1 <= k <= m:
        raise InvalidInputError(f"k must be in [1, {m}], got {k}")
    rng = np.random.default_rng(seed)

    best_labels = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = pts[rng.choice(m, size=k, replace=False)].copy()
        labels = np.zeros(m, dtype=np.int64)
        for _ in range(max_iter):
            dists = _pairwise_sq_dists(pts, centers)
            labels = np.argmin(dists, axis=1)
            moved = 0.0
            for c in range(k):
                member = labels == c
                if np.any(member):
                    new_center = pts[member].mean(axis=0)
                    moved = max(moved, float(np.max(np.abs(new_center - centers[c]))))
                    centers[c] = new_center
            if moved <= tol:
                break
        inertia = float(np.sum(np.min(_pairwise_sq_dists(pts, centers), axis=1)))
        if inertia < best_inertia - 1e-15:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def spectral_cluster(affinity: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Cluster items given a symmetric nonnegative affinity matrix.

    Standard normalized-cut pipeline: form the symmetric normalized affinity
    ``D^{-1/2} A D^{-1/2}``, take its top-``k`` eigenvectors (the bottom
    eigenvectors of the normalized graph Laplacian), row-normalize, and run
    seeded k-means on the rows.
    """
    a = np.asarray(affinity, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("affinity must be square")
    n = a.shape[0]
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must be in [1, {n}], got {k}")
    degrees = a.sum(axis=1)
    if np.any(degrees <= 0):
        raise InvalidInputError("affinity has a zero-degree row")
    inv_root = 1.0 / np.sqrt(degrees)
    normalized = a * inv_root[:, None] * inv_root[None, :]
    normalized = 0.5 * (normalized + normalized.T)
    vals, vecs = np.linalg.eigh(normalized)
    embedding = vecs[:, ::-1][:, :k]
    norms = np.linalg.norm(embedding, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    embedding = embedding / norms
    return kmeans(embedding, k, seed=seed)


def silhouette_score(points: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette coefficient over all samples.

    For sample ``i`` with intra-cluster mean distance ``a`` and smallest
    other-cluster mean distance ``b``, the coefficient is
    ``(b - a) / max(a, b)``; singleton clusters contribute 0.
    """
    pts = np.asarray(points, dtype=np.float64)
    labs = np.asarray(labels)
    uniq = np.unique(labs)
    if uniq.size < 2:
        raise InvalidInputError("silhouette needs at least two clusters")
    if uniq.size >= pts.shape[0]:
        raise InvalidInputError("silhouette needs at least one non-singleton cluster")
    d = np.sqrt(_pairwise_sq_dists(pts, pts))
    m = pts.shape[0]
    scores = np.zeros(m)
    masks = {c: labs == c for c in uniq}
    for i in range(m):
        own = masks[labs[i]]
        n_own = int(np.sum(own))
        if n_own <= 1:
            scores[i] = 0.0
            continue
        a = float(np.sum(d[i, own]) / (n_own - 1))  # excludes self (distance 0)
        b = np.inf
        for c in uniq:
            if c == labs[i]:
                continue
            other = masks[c]
            b = min(b, float(np.mean(d[i, other])))
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(np.mean(scores))


def cluster_label_accuracy(points: np.ndarray, labels: np.ndarray, seed: int = 0) -> float:
    """Accuracy of k-means (k = number of true classes) under the best
    cluster-to-label permutation.

    This quantifies how well the point cloud separates into its labeled
    groups; with two balanced classes, chance level is about 0.5.
    """
    labs = np.asarray(labels)
    classes = np.unique(labs)
    k = classes.size
    if k < 2:
        raise InvalidInputError("need at least two distinct labels")
    if k > 6:
        raise InvalidInputError("accuracy-by-permutation supports at most 6 classes")
    assigned = kmeans(np.asarray(points, dtype=np.float64), k, seed=seed)
    best = 0.0
    for perm in itertools.permutations(range(k)):
        mapped = classes[np.asarray(perm)][assigned]
        best = max(best, float(np.mean(mapped == labs)))
    return best
