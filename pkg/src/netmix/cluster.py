"""Seeded k-means with k-means++ starts and deterministic tie handling."""

from __future__ import annotations

import numpy as np


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # squared distances via the expansion; argmin breaks ties at the lowest id
    d2 = (
        (points**2).sum(axis=1)[:, None]
        + (centers**2).sum(axis=1)[None, :]
        - 2.0 * points @ centers.T
    )
    return np.argmin(d2, axis=1)


def centroids(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Cluster means; empty clusters get a zero row."""
    c = np.zeros((k, points.shape[1]))
    np.add.at(c, labels, points)
    counts = np.bincount(labels, minlength=k)
    nonzero = counts > 0
    c[nonzero] /= counts[nonzero, None]
    return c


def _repair_empty(points, labels, centers, k):
    # move the point farthest from its current centroid into each empty
    # cluster (ascending id), never emptying a singleton source cluster
    counts = np.bincount(labels, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        own = ((points - centers[labels]) ** 2).sum(axis=1)
        movable = counts[labels] > 1
        if not movable.any():
            break
        candidates = np.flatnonzero(movable)
        pick = candidates[int(np.argmax(own[candidates]))]
        counts[labels[pick]] -= 1
        labels[pick] = empty
        counts[empty] = 1
    return labels


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def kmeans(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    restarts: int = 20,
    max_iter: int = 100,
) -> np.ndarray:
    """Cluster rows of ``points`` into ``k`` groups; returns integer labels.

    Runs ``restarts`` k-means++ initializations with up to ``max_iter`` Lloyd
    iterations each and keeps the labelling with the lowest within-cluster
    sum of squares (earliest restart wins ties).  Assignment ties go to the
    lowest cluster index; an empty cluster is repaired by moving in the point
    farthest from its current centroid.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise ValueError(f"cannot form {k} clusters from {n} points")
    if k == 1:
        return np.zeros(n, dtype=np.int64)

    best_labels = None
    best_wcss = np.inf
    for _ in range(restarts):
        centers = _kmeans_pp(points, k, rng)
        labels = _repair_empty(points, _assign(points, centers), centers, k)
        for _ in range(max_iter):
            centers = centroids(points, labels, k)
            new_labels = _repair_empty(points, _assign(points, centers), centers, k)
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
        centers = centroids(points, labels, k)
        wcss = float(((points - centers[labels]) ** 2).sum())
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return best_labels.astype(np.int64)
