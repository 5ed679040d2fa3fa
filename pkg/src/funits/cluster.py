"""Spectral clustering of weighting-map columns into functional units."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist, pdist
from sklearn.base import BaseEstimator, ClusterMixin

from .core import STREAM_KMEANS, check_matrix, make_rng
from .exceptions import ConfigError, DegenerateError, ShapeError

__all__ = [
    "ClusterAssignment",
    "weighting_affinity",
    "median_sigma",
    "normalized_laplacian",
    "spectral_cluster",
    "kmeans",
    "FunctionalUnitClustering",
]


@dataclass
class ClusterAssignment:
    """Labels in 1..k for every point, plus diagnostics."""

    labels: np.ndarray
    k: int
    eigengap: Optional[float] = None
    inertia: Optional[float] = None

    def diagnostics(self):
        return {"K": int(self.k), "eigengap": self.eigengap, "inertia": self.inertia}


def weighting_affinity(w, sigma):
    """``exp(-||w_i - w_j||_2 / sigma)`` over the columns of ``w``.

    The exponent uses the plain (not squared) Euclidean distance. The
    result is exactly symmetric with a unit diagonal.
    """
    w = check_matrix(w, "weighting map")
    if not sigma > 0:
        raise ConfigError(f"sigma must be positive, got {sigma!r}")
    d = cdist(w.T, w.T, "euclidean")
    a = np.exp(-d / sigma)
    a = np.triu(a, 1)
    a = a + a.T
    np.fill_diagonal(a, 1.0)
    return a


def median_sigma(w):
    """Median pairwise distance between columns; 1.0 if all columns coincide."""
    w = check_matrix(w, "weighting map")
    if w.shape[1] < 2:
        return 1.0
    med = float(np.median(pdist(w.T)))
    return med if med > 0 else 1.0


def normalized_laplacian(a):
    """``I - D^{-1/2} A D^{-1/2}`` for a symmetric non-negative affinity."""
    a = check_matrix(a, "affinity")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"affinity must be square, got {a.shape}")
    if np.any(a < 0):
        raise ConfigError("affinity entries must be non-negative")
    if not np.array_equal(a, a.T):
        if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12):
            raise ConfigError("affinity must be symmetric")
        a = 0.5 * (a + a.T)
    deg = a.sum(axis=1)
    isolated = np.flatnonzero(deg <= 0)
    if isolated.size:
        raise DegenerateError(f"point {int(isolated[0])} has an all-zero affinity row")
    s = 1.0 / np.sqrt(deg)
    m = s[:, None] * a * s[None, :]
    lsym = np.eye(a.shape[0]) - 0.5 * (m + m.T)
    return lsym


def _sq_dist(x, centers):
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _plus_plus(x, k, rng):
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    closest = _sq_dist(x, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        closest = np.minimum(closest, _sq_dist(x, centers[j : j + 1])[:, 0])
    return centers


def _lloyd(x, centers, max_iter, tol):
    prev = np.inf
    for _ in range(max_iter):
        d = _sq_dist(x, centers)
        labels = np.argmin(d, axis=1)
        dist = d[np.arange(x.shape[0]), labels]
        inertia = float(dist.sum())
        counts = np.bincount(labels, minlength=centers.shape[0])
        for j in np.flatnonzero(counts == 0):
            # re-seed an empty cluster with the point farthest from its center
            far = int(np.argmax(dist))
            if dist[far] <= 0:
                break
            centers[j] = x[far]
            labels[far] = j
            dist[far] = 0.0
        for j in range(centers.shape[0]):
            members = labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
        if abs(prev - inertia) < tol:
            break
        prev = inertia
    d = _sq_dist(x, centers)
    labels = np.argmin(d, axis=1)
    return labels, float(d[np.arange(x.shape[0]), labels].sum())


def kmeans(x, k, seed=0, restarts=20, max_iter=300, tol=1e-10):
    """Lloyd's algorithm from k-means++ starts; best of ``restarts`` by inertia.

    Returns
    -------
    labels : ndarray of int in 0..k-1
    inertia : float
    """
    x = check_matrix(x, "data")
    n = x.shape[0]
    if int(k) != k or k < 1 or k > n:
        raise ConfigError(f"k must lie in 1..{n}, got {k!r}")
    if restarts < 1:
        raise ConfigError("restarts must be >= 1")
    rng = make_rng(seed, STREAM_KMEANS)
    best = None
    for _ in range(restarts):
        labels, inertia = _lloyd(x, _plus_plus(x, int(k), rng), max_iter, tol)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return best


def spectral_cluster(a, k, seed=0, restarts=20):
    """Normalized-cut spectral clustering of a dense affinity matrix.

    The k eigenvectors of the smallest eigenvalues of the symmetric
    normalized Laplacian form an embedding whose rows are scaled to unit
    length (zero rows stay zero) and then grouped by k-means.

    Returns
    -------
    ClusterAssignment
        Labels in 1..k; ``eigengap`` is lambda_{k+1} - lambda_k (None when k = n).
    """
    lsym = normalized_laplacian(a)
    n = lsym.shape[0]
    if int(k) != k or not 1 <= k <= n:
        raise ConfigError(f"k must lie in 1..{n}, got {k!r}")
    k = int(k)
    top = min(k, n - 1)
    vals, vecs = scipy.linalg.eigh(lsym, subset_by_index=[0, top])
    emb = vecs[:, :k]
    norms = np.linalg.norm(emb, axis=1)
    emb = np.divide(emb, norms[:, None], out=np.zeros_like(emb), where=norms[:, None] > 0)
    labels, inertia = kmeans(emb, k, seed=seed, restarts=restarts)
    gap = float(vals[k] - vals[k - 1]) if k < n else None
    return ClusterAssignment(labels + 1, k, gap, inertia)


class FunctionalUnitClustering(ClusterMixin, BaseEstimator):
    """Group points by the similarity of their weighting-map columns.

    Parameters
    ----------
    n_clusters : int, default=4
    sigma : float or None, default=None
        Affinity scale; None uses the median pairwise distance.
    n_init : int, default=20
        k-means restarts on the spectral embedding.
    random_state : int, default=0

    Attributes
    ----------
    labels_ : ndarray of shape (n_points,)
        Labels in 1..n_clusters.
    affinity_matrix_ : ndarray of shape (n_points, n_points)
    sigma_ : float
    eigengap_ : float or None
    """

    def __init__(self, n_clusters=4, *, sigma=None, n_init=20, random_state=0):
        self.n_clusters = n_clusters
        self.sigma = sigma
        self.n_init = n_init
        self.random_state = random_state

    def fit(self, X, y=None):
        """X has one row per point (the transposed weighting map)."""
        w = check_matrix(X, "X").T
        self.sigma_ = median_sigma(w) if self.sigma is None else float(self.sigma)
        self.affinity_matrix_ = weighting_affinity(w, self.sigma_)
        res = spectral_cluster(self.affinity_matrix_, self.n_clusters,
                               seed=self.random_state, restarts=self.n_init)
        self.labels_ = res.labels
        self.eigengap_ = res.eigengap
        self.inertia_ = res.inertia
        return self
