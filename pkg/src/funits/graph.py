"""k-nearest-neighbour heat-kernel affinity and its graph Laplacian."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

from .core import check_matrix, check_non_negative
from .exceptions import ConfigError, ShapeError

__all__ = ["AffinityGraph", "GraphLaplacian", "knn_heat_affinity", "laplacian", "graph_laplacian"]


@dataclass(frozen=True)
class AffinityGraph:
    q: np.ndarray
    n_neighbors: int
    bandwidth: float


@dataclass(frozen=True)
class GraphLaplacian:
    l: np.ndarray
    degree: np.ndarray

    @property
    def affinity(self):
        """Recover Q = D - L (exact, since Q has a zero diagonal)."""
        q = np.diag(self.degree) - self.l
        np.fill_diagonal(q, 0.0)
        return q

    @property
    def n(self):
        return self.l.shape[0]

    @cached_property
    def l_sparse(self):
        """L in CSR form; k-NN graphs keep O(n) non-zeros."""
        return sparse.csr_matrix(self.l)

    @cached_property
    def affinity_sparse(self):
        return sparse.csr_matrix(self.affinity)


def knn_heat_affinity(u, n_neighbors=5, bandwidth=None):
    """Heat-kernel weights on the symmetrised k-NN graph of the columns of ``u``.

    Parameters
    ----------
    u : array of shape (m, n)
        Feature matrix; columns are the graph nodes.
    n_neighbors : int, default=5
        Each node keeps its ``n_neighbors`` nearest columns (ties go to the
        lower column index). An edge is kept if either endpoint selects it.
    bandwidth : float, optional
        Kernel width t in ``exp(-d**2 / (2 t**2))``. Defaults to the mean
        length of the kept edges.

    Returns
    -------
    AffinityGraph
    """
    u = check_matrix(u, "feature matrix")
    n = u.shape[1]
    if n < 2:
        raise ShapeError("at least two columns are needed to build a graph")
    if int(n_neighbors) != n_neighbors or n_neighbors < 1:
        raise ConfigError(f"n_neighbors must be a positive integer, got {n_neighbors!r}")
    if bandwidth is not None and not bandwidth > 0:
        raise ConfigError(f"bandwidth must be positive, got {bandwidth!r}")
    n_neighbors = int(n_neighbors)

    d2 = cdist(u.T, u.T, "sqeuclidean")
    k = min(n_neighbors, n - 1)
    ranked = d2.copy()
    np.fill_diagonal(ranked, np.inf)
    nearest = np.argsort(ranked, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), k), nearest.ravel()] = True
    mask |= mask.T
    np.fill_diagonal(mask, False)

    if bandwidth is None:
        bandwidth = float(np.mean(np.sqrt(d2[mask])))
        if bandwidth <= 0:
            bandwidth = 1.0
    q = np.where(mask, np.exp(-d2 / (2.0 * bandwidth**2)), 0.0)
    return AffinityGraph(q, n_neighbors, float(bandwidth))


def laplacian(g):
    """L = D - Q with D the diagonal of row sums of Q."""
    q = g.q if isinstance(g, AffinityGraph) else g
    q = check_non_negative(q, "affinity")
    if q.shape[0] != q.shape[1]:
        raise ShapeError(f"affinity must be square, got {q.shape}")
    degree = q.sum(axis=1)
    l = -q
    l[np.diag_indices_from(l)] = degree - np.diag(q)
    return GraphLaplacian(l, degree)


def graph_laplacian(u, n_neighbors=5, bandwidth=None):
    return laplacian(knn_heat_affinity(u, n_neighbors, bandwidth))
