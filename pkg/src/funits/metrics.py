"""Clustering accuracy under optimal label matching, NMI and unit-size spread."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import check_matrix
from .exceptions import LengthError, ShapeError

__all__ = [
    "MetricsReport",
    "hungarian",
    "contingency",
    "accuracy",
    "mutual_information",
    "entropy",
    "nmi",
    "align_labels",
    "unit_size_stats",
    "evaluate",
]


def hungarian(cost):
    """Minimum-cost assignment of rows to columns of a square matrix.

    Among optimal assignments the lexicographically smallest column sequence
    is returned, so ties resolve deterministically.

    Returns
    -------
    ndarray of int
        ``perm[i]`` is the column assigned to row ``i``.
    """
    cost = check_matrix(cost, "cost")
    k = cost.shape[0]
    if cost.shape != (k, k):
        raise ShapeError(f"cost matrix must be square, got {cost.shape}")
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    rows, cols = linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    tol = 1e-12 * max(1.0, float(np.abs(cost).sum()))

    perm = np.empty(k, dtype=np.int64)
    fixed = 0.0
    free_cols = list(range(k))
    for i in range(k):
        rest_rows = np.arange(i + 1, k)
        for j in free_cols:
            remaining = [c for c in free_cols if c != j]
            total = fixed + cost[i, j]
            if remaining:
                sub = cost[np.ix_(rest_rows, remaining)]
                r, c = linear_sum_assignment(sub)
                total += float(sub[r, c].sum())
            if total <= best + tol:
                perm[i] = j
                fixed += cost[i, j]
                free_cols.remove(j)
                break
    return perm


def _check_pair(a, b):
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise LengthError(f"label vectors differ in length ({a.size} vs {b.size})")
    if a.size == 0:
        raise LengthError("label vectors must be non-empty")
    return a, b


def contingency(a, b):
    """Counts table with rows = distinct labels of ``a`` and cols = those of ``b``.

    Returns
    -------
    table : ndarray of int
    a_values, b_values : ndarray
        Sorted distinct labels indexing rows and columns.
    """
    a, b = _check_pair(a, b)
    av, ai = np.unique(a, return_inverse=True)
    bv, bi = np.unique(b, return_inverse=True)
    table = np.zeros((av.size, bv.size), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table, av, bv


def _matched(table):
    size = max(table.shape)
    padded = np.zeros((size, size))
    padded[: table.shape[0], : table.shape[1]] = table
    perm = hungarian(-padded)
    return perm, int(padded[np.arange(size), perm].sum())


def accuracy(pred, truth):
    """Percentage of points whose predicted label maps onto the true one."""
    table, _, _ = contingency(pred, truth)
    _, matches = _matched(table)
    return 100.0 * matches / table.sum()


def entropy(labels):
    """Shannon entropy in bits of the empirical label distribution."""
    _, counts = np.unique(np.asarray(labels).ravel(), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def mutual_information(a, b):
    """Mutual information in bits; empty cells contribute nothing."""
    table, _, _ = contingency(a, b)
    n = table.sum()
    pab = table / n
    pa = pab.sum(axis=1, keepdims=True)
    pb = pab.sum(axis=0, keepdims=True)
    nz = pab > 0
    return float((pab[nz] * np.log2(pab[nz] / (pa @ pb)[nz])).sum())


def nmi(a, b):
    """Mutual information over the larger of the two entropies, as a percentage.

    Two single-cluster labelings have no entropy; they describe the same
    partition and score 100.
    """
    a, b = _check_pair(a, b)
    h = max(entropy(a), entropy(b))
    if h == 0:
        return 100.0 if _same_partition(a, b) else 0.0
    mi = mutual_information(a, b)
    return float(min(max(100.0 * mi / h, 0.0), 100.0))


def _same_partition(a, b):
    table, _, _ = contingency(a, b)
    return table.shape[0] == table.shape[1] and np.count_nonzero(table) == table.shape[0]


def align_labels(labels, reference):
    """Rename ``labels`` so that they agree as much as possible with ``reference``.

    Labels with no counterpart keep fresh values above the reference range.
    """
    labels, reference = _check_pair(labels, reference)
    table, lv, rv = contingency(labels, reference)
    perm, _ = _matched(table)
    mapping = {}
    extra = int(rv.max()) + 1
    for i, lab in enumerate(lv):
        j = perm[i]
        if j < rv.size:
            mapping[lab] = rv[j]
        else:
            mapping[lab] = extra
            extra += 1
    return np.array([mapping[x] for x in labels])


def unit_size_stats(assignments, aligned_to, k=None):
    """Mean and population standard deviation of unit sizes across subjects.

    Each subject's labels are first matched to the common labels. Sizes are
    percentages of the number of points.

    Returns
    -------
    dict
        ``units`` (1..k), ``mean`` and ``std`` lists, and ``sizes`` (subjects x k).
    """
    common = np.asarray(getattr(aligned_to, "labels", aligned_to)).ravel()
    subjects = [np.asarray(getattr(s, "labels", s)).ravel() for s in assignments]
    if not subjects:
        raise ShapeError("at least one subject assignment is required")
    if k is None:
        k = getattr(aligned_to, "k", None) or int(common.max())
    for i, s in enumerate(subjects):
        if s.size != common.size:
            raise ShapeError(f"subject {i} has {s.size} labels, common map has {common.size}")
        if np.unique(s).size > k:
            raise ShapeError(f"subject {i} uses more than {k} labels")
    n = common.size
    units = np.arange(1, k + 1)
    sizes = np.zeros((len(subjects), k))
    for i, s in enumerate(subjects):
        mapped = align_labels(s, common)
        sizes[i] = [100.0 * np.count_nonzero(mapped == u) / n for u in units]
    return {
        "units": units.tolist(),
        "mean": sizes.mean(axis=0).tolist(),
        "std": sizes.std(axis=0).tolist(),
        "sizes": sizes.tolist(),
    }


@dataclass
class MetricsReport:
    ac: float
    nmi: float
    contingency: np.ndarray
    pred_values: list
    truth_values: list
    unit_size_stats: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "ac": self.ac,
            "nmi": self.nmi,
            "contingency": self.contingency.tolist(),
            "pred_labels": self.pred_values,
            "truth_labels": self.truth_values,
        }
        if self.unit_size_stats is not None:
            d["unit_size_stats"] = self.unit_size_stats
        d.update(self.extra)
        return d


def evaluate(pred, truth):
    """AC, NMI and the contingency table of ``pred`` against ``truth``."""
    table, pv, tv = contingency(pred, truth)
    return MetricsReport(
        ac=accuracy(pred, truth),
        nmi=nmi(pred, truth),
        contingency=table,
        pred_values=[int(x) for x in pv],
        truth_values=[int(x) for x in tv],
    )
