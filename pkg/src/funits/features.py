"""Motion features: step magnitudes and projected direction cosines.

For trajectories of P points over L frames the feature matrix has
4(L-1) rows and P columns. Column p stacks the L-1 step magnitudes,
then the three shifted direction cosines (xy, yz and zx projections),
each block ordered by frame.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import scale_to_unit
from .exceptions import ConfigError, ShapeError

__all__ = [
    "check_trajectories",
    "magnitude_feature",
    "angle_features",
    "build_feature_matrix",
    "MotionFeatures",
]


def check_trajectories(traj):
    """Return trajectories as a (P, L, 3) float array; 2-D input gets z = 0."""
    t = np.asarray(traj, dtype=np.float64)
    if t.ndim != 3 or t.shape[2] not in (2, 3):
        raise ShapeError(f"trajectories must have shape (P, L, 2|3), got {t.shape}")
    if t.shape[0] < 1:
        raise ShapeError("at least one point is required")
    if t.shape[1] < 2:
        raise ShapeError("at least two frames are required")
    if not np.all(np.isfinite(t)):
        raise ShapeError("trajectories contain non-finite values")
    if t.shape[2] == 2:
        t = np.concatenate([t, np.zeros(t.shape[:2] + (1,))], axis=2)
    return t


def _steps(traj):
    # (L-1, P, 3)
    return np.diff(check_trajectories(traj), axis=1).transpose(1, 0, 2)


def magnitude_feature(traj):
    """Euclidean length of each frame-to-frame step, shape (L-1, P)."""
    d = _steps(traj)
    return np.sqrt(np.sum(d * d, axis=2))


def _shifted_cosine(a, b, eps):
    den = np.sqrt(a * a + b * b)
    out = np.ones_like(den)
    ok = den >= eps
    out[ok] = a[ok] / den[ok] + 1.0
    return out


def angle_features(traj, eps=1e-12):
    """Shifted direction cosines of each step, three arrays of shape (L-1, P).

    The first uses the x component against the xy projection, the second y
    against yz, the third z against zx. Steps whose projection is shorter than
    ``eps`` get the neutral value 1.
    """
    if not eps > 0:
        raise ConfigError("eps must be positive")
    d = _steps(traj)
    dx, dy, dz = d[..., 0], d[..., 1], d[..., 2]
    return (
        _shifted_cosine(dx, dy, eps),
        _shifted_cosine(dy, dz, eps),
        _shifted_cosine(dz, dx, eps),
    )


def build_feature_matrix(traj, eps=1e-12):
    """Stack magnitude and angle blocks into the 4(L-1) x P feature matrix."""
    z, x, y = angle_features(traj, eps)
    u = np.vstack([magnitude_feature(traj), z, x, y])
    # rounding can push a cosine a hair outside [-1, 1]
    return np.clip(u, 0.0, None, out=u)


class MotionFeatures(TransformerMixin, BaseEstimator):
    """Transform trajectories into per-point motion feature vectors.

    Parameters
    ----------
    scale : bool, default=True
        Divide by the largest feature value seen in ``fit``.
    eps : float, default=1e-12
        Projection length below which a direction is treated as undefined.

    Attributes
    ----------
    scale_ : float
        Divisor applied in :meth:`transform` (1.0 when ``scale=False``).
    n_frames_ : int
    """

    def __init__(self, scale=True, eps=1e-12):
        self.scale = scale
        self.eps = eps

    def fit(self, X, y=None):
        """X is an array of trajectories with shape (n_points, n_frames, 2|3)."""
        t = check_trajectories(X)
        self.n_frames_ = t.shape[1]
        if self.scale:
            _, self.scale_ = scale_to_unit(build_feature_matrix(t, self.eps))
        else:
            self.scale_ = 1.0
        return self

    def transform(self, X):
        """Return features of shape (n_points, 4 * (n_frames - 1))."""
        check_is_fitted(self, "scale_")
        t = check_trajectories(X)
        if t.shape[1] != self.n_frames_:
            raise ShapeError(f"expected {self.n_frames_} frames, got {t.shape[1]}")
        return (build_feature_matrix(t, self.eps) / self.scale_).T
