import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone

from funits.core import make_rng
from funits.exceptions import ShapeError
from funits.features import (
    MotionFeatures,
    angle_features,
    build_feature_matrix,
    magnitude_feature,
)


def one_step(delta):
    return np.array([[[0.0, 0.0, 0.0], delta]])


def test_three_four_five():
    assert magnitude_feature(one_step([3, 4, 0]))[0, 0] == 5.0


def test_constant_trajectory_has_zero_magnitude():
    t = np.tile([1.0, 2.0, 3.0], (4, 6, 1))
    assert np.all(magnitude_feature(t) == 0)


def test_angle_example():
    z, x, y = angle_features(one_step([3, 4, 0]))
    assert z[0, 0] == pytest.approx(1.6, abs=1e-15)
    assert x[0, 0] == 2.0
    assert y[0, 0] == 1.0


def test_zero_step_is_neutral():
    z, x, y = angle_features(one_step([0, 0, 0]))
    assert (z[0, 0], x[0, 0], y[0, 0]) == (1.0, 1.0, 1.0)


def oracle_features(traj):
    """Straightforward per-entry recomputation."""
    traj = np.asarray(traj, dtype=float)
    if traj.shape[2] == 2:
        traj = np.concatenate([traj, np.zeros(traj.shape[:2] + (1,))], axis=2)
    p, frames = traj.shape[:2]
    blocks = np.zeros((4, frames - 1, p))

    def cos(a, b):
        r = np.hypot(a, b)
        return 1.0 if r < 1e-12 else a / r + 1.0

    for j in range(p):
        for l in range(frames - 1):
            dx, dy, dz = traj[j, l + 1] - traj[j, l]
            blocks[0, l, j] = np.sqrt(dx * dx + dy * dy + dz * dz)
            blocks[1, l, j] = cos(dx, dy)
            blocks[2, l, j] = cos(dy, dz)
            blocks[3, l, j] = cos(dz, dx)
    return blocks.reshape(4 * (frames - 1), p)


def test_matches_oracle_on_random_trajectories():
    t = make_rng(1).standard_normal((30, 7, 3))
    u = build_feature_matrix(t)
    expected = oracle_features(t)
    np.testing.assert_allclose(u[:6], expected[:6], rtol=0, atol=1e-14)
    np.testing.assert_allclose(u, np.clip(expected, 0, None), rtol=0, atol=1e-14)


def test_two_dimensional_input_uses_zero_dz():
    t = make_rng(2).standard_normal((10, 3, 2))
    np.testing.assert_allclose(build_feature_matrix(t), oracle_features(t), atol=1e-14)


def test_shapes():
    assert build_feature_matrix(np.zeros((5, 26, 3))).shape == (100, 5)
    assert build_feature_matrix(np.zeros((1, 2, 3))).shape == (4, 1)


def test_shape_errors():
    with pytest.raises(ShapeError):
        build_feature_matrix(np.zeros((3, 1, 3)))
    with pytest.raises(ShapeError):
        build_feature_matrix(np.zeros((3, 4)))


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 5, 3), elements=st.floats(-100, 100)))
def test_ranges(t):
    u = build_feature_matrix(t)
    assert np.all(u >= 0)
    assert np.all(u[4:] <= 2.0)


def test_translation_invariance():
    t = make_rng(3).standard_normal((20, 5, 3))
    shifted = t + np.array([10.0, -4.0, 7.5])
    np.testing.assert_allclose(build_feature_matrix(shifted), build_feature_matrix(t), atol=1e-12)


def test_magnitude_rotation_invariant_but_angles_not():
    t = make_rng(4).standard_normal((20, 5, 3))
    q, _ = np.linalg.qr(make_rng(5).standard_normal((3, 3)))
    r = t @ q.T
    np.testing.assert_allclose(magnitude_feature(r), magnitude_feature(t), atol=1e-12)
    assert not np.allclose(angle_features(r)[0], angle_features(t)[0])


def test_estimator_api():
    t = make_rng(6).standard_normal((12, 4, 3))
    est = MotionFeatures()
    out = est.fit_transform(t)
    assert out.shape == (12, 12)
    assert out.max() == 1.0
    assert est.scale_ == build_feature_matrix(t).max()
    assert clone(est).get_params() == {"scale": True, "eps": 1e-12}
    raw = MotionFeatures(scale=False).fit(t).transform(t)
    np.testing.assert_array_equal(raw, build_feature_matrix(t).T)
    with pytest.raises(ShapeError):
        est.transform(t[:, :3])
