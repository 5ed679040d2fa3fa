import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import pdist

from funits.exceptions import ConfigError, EmptyRegionError
from funits.features import magnitude_feature
from funits.simulate import (
    SCENARIOS,
    Box,
    Ellipsoid,
    RegionSpec,
    Rotation,
    Translation,
    apply_rigid_motion,
    generate_dataset,
    load_dataset,
    make_scenario,
    save_dataset,
)


def test_translation_box_has_unit_constant_steps():
    ds = generate_dataset([RegionSpec("a", Box((0, 0, 0), (2, 2, 2)), Translation((0, 0, 1)))],
                          spacing=1.0, frames=11)
    steps = np.diff(ds.trajectories, axis=1)
    np.testing.assert_allclose(magnitude_feature(ds.trajectories), 1.0, atol=1e-12)
    np.testing.assert_allclose(steps, np.broadcast_to([0, 0, 1], steps.shape), atol=1e-12)
    assert ds.num_points == 27 and ds.num_labels == 1


def test_zero_rotation_gives_constant_trajectories():
    ds = generate_dataset([RegionSpec("a", Box((0, 0, 0), (3, 2, 1)), Rotation((1, 1, 1), 0.0))],
                          spacing=1.0, frames=5)
    assert np.all(magnitude_feature(ds.trajectories) == 0)


def test_quarter_turn():
    p = apply_rigid_motion((1, 0, 0), Rotation((0, 0, 0), 90.0, (0, 0, 1)), 1)
    np.testing.assert_allclose(p, [0, 1, 0], atol=1e-12)


def test_frame_zero_is_identity():
    for motion in (Translation((1, 2, 3)), Rotation((4, 5, 6), 17.0, (1, 1, 0))):
        np.testing.assert_array_equal(apply_rigid_motion((0.3, -2, 5), motion, 0), [0.3, -2, 5])


def test_translation_scales_with_frame():
    np.testing.assert_allclose(apply_rigid_motion((1, 1, 1), Translation((0.5, 0, -1)), 4),
                               [3, 1, -3])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
           lambda a: np.linalg.norm(a) > 0.1))
def test_four_quarter_turns_close(point, center, axis):
    p = apply_rigid_motion(point, Rotation(tuple(center), 90.0, tuple(axis)), 4)
    np.testing.assert_allclose(p, point, atol=1e-10)


def test_rotation_axis_must_be_nonzero():
    with pytest.raises(ConfigError):
        Rotation((0, 0, 0), 1.0, (0, 0, 0))


def test_geometry_needs_positive_extent():
    with pytest.raises(ConfigError):
        Box((0, 0, 0), (1, 0, 1))
    with pytest.raises(ConfigError):
        Ellipsoid((0, 0, 0), (1, 1, 0))


def test_rigid_motion_preserves_distances():
    ds = make_scenario("sim3d-1", seed=0)
    sc = SCENARIOS["sim3d-1"]()
    clean = generate_dataset(seed=0, **{**sc, "noise": 0.0})
    for lab, name in enumerate(clean.label_names, 1):
        if "|" in name:
            continue  # interdigitated cells add two displacements
        pts = clean.trajectories[clean.truth_labels == lab]
        d0 = pdist(pts[:, 0])
        for f in (1, 5, 10):
            np.testing.assert_allclose(pdist(pts[:, f]), d0, rtol=1e-10)
    assert ds.num_points == clean.num_points


@pytest.mark.parametrize("name,expected", [("sim3d-1", 4), ("sim3d-2", 4), ("sim2d", 3)])
def test_scenarios_label_counts(name, expected):
    ds = make_scenario(name)
    assert ds.num_labels == expected
    counts = np.bincount(ds.truth_labels)[1:]
    assert counts.sum() == ds.num_points and np.all(counts > 0)


def test_sim3d_1_shape():
    ds = make_scenario("sim3d-1")
    assert ds.dim == 3 and ds.num_frames == 11
    assert 1500 <= ds.num_points <= 2500
    assert ds.label_names == ["SL", "T", "SL|V", "T|V"]


def test_overlap_checkerboard_and_composed_motion():
    regions = [
        RegionSpec("a", Box((0, 0, 0), (3, 3, 3)), Translation((1, 0, 0)), "b"),
        RegionSpec("b", Box((0, 0, 0), (3, 3, 3)), Translation((0, 1, 0))),
    ]
    ds = generate_dataset(regions, spacing=1.0, frames=2)
    # every point lies in the overlap; half the cells are interdigitated
    assert ds.label_names == ["a", "a|b"]
    assert np.bincount(ds.truth_labels)[1:].tolist() == [32, 32]
    step = ds.trajectories[:, 1] - ds.trajectories[:, 0]
    pair = ds.truth_labels == 2
    np.testing.assert_allclose(step[pair], np.broadcast_to([1, 1, 0], step[pair].shape))
    np.testing.assert_allclose(step[~pair], np.broadcast_to([1, 0, 0], step[~pair].shape))


def test_checker_period_two():
    regions = [
        RegionSpec("a", Box((0, 0), (3, 3)), Translation((1, 0)), "b"),
        RegionSpec("b", Box((0, 0), (3, 3)), Translation((0, 1))),
    ]
    ds = generate_dataset(regions, spacing=1.0, frames=2, checker_period=2)
    grid = ds.truth_labels.reshape(4, 4)
    np.testing.assert_array_equal(grid, [[2, 2, 1, 1], [2, 2, 1, 1], [1, 1, 2, 2], [1, 1, 2, 2]])


def test_empty_region():
    far = RegionSpec("a", Ellipsoid((0.5, 0.5, 0.5), (0.1, 0.1, 0.1)), Translation((1, 0, 0)))
    with pytest.raises(EmptyRegionError):
        generate_dataset([far], spacing=1.0, frames=2)


def test_bad_arguments():
    r = RegionSpec("a", Box((0, 0), (1, 1)), Translation((1, 0)))
    with pytest.raises(ConfigError):
        generate_dataset([], 1.0, 2)
    with pytest.raises(ConfigError):
        generate_dataset([r], 1.0, 1)
    with pytest.raises(ConfigError):
        make_scenario("nope")


def test_same_seed_same_bytes():
    a = make_scenario("sim3d-2", seed=5)
    b = make_scenario("sim3d-2", seed=5)
    c = make_scenario("sim3d-2", seed=6)
    assert a.trajectories.tobytes() == b.trajectories.tobytes()
    assert a.trajectories.tobytes() != c.trajectories.tobytes()
    np.testing.assert_array_equal(a.truth_labels, c.truth_labels)


def test_noise_leaves_reference_frame_alone():
    ds = make_scenario("sim2d", seed=1)
    clean = generate_dataset(seed=1, **{**SCENARIOS["sim2d"](), "noise": 0.0})
    np.testing.assert_array_equal(ds.trajectories[:, 0], clean.trajectories[:, 0])
    assert not np.array_equal(ds.trajectories[:, 1], clean.trajectories[:, 1])


def test_save_and_load(tmp_path):
    ds = make_scenario("sim2d", seed=2)
    path = save_dataset(ds, tmp_path / "d")
    manifest = json.loads(open(path).read())
    assert manifest["dim"] == 2 and manifest["P"] == ds.num_points
    assert manifest["L"] == 2 and manifest["K_true"] == 3
    assert manifest["frames"] == ["frame_000.csv", "frame_001.csv"]
    back = load_dataset(path)
    assert np.array_equal(back.trajectories, ds.trajectories)
    np.testing.assert_array_equal(back.truth_labels, ds.truth_labels)
