"""Synthetic Lagrangian motion fields with planted region labels.

Regions are axis-aligned boxes or ellipsoids, each moving rigidly
(translation or rotation about a fixed pivot). Points are sampled on a
regular grid; a point lying in the overlap of two *partnered* regions is
interdigitated: on the "on" cells of a checkerboard over grid indices it
follows the sum of both regions' displacements and carries a label of its
own, on the "off" cells it belongs to the region that declared the
partnership.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .core import (
    STREAM_SIMULATE,
    check_seed,
    ensure_dir,
    load_labels_csv,
    load_matrix_csv,
    make_rng,
    save_labels_csv,
    save_matrix_csv,
)
from .exceptions import ConfigError, EmptyRegionError, IoError, ParseError, ShapeError

__all__ = [
    "Box",
    "Ellipsoid",
    "Translation",
    "Rotation",
    "RegionSpec",
    "SyntheticDataset",
    "apply_rigid_motion",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
    "SCENARIOS",
    "make_scenario",
]

_INSIDE_TOL = 1e-9


def _vec3(v, name):
    a = np.zeros(3)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size not in (2, 3):
        raise ConfigError(f"{name} must have 2 or 3 components, got {v.size}")
    a[: v.size] = v
    return a


@dataclass(frozen=True)
class Box:
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ConfigError("box corners differ in dimension")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ConfigError(f"box {self.lo}..{self.hi} has a non-positive extent")

    @property
    def dim(self):
        return len(self.lo)

    def bounds(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    def contains(self, x):
        lo, hi = self.bounds()
        d = self.dim
        return np.all((x[:, :d] >= lo - _INSIDE_TOL) & (x[:, :d] <= hi + _INSIDE_TOL), axis=1)


@dataclass(frozen=True)
class Ellipsoid:
    center: Tuple[float, ...]
    radii: Tuple[float, ...]

    def __post_init__(self):
        if len(self.center) != len(self.radii):
            raise ConfigError("ellipsoid center and radii differ in dimension")
        if any(r <= 0 for r in self.radii):
            raise ConfigError(f"ellipsoid radii {self.radii} must be positive")

    @property
    def dim(self):
        return len(self.center)

    def bounds(self):
        c = np.asarray(self.center, float)
        r = np.asarray(self.radii, float)
        return c - r, c + r

    def contains(self, x):
        c = np.asarray(self.center, float)
        r = np.asarray(self.radii, float)
        q = ((x[:, : self.dim] - c) / r) ** 2
        return q.sum(axis=1) <= 1.0 + _INSIDE_TOL


@dataclass(frozen=True)
class Translation:
    """Constant velocity, in world units per frame."""

    velocity: Tuple[float, ...]


@dataclass(frozen=True)
class Rotation:
    """Rotation about the line through ``center`` along ``axis``.

    For 2-D fields the axis is the out-of-plane direction.
    """

    center: Tuple[float, ...]
    degrees: float
    axis: Tuple[float, ...] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not np.any(np.asarray(self.axis, float) != 0):
            raise ConfigError("rotation axis must be non-zero")


@dataclass(frozen=True)
class RegionSpec:
    id: str
    geometry: object
    motion: object
    interdigitation_partner: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.geometry, (Box, Ellipsoid)):
            raise ConfigError(f"region {self.id!r}: unsupported geometry {self.geometry!r}")
        if not isinstance(self.motion, (Translation, Rotation)):
            raise ConfigError(f"region {self.id!r}: unsupported motion {self.motion!r}")


@dataclass
class SyntheticDataset:
    """Trajectories of shape (P, L, dim) with labels in 1..num_labels."""

    trajectories: np.ndarray
    truth_labels: np.ndarray
    label_names: list = field(default_factory=list)

    @property
    def dim(self):
        return self.trajectories.shape[2]

    @property
    def num_points(self):
        return self.trajectories.shape[0]

    @property
    def num_frames(self):
        return self.trajectories.shape[1]

    @property
    def num_labels(self):
        return int(np.unique(self.truth_labels).size)


def _rotation_matrix(axis, angle_rad):
    k = axis / np.linalg.norm(axis)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle_rad) * K + (1.0 - np.cos(angle_rad)) * (K @ K)


def _displace(points, motion, frame_index):
    """Positions of (n, 3) ``points`` after ``frame_index`` frames of ``motion``."""
    if frame_index == 0:
        return points.copy()
    if isinstance(motion, Translation):
        return points + frame_index * _vec3(motion.velocity, "velocity")
    center = _vec3(motion.center, "rotation center")
    R = _rotation_matrix(_vec3(motion.axis, "rotation axis"), np.deg2rad(frame_index * motion.degrees))
    return (points - center) @ R.T + center


def apply_rigid_motion(point, motion, frame_index):
    """Move a single point by ``frame_index`` frames of a rigid motion.

    >>> apply_rigid_motion((1.0, 0.0, 0.0), Rotation((0, 0, 0), 90.0), 1).round(12)
    array([0., 1., 0.])
    """
    if frame_index < 0:
        raise ConfigError("frame_index must be >= 0")
    p = np.asarray(point, dtype=np.float64)
    out = _displace(_vec3(p, "point")[None, :], motion, frame_index)[0]
    return out[: p.size]


def _checker_on(index, period):
    return (np.sum(index // period, axis=1) % 2) == 0


def generate_dataset(regions, spacing, frames, seed=0, noise=0.0, checker_period=1):
    """Sample a labelled trajectory field.

    Parameters
    ----------
    regions : sequence of RegionSpec
    spacing : float
        Grid spacing in world units.
    frames : int
        Number of time frames L (frame 0 is the undeformed grid).
    seed : int
        Seed for the optional trajectory noise.
    noise : float, default=0
        Standard deviation of isotropic Gaussian noise added to every frame
        after the first.
    checker_period : int, default=1
        Cells per checkerboard square inside interdigitated overlaps.

    Returns
    -------
    SyntheticDataset
    """
    regions = list(regions)
    if not regions:
        raise ConfigError("at least one region is required")
    if frames < 2:
        raise ConfigError("frames must be >= 2")
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    if checker_period < 1:
        raise ConfigError("checker_period must be >= 1")
    seed = check_seed(seed)
    dims = {r.geometry.dim for r in regions}
    if len(dims) != 1 or dims.pop() not in (2, 3):
        raise ConfigError("all regions must share dimension 2 or 3")
    dim = regions[0].geometry.dim
    ids = [r.id for r in regions]
    if len(set(ids)) != len(ids):
        raise ConfigError("region ids must be unique")
    for r in regions:
        if r.interdigitation_partner is not None and r.interdigitation_partner not in ids:
            raise ConfigError(f"region {r.id!r}: unknown partner {r.interdigitation_partner!r}")

    lo = np.min([r.geometry.bounds()[0] for r in regions], axis=0)
    hi = np.max([r.geometry.bounds()[1] for r in regions], axis=0)
    counts = np.floor((hi - lo) / spacing + 1e-9).astype(int) + 1
    index = np.stack(
        np.meshgrid(*[np.arange(c) for c in counts], indexing="ij"), axis=-1
    ).reshape(-1, dim)
    x0 = np.zeros((index.shape[0], 3))
    x0[:, :dim] = lo + index * spacing

    member = np.stack([r.geometry.contains(x0) for r in regions], axis=1)
    keep = member.any(axis=1)
    if not keep.any():
        raise EmptyRegionError("no grid point falls inside any region")
    x0, index, member = x0[keep], index[keep], member[keep]
    on = _checker_on(index, checker_period)

    # class key per point: ("region", i) or ("pair", declaring, partner)
    pos = {rid: i for i, rid in enumerate(ids)}
    keys = []
    for p in range(x0.shape[0]):
        inside = np.flatnonzero(member[p])
        key = ("region", int(inside[0]))
        for i in inside:
            partner = regions[i].interdigitation_partner
            if partner is not None and member[p, pos[partner]]:
                key = ("pair", int(i), pos[partner]) if on[p] else ("region", int(i))
                break
        keys.append(key)

    order = [("region", i) for i in range(len(regions))]
    order += [("pair", i, pos[r.interdigitation_partner])
              for i, r in enumerate(regions) if r.interdigitation_partner is not None]
    present = [k for k in order if k in set(keys)]
    label_of = {k: n + 1 for n, k in enumerate(present)}
    names = [ids[k[1]] if k[0] == "region" else f"{ids[k[1]]}|{ids[k[2]]}" for k in present]
    labels = np.array([label_of[k] for k in keys], dtype=np.int64)

    traj = np.empty((x0.shape[0], frames, 3))
    for k in present:
        sel = np.array([kk == k for kk in keys])
        movers = [regions[j].motion for j in k[1:]]
        for f in range(frames):
            disp = sum(_displace(x0[sel], mv, f) - x0[sel] for mv in movers)
            traj[sel, f] = x0[sel] + disp

    if noise > 0:
        rng = make_rng(seed, STREAM_SIMULATE)
        jitter = rng.normal(scale=noise, size=traj.shape)
        jitter[:, 0] = 0.0
        if dim == 2:
            jitter[:, :, 2] = 0.0
        traj = traj + jitter
    return SyntheticDataset(traj[:, :, :dim].copy(), labels, names)


def _box(lo, hi):
    return Box(tuple(lo), tuple(hi))


def _scenario_sim2d():
    # vertical, horizontal and rotational zones in a single deformed frame
    return dict(
        regions=[
            RegionSpec("vertical", _box((0, 0), (20, 14)), Translation((0.3, 1.5))),
            RegionSpec("horizontal", _box((20, 0), (40, 14)), Translation((1.5, -0.3))),
            RegionSpec("rotational", _box((0, 14), (40, 28)), Rotation((77.0, -36.0), 1.0)),
        ],
        spacing=0.8,
        frames=2,
        noise=0.05,
    )


def _scenario_sim3d_1():
    # SL rotates forward and up, T translates back and up, V rotates down and
    # sideways. V has no exclusive territory: it interdigitates with both.
    return dict(
        regions=[
            RegionSpec("SL", _box((0, 0, 17), (36, 12, 28)),
                       Rotation((75.0, 6.0, -57.0), 0.5, (0.0, 1.0, 0.0)), "V"),
            RegionSpec("T", _box((0, 0, 6), (36, 12, 17)), Translation((-0.5, 0.0, 0.6)), "V"),
            RegionSpec("V", _box((10, 0, 6), (24, 12, 28)),
                       Rotation((17.0, -74.0, -40.0), -0.5, (1.0, 0.0, 0.0))),
        ],
        spacing=1.8,
        frames=11,
        noise=0.02,
    )


def _scenario_sim3d_2():
    # GG rotates down and sideways, T rotates up, GH translates up
    return dict(
        regions=[
            RegionSpec("GG", Ellipsoid((18, 6, 20), (14, 6, 9)),
                       Rotation((18.0, -74.0, -40.0), -0.5, (1.0, 0.0, 0.0)), "T"),
            RegionSpec("T", _box((14, 0, 20), (40, 12, 30)),
                       Rotation((75.0, 6.0, -57.0), 0.5, (0.0, 1.0, 0.0))),
            RegionSpec("GH", _box((4, 0, 0), (36, 12, 8)), Translation((-0.5, 0.0, 0.6))),
        ],
        spacing=2.0,
        frames=11,
        noise=0.02,
    )


SCENARIOS = {
    "sim2d": _scenario_sim2d,
    "sim3d-1": _scenario_sim3d_1,
    "sim3d-2": _scenario_sim3d_2,
}


def make_scenario(name, seed=0):
    """Generate one of the shipped synthetic scenarios."""
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return generate_dataset(seed=seed, **SCENARIOS[name]())


def save_dataset(ds, directory):
    """Write one CSV per frame, ``labels.csv`` and ``manifest.json``."""
    ensure_dir(directory)
    frame_files = []
    for f in range(ds.num_frames):
        name = f"frame_{f:03d}.csv"
        save_matrix_csv(ds.trajectories[:, f, :], os.path.join(directory, name))
        frame_files.append(name)
    save_labels_csv(ds.truth_labels, os.path.join(directory, "labels.csv"))
    manifest = {
        "dim": ds.dim,
        "P": ds.num_points,
        "L": ds.num_frames,
        "K_true": ds.num_labels,
        "frames": frame_files,
        "labels": "labels.csv",
        "label_names": list(ds.label_names),
    }
    path = os.path.join(directory, "manifest.json")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise IoError(f"{path}: cannot write manifest ({exc})") from exc
    return path


def load_dataset(manifest_path):
    """Inverse of :func:`save_dataset`. Labels are optional in the manifest."""
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except OSError as exc:
        raise IoError(f"{manifest_path}: cannot read manifest ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc})", path=manifest_path) from exc
    base = os.path.dirname(os.path.abspath(manifest_path))
    try:
        frames = [load_matrix_csv(os.path.join(base, f)) for f in manifest["frames"]]
    except KeyError as exc:
        raise ParseError(f"manifest lacks {exc}", path=manifest_path) from None
    if len({fr.shape for fr in frames}) != 1:
        raise ShapeError(f"{manifest_path}: frame files differ in shape")
    traj = np.stack(frames, axis=1)
    if manifest.get("labels"):
        labels = load_labels_csv(os.path.join(base, manifest["labels"]))
        if labels.size != traj.shape[0]:
            raise ShapeError(f"{manifest_path}: {labels.size} labels for {traj.shape[0]} points")
    else:
        labels = np.ones(traj.shape[0], dtype=np.int64)
    return SyntheticDataset(traj, labels, list(manifest.get("label_names", [])))
