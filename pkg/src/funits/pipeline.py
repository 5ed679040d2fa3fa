"""End-to-end pipeline: trajectories to labelled functional units.

Configuration is a flat set of ``key = value`` pairs. It can come from a
preset, a text file and command line overrides, applied in that order.
Lines starting with ``#`` are comments. Recognised keys:

==============  =============================================================
dataset         scenario name (``sim2d``, ``sim3d-1``, ``sim3d-2``) or one or
                more comma-separated dataset manifest paths (one per subject)
subjects        number of synthetic subjects (scenarios only), default 1
noise           trajectory noise override for scenarios
stride          keep every ``stride``-th point, default 1
k               building blocks; default is the number of clusters K
K               number of clusters; default is the number of truth labels
lam             sparsity weight (``lambda`` is accepted too)
beta            graph weight
gamma           consensus weight across subjects
c               inverse step size or ``auto``
H               ISTA iterations
init_iters      multiplicative warm-start iterations, default 200
alpha           comma-separated subject weights, default uniform
outer_rounds    consensus rounds, default 1
tol             optional early-stopping tolerance on the change of W
p_nn            neighbours in the feature graph, default 5
t               heat-kernel width, default mean edge length
sigma           affinity scale for clustering
n_init          k-means restarts, default 20
method          g-nmf-s, gs-nmf-s, ista-s-nmf-s or ista-gs-nmf-s (default)
seed            seed for data, warm start and k-means, default 0
==============  =============================================================
"""

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .cluster import spectral_cluster, weighting_affinity
from .core import (
    STREAM_SUBJECTS,
    check_seed,
    ensure_dir,
    make_rng,
    save_labels_csv,
    save_matrix_csv,
)
from .exceptions import ConfigError, DegenerateError, FunitsError, IoError, ShapeError
from .factorize import (
    SolverConfig,
    common_map,
    init_gnmf,
    objective_single,
    shallow_sparse_gnmf,
    solve_joint,
    solve_single,
)
from .features import build_feature_matrix
from .graph import graph_laplacian
from .metrics import evaluate, unit_size_stats
from .presets import get_preset
from .simulate import SCENARIOS, generate_dataset, load_dataset

__all__ = [
    "METHODS",
    "SWEEP_PARAMETERS",
    "PipelineConfig",
    "RunReport",
    "parse_config_text",
    "load_config_file",
    "resolve_config",
    "run_pipeline",
    "sweep",
    "sweep_csv",
    "file_digest",
    "write_manifest",
]

METHODS = ("g-nmf-s", "gs-nmf-s", "ista-s-nmf-s", "ista-gs-nmf-s")

SWEEP_PARAMETERS = ("lam", "c", "H", "beta", "gamma", "sigma")

_ALIASES = {"lambda": "lam", "λ": "lam", "β": "beta", "γ": "gamma", "σ": "sigma"}


def _opt(parse):
    def inner(s):
        return None if s.strip().lower() in ("", "none") else parse(s)
    return inner


def _int(s):
    try:
        f = float(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}") from None
    if not f.is_integer():
        raise ConfigError(f"expected an integer, got {s!r}")
    return int(f)


def _float(s):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a number, got {s!r}") from None


def _c(s):
    return "auto" if s.strip().lower() == "auto" else _float(s)


def _floats(s):
    return tuple(_float(x) for x in s.split(",") if x.strip())


# config key -> (PipelineConfig field, parser of the textual value)
_KEYS = {
    "dataset": ("dataset", str.strip),
    "subjects": ("subjects", _int),
    "noise": ("noise", _opt(_float)),
    "stride": ("stride", _int),
    "k": ("k", _opt(_int)),
    "K": ("n_clusters", _opt(_int)),
    "lam": ("lam", _float),
    "beta": ("beta", _float),
    "gamma": ("gamma", _float),
    "c": ("c", _c),
    "H": ("n_iter", _int),
    "init_iters": ("init_iters", _int),
    "alpha": ("alpha", _opt(_floats)),
    "outer_rounds": ("outer_rounds", _int),
    "tol": ("tol", _opt(_float)),
    "p_nn": ("n_neighbors", _int),
    "t": ("bandwidth", _opt(_float)),
    "sigma": ("sigma", _float),
    "n_init": ("n_init", _int),
    "method": ("method", str.strip),
    "seed": ("seed", _int),
}


def _canonical_key(key):
    key = key.strip()
    key = _ALIASES.get(key, key)
    if key not in _KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    return key


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce one pipeline run."""

    dataset: str = "sim3d-1"
    subjects: int = 1
    noise: Optional[float] = None
    stride: int = 1
    k: Optional[int] = None
    n_clusters: Optional[int] = None
    lam: float = 1.0
    beta: float = 0.03
    gamma: float = 0.0
    c: object = "auto"
    n_iter: int = 49
    init_iters: int = 200
    alpha: Optional[tuple] = None
    outer_rounds: int = 1
    tol: Optional[float] = None
    n_neighbors: int = 5
    bandwidth: Optional[float] = None
    sigma: float = 0.05
    n_init: int = 20
    method: str = "ista-gs-nmf-s"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {list(METHODS)}")
        if self.subjects < 1:
            raise ConfigError("subjects must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma!r}")
        if self.n_neighbors < 1:
            raise ConfigError("p_nn must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError("t must be positive")
        if self.n_clusters is not None and self.n_clusters < 1:
            raise ConfigError("K must be >= 1")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        if self.noise is not None and self.noise < 0:
            raise ConfigError("noise must be >= 0")
        check_seed(self.seed)
        # validates the solver parameters early
        self.solver_config(self.k or 1)
        if self.is_scenario:
            if self.dataset not in SCENARIOS:
                raise ConfigError(
                    f"unknown dataset {self.dataset!r}: not a scenario "
                    f"({sorted(SCENARIOS)}) and not a manifest path"
                )
        else:
            if self.subjects != 1 and self.subjects != len(self.manifests):
                raise ConfigError("subjects must match the number of manifest paths")

    @property
    def is_scenario(self):
        return "," not in self.dataset and not self.dataset.endswith(".json")

    @property
    def manifests(self):
        return [p.strip() for p in self.dataset.split(",") if p.strip()]

    @property
    def n_subjects(self):
        return self.subjects if self.is_scenario else len(self.manifests)

    def solver_config(self, k):
        beta = 0.0 if self.method == "ista-s-nmf-s" else self.beta
        return SolverConfig(
            k=k, lam=self.lam, beta=beta, gamma=self.gamma, c=self.c, n_iter=self.n_iter,
            init_iters=self.init_iters, alpha=self.alpha, outer_rounds=self.outer_rounds,
            seed=self.seed, tol=self.tol,
        )

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        """Effective configuration using the configuration-file keys."""
        by_field = {f: k for k, (f, _) in _KEYS.items()}
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[by_field[f.name]] = list(v) if isinstance(v, tuple) else v
        return d

    @classmethod
    def from_mapping(cls, mapping):
        """Build from config keys; string values are parsed, others taken as is."""
        kwargs = {}
        for key, value in mapping.items():
            key = _canonical_key(key)
            name, parse = _KEYS[key]
            if isinstance(value, str):
                value = parse(value)
            elif isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into an ordered dict of raw strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        try:
            out[_canonical_key(key)] = value.strip()
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def load_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc})") from None
    return parse_config_text(text, source=path)


def resolve_config(preset=None, config_path=None, overrides=None):
    """Layer a preset, a configuration file and explicit overrides."""
    merged = {}
    if preset is not None:
        merged.update({_canonical_key(k): v for k, v in get_preset(preset).items()})
    if config_path is not None:
        merged.update(load_config_file(config_path))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[_canonical_key(key)] = value
    return PipelineConfig.from_mapping(merged)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(obj, path):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(obj, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
    except OSError as exc:
        raise IoError(f"{path}: cannot write ({exc})") from exc


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def write_manifest(directory, names, extra=None, filename="manifest.json"):
    """Write a JSON inventory of ``names`` (relative to ``directory``) with sha256 digests."""
    inventory = {n: file_digest(os.path.join(directory, n)) for n in sorted(names)}
    body = {"files": inventory}
    if extra:
        body.update(extra)
    _write_json(body, os.path.join(directory, filename))
    return inventory


@dataclass
class RunReport:
    """Outcome of :func:`run_pipeline`.

    ``labels`` are the common units (from W* when there are several
    subjects); ``subject_labels`` holds one labelling per subject.
    """

    config: dict
    timings: dict
    objective_trace: list
    metrics: Optional[object]
    labels: np.ndarray
    subject_labels: list
    w: np.ndarray
    subject_metrics: list = field(default_factory=list)
    unit_sizes: Optional[dict] = None
    eigengap: Optional[float] = None
    artifacts: dict = field(default_factory=dict)

    @property
    def ac(self):
        return None if self.metrics is None else self.metrics.ac

    @property
    def nmi(self):
        return None if self.metrics is None else self.metrics.nmi

    def to_dict(self):
        return {
            "config": self.config,
            "timings": self.timings,
            "objective_trace": [float(x) for x in self.objective_trace],
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "subject_metrics": [m.to_dict() for m in self.subject_metrics],
            "unit_size_stats": self.unit_sizes,
            "eigengap": self.eigengap,
            "artifacts": self.artifacts,
        }


@contextmanager
def _stage(name, timings):
    start = time.perf_counter()
    try:
        yield
    except FunitsError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise
    finally:
        timings[name] = time.perf_counter() - start


def subject_seed(seed, index):
    """Seed of synthetic subject ``index``; subject 0 uses ``seed`` itself."""
    if index == 0:
        return seed
    return int(make_rng(seed, STREAM_SUBJECTS, index).integers(2**63))


def load_subjects(cfg):
    """Datasets for every subject, already subsampled by ``cfg.stride``."""
    if cfg.is_scenario:
        params = SCENARIOS[cfg.dataset]()
        if cfg.noise is not None:
            params["noise"] = cfg.noise
        data = [generate_dataset(seed=subject_seed(cfg.seed, i), **params)
                for i in range(cfg.subjects)]
    else:
        data = [load_dataset(p) for p in cfg.manifests]
    if cfg.stride > 1:
        data = [type(d)(d.trajectories[:: cfg.stride], d.truth_labels[:: cfg.stride],
                        d.label_names) for d in data]
    return data


def feature_matrices(datasets):
    """Feature matrices of all subjects scaled by their common maximum."""
    us = [build_feature_matrix(d.trajectories) for d in datasets]
    top = max(float(u.max()) for u in us)
    if top <= 0:
        raise DegenerateError("all motion features are zero")
    return [u / top for u in us], top


def factorize(us, laps, cfg, k, n_jobs=1):
    """Weighting maps per subject, the common map and an objective trace."""
    solver = cfg.solver_config(k)
    if cfg.method in ("ista-s-nmf-s", "ista-gs-nmf-s"):
        if len(us) == 1:
            pair = solve_single(us[0], laps[0], solver)
            return [pair.v], [pair.w], pair.w, list(pair.objective_trace)
        model = solve_joint(us, laps, solver, n_jobs=n_jobs)
        vs = [p.v for p in model.pairs]
        ws = [p.w for p in model.pairs]
        return vs, ws, model.w_star, list(model.objective_trace)

    def one(i):
        if cfg.method == "g-nmf-s":
            pair = init_gnmf(us[i], k, laps[i], solver.beta, solver.init_iters, solver.seed)
        else:
            pair = shallow_sparse_gnmf(us[i], k, laps[i], solver.beta, solver.lam,
                                       solver.init_iters, solver.seed)
        return pair

    with ThreadPoolExecutor(max_workers=max(1, int(n_jobs or 1))) as pool:
        pairs = list(pool.map(one, range(len(us))))
    vs = [p.v for p in pairs]
    ws = [p.w for p in pairs]
    lam = solver.lam if cfg.method == "gs-nmf-s" else 0.0
    trace = [sum(objective_single(u, p.v, p.w, lap, lam, solver.beta)
                 for u, p, lap in zip(us, pairs, laps))]
    w_star = ws[0] if len(ws) == 1 else common_map(ws, solver.alpha)
    return vs, ws, w_star, trace


def _cluster(w, cfg, n_clusters):
    return spectral_cluster(weighting_affinity(w, cfg.sigma), n_clusters,
                            seed=cfg.seed, restarts=cfg.n_init)


def run_pipeline(cfg, out=None, n_jobs=1):
    """Run every stage and optionally write the artifacts to ``out``.

    Errors raised by a stage carry the stage name in their ``stage``
    attribute.

    Returns
    -------
    RunReport
    """
    timings = {}
    with _stage("data", timings):
        datasets = load_subjects(cfg)
        shapes = {d.trajectories.shape for d in datasets}
        if len(shapes) != 1:
            raise ShapeError(f"subjects differ in trajectory shape: {sorted(shapes)}")
        truth = datasets[0].truth_labels
        has_truth = cfg.is_scenario or any(d.label_names for d in datasets)
        n_clusters = cfg.n_clusters or int(np.unique(truth).size)
        k = cfg.k or n_clusters
    with _stage("features", timings):
        us, _ = feature_matrices(datasets)
    with _stage("graph", timings):
        laps = [graph_laplacian(u, cfg.n_neighbors, cfg.bandwidth) for u in us]
    with _stage("factorize", timings):
        vs, ws, w_star, trace = factorize(us, laps, cfg, k, n_jobs=n_jobs)
    with _stage("cluster", timings):
        common = _cluster(w_star, cfg, n_clusters)
        if len(ws) == 1:
            per_subject = [common]
        else:
            per_subject = [_cluster(w, cfg, n_clusters) for w in ws]
    with _stage("evaluate", timings):
        metrics = evaluate(common.labels, truth) if has_truth else None
        subject_metrics = []
        if has_truth and len(ws) > 1:
            subject_metrics = [evaluate(a.labels, d.truth_labels)
                               for a, d in zip(per_subject, datasets)]
        sizes = None
        if len(ws) > 1:
            sizes = unit_size_stats(per_subject, common, n_clusters)

    report = RunReport(
        config=cfg.to_dict(), timings=timings, objective_trace=trace, metrics=metrics,
        labels=common.labels, subject_labels=[a.labels for a in per_subject], w=w_star,
        subject_metrics=subject_metrics, unit_sizes=sizes, eigengap=common.eigengap,
    )
    if out is not None:
        with _stage("write", timings):
            report.artifacts = _write_run(out, report, us, vs, ws, truth if has_truth else None)
    return report


def _write_run(out, report, us, vs, ws, truth):
    ensure_dir(out)
    names = []

    def matrix(m, name):
        save_matrix_csv(m, os.path.join(out, name))
        names.append(name)

    def labels(lab, name):
        save_labels_csv(lab, os.path.join(out, name))
        names.append(name)

    if len(ws) == 1:
        matrix(us[0], "U.csv")
        matrix(vs[0], "V.csv")
        matrix(ws[0], "W.csv")
    else:
        for i, (u, v, w) in enumerate(zip(us, vs, ws), 1):
            matrix(u, f"U_{i}.csv")
            matrix(v, f"V_{i}.csv")
            matrix(w, f"W_{i}.csv")
            labels(report.subject_labels[i - 1], f"labels_subject_{i}.csv")
        matrix(report.w, "W_star.csv")
    matrix(np.asarray(report.objective_trace, dtype=float).reshape(-1, 1), "objective_trace.csv")
    labels(report.labels, "labels.csv")
    if truth is not None:
        labels(truth, "truth_labels.csv")
    _write_json(report.config, os.path.join(out, "config.json"))
    names.append("config.json")
    if report.metrics is not None:
        _write_json(report.to_dict()["metrics"], os.path.join(out, "metrics.json"))
        names.append("metrics.json")
        matrix(report.metrics.contingency, "contingency.csv")
    inventory = write_manifest(out, names)
    report.artifacts = inventory
    _write_json(report.to_dict(), os.path.join(out, "report.json"))
    return inventory


def sweep(cfg, parameter, values, n_jobs=1):
    """Run the pipeline once per value of ``parameter``, all else fixed.

    Returns
    -------
    list of dict
        Rows with keys ``value``, ``ac``, ``nmi`` and ``runtime`` in the
        order of ``values``.
    """
    key = _ALIASES.get(parameter, parameter)
    if key not in SWEEP_PARAMETERS:
        raise ConfigError(f"cannot sweep {parameter!r}; choose from {list(SWEEP_PARAMETERS)}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    name, parse = _KEYS[key]
    configs = [cfg.replace(**{name: parse(v) if isinstance(v, str) else v}) for v in values]

    def one(c):
        start = time.perf_counter()
        rep = run_pipeline(c)
        return rep, time.perf_counter() - start

    with ThreadPoolExecutor(max_workers=max(1, int(n_jobs or 1))) as pool:
        results = list(pool.map(one, configs))
    rows = []
    for c, (rep, runtime) in zip(configs, results):
        rows.append({"value": getattr(c, name), "ac": rep.ac, "nmi": rep.nmi,
                     "runtime": runtime})
    return rows


def sweep_csv(rows, parameter):
    """Render sweep rows as CSV text with a header line."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([parameter, "AC", "NMI", "runtime_s"])
    for r in rows:
        writer.writerow([r["value"], _num(r["ac"]), _num(r["nmi"]), f"{r['runtime']:.3f}"])
    return buf.getvalue()


def _num(x):
    return "" if x is None else repr(float(x))
