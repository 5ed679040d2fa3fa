"""Command line interface: ``funits <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .cluster import spectral_cluster, weighting_affinity
from .core import ensure_dir, load_labels_csv, load_matrix_csv, save_labels_csv, save_matrix_csv
from .exceptions import ConfigError, FunitsError
from .graph import graph_laplacian
from .metrics import evaluate
from .pipeline import (
    METHODS,
    SWEEP_PARAMETERS,
    factorize,
    feature_matrices,
    load_subjects,
    resolve_config,
    run_pipeline,
    sweep,
    sweep_csv,
    write_manifest,
)
from .presets import list_presets, presets_json
from .simulate import save_dataset

JOBS_ENV = "FUNITS_JOBS"


def _default_jobs():
    raw = os.environ.get(JOBS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(f"{JOBS_ENV} must be a positive integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV} must be a positive integer, got {raw!r}")
    return jobs


def _key_value(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _common(parser, out_required=True):
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--preset", help="named parameter preset (see 'presets')")
    parser.add_argument("--seed", type=int, help="seed for data, warm start and k-means")
    parser.add_argument("--out", required=out_required, help="output directory")
    parser.add_argument("--jobs", type=int, default=None,
                        help=f"worker threads (default: ${JOBS_ENV} or 1)")
    parser.add_argument("--method", choices=METHODS, help="factorization variant")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        type=_key_value, metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="funits",
        description="Functional units from motion trajectories by graph-regularized "
                    "sparse NMF and spectral clustering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic trajectory dataset")
    _common(p)

    p = sub.add_parser("features", help="motion feature matrix of a dataset")
    _common(p)
    p.add_argument("--data", help="dataset manifest (default: simulate from the config)")

    p = sub.add_parser("factorize", help="building blocks and weighting maps")
    _common(p)
    p.add_argument("--features", nargs="+", required=True,
                   help="feature matrix CSV, one per subject")

    p = sub.add_parser("cluster", help="spectral clustering of a weighting map")
    _common(p)
    p.add_argument("--weights", required=True, help="weighting map CSV (k x n)")
    p.add_argument("--k", type=int, required=True, help="number of clusters")

    p = sub.add_parser("evaluate", help="AC and NMI of predicted against true labels")
    _common(p, out_required=False)
    p.add_argument("--pred", required=True, help="predicted labels CSV")
    p.add_argument("--truth", required=True, help="true labels CSV")

    p = sub.add_parser("run", help="full pipeline with report")
    _common(p)

    p = sub.add_parser("sweep", help="pipeline metrics over one parameter")
    _common(p)
    p.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMETERS)}")
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("presets", help="list the named presets")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _resolve(args):
    overrides = dict(args.overrides)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.method is not None:
        overrides["method"] = args.method
    preset = args.preset
    if preset is None and args.config is None:
        preset = "sim3d-1"
    return resolve_config(preset=preset, config_path=args.config, overrides=overrides)


def _jobs(args):
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return jobs


def _cmd_simulate(args):
    cfg = _resolve(args)
    if not cfg.is_scenario:
        raise ConfigError("simulate needs a scenario dataset, not a manifest path")
    datasets = load_subjects(cfg)
    for i, ds in enumerate(datasets):
        target = args.out if len(datasets) == 1 else os.path.join(args.out, f"subject_{i + 1}")
        save_dataset(ds, target)
        print(f"wrote {ds.num_points} points x {ds.num_frames} frames, "
              f"{ds.num_labels} labels to {target}")


def _cmd_features(args):
    cfg = _resolve(args)
    if args.data is not None:
        cfg = cfg.replace(dataset=args.data, subjects=1)
    datasets = load_subjects(cfg)
    us, scale = feature_matrices(datasets)
    ensure_dir(args.out)
    names = []
    for i, u in enumerate(us):
        name = "U.csv" if len(us) == 1 else f"U_{i + 1}.csv"
        save_matrix_csv(u, os.path.join(args.out, name))
        names.append(name)
    write_manifest(args.out, names, {"scale": scale, "shape": list(us[0].shape)})
    print(f"wrote {len(us)} feature matrix(es) of shape {us[0].shape} to {args.out}")


def _cmd_factorize(args):
    cfg = _resolve(args)
    us = [load_matrix_csv(p) for p in args.features]
    if cfg.k is None and cfg.n_clusters is None:
        raise ConfigError("set k (or K) for factorize, e.g. --set k=4")
    k = cfg.k or cfg.n_clusters
    laps = [graph_laplacian(u, cfg.n_neighbors, cfg.bandwidth) for u in us]
    vs, ws, w_star, trace = factorize(us, laps, cfg, k, n_jobs=_jobs(args))
    ensure_dir(args.out)
    names = []

    def put(m, name):
        save_matrix_csv(m, os.path.join(args.out, name))
        names.append(name)

    if len(us) == 1:
        put(vs[0], "V.csv")
        put(ws[0], "W.csv")
    else:
        for i, (v, w) in enumerate(zip(vs, ws), 1):
            put(v, f"V_{i}.csv")
            put(w, f"W_{i}.csv")
        put(w_star, "W_star.csv")
    put(np.asarray(trace, dtype=float).reshape(-1, 1), "objective_trace.csv")
    write_manifest(args.out, names, {"config": cfg.to_dict()})
    print(f"final objective {trace[-1]!r}; wrote {len(names)} files to {args.out}")


def _cmd_cluster(args):
    cfg = _resolve(args)
    w = load_matrix_csv(args.weights)
    res = spectral_cluster(weighting_affinity(w, cfg.sigma), args.k, seed=cfg.seed,
                           restarts=cfg.n_init)
    ensure_dir(args.out)
    save_labels_csv(res.labels, os.path.join(args.out, "labels.csv"))
    write_manifest(args.out, ["labels.csv"],
                   {"sigma": cfg.sigma, "seed": cfg.seed, **res.diagnostics()})
    print(f"wrote {res.labels.size} labels in {args.k} clusters to {args.out}")


def _cmd_evaluate(args):
    report = evaluate(load_labels_csv(args.pred), load_labels_csv(args.truth))
    body = report.to_dict()
    text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    if args.out is not None:
        ensure_dir(args.out)
        with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8",
                  newline="\n") as f:
            f.write(text)
        save_matrix_csv(report.contingency, os.path.join(args.out, "contingency.csv"))
        write_manifest(args.out, ["metrics.json", "contingency.csv"])
    print(f"AC {report.ac:.2f}  NMI {report.nmi:.2f}")


def _cmd_run(args):
    cfg = _resolve(args)
    report = run_pipeline(cfg, out=args.out, n_jobs=_jobs(args))
    line = f"{cfg.method} on {cfg.dataset}"
    if report.metrics is not None:
        line += f": AC {report.ac:.2f}  NMI {report.nmi:.2f}"
    print(line)
    print(f"report written to {os.path.join(args.out, 'report.json')}")


def _cmd_sweep(args):
    cfg = _resolve(args)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    rows = sweep(cfg, args.param, values, n_jobs=_jobs(args))
    text = sweep_csv(rows, args.param)
    ensure_dir(args.out)
    with open(os.path.join(args.out, "sweep.csv"), "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    write_manifest(args.out, ["sweep.csv"], {"config": cfg.to_dict(), "parameter": args.param})
    sys.stdout.write(text)


def _cmd_presets(args):
    sys.stdout.write(presets_json() if args.json else list_presets())


_COMMANDS = {
    "simulate": _cmd_simulate,
    "features": _cmd_features,
    "factorize": _cmd_factorize,
    "cluster": _cmd_cluster,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "presets": _cmd_presets,
}


def main(argv=None):
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except FunitsError as exc:
        stage = getattr(exc, "stage", None)
        prefix = f"error in stage {stage}" if stage else "error"
        print(f"{prefix}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
