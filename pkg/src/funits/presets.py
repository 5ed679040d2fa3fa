"""Named parameter sets for the pipeline.

A preset is a flat mapping using the same keys as a configuration file
(see :mod:`funits.pipeline`). The ``sim*`` presets are tuned for the shipped
synthetic scenarios, whose features are scaled to [0, 1]. The ``paper-*``
presets carry the published parameter values verbatim; those values assume
a different feature scale, so on the shipped scenarios they threshold most
of the weighting map away.
"""

import json

from .exceptions import ConfigError

__all__ = ["PRESETS", "get_preset", "list_presets", "presets_json"]

_TUNED = {"lam": 1.0, "beta": 0.03, "c": "auto", "H": 49, "sigma": 0.05}

PRESETS = {
    "sim2d": {"dataset": "sim2d", **_TUNED, "lam": 0.5},
    "sim3d-1": {"dataset": "sim3d-1", **_TUNED},
    "sim3d-2": {"dataset": "sim3d-2", **_TUNED},
    "sim3d-1-joint": {"dataset": "sim3d-1", "subjects": 4, **_TUNED, "gamma": 1.0},
    "paper-2d": {"dataset": "sim2d", "lam": 500.0, "c": 100.0, "beta": 0.05, "H": 10,
                 "sigma": 0.07},
    "paper-3d-1": {"dataset": "sim3d-1", "lam": 890.0, "c": 55.0, "beta": 0.03, "H": 49,
                   "sigma": 0.05},
    "paper-3d-2": {"dataset": "sim3d-2", "lam": 800.0, "c": 100.0, "beta": 0.05, "H": 50,
                   "sigma": 0.03},
    "paper-invivo": {"dataset": "sim3d-1", "subjects": 4, "lam": 800.0, "c": 600.0,
                     "gamma": 20.0, "H": 100, "beta": 0.03, "sigma": 0.05},
}


def get_preset(name):
    """Return a copy of the named preset; unknown names raise ConfigError."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _fmt(v):
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def list_presets():
    """Human-readable listing, one preset per line."""
    lines = []
    for name, params in PRESETS.items():
        body = ", ".join(f"{k}={_fmt(v)}" for k, v in params.items())
        lines.append(f"{name}: {body}")
    return "\n".join(lines) + "\n"


def presets_json():
    return json.dumps(PRESETS, indent=2, sort_keys=True) + "\n"
