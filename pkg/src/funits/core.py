"""Dense matrix validation, seeded randomness and CSV input/output."""

import os

import numpy as np

from .exceptions import (
    ConfigError,
    DegenerateError,
    IoError,
    NegativeEntryError,
    ParseError,
    RaggedError,
    ShapeError,
)

__all__ = [
    "check_matrix",
    "check_non_negative",
    "check_seed",
    "make_rng",
    "load_matrix_csv",
    "save_matrix_csv",
    "format_real",
    "scale_to_unit",
]

# Fixed sub-stream identifiers so each seeded stage draws from its own stream.
STREAM_SIMULATE = 1
STREAM_INIT = 2
STREAM_KMEANS = 3
STREAM_SUBJECTS = 4

_MAX_SEED = 2**64 - 1


def check_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D float64 array, raising on anything else."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise ShapeError(f"{name} has a non-finite entry at row {bad[0]}, col {bad[1]}")
    return a


def check_non_negative(m, name="matrix"):
    """Validate a non-negative matrix; the error names the first offending cell."""
    a = check_matrix(m, name)
    neg = a < 0
    if neg.any():
        r, c = np.argwhere(neg)[0]
        raise NegativeEntryError(int(r), int(c), float(a[r, c]))
    return a


def check_seed(seed):
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= _MAX_SEED:
        raise ConfigError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def make_rng(seed, *stream):
    """Generator for sub-stream ``stream`` of ``seed``.

    Distinct stream tuples give statistically independent generators, so the
    order in which stages or workers draw numbers cannot change results.
    """
    seed = check_seed(seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def format_real(x):
    """Shortest decimal string that round-trips to the same float64."""
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def load_matrix_csv(path):
    """Read a header-less, comma separated matrix.

    Parameters
    ----------
    path : str or path-like

    Returns
    -------
    ndarray of shape (rows, cols)
    """
    try:
        with open(path, "r", encoding="ascii", newline="") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"{path}: cannot read matrix file ({exc})") from exc

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("empty input", path=path)

    rows = []
    width = None
    for i, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise RaggedError(
                f"expected {width} fields, found {len(fields)}", path=path, line=i
            )
        try:
            row = [float(v) for v in fields]
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", path=path, line=i) from None
        if not all(np.isfinite(row)):
            raise ParseError("non-finite value", path=path, line=i)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def save_matrix_csv(m, path):
    """Write ``m`` one row per line, LF endings, no header."""
    a = check_matrix(m)
    body = "".join(",".join(format_real(v) for v in row) + "\n" for row in a.tolist())
    try:
        with open(path, "w", encoding="ascii", newline="") as f:
            f.write(body)
    except OSError as exc:
        raise IoError(f"{path}: cannot write matrix file ({exc})") from exc


def save_labels_csv(labels, path):
    labels = np.asarray(labels).reshape(-1, 1)
    try:
        with open(path, "w", encoding="ascii", newline="") as f:
            f.write("".join(f"{int(v)}\n" for v in labels[:, 0]))
    except OSError as exc:
        raise IoError(f"{path}: cannot write label file ({exc})") from exc


def load_labels_csv(path):
    m = load_matrix_csv(path)
    if m.shape[1] != 1:
        raise ParseError(f"label file must have one column, found {m.shape[1]}", path=path)
    labels = m[:, 0]
    if not np.all(labels == np.round(labels)):
        raise ParseError("labels must be integers", path=path)
    return labels.astype(np.int64)


def scale_to_unit(u):
    """Divide a non-negative matrix by its largest entry.

    Returns
    -------
    scaled : ndarray
        Entries in [0, 1] with at least one equal to 1.
    scale : float
        The largest entry of ``u``.
    """
    a = check_non_negative(u, "feature matrix")
    if a.size == 0:
        raise DegenerateError("cannot scale an empty matrix")
    scale = float(a.max())
    if scale <= 0:
        raise DegenerateError("cannot scale an all-zero matrix")
    return a / scale, scale


def ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"{path}: cannot create directory ({exc})") from exc
    return path
