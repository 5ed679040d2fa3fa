"""Graph-regularized sparse NMF solved by a fixed number of ISTA iterations.

The single-subject problem is

    min_{W >= 0}  1/2 ||U - V W||_F^2 + lam ||W||_1 + beta/2 Tr(W L W^T)

with the building blocks V fixed after a multiplicative GNMF warm start.
The joint problem couples N subjects through a common map W*::

    sum_i [ E(U_i, V_i, W_i) + gamma/2 ||W_i - W*||_F^2 ]

where W* is the weighted mean of the W_i. Each ISTA iteration is a
gradient step of length 1/c on the smooth terms followed by the proximal
map of the l1 penalty restricted to the non-negative orthant, i.e. a
shifted rectifier ``max(S - lam / c, 0)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import STREAM_INIT, check_matrix, check_non_negative, check_seed, make_rng
from .exceptions import ConfigError, NumericalError, ShapeError
from .graph import GraphLaplacian, graph_laplacian

__all__ = [
    "SolverConfig",
    "FactorPair",
    "JointModel",
    "IstaState",
    "soft_threshold",
    "power_iteration",
    "lipschitz_step",
    "init_gnmf",
    "shallow_sparse_gnmf",
    "smooth_gradient",
    "ista_step",
    "ista_iterations",
    "objective_single",
    "objective_joint",
    "common_map",
    "solve_single",
    "solve_joint",
    "GraphSparseNMF",
    "JointGraphSparseNMF",
]

DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by the single-subject and joint solvers.

    ``c`` is the inverse step size; ``"auto"`` derives it from a Lipschitz
    bound of the smooth gradient. ``alpha`` weights subjects in the common
    map (``None`` means uniform). ``tol`` enables early stopping on the
    relative change of W.
    """

    k: int = 4
    lam: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    c: Union[float, str] = "auto"
    n_iter: int = 50
    init_iters: int = 200
    alpha: Optional[Sequence[float]] = None
    outer_rounds: int = 1
    seed: int = 0
    tol: Optional[float] = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        for name in ("lam", "beta", "gamma"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")
        if isinstance(self.c, str):
            if self.c != "auto":
                raise ConfigError(f"c must be a positive number or 'auto', got {self.c!r}")
        elif not (np.isfinite(self.c) and self.c > 0):
            raise ConfigError(f"c must be a positive number or 'auto', got {self.c!r}")
        if int(self.n_iter) != self.n_iter or self.n_iter < 1:
            raise ConfigError(f"n_iter (H) must be an integer >= 1, got {self.n_iter!r}")
        if int(self.init_iters) != self.init_iters or self.init_iters < 0:
            raise ConfigError(f"init_iters must be an integer >= 0, got {self.init_iters!r}")
        if int(self.outer_rounds) != self.outer_rounds or self.outer_rounds < 1:
            raise ConfigError(f"outer_rounds must be an integer >= 1, got {self.outer_rounds!r}")
        if self.alpha is not None:
            a = np.asarray(self.alpha, dtype=float)
            if a.ndim != 1 or not np.all(np.isfinite(a)) or np.any(a <= 0):
                raise ConfigError("alpha must be a sequence of positive weights")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be positive when given")
        check_seed(self.seed)

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        if d["alpha"] is not None:
            d["alpha"] = [float(a) for a in d["alpha"]]
        return d


@dataclass
class FactorPair:
    """Building blocks ``v`` (m x k) and weighting map ``w`` (k x n)."""

    v: np.ndarray
    w: np.ndarray
    objective_trace: list = field(default_factory=list)
    c: Optional[float] = None


@dataclass
class JointModel:
    pairs: list
    w_star: np.ndarray
    objective_trace: list = field(default_factory=list)

    @property
    def n_subjects(self):
        return len(self.pairs)


def soft_threshold(z, theta, nonneg=False):
    """sign(z) * max(|z| - theta, 0), elementwise.

    With ``nonneg=True`` the result is also clipped at 0, which is the
    proximal map of ``theta * |z|`` restricted to z >= 0.

    >>> float(soft_threshold(1.2, 0.5))
    0.7
    """
    if np.any(np.asarray(theta) < 0):
        raise ConfigError("threshold must be >= 0")
    z = np.asarray(z, dtype=np.float64)
    out = np.sign(z) * np.maximum(np.abs(z) - theta, 0.0)
    return np.maximum(out, 0.0) if nonneg else out


def _nonneg_shrink(s, theta):
    # soft threshold followed by projection onto W >= 0
    return np.maximum(s - theta, 0.0)


def power_iteration(a, tol=1e-8, max_iter=10000):
    """Largest eigenvalue of a symmetric positive semidefinite matrix (dense or sparse)."""
    a = sparse.csr_matrix(a, dtype=np.float64) if sparse.issparse(a) else np.asarray(
        a, dtype=np.float64)
    n = a.shape[0]
    if n == 0 or (a.count_nonzero() == 0 if sparse.issparse(a) else not np.any(a)):
        return 0.0
    # fixed start vector, generic enough to avoid null spaces such as span(1) of L
    x = np.random.default_rng(12345).standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = a @ x
        new = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(new - est) <= tol * abs(new):
            est = new
            break
        est = new
    # one more Rayleigh quotient with the converged vector
    return max(est, float(x @ (a @ x)))


def lipschitz_step(v, lap=None, beta=0.0, gamma=0.0):
    """Inverse step size ``||V^T V||_2 + beta ||L||_2 + gamma``.

    This bounds the Lipschitz constant of the smooth gradient, so an ISTA
    step of length 1/c never increases the objective.
    """
    v = check_matrix(v, "V")
    c = power_iteration(v.T @ v)
    if beta > 0 and lap is not None:
        c += beta * power_iteration(_lap_operator(lap))
    return c + gamma


def _lap_matrix(lap):
    return lap.l if isinstance(lap, GraphLaplacian) else np.asarray(lap, dtype=np.float64)


def _lap_operator(lap):
    """Sparse L when available, for the repeated products ``W L``."""
    return lap.l_sparse if isinstance(lap, GraphLaplacian) else _lap_matrix(lap)


def _right_mul(w, sym):
    """``w @ sym`` for a symmetric dense or sparse matrix."""
    if sparse.issparse(sym):
        return np.asarray(sym @ w.T).T
    return w @ sym


def _check_k(k, m, n):
    if int(k) != k or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if k > min(m, n):
        raise ConfigError(f"k={k} exceeds min(m, n) = {min(m, n)}")


def _random_factors(m, n, k, seed):
    rng = make_rng(seed, STREAM_INIT)
    # uniform on (0, 1]
    v = 1.0 - rng.random((m, k))
    w = 1.0 - rng.random((k, n))
    return v, w


def _multiplicative(u, v, w, q, degree, beta, lam, iters):
    for _ in range(iters):
        v = v * (u @ w.T) / np.maximum(v @ (w @ w.T), DENOMINATOR_FLOOR)
        num = v.T @ u
        den = (v.T @ v) @ w
        if beta > 0:
            num = num + beta * _right_mul(w, q)
            den = den + beta * (w * degree)
        if lam > 0:
            den = den + lam
        w = w * num / np.maximum(den, DENOMINATOR_FLOOR)
    return v, w


def init_gnmf(u, k, lap=None, beta=0.0, init_iters=200, seed=0):
    """Graph-regularized NMF by multiplicative updates from a seeded start.

    Parameters
    ----------
    u : array of shape (m, n), non-negative
    k : int
    lap : GraphLaplacian, optional
        Required when ``beta > 0``.
    beta : float
    init_iters : int
        Number of update sweeps; 0 returns the random start.
    seed : int

    Returns
    -------
    FactorPair
    """
    u = check_non_negative(u, "U")
    m, n = u.shape
    _check_k(k, m, n)
    if init_iters < 0:
        raise ConfigError("init_iters must be >= 0")
    v, w = _random_factors(m, n, int(k), seed)
    q, degree = _graph_parts(lap, beta, n)
    v, w = _multiplicative(u, v, w, q, degree, beta, 0.0, int(init_iters))
    return FactorPair(v, w)


def shallow_sparse_gnmf(u, k, lap=None, beta=0.0, lam=0.0, iters=200, seed=0):
    """Multiplicative updates for the sparse graph-regularized objective.

    Same seeded start as :func:`init_gnmf`; the l1 weight enters the
    denominator of the W update. Used as the shallow comparison method.
    """
    u = check_non_negative(u, "U")
    m, n = u.shape
    _check_k(k, m, n)
    v, w = _random_factors(m, n, int(k), seed)
    q, degree = _graph_parts(lap, beta, n)
    v, w = _multiplicative(u, v, w, q, degree, beta, lam, int(iters))
    return FactorPair(v, w)


def _graph_parts(lap, beta, n):
    if beta <= 0:
        return None, None
    if lap is None:
        raise ConfigError("a graph Laplacian is required when beta > 0")
    if lap.n != n:
        raise ShapeError(f"Laplacian is {lap.n}x{lap.n} but U has {n} columns")
    return lap.affinity_sparse, lap.degree


def smooth_gradient(u, v, w, lap=None, beta=0.0, gamma=0.0, w_star=None):
    """Gradient in W of the smooth terms.

    ``-V^T (U - V W) + beta W L + gamma (W - W*)``
    """
    g = -(v.T @ (u - v @ w))
    if beta > 0:
        g = g + beta * _right_mul(w, _lap_operator(lap))
    if gamma > 0 and w_star is not None:
        g = g + gamma * (w - w_star)
    return g


@dataclass
class IstaState:
    """Pre-threshold iterate ``s`` of layer ``h`` (1-based) and its output ``w``."""

    s: np.ndarray
    h: int
    w: np.ndarray


class _IstaOperator:
    """Precomputed products for repeated ISTA iterations on one subject."""

    def __init__(self, u, v, lap, lam, beta, c, gamma):
        self.vtu = v.T @ u
        self.vtv = v.T @ v
        self.l = _lap_operator(lap) if beta > 0 else None
        self.beta = beta
        self.gamma = gamma
        self.inv_c = 1.0 / c
        self.theta = lam / c

    def pre_threshold(self, w, w_star=None):
        inner = self.vtu - self.vtv @ w
        if self.gamma > 0 and w_star is not None:
            inner = inner - self.gamma * (w - w_star)
        s = w + self.inv_c * inner
        if self.l is not None:
            s = s - (self.beta * self.inv_c) * _right_mul(w, self.l)
        return s

    def __call__(self, w, w_star=None):
        return _nonneg_shrink(self.pre_threshold(w, w_star), self.theta)


def ista_step(u, v, w_prev, lap, lam, beta, c, gamma=0.0, w_star=None):
    """One gradient step on the smooth terms followed by non-negative shrinkage.

    Computes ``S = W + (1/c)[V^T (U - V W) - gamma (W - W*)] - (beta/c) W L``
    and returns ``max(S - lam / c, 0)``. The consensus term is dropped when
    ``w_star`` is None.
    """
    if not c > 0:
        raise ConfigError("c must be positive")
    u = check_matrix(u, "U")
    v = check_matrix(v, "V")
    w_prev = check_matrix(w_prev, "W")
    if v.shape[0] != u.shape[0] or v.shape[1] != w_prev.shape[0] or w_prev.shape[1] != u.shape[1]:
        raise ShapeError(f"shapes U{u.shape}, V{v.shape}, W{w_prev.shape} do not conform")
    return _IstaOperator(u, v, lap, lam, beta, c, gamma)(w_prev, w_star)


def ista_iterations(u, v, w0, lap, lam, beta, c, n_iter, gamma=0.0, w_star=None):
    """Yield an :class:`IstaState` for each of ``n_iter`` unfolded iterations."""
    if not c > 0:
        raise ConfigError("c must be positive")
    op = _IstaOperator(check_matrix(u, "U"), check_matrix(v, "V"), lap, lam, beta, c, gamma)
    w = check_matrix(w0, "W")
    for h in range(1, int(n_iter) + 1):
        s = op.pre_threshold(w, w_star)
        w = _nonneg_shrink(s, op.theta)
        yield IstaState(s, h, w)


def objective_single(u, v, w, lap=None, lam=0.0, beta=0.0):
    """1/2 ||U - VW||_F^2 + lam ||W||_1 + beta/2 Tr(W L W^T)."""
    r = u - v @ w
    val = 0.5 * float(np.sum(r * r)) + lam * float(np.sum(np.abs(w)))
    if beta > 0:
        val += 0.5 * beta * float(np.sum(_right_mul(w, _lap_operator(lap)) * w))
    return val


def objective_joint(model, us, laps, cfg):
    """Sum of per-subject objectives plus gamma/2 sum_i ||W_i - W*||_F^2."""
    total = 0.0
    for pair, u, lap in zip(model.pairs, us, laps):
        total += objective_single(u, pair.v, pair.w, lap, cfg.lam, cfg.beta)
        d = pair.w - model.w_star
        total += 0.5 * cfg.gamma * float(np.sum(d * d))
    return total


def common_map(ws, alpha=None):
    """Weighted mean of the subject maps.

    Written as ``W_1 + sum_i a_i (W_i - W_1) / sum_i a_i`` so that equal inputs
    return their common value exactly.
    """
    ws = [np.asarray(w, dtype=np.float64) for w in ws]
    if not ws:
        raise ConfigError("at least one weighting map is required")
    a = np.ones(len(ws)) if alpha is None else np.asarray(alpha, dtype=np.float64)
    if a.shape != (len(ws),):
        raise ConfigError(f"alpha has {a.size} entries for {len(ws)} subjects")
    base = ws[0]
    acc = np.zeros_like(base)
    for ai, w in zip(a, ws):
        if w.shape != base.shape:
            raise ShapeError("all weighting maps must share one shape")
        acc += ai * (w - base)
    return base + acc / a.sum()


def _resolve_c(cfg, v, lap, gamma):
    if cfg.c == "auto":
        return lipschitz_step(v, lap, cfg.beta, gamma)
    return float(cfg.c)


# overflow is reported as NumericalError by _check_finite rather than as a warning
def _float_guard():
    return np.errstate(over="ignore", invalid="ignore", divide="ignore")


def _check_finite(m, where):
    if not np.all(np.isfinite(m)):
        raise NumericalError(f"non-finite values in {where}; check the input scale and c")


def _run_ista(op, w, n_iter, tol, w_star=None, trace=None):
    for _ in range(n_iter):
        w_new = op(w, w_star)
        if trace is not None:
            trace(w_new)
        if tol is not None:
            change = np.linalg.norm(w_new - w) / max(np.linalg.norm(w), DENOMINATOR_FLOOR)
            w = w_new
            if change < tol:
                break
        else:
            w = w_new
    return w


def solve_single(u, lap, cfg):
    """Warm start by GNMF, then ``cfg.n_iter`` ISTA iterations on W with V fixed.

    Returns
    -------
    FactorPair
        ``objective_trace`` holds the objective before the first and after
        every ISTA iteration.
    """
    u = check_non_negative(u, "U")
    with _float_guard():
        init = init_gnmf(u, cfg.k, lap, cfg.beta, cfg.init_iters, cfg.seed)
        v, w = init.v, init.w
        _check_finite(v, "the warm start")
        c = _resolve_c(cfg, v, lap, 0.0)
        op = _IstaOperator(u, v, lap, cfg.lam, cfg.beta, c, 0.0)
        trace = [objective_single(u, v, w, lap, cfg.lam, cfg.beta)]
        w = _run_ista(op, w, cfg.n_iter, cfg.tol,
                      trace=lambda wn: trace.append(
                          objective_single(u, v, wn, lap, cfg.lam, cfg.beta)))
    _check_finite(w, "solve_single")
    return FactorPair(v, w, trace, c)


def _check_subjects(us, laps):
    if len(us) < 1:
        raise ConfigError("at least one subject is required")
    if len(laps) != len(us):
        raise ShapeError(f"{len(laps)} Laplacians for {len(us)} subjects")
    us = [check_non_negative(u, f"U[{i}]") for i, u in enumerate(us)]
    shape = us[0].shape
    for i, u in enumerate(us):
        if u.shape != shape:
            raise ShapeError(f"U[{i}] has shape {u.shape}, expected {shape}")
    return us


def solve_joint(us, laps, cfg, n_jobs=1):
    """Joint factorization of N subjects with a common weighting map.

    Every subject is warm-started with the same seed, so identical subjects
    stay identical. Each of ``cfg.outer_rounds`` rounds runs ``cfg.n_iter``
    ISTA iterations per subject against the current W*, then refreshes W*.
    Subjects within a round are independent and may run on ``n_jobs``
    threads; results do not depend on scheduling.
    """
    us = _check_subjects(us, laps)
    n_sub = len(us)
    if cfg.alpha is not None and len(cfg.alpha) != n_sub:
        raise ConfigError(f"alpha has {len(cfg.alpha)} entries for {n_sub} subjects")

    def prepare(i):
        with _float_guard():
            init = init_gnmf(us[i], cfg.k, laps[i], cfg.beta, cfg.init_iters, cfg.seed)
            _check_finite(init.v, f"the warm start of subject {i}")
            c = _resolve_c(cfg, init.v, laps[i], cfg.gamma)
            op = _IstaOperator(us[i], init.v, laps[i], cfg.lam, cfg.beta, c, cfg.gamma)
        return init.v, init.w, c, op

    def advance(i, ws, current):
        with _float_guard():
            return _run_ista(ops[i], ws[i], cfg.n_iter, cfg.tol, current)

    with ThreadPoolExecutor(max_workers=max(1, int(n_jobs or 1))) as pool:
        prepared = list(pool.map(prepare, range(n_sub)))
        vs = [p[0] for p in prepared]
        ws = [p[1] for p in prepared]
        cs = [p[2] for p in prepared]
        ops = [p[3] for p in prepared]
        w_star = common_map(ws, cfg.alpha)

        trace = []
        for _ in range(cfg.outer_rounds):
            current = w_star
            ws = list(pool.map(lambda i, ws=ws: advance(i, ws, current), range(n_sub)))
            for i, w in enumerate(ws):
                _check_finite(w, f"solve_joint (subject {i})")
            w_star = common_map(ws, cfg.alpha)
            model = JointModel([FactorPair(v, w, c=c) for v, w, c in zip(vs, ws, cs)], w_star)
            with _float_guard():
                trace.append(objective_joint(model, us, laps, cfg))
    model.objective_trace = trace
    return model


class GraphSparseNMF(TransformerMixin, BaseEstimator):
    """Graph-regularized sparse NMF with an unfolded ISTA solver.

    Follows the scikit-learn convention: ``X`` has one row per point, so the
    feature matrix factorized internally is ``X.T``.

    Parameters
    ----------
    n_components : int, default=4
    lam : float, default=0.0
        l1 weight on the weighting map.
    beta : float, default=0.0
        Graph smoothness weight.
    c : float or "auto", default="auto"
        Inverse ISTA step size.
    n_iter : int, default=50
        Number of unfolded ISTA iterations.
    init_iters : int, default=200
        Multiplicative GNMF sweeps for the warm start.
    n_neighbors : int, default=5
    bandwidth : float, optional
    random_state : int, default=0

    Attributes
    ----------
    components_ : ndarray of shape (n_components, n_features)
        Building blocks, transposed.
    weights_ : ndarray of shape (n_components, n_points)
    objective_trace_ : list of float
    c_ : float
        Inverse step size actually used.
    """

    def __init__(self, n_components=4, *, lam=0.0, beta=0.0, c="auto", n_iter=50,
                 init_iters=200, n_neighbors=5, bandwidth=None, random_state=0):
        self.n_components = n_components
        self.lam = lam
        self.beta = beta
        self.c = c
        self.n_iter = n_iter
        self.init_iters = init_iters
        self.n_neighbors = n_neighbors
        self.bandwidth = bandwidth
        self.random_state = random_state

    def _config(self):
        return SolverConfig(k=self.n_components, lam=self.lam, beta=self.beta, c=self.c,
                            n_iter=self.n_iter, init_iters=self.init_iters,
                            seed=self.random_state)

    def _laplacian(self, u):
        if self.beta > 0:
            return graph_laplacian(u, self.n_neighbors, self.bandwidth)
        return None

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        u = check_non_negative(X, "X").T
        cfg = self._config()
        pair = solve_single(u, self._laplacian(u), cfg)
        self.components_ = pair.v.T
        self.weights_ = pair.w
        self.objective_trace_ = pair.objective_trace
        self.c_ = pair.c
        self.n_features_in_ = u.shape[0]
        return pair.w.T

    def transform(self, X):
        """Weighting map of new points, with the fitted building blocks held fixed."""
        check_is_fitted(self, "components_")
        u = check_non_negative(X, "X").T
        if u.shape[0] != self.n_features_in_:
            raise ShapeError(f"expected {self.n_features_in_} features, got {u.shape[0]}")
        cfg = self._config()
        v = self.components_.T
        lap = self._laplacian(u)
        _, w = _random_factors(u.shape[0], u.shape[1], cfg.k, cfg.seed)
        q, degree = _graph_parts(lap, cfg.beta, u.shape[1])
        for _ in range(cfg.init_iters):
            num = v.T @ u
            den = (v.T @ v) @ w
            if cfg.beta > 0:
                num = num + cfg.beta * (w @ q)
                den = den + cfg.beta * (w * degree)
            w = w * num / np.maximum(den, DENOMINATOR_FLOOR)
        op = _IstaOperator(u, v, lap, cfg.lam, cfg.beta, self.c_, 0.0)
        w = _run_ista(op, w, cfg.n_iter, None)
        _check_finite(w, "transform")
        return w.T


class JointGraphSparseNMF(BaseEstimator):
    """Joint factorization of several subjects sharing a common weighting map.

    ``fit`` takes a list of per-subject arrays of shape (n_points, n_features);
    all subjects must be in point-wise correspondence.

    Attributes
    ----------
    components_ : list of ndarray, each (n_components, n_features)
    weights_ : list of ndarray, each (n_components, n_points)
    common_weights_ : ndarray of shape (n_components, n_points)
    objective_trace_ : list of float
        Joint objective after each outer round.
    """

    def __init__(self, n_components=4, *, lam=0.0, beta=0.0, gamma=0.0, c="auto",
                 n_iter=50, init_iters=200, outer_rounds=1, alpha=None, n_neighbors=5,
                 bandwidth=None, random_state=0, n_jobs=1):
        self.n_components = n_components
        self.lam = lam
        self.beta = beta
        self.gamma = gamma
        self.c = c
        self.n_iter = n_iter
        self.init_iters = init_iters
        self.outer_rounds = outer_rounds
        self.alpha = alpha
        self.n_neighbors = n_neighbors
        self.bandwidth = bandwidth
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, Xs, y=None):
        us = [check_non_negative(x, "X").T for x in Xs]
        cfg = SolverConfig(k=self.n_components, lam=self.lam, beta=self.beta, gamma=self.gamma,
                           c=self.c, n_iter=self.n_iter, init_iters=self.init_iters,
                           outer_rounds=self.outer_rounds, alpha=self.alpha,
                           seed=self.random_state)
        laps = [graph_laplacian(u, self.n_neighbors, self.bandwidth) if self.beta > 0 else None
                for u in us]
        model = solve_joint(us, laps, cfg, n_jobs=self.n_jobs)
        self.components_ = [p.v.T for p in model.pairs]
        self.weights_ = [p.w for p in model.pairs]
        self.common_weights_ = model.w_star
        self.objective_trace_ = model.objective_trace
        self.model_ = model
        return self

    def fit_transform(self, Xs, y=None):
        """Return the common weighting map, shape (n_points, n_components)."""
        return self.fit(Xs).common_weights_.T
