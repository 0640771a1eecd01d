"""Penalized mirror descent for Min-k-Partition over a product of simplices.

The continuous state ``x`` is a ``k x n`` column-stochastic array: column
``i`` is cell ``i``'s distribution over the ``k`` labels. For a penalty
``rho`` the objective is

    F(x; rho) = Tr(x (W - rho/2 I) x^T) + n rho / 2

which equals the ordered-pair intra-label weight at every one-hot ``x``.
A fixed set of already-labelled cells enters as a linear coupling term
``2 <x, C>`` with ``C = x_fixed W_fixed,free``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

_ZERO_ROW = 1e-12


class SolverCapWarning(RuntimeWarning):
    """An iteration cap was hit before the stopping rule was met."""


@dataclass(frozen=True)
class SolverConfig:
    """Penalty continuation and stopping parameters.

    Defaults follow the hyperparameters used for the synthetic experiments.
    """

    rho0: float = 1e-8
    gamma: float = 1.1
    eps1: float = 1e-5
    eps2: float = 1e-10
    max_inner: int = 100_000
    max_outer: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be > 0")
        if not self.gamma > 1:
            raise ValueError("gamma must be > 1")
        if not self.eps1 > 0:
            raise ValueError("eps1 must be > 0")
        if not self.eps2 >= 0:
            raise ValueError("eps2 must be >= 0")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class InnerTrace:
    """Per-iteration history of one inner loop (only filled when recorded)."""

    rho: float
    lipschitz: float
    f_values: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    steps: list = field(default_factory=list)


@dataclass
class OuterRecord:
    outer_iter: int
    rho: float
    inner_iters: int
    f_value: float
    gap: float
    ortho: float


@dataclass
class SolveTrace:
    """Chronological outer-loop records of a penalized solve."""

    records: list = field(default_factory=list)
    inner: list = field(default_factory=list)
    converged: bool = False
    capped: bool = False

    CSV_HEADER = ("outer_iter", "rho", "inner_iters", "F", "kl_gap", "ortho_criterion")

    def __len__(self):
        return len(self.records)

    @property
    def total_inner(self):
        return sum(r.inner_iters for r in self.records)

    def rows(self):
        return [
            (r.outer_iter, r.rho, r.inner_iters, r.f_value, r.gap, r.ortho)
            for r in self.records
        ]


# ------------------------------------------------------------- primitives


def _weights(graph):
    w = getattr(graph, "weights", graph)
    return np.asarray(w, dtype=float)


def _check_dims(w, x):
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"W must be square, got {w.shape}")
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ValueError(f"x has shape {x.shape}, expected (k, {w.shape[0]})")


def penalized_objective(graph, x, rho, coupling=None):
    """``F(x; rho)``; with ``coupling`` the term ``2 <x, coupling>`` is added."""
    w = _weights(graph)
    x = np.asarray(x, dtype=float)
    _check_dims(w, x)
    n = x.shape[1]
    # penalty grouped as n - ||x||^2 so it is exactly 0 at one-hot x
    value = np.sum(x * (x @ w)) + 0.5 * rho * (n - np.sum(x * x))
    if coupling is not None:
        value += 2.0 * np.sum(x * coupling)
    return float(value)


def gradient(graph, x, rho, coupling=None):
    """``x (2W - rho I)``, plus ``2 coupling`` when given."""
    w = _weights(graph)
    x = np.asarray(x, dtype=float)
    _check_dims(w, x)
    g = 2.0 * (x @ w) - rho * x
    if coupling is not None:
        g += 2.0 * coupling
    return g


def lipschitz_constant(graph, rho):
    """``||2W - rho I||_F`` from ``||W||_F``, ``tr W`` and ``n`` (no eigensolve)."""
    w = _weights(graph)
    n = w.shape[0]
    sq = 4.0 * np.sum(w * w) - 4.0 * rho * np.trace(w) + rho * rho * n
    return float(np.sqrt(max(sq, 0.0)))


def step_size(m, lipschitz):
    """Diminishing step ``1 / (L + m + 1)``."""
    if m < 0 or lipschitz < 0:
        raise ValueError("step_size needs m >= 0 and L >= 0")
    return 1.0 / (lipschitz + m + 1.0)


def md_step(x, grad, t):
    """Closed-form KL mirror-descent update, column by column.

    ``x_new ∝ x * exp(-t grad)``, evaluated as a log-sum-exp per column so
    neither the exponent nor the normalizer can overflow.
    """
    if not t > 0:
        raise ValueError("step size must be positive")
    grad = np.asarray(grad, dtype=float)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient entries")
    with np.errstate(divide="ignore"):
        logits = np.log(x) - t * grad
    logits -= logits.max(axis=0, keepdims=True)
    y = np.exp(logits)
    return y / y.sum(axis=0, keepdims=True)


def kl_divergence(a, b):
    """``sum a log(a / b)`` over all entries, with ``0 log 0 = 0``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mask = a > 0
    return float(np.sum(a[mask] * (np.log(a[mask]) - np.log(b[mask]))))


def project_simplex(v):
    """Euclidean projection of each column of ``v`` onto the simplex.

    Sort-based: find the threshold ``tau`` with ``sum max(v - tau, 0) = 1``.
    """
    v = np.asarray(v, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    k = v.shape[0]
    u = -np.sort(-v, axis=0)
    css = np.cumsum(u, axis=0) - 1.0
    idx = np.arange(1, k + 1)[:, None]
    cond = u - css / idx > 0
    rho = k - 1 - np.argmax(cond[::-1], axis=0)
    tau = css[rho, np.arange(v.shape[1])] / (rho + 1.0)
    out = np.maximum(v - tau, 0.0)
    return out[:, 0] if squeeze else out


def orthogonality_criterion(x):
    """``||Q x (Q x)^T - I||_F / k^2`` with rows of ``Q x`` unit-normalized.

    Rows with 2-norm below 1e-12 (unused labels) get a diagonal Gram entry
    of exactly 1, so they never hold up termination.
    """
    x = np.asarray(x, dtype=float)
    k = x.shape[0]
    norms = np.linalg.norm(x, axis=1)
    live = norms >= _ZERO_ROW
    qx = np.zeros_like(x)
    qx[live] = x[live] / norms[live, None]
    gram = qx @ qx.T
    gram[~live, ~live] = 1.0
    return float(np.linalg.norm(gram - np.eye(k)) / k**2)


def exactness_threshold(graph, tol=1e-8, max_iter=100_000):
    """``max(2 lambda_max(W), 0)`` via shifted power iteration.

    The shift by the maximum absolute row sum makes every eigenvalue of
    ``W + cI`` non-negative, so the iteration locks onto ``lambda_max``
    rather than the eigenvalue of largest magnitude.
    """
    w = _weights(graph)
    n = w.shape[0]
    if n == 0 or not np.any(w):
        return 0.0
    shift = float(np.max(np.sum(np.abs(w), axis=1)))
    a = w + shift * np.eye(n)
    v = np.ones(n) + 1e-3 * np.sin(np.arange(1, n + 1))
    v /= np.linalg.norm(v)
    lam = float(v @ a @ v)
    for _ in range(max_iter):
        av = a @ v
        v_new = av / np.linalg.norm(av)
        lam_new = float(v_new @ a @ v_new)
        resid = np.linalg.norm(a @ v_new - lam_new * v_new)
        v = v_new
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0) and resid <= np.sqrt(tol) * max(abs(lam_new), 1.0):
            lam = lam_new
            break
        lam = lam_new
    else:
        warnings.warn("power iteration did not converge", SolverCapWarning, stacklevel=2)
    return max(2.0 * (lam - shift), 0.0)


def random_init(k, n, rng):
    """Interior starting point: i.i.d. uniform columns, l1-normalized."""
    z = 1.0 - rng.random((k, n))  # (0, 1], never exactly zero
    return z / z.sum(axis=0, keepdims=True)


def one_hot(labels, k):
    labels = np.asarray(labels, dtype=np.int64)
    x = np.zeros((k, labels.size))
    x[labels, np.arange(labels.size)] = 1.0
    return x


def round_labels(x):
    """Column-wise argmax; ``np.argmax`` already prefers the lowest index."""
    return np.argmax(x, axis=0).astype(np.int64)


# ------------------------------------------------------------ inner loops


def run_inner(graph, x0, rho, config, coupling=None, record=False):
    """Mirror-descent iterations at fixed ``rho``.

    Stops once ``KL(x_m, x_{m-1}) <= eps1`` or after ``max_inner`` steps.
    Returns ``(x, iterations, InnerTrace)``; the trace lists per-step
    objective values (starting with ``F(x0)``), KL gaps and step sizes when
    ``record`` is set.
    """
    w = _weights(graph)
    x = np.array(x0, dtype=float)
    lip = lipschitz_constant(w, rho)
    trace = InnerTrace(rho=rho, lipschitz=lip)
    if record:
        trace.f_values.append(penalized_objective(w, x, rho, coupling))
    gap = np.inf
    m = 0
    while m < config.max_inner:
        t = step_size(m, lip)
        x_new = md_step(x, gradient(w, x, rho, coupling), t)
        gap = kl_divergence(x_new, x)
        x = x_new
        m += 1
        if record:
            trace.f_values.append(penalized_objective(w, x, rho, coupling))
            trace.gaps.append(gap)
            trace.steps.append(t)
        if gap <= config.eps1:
            break
    trace.final_gap = gap
    return x, m, trace


def run_inner_pgp(graph, x0, rho, config, coupling=None, record=False):
    """Projected-gradient counterpart of :func:`run_inner`.

    Same step sizes; stops on ``0.5 ||x_m - x_{m-1}||_F^2 <= eps1``.
    """
    w = _weights(graph)
    x = np.array(x0, dtype=float)
    lip = lipschitz_constant(w, rho)
    trace = InnerTrace(rho=rho, lipschitz=lip)
    if record:
        trace.f_values.append(penalized_objective(w, x, rho, coupling))
    gap = np.inf
    m = 0
    while m < config.max_inner:
        t = step_size(m, lip)
        x_new = project_simplex(x - t * gradient(w, x, rho, coupling))
        gap = 0.5 * float(np.sum((x_new - x) ** 2))
        x = x_new
        m += 1
        if record:
            trace.f_values.append(penalized_objective(w, x, rho, coupling))
            trace.gaps.append(gap)
            trace.steps.append(t)
        if gap <= config.eps1:
            break
    trace.final_gap = gap
    return x, m, trace


# ------------------------------------------------------------ outer loop


def _penalized_solve(w, k, config, x0, coupling, inner, record, rng):
    n = w.shape[0]
    x = random_init(k, n, rng) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (k, n):
        raise ValueError(f"x0 has shape {x.shape}, expected {(k, n)}")
    trace = SolveTrace()
    rho = config.rho0
    for outer in range(config.max_outer):
        x, iters, itrace = inner(w, x, rho, config, coupling=coupling, record=record)
        if iters >= config.max_inner and itrace.final_gap > config.eps1:
            trace.capped = True
        ortho = orthogonality_criterion(x)
        trace.records.append(
            OuterRecord(outer, rho, iters, penalized_objective(w, x, rho, coupling), itrace.final_gap, ortho)
        )
        if record:
            trace.inner.append(itrace)
        if ortho <= config.eps2:
            trace.converged = True
            break
        rho *= config.gamma
    if not trace.converged:
        trace.capped = True
    if trace.capped:
        warnings.warn(
            f"penalized solve stopped at a cap (outer={len(trace)}, converged={trace.converged})",
            SolverCapWarning,
            stacklevel=3,
        )
    return x, trace


def _validate_k(k, n):
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 1:
        raise ValueError("graph must have at least one cell")


def solve_relaxed(graph, k, config=SolverConfig(), x0=None, coupling=None, method="md", record=False):
    """Run the penalty continuation and return the final continuous iterate.

    ``method`` is ``"md"`` (KL mirror descent) or ``"pgp"`` (Euclidean
    projected gradient). Returns ``(x, SolveTrace)``.
    """
    w = _weights(graph)
    _validate_k(k, w.shape[0])
    inner = {"md": run_inner, "pgp": run_inner_pgp}[method]
    rng = np.random.default_rng(config.seed)
    if k == 1:
        return np.ones((1, w.shape[0])), SolveTrace(converged=True)
    return _penalized_solve(w, k, config, x0, coupling, inner, record, rng)


def solve_min_k_partition(graph, k, config=SolverConfig(), x0=None, record=False):
    """Labels in ``Z_k^n`` from the mirror-descent penalty continuation.

    No local search here; see :func:`pcipmd.local_search.refine`.
    """
    x, trace = solve_relaxed(graph, k, config, x0=x0, method="md", record=record)
    return round_labels(x), trace


def solve_pgp_variant(graph, k, config=SolverConfig(), x0=None, record=False):
    x, trace = solve_relaxed(graph, k, config, x0=x0, method="pgp", record=record)
    return round_labels(x), trace


def partial_coupling(w_full, free, fixed, fixed_labels, k):
    """``C = x_U W_{S,U}^T`` for the fixed cells ``U`` acting on free cells ``S``."""
    w_full = _weights(w_full)
    xu = one_hot(fixed_labels, k)
    return xu @ w_full[np.ix_(fixed, free)]


def solve_partial(graph, k, free, fixed_labels, config=SolverConfig(), x0=None, method="md", record=False):
    """Min-k-Partition over the ``free`` cells with every other cell labelled.

    ``fixed_labels`` is a full-length label vector; entries on ``free`` are
    ignored. Returns labels for ``free`` (in the order given) and the trace.
    """
    w = _weights(graph)
    n = w.shape[0]
    free = np.asarray(free, dtype=np.int64)
    if free.size == 0:
        raise ValueError("no free cells")
    mask = np.zeros(n, dtype=bool)
    mask[free] = True
    fixed = np.flatnonzero(~mask)
    fixed_labels = np.asarray(fixed_labels, dtype=np.int64)
    w_ss = w[np.ix_(free, free)]
    coupling = partial_coupling(w, free, fixed, fixed_labels[fixed], k) if fixed.size else None
    x, trace = solve_relaxed(w_ss, k, config, x0=x0, coupling=coupling, method=method, record=record)
    return round_labels(x), trace
