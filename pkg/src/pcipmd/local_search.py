"""Pairwise-swap refinement of a discrete labelling.

All moves are scored against ``F(.; 0)``, the ordered-pair intra-label
weight. A table ``S[i, a] = sum_l W[i, l] [label_l == a]`` makes each
pair move an O(k^2) lookup; accepting a move updates ``S`` in O(n).
"""

from __future__ import annotations

import logging
import warnings

import numpy as np

from .simplex import SolverCapWarning, _weights

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100


def _label_sums(w, labels, k):
    s = np.zeros((w.shape[0], k))
    for a in range(k):
        s[:, a] = w[:, labels == a].sum(axis=1)
    return s


def _improve_tol(w):
    # moves must beat rounding noise, or ties could cycle
    return 1e-12 * max(float(np.abs(w).sum()), 1.0)


def pair_move_delta(graph, labels, i, j, k1, k2, offset=None):
    """Change in ``F(.; 0)`` when cells ``i, j`` move to labels ``k1, k2``.

    O(n). ``offset`` is an optional ``n x k`` array of per-cell label costs
    (used for partial problems, where it holds the pull of fixed cells).
    """
    w = _weights(graph)
    labels = np.asarray(labels)
    n = w.shape[0]
    if i == j:
        raise ValueError("i and j must differ")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"cell index out of range for n={n}")
    a, b = labels[i], labels[j]
    wi = w[i].copy()
    wj = w[j].copy()
    wi[j] = 0.0
    wj[i] = 0.0
    delta = 2.0 * (wi[labels == k1].sum() - wi[labels == a].sum())
    delta += 2.0 * (wj[labels == k2].sum() - wj[labels == b].sum())
    delta += 2.0 * w[i, j] * (float(k1 == k2) - float(a == b))
    if offset is not None:
        delta += offset[i, k1] - offset[i, a] + offset[j, k2] - offset[j, b]
    return float(delta)


def refine(graph, labels, k, offset=None, max_sweeps=MAX_SWEEPS):
    """Sweep all pairs ``i < j`` and apply the best joint relabelling.

    Repeats full sweeps until one changes nothing. Ties keep the current
    labels; among equally good strict improvements the lexicographically
    smallest ``(k1, k2)`` wins. With fewer than two cells, single-cell
    moves are used instead so the output is still locally optimal.
    """
    w = _weights(graph)
    labels = np.array(labels, dtype=np.int64)
    n = labels.size
    if n != w.shape[0]:
        raise ValueError("labels and graph size differ")
    if n and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    if n < 2 or k < 2:
        return refine_single(w, labels, k, offset=offset, max_sweeps=max_sweeps)
    s = _label_sums(w, labels, k)
    cost = 2.0 * s if offset is None else 2.0 * s + offset
    tol = _improve_tol(w)
    same = np.eye(k, dtype=bool)

    for sweep in range(max_sweeps):
        changed = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                a, b = labels[i], labels[j]
                wij = w[i, j]
                ci = cost[i].copy()
                cj = cost[j].copy()
                # remove the i-j interaction; it is added back via `same`
                ci[b] -= 2.0 * wij
                cj[a] -= 2.0 * wij
                table = ci[:, None] + cj[None, :] + 2.0 * wij * same
                current = table[a, b]
                best = int(np.argmin(table))
                k1, k2 = divmod(best, k)
                if table[k1, k2] < current - tol:
                    for cell, old, new in ((i, a, k1), (j, b, k2)):
                        if old != new:
                            col = w[:, cell]
                            s[:, old] -= col
                            s[:, new] += col
                            cost[:, old] -= 2.0 * col
                            cost[:, new] += 2.0 * col
                            labels[cell] = new
                    changed = True
        if not changed:
            return labels
    warnings.warn(f"local search stopped after {max_sweeps} sweeps", SolverCapWarning, stacklevel=2)
    return labels


def refine_single(graph, labels, k, offset=None, max_sweeps=MAX_SWEEPS):
    """Single-cell relabelling sweeps; a cheap fixed-point oracle."""
    w = _weights(graph)
    labels = np.array(labels, dtype=np.int64)
    n = labels.size
    s = _label_sums(w, labels, k)
    cost = 2.0 * s if offset is None else 2.0 * s + offset
    tol = _improve_tol(w)
    for _ in range(max_sweeps):
        changed = False
        for i in range(n):
            a = labels[i]
            best = int(np.argmin(cost[i]))
            if cost[i, best] < cost[i, a] - tol:
                col = w[:, i]
                cost[:, a] -= 2.0 * col
                cost[:, best] += 2.0 * col
                labels[i] = best
                changed = True
        if not changed:
            return labels
    warnings.warn(f"single-cell search stopped after {max_sweeps} sweeps", SolverCapWarning, stacklevel=2)
    return labels
