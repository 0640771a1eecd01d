"""Plan metrics and brute-force oracles.

Interference sums run over ordered pairs ``i != j`` (each unordered pair
counts twice); collisions and confusions count unordered pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from .simplex import _weights

BRUTE_FORCE_LIMIT = 10**7


@dataclass(frozen=True)
class EvalReport:
    mod3_interference: float
    mod30_interference: float
    collisions: int
    confusions: int
    wall_time: float | None = None

    CSV_FIELDS = ("collisions", "confusions", "mod3", "mod30", "time_s")

    def to_dict(self):
        return asdict(self)

    def csv_row(self):
        return (self.collisions, self.confusions, self.mod3_interference, self.mod30_interference, self.wall_time)

    def same_metrics(self, other):
        return (
            self.mod3_interference == other.mod3_interference
            and self.mod30_interference == other.mod30_interference
            and self.collisions == other.collisions
            and self.confusions == other.confusions
        )


def _pairs_equal(pairs, values, cells=None):
    count = 0
    for i, j in pairs:
        if values[i] == values[j] and (cells is None or cells[i] or cells[j]):
            count += 1
    return count


def evaluate_plan(graph, plan, wall_time=None):
    pci = np.asarray(getattr(plan, "pci", plan), dtype=np.int64)
    if pci.size != graph.n:
        raise ValueError(f"plan has {pci.size} cells, graph has {graph.n}")
    w = graph.weights
    r3 = pci % 3
    r30 = pci % 30
    mod3 = float(np.sum(w * (r3[:, None] == r3[None, :])))
    mod30 = float(np.sum(w * (r30[:, None] == r30[None, :])))
    return EvalReport(
        mod3_interference=mod3,
        mod30_interference=mod30,
        collisions=_pairs_equal(graph.neighbors, pci),
        confusions=_pairs_equal(graph.second_order, pci),
        wall_time=wall_time,
    )


def count_conflicts(graph, values, cells=None):
    """Collisions plus confusions among pairs touching ``cells`` (a bool mask).

    ``values`` may be PCIs or any per-cell key (e.g. ``30 q + r`` before the
    range repair).
    """
    values = np.asarray(values)
    return _pairs_equal(graph.neighbors, values, cells) + _pairs_equal(graph.second_order, values, cells)


def objective_of_labels(graph, labels):
    """Ordered-pair intra-label weight ``sum_{i,j} W_ij [l_i == l_j]``."""
    w = _weights(graph)
    labels = np.asarray(labels)
    return float(np.sum(w * (labels[:, None] == labels[None, :])))


def brute_force_min_k_partition(graph, k, chunk=1 << 16):
    """Exhaustive minimum over ``Z_k^n``; returns the lexicographically first argmin.

    Values within ``1e-12 * sum|W|`` of each other count as ties, so
    label-permuted optima differing only by rounding resolve lexicographically.
    """
    w = _weights(graph)
    n = w.shape[0]
    if k**n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"k^n = {k}^{n} exceeds the brute-force limit {BRUTE_FORCE_LIMIT}")
    tol = 1e-12 * max(float(np.abs(w).sum()), 1.0)
    best_val = np.inf
    best = None
    it = itertools.product(range(k), repeat=n)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64).reshape(-1, n)
        if block.shape[0] == 0:
            break
        vals = np.zeros(block.shape[0])
        for a in range(k):
            m = (block == a).astype(float)
            vals += np.einsum("ri,ri->r", m @ w, m)
        idx = int(np.argmax(vals <= vals.min() + tol))
        if vals[idx] < best_val - tol:
            best_val = float(vals[idx])
            best = block[idx].copy()
    return best, best_val
