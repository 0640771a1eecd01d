"""Network graph, PCI plans and the JSON file formats they travel in.

Dense storage: an ``InterferenceGraph`` keeps ``W`` as an ``n x n`` float64
array, so memory is ``8 n^2`` bytes (200 MB at n = 5000).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

PCI_MAX = 1007
N_PCI = PCI_MAX + 1


class InstanceError(ValueError):
    """Raised when an instance, plan or changeable-set file is invalid."""


def _norm_pair(i, j):
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


def derive_second_order(neighbors):
    """Pairs of distinct cells that share at least one first-order neighbor.

    ``neighbors`` is an iterable of cell pairs (either orientation). The
    result is a frozenset of ``(i, j)`` tuples with ``i < j``.
    """
    adjacency = {}
    for i, j in neighbors:
        i, j = int(i), int(j)
        if i == j:
            continue
        adjacency.setdefault(i, set()).add(j)
        adjacency.setdefault(j, set()).add(i)
    pairs = set()
    for nbrs in adjacency.values():
        for a, b in combinations(sorted(nbrs), 2):
            pairs.add((a, b))
    return frozenset(pairs)


@dataclass(frozen=True)
class InterferenceGraph:
    """Symmetric interference matrix plus first/second-order neighbor pairs.

    The diagonal of ``weights`` is forced to zero and pairs are stored
    unordered as ``(i, j)`` with ``i < j``. Instances are immutable.
    """

    weights: np.ndarray
    neighbors: frozenset = frozenset()
    second_order: frozenset | None = None
    frequencies: tuple | None = None
    n: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InstanceError(f"weights must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InstanceError("weights contain non-finite entries")
        if np.any(w < 0):
            raise InstanceError("weights must be non-negative")
        if not np.array_equal(w, w.T):
            raise InstanceError("weights must be symmetric")
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        n = w.shape[0]
        e1 = frozenset(self._check_pairs(self.neighbors, n, "neighbor"))
        if self.second_order is None:
            e2 = derive_second_order(e1)
        else:
            e2 = frozenset(self._check_pairs(self.second_order, n, "second-order"))
        if self.frequencies is not None and len(self.frequencies) != n:
            raise InstanceError("frequencies must have one entry per cell")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "neighbors", e1)
        object.__setattr__(self, "second_order", e2)
        if self.frequencies is not None:
            object.__setattr__(self, "frequencies", tuple(int(f) for f in self.frequencies))

    @staticmethod
    def _check_pairs(pairs, n, what):
        out = set()
        for pair in pairs:
            if len(pair) != 2:
                raise InstanceError(f"{what} pair {pair!r} is not a pair")
            i, j = int(pair[0]), int(pair[1])
            if not (0 <= i < n and 0 <= j < n):
                raise InstanceError(f"{what} pair ({i}, {j}) out of range for n={n}")
            if i == j:
                raise InstanceError(f"{what} pair ({i}, {j}) is a self-loop")
            out.add(_norm_pair(i, j))
        return out

    @property
    def conflicts(self):
        """E = E1 | E2, the pairs that must not share a PCI."""
        return self.neighbors | self.second_order

    def conflict_adjacency(self):
        """Adjacency lists of the conflict graph E1 | E2."""
        adj = [set() for _ in range(self.n)]
        for i, j in self.conflicts:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def __eq__(self, other):
        if not isinstance(other, InterferenceGraph):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and self.neighbors == other.neighbors
            and self.second_order == other.second_order
            and self.frequencies == other.frequencies
        )

    __hash__ = None


@dataclass(frozen=True)
class PciPlan:
    """One PCI value in ``[0, 1007]`` per cell."""

    pci: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pci)
        if p.ndim != 1:
            raise InstanceError("pci must be a 1-D vector")
        if p.size and not np.issubdtype(p.dtype, np.integer):
            if not np.all(np.equal(np.mod(p, 1), 0)):
                raise InstanceError("pci values must be integers")
        p = p.astype(np.int64)
        if np.any(p < 0) or np.any(p > PCI_MAX):
            raise InstanceError(f"pci values must lie in [0, {PCI_MAX}]")
        p.setflags(write=False)
        object.__setattr__(self, "pci", p)

    def __len__(self):
        return self.pci.size

    @property
    def q(self):
        return self.pci // 30

    @property
    def r(self):
        return self.pci % 30

    @property
    def r3(self):
        return self.pci % 3

    @property
    def r10(self):
        return self.pci % 10

    def __eq__(self, other):
        if not isinstance(other, PciPlan):
            return NotImplemented
        return np.array_equal(self.pci, other.pci)

    __hash__ = None


def decompose_pci(plan):
    """Split a plan into ``(q, r, r3, r10)`` with ``pci = 30 q + r``."""
    return plan.q, plan.r, plan.r3, plan.r10


@dataclass(frozen=True)
class ChangeableSet:
    """Cells allowed to change, plus the existing plan that fixes the rest.

    ``baseline`` covers every cell; its values on changeable cells are
    ignored by the solvers.
    """

    changeable: np.ndarray
    baseline: PciPlan

    def __post_init__(self):
        s = np.unique(np.asarray(self.changeable, dtype=np.int64))
        n = len(self.baseline)
        if s.size and (s[0] < 0 or s[-1] >= n):
            raise InstanceError(f"changeable index out of range for n={n}")
        s.setflags(write=False)
        object.__setattr__(self, "changeable", s)

    @property
    def n(self):
        return len(self.baseline)

    @property
    def fixed(self):
        mask = np.ones(self.n, dtype=bool)
        mask[self.changeable] = False
        return np.flatnonzero(mask)

    @property
    def mask(self):
        m = np.zeros(self.n, dtype=bool)
        m[self.changeable] = True
        return m


# --------------------------------------------------------------------- I/O


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from exc


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj))


def graph_from_dict(data):
    """Build a graph from the instance schema.

    ``weights`` holds directed ``[i, j, w]`` triplets. An entry given in one
    direction only is mirrored; if both directions are present the two
    values are averaged, i.e. ``W = (W0 + W0^T) / 2``.
    """
    try:
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError("instance needs an integer 'n'") from exc
    if n < 0:
        raise InstanceError("n must be non-negative")
    w0 = np.zeros((n, n))
    given = np.zeros((n, n), dtype=bool)
    for entry in data.get("weights", []):
        if len(entry) != 3:
            raise InstanceError(f"weight entry {entry!r} is not an [i, j, w] triplet")
        i, j, w = int(entry[0]), int(entry[1]), float(entry[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InstanceError(f"weight index ({i}, {j}) out of range for n={n}")
        if w < 0 or not np.isfinite(w):
            raise InstanceError(f"weight ({i}, {j}) = {w} must be finite and non-negative")
        if given[i, j]:
            raise InstanceError(f"duplicate weight entry ({i}, {j})")
        w0[i, j] = w
        given[i, j] = True
    one_way = given & ~given.T
    w0[one_way.T] = w0.T[one_way.T]
    weights = (w0 + w0.T) / 2
    e2 = data.get("e2")
    return InterferenceGraph(
        weights=weights,
        neighbors=[tuple(p) for p in data.get("e1", [])],
        second_order=None if e2 is None else [tuple(p) for p in e2],
        frequencies=data.get("frequencies"),
    )


def graph_to_dict(graph):
    iu, ju = np.nonzero(np.triu(graph.weights, 1))
    out = {
        "n": graph.n,
        "weights": [[int(i), int(j), float(graph.weights[i, j])] for i, j in zip(iu, ju)],
        "e1": [list(p) for p in sorted(graph.neighbors)],
        "e2": [list(p) for p in sorted(graph.second_order)],
    }
    if graph.frequencies is not None:
        out["frequencies"] = list(graph.frequencies)
    return out


def load_instance(path):
    return graph_from_dict(_read_json(path))


def save_instance(graph, path):
    _write_json(graph_to_dict(graph), path)


def load_plan(path):
    data = _read_json(path)
    if "pci" not in data:
        raise InstanceError(f"{path}: plan file needs a 'pci' list")
    return PciPlan(np.asarray(data["pci"]))


def save_plan(plan, path):
    _write_json({"pci": [int(p) for p in plan.pci]}, path)


def load_changeable(path):
    data = _read_json(path)
    try:
        return ChangeableSet(
            changeable=np.asarray(data["changeable"], dtype=np.int64),
            baseline=PciPlan(np.asarray(data["baseline_pci"])),
        )
    except KeyError as exc:
        raise InstanceError(f"{path}: changeable-set file is missing {exc}") from exc


def save_changeable(cs, path):
    _write_json(
        {
            "changeable": [int(i) for i in cs.changeable],
            "baseline_pci": [int(p) for p in cs.baseline.pci],
        },
        path,
    )
