"""Quotient assignment by greedy graph coloring.

Cells are grouped into 30 clusters by their mod-30 value. Two cells in
different clusters can never share a PCI, so each cluster's conflict
graph (pairs in E1 | E2) is colored on its own and color ``c`` becomes
quotient ``c``, i.e. ``PCI = 30 c + r``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import PCI_MAX


@dataclass(frozen=True)
class ColoringGraph:
    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        vs = set(self.vertices)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u}, {v}) references an unknown vertex")

    @classmethod
    def from_pairs(cls, vertices, pairs):
        return cls(tuple(vertices), frozenset((min(u, v), max(u, v)) for u, v in pairs))

    def adjacency(self):
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


def _greedy(vertices, adj):
    order = sorted(vertices, key=lambda v: (-len(adj[v]), v))
    colors = {}
    for v in order:
        used = {colors[u] for u in adj[v] if u in colors}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def greedy_color(g):
    """Largest-first greedy coloring; ties in degree go to the lower vertex."""
    return _greedy(g.vertices, g.adjacency())


def _clusters(r30):
    return {int(r): np.flatnonzero(r30 == r) for r in np.unique(r30)}


def _map(fn, items, max_workers):
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def assign_quotients(graph, r30, max_workers=None):
    """Color each mod-30 cluster's conflict graph; colors become quotients."""
    r30 = np.asarray(r30, dtype=np.int64)
    adj = graph.conflict_adjacency()
    q = np.zeros(graph.n, dtype=np.int64)

    def color_cluster(cells):
        members = set(cells.tolist())
        sub = {i: adj[i] & members for i in members}
        return _greedy(members, sub)

    for colors in _map(color_cluster, list(_clusters(r30).values()), max_workers):
        for i, c in colors.items():
            q[i] = c
    return q


def _clique_augmented(free, fixed, fixed_q, adj):
    """Colors for ``free`` cells given colored ``fixed`` cells in one cluster.

    The fixed cells are replaced by a clique ``v_1..v_A``, one vertex per
    distinct color ``c_a`` they use. A free cell is joined to ``v_a`` when
    one of its fixed conflict partners has color ``c_a``. After coloring,
    colors are relabelled so ``v_a`` gets ``c_a`` and every other color maps
    to the smallest values not taken by the clique.
    """
    used = sorted({int(fixed_q[j]) for j in fixed})
    n_free = len(free)
    index = {cell: pos for pos, cell in enumerate(free)}
    fixed_set = set(fixed)
    slot = {c: n_free + a for a, c in enumerate(used)}
    h_adj = {v: set() for v in range(n_free + len(used))}
    for pos, cell in enumerate(free):
        for nb in adj[cell]:
            if nb in index:
                h_adj[pos].add(index[nb])
            elif nb in fixed_set:
                v = slot[int(fixed_q[nb])]
                h_adj[pos].add(v)
                h_adj[v].add(pos)
    clique = list(slot.values())
    for u in clique:
        h_adj[u].update(v for v in clique if v != u)

    colors = _greedy(h_adj.keys(), h_adj)
    relabel = {colors[slot[c]]: c for c in used}
    taken = set(used)
    nxt = 0
    for col in sorted(set(colors.values()) - set(relabel)):
        while nxt in taken:
            nxt += 1
        relabel[col] = nxt
        taken.add(nxt)
    return {cell: relabel[colors[pos]] for pos, cell in enumerate(free)}


def assign_quotients_partial(graph, r30, changeable, max_workers=None):
    """Quotients for changeable cells; fixed cells keep their baseline quotient.

    ``r30`` covers all cells (fixed cells carry their baseline residue).
    Returns the full quotient vector.
    """
    r30 = np.asarray(r30, dtype=np.int64)
    adj = graph.conflict_adjacency()
    q = np.array(changeable.baseline.q, dtype=np.int64)
    mask = changeable.mask

    def color_cluster(cells):
        free = [int(i) for i in cells if mask[i]]
        fixed = [int(i) for i in cells if not mask[i]]
        if not free:
            return {}
        return _clique_augmented(free, fixed, q, adj)

    results = _map(color_cluster, list(_clusters(r30).values()), max_workers)
    for colors in results:
        for i, c in colors.items():
            q[i] = c
    return q


def repair_range(graph, r30, q):
    """Re-assign quotients of cells whose PCI would exceed 1007.

    Per cluster, violating cells are handled in decreasing order of their
    in-cluster conflict count under the current ``q`` (ties: lower index).
    Each takes the feasible quotient with the fewest conflicts against
    cells already in range (ties: smallest quotient), then counts as in
    range itself. Returns ``(q_new, n_reassigned)``.
    """
    r30 = np.asarray(r30, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    q_new = q.copy()
    adj = graph.conflict_adjacency()
    moved = 0
    for r, cells in _clusters(r30).items():
        members = set(cells.tolist())
        bad = [int(i) for i in cells if 30 * q[i] + r > PCI_MAX]
        if not bad:
            continue
        deg = {i: sum(1 for j in adj[i] if j in members and q[j] == q[i]) for i in bad}
        bad.sort(key=lambda i: (-deg[i], i))
        settled = members - set(bad)
        q_hi = (PCI_MAX - r) // 30
        for i in bad:
            counts = np.zeros(q_hi + 1, dtype=np.int64)
            for j in adj[i]:
                if j in settled and q_new[j] <= q_hi:
                    counts[q_new[j]] += 1
            q_new[i] = int(np.argmin(counts))
            settled.add(i)
            moved += 1
    return q_new, moved
