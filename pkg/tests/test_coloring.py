import numpy as np
import pytest

from pcipmd import ChangeableSet, InterferenceGraph, PciPlan, assign_quotients, assign_quotients_partial, greedy_color, repair_range
from pcipmd.coloring import ColoringGraph
from pcipmd.evaluate import count_conflicts

from conftest import hexagon_flower


def proper(g, colors):
    return all(colors[u] != colors[v] for u, v in g.edges)


def test_greedy_examples():
    assert set(greedy_color(ColoringGraph.from_pairs(range(4), [])).values()) == {0}
    tri = ColoringGraph.from_pairs(range(3), [(0, 1), (1, 2), (0, 2)])
    c = greedy_color(tri)
    assert sorted(c.values()) == [0, 1, 2]
    star = ColoringGraph.from_pairs(range(6), [(0, v) for v in range(1, 6)])
    c = greedy_color(star)
    assert c[0] == 0 and all(c[v] == 1 for v in range(1, 6))


def test_greedy_proper_random(rng):
    for _ in range(20):
        n = 15
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3]
        g = ColoringGraph.from_pairs(range(n), pairs)
        c = greedy_color(g)
        assert proper(g, c)
        assert max(c.values()) <= max(len(a) for a in g.adjacency().values())


def test_coloring_graph_validation():
    with pytest.raises(ValueError):
        ColoringGraph((0, 1), frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        ColoringGraph((0, 1), frozenset({(0, 2)}))


def test_assign_quotients_examples():
    g = InterferenceGraph(weights=np.zeros((2, 2)), neighbors=[(0, 1)])
    assert assign_quotients(g, np.array([3, 4])).tolist() == [0, 0]
    assert sorted(assign_quotients(g, np.array([3, 3])).tolist()) == [0, 1]


def test_assign_quotients_hexagon():
    g = hexagon_flower()
    r = np.full(7, 5)
    q = assign_quotients(g, r)
    assert count_conflicts(g, 30 * q + r) == 0


def test_assign_quotients_threads_identical(rng):
    g = hexagon_flower()
    r = rng.integers(2, size=7)
    assert np.array_equal(assign_quotients(g, r), assign_quotients(g, r, max_workers=4))


def test_partial_without_fixed_matches_full():
    g = hexagon_flower()
    r = np.zeros(7, dtype=int)
    cs = ChangeableSet(np.arange(7), PciPlan(np.zeros(7, dtype=int)))
    assert np.array_equal(assign_quotients_partial(g, r, cs), assign_quotients(g, r))


def test_partial_single_cell_takes_next_color():
    # cell 2 is changeable; fixed neighbours 0 and 1 use quotients 0 and 1
    g = InterferenceGraph(weights=np.zeros((3, 3)), neighbors=[(0, 2), (1, 2)])
    base = PciPlan(np.array([0, 30, 0]))
    cs = ChangeableSet(np.array([2]), base)
    q = assign_quotients_partial(g, np.zeros(3, dtype=int), cs)
    assert q.tolist() == [0, 1, 2]


def test_partial_random_conflict_free(rng):
    for _ in range(10):
        n = 20
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.15]
        g = InterferenceGraph(weights=np.zeros((n, n)), neighbors=pairs)
        r = rng.integers(3, size=n)
        base_q = assign_quotients(g, r)
        base = PciPlan(30 * base_q + r)
        free = rng.choice(n, size=6, replace=False)
        cs = ChangeableSet(free, base)
        r_new = r.copy()
        r_new[free] = rng.integers(3, size=6)
        q = assign_quotients_partial(g, r_new, cs)
        assert np.array_equal(q[cs.fixed], base_q[cs.fixed])
        assert count_conflicts(g, 30 * q + r_new, cells=cs.mask) == 0


def test_repair_identity():
    g = hexagon_flower()
    q = np.arange(7)
    assert repair_range(g, np.zeros(7, dtype=int), q)[0].tolist() == q.tolist()


def test_repair_single_violator():
    g = InterferenceGraph(weights=np.zeros((3, 3)), neighbors=[(0, 2), (1, 2)])
    q, moved = repair_range(g, np.full(3, 5), np.array([0, 1, 34]))
    assert q.tolist() == [0, 1, 2] and moved == 1


def conflict_counts(adj, i, q, r):
    hi = (1007 - r) // 30
    return [sum(1 for j in adj[i] if j != i and q[j] == c) for c in range(hi + 1)]


def test_repair_full_clique():
    n = 35
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    g = InterferenceGraph(weights=np.zeros((n, n)), neighbors=pairs)
    r = np.full(n, 5)
    q0 = assign_quotients(g, r)
    assert sorted(q0.tolist()) == list(range(35))
    q, moved = repair_range(g, r, q0)
    assert moved == 1
    assert np.all(30 * q + r <= 1007)
    adj = g.conflict_adjacency()
    bad = int(np.flatnonzero(q0 == 34)[0])
    oracle = conflict_counts(adj, bad, np.where(np.arange(n) == bad, -1, q0), 5)
    assert q[bad] == int(np.argmin(oracle))
    # the shared pair is both a collision and a confusion in a clique
    assert count_conflicts(g, 30 * q + r) == 2
