import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcipmd import brute_force_min_k_partition, objective_of_labels, pair_move_delta, refine
from pcipmd.local_search import refine_single
from pcipmd.simplex import one_hot, penalized_objective

from conftest import random_symmetric


def best_pair_neighbour(w, labels, k, offset=None):
    """Smallest objective reachable by relabelling any two cells at once."""
    base = objective_of_labels(w, labels)
    if offset is not None:
        base += offset[np.arange(len(labels)), labels].sum()
    best = base
    for i, j in itertools.combinations(range(len(labels)), 2):
        best = min(best, base + min(
            pair_move_delta(w, labels, i, j, a, b, offset) for a in range(k) for b in range(k)
        ))
    return base, best


def test_delta_examples():
    w = np.array([[0, 1.0], [1.0, 0]])
    assert pair_move_delta(w, [0, 0], 0, 1, 0, 0) == 0.0
    assert pair_move_delta(w, [0, 0], 0, 1, 0, 1) == -2.0


def test_delta_matches_full_evaluation(rng):
    w = random_symmetric(6, rng)
    labels = rng.integers(3, size=6)
    for i, j in itertools.permutations(range(6), 2):
        for a, b in itertools.product(range(3), repeat=2):
            after = labels.copy()
            after[i], after[j] = a, b
            direct = penalized_objective(w, one_hot(after, 3), 0) - penalized_objective(w, one_hot(labels, 3), 0)
            assert pair_move_delta(w, labels, i, j, a, b) == pytest.approx(direct, abs=1e-10)


def test_delta_errors():
    w = np.zeros((3, 3))
    with pytest.raises(ValueError):
        pair_move_delta(w, [0, 0, 0], 1, 1, 0, 0)
    with pytest.raises(IndexError):
        pair_move_delta(w, [0, 0, 0], 0, 3, 0, 0)


def test_refine_path():
    w = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.0]])
    out = refine(w, [0, 0, 0], 2)
    assert objective_of_labels(w, out) == 0.0
    assert brute_force_min_k_partition(w, 2)[1] == 0.0


def test_refine_fixed_point_unchanged():
    w = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.0]])
    assert refine(w, [0, 1, 0], 2).tolist() == [0, 1, 0]


def test_refine_pair_optimal(rng):
    for _ in range(10):
        w = random_symmetric(4, rng)
        out = refine(w, rng.integers(3, size=4), 3)
        base, best = best_pair_neighbour(w, out, 3)
        assert base <= best + 1e-12


def test_refine_with_offset_pair_optimal(rng):
    w = random_symmetric(5, rng)
    offset = rng.random((5, 3))
    out = refine(w, np.zeros(5, dtype=int), 3, offset=offset)
    base, best = best_pair_neighbour(w, out, 3, offset)
    assert base <= best + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.integers(2, 4))
def test_refine_never_worse(seed, n, k):
    rng = np.random.default_rng(seed)
    w = random_symmetric(n, rng)
    start = rng.integers(k, size=n)
    out = refine(w, start, k)
    assert objective_of_labels(w, out) <= objective_of_labels(w, start) + 1e-12
    assert out.min() >= 0 and out.max() < k


def test_refine_small_cases():
    assert refine(np.zeros((1, 1)), [2], 3).tolist() == [2]
    assert refine(np.ones((2, 2)) - np.eye(2), [0, 0], 1).tolist() == [0, 0]
    assert refine_single(np.zeros((1, 1)), [0], 2, offset=np.array([[1.0, 0.0]])).tolist() == [1]


def test_refine_validation():
    with pytest.raises(ValueError):
        refine(np.zeros((2, 2)), [0, 3], 2)
    with pytest.raises(ValueError):
        refine(np.zeros((2, 2)), [0], 2)


def test_refine_deterministic_ties():
    # all moves tie at zero gain: nothing moves
    w = np.zeros((4, 4))
    assert refine(w, [1, 1, 0, 2], 3).tolist() == [1, 1, 0, 2]
