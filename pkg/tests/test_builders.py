import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathpart.errors import ParityMismatch, PreconditionNotMet
from pathpart.graphcore import Graph, sigma2, to_mask
from pathpart.builders import (bipanconnected_path, hamiltonian_between, is_panconnected_bruteforce,
                               ore_long_cycle, panconnected_path, path_lengths_from)

from conftest import dense_bipartite, dense_graph, graphs


# panconnected ------------------------------------------------------------------


def test_panconnected_small_examples():
    assert panconnected_path(Graph.complete(5), 0, 1, 3) == [0, 2, 3, 1]
    assert panconnected_path(Graph.complete(4), 0, 3, 2) == [0, 1, 3]


def test_panconnected_rejects_low_degree_and_bad_length():
    with pytest.raises(PreconditionNotMet):
        panconnected_path(Graph.cycle(6), 0, 2, 3)
    with pytest.raises(PreconditionNotMet):
        panconnected_path(Graph.complete(5), 0, 1, 5)
    with pytest.raises(PreconditionNotMet):
        panconnected_path(Graph.complete(5), 0, 1, 1)


@pytest.mark.parametrize("seed", range(5))
def test_panconnected_every_pair_and_length_on_dense_graphs(seed):
    g = dense_graph(9, 6, seed)
    assert g.min_degree() >= 6
    for u, v in itertools.combinations(range(9), 2):
        for length in range(2, 9):
            p = panconnected_path(g, u, v, length)
            assert g.is_path(p) and p[0] == u and p[-1] == v and len(p) == length + 1


@settings(max_examples=30, deadline=None)
@given(st.integers(6, 12), st.integers(0, 10_000))
def test_williamson_graphs_are_panconnected_by_brute_force(n, seed):
    g = dense_graph(n, (n + 3) // 2, seed)
    assert is_panconnected_bruteforce(g)
    u, v = 0, n - 1
    for length in range(2, n):
        assert len(panconnected_path(g, u, v, length)) == length + 1


def test_panconnected_brute_force_examples():
    assert is_panconnected_bruteforce(Graph.complete(4))
    assert not is_panconnected_bruteforce(Graph.cycle(5))
    assert not is_panconnected_bruteforce(Graph.complete_bipartite(2, 3))


@given(graphs(min_n=2, max_n=7))
def test_path_lengths_match_enumeration(g):
    lengths = path_lengths_from(g, 0)
    for v in range(1, g.n):
        seen = 0
        others = [w for w in range(1, g.n) if w != v]
        for r in range(len(others) + 1):
            for mid in itertools.permutations(others, r):
                if g.is_path((0,) + mid + (v,)):
                    seen |= 1 << (r + 1)
        assert lengths[v] == seen


# bipanconnected ----------------------------------------------------------------


def test_bipanconnected_complete_bipartite():
    g = Graph.complete_bipartite(4, 4)
    U, V = to_mask(range(4)), to_mask(range(4, 8))
    p = bipanconnected_path(g, U, V, 0, 4, 3)
    assert len(p) == 4 and g.is_path(p)
    with pytest.raises(ParityMismatch):
        bipanconnected_path(g, U, V, 0, 1, 3)


@pytest.mark.parametrize("seed", range(5))
def test_bipanconnected_all_valid_requests(seed):
    g, U, V = dense_bipartite(6, 5, seed)
    for u, v in itertools.permutations(range(12), 2):
        same = (u < 6) == (v < 6)
        top = 10 if same else 11
        for length in range(2, top + 1):
            if same != (length % 2 == 0):
                continue
            p = bipanconnected_path(g, U, V, u, v, length)
            assert len(p) == length + 1 and g.is_path(p)
            assert all(((a < 6) != (b < 6)) for a, b in zip(p, p[1:]))


def test_bipanconnected_rejects_unbalanced_or_sparse():
    g = Graph.complete_bipartite(3, 4)
    with pytest.raises(PreconditionNotMet):
        bipanconnected_path(g, to_mask(range(3)), to_mask(range(3, 7)), 0, 3, 3)
    c8 = Graph.cycle(8)
    with pytest.raises(PreconditionNotMet):
        bipanconnected_path(c8, to_mask([0, 2, 4, 6]), to_mask([1, 3, 5, 7]), 0, 1, 3)


# long cycles -------------------------------------------------------------------


def test_ore_small_cases():
    assert sorted(ore_long_cycle(Graph.cycle(5))) == list(range(5))
    assert len(ore_long_cycle(Graph.complete(4))) == 4
    pet = Graph.petersen()
    cyc = ore_long_cycle(pet)
    assert pet.is_cycle(cyc) and len(cyc) >= 6


def test_ore_requires_two_connectivity():
    with pytest.raises(PreconditionNotMet):
        ore_long_cycle(Graph.path(5))


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=3, max_n=11, p=0.55))
def test_ore_cycle_meets_degree_sum_bound(g):
    try:
        cyc = ore_long_cycle(g)
    except PreconditionNotMet:
        return
    assert g.is_cycle(cyc)
    assert len(cyc) >= min(sigma2(g), g.n)


def test_hamiltonian_between_on_dense_graph():
    g = dense_graph(30, 18, 1)
    p = hamiltonian_between(g.rows, 0, 29, g.vertices)
    assert p is not None and sorted(p) == list(range(30)) and g.is_path(p)
    assert hamiltonian_between(Graph.star(4).rows, 1, 2, to_mask(range(5))) is None
