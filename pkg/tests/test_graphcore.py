import itertools
import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathpart.errors import BudgetExhausted, Graph6Error, NoDisjointFamily
from pathpart.graphcore import (Graph, bfs_path, bits, components, decode_graph6, encode_graph6,
                                independence_number, is_independent, maximum_independent_set,
                                menger_disjoint_paths, minimum_vertex_cut, popcount, sigma2, sigma2_pair,
                                to_mask, vertex_connectivity)

from conftest import from_nx, graphs, to_nx


def brute_sigma2(g):
    sums = [g.degree(u) + g.degree(v) for u, v in itertools.combinations(range(g.n), 2) if not g.has_edge(u, v)]
    return min(sums) if sums else math.inf


def brute_alpha(g):
    for size in range(g.n, 0, -1):
        for sub in itertools.combinations(range(g.n), size):
            if is_independent(g, to_mask(sub)):
                return size
    return 0


# sigma2 ----------------------------------------------------------------------


def test_sigma2_small_cases():
    assert sigma2(Graph.cycle(5)) == 4
    assert sigma2(Graph.complete(4)) == math.inf
    assert sigma2(Graph.petersen()) == 6


@given(graphs(max_n=10))
def test_sigma2_matches_brute_force(g):
    assert sigma2(g) == brute_sigma2(g)


@given(graphs(min_n=2, max_n=10))
def test_sigma2_is_attained_and_a_lower_bound(g):
    pair = sigma2_pair(g)
    if g.is_complete():
        assert pair is None
        return
    u, v = pair
    assert not g.has_edge(u, v)
    assert g.degree(u) + g.degree(v) == sigma2(g)
    for a, b in itertools.combinations(range(g.n), 2):
        if not g.has_edge(a, b):
            assert sigma2(g) <= g.degree(a) + g.degree(b)


# independence ------------------------------------------------------------------


def test_independence_small_cases():
    assert independence_number(Graph.cycle(5)) == 2
    assert independence_number(Graph.complete_bipartite(3, 3)) == 3
    assert independence_number(Graph.petersen()) == 4


@given(graphs(max_n=10))
def test_independence_matches_subset_enumeration(g):
    best = maximum_independent_set(g)
    assert is_independent(g, best)
    assert popcount(best) == brute_alpha(g)


@settings(max_examples=30)
@given(graphs(min_n=5, max_n=14))
def test_independence_matches_networkx_clique_of_complement(g):
    comp = nx.complement(to_nx(g))
    assert independence_number(g) == max(len(c) for c in nx.find_cliques(comp))


def test_independence_budget_is_enforced():
    with pytest.raises(BudgetExhausted):
        maximum_independent_set(Graph.cycle(40), budget=3)


# connectivity ------------------------------------------------------------------


def test_connectivity_small_cases():
    assert vertex_connectivity(Graph.path(4)) == 1
    assert vertex_connectivity(Graph.complete(5)) == 4
    assert vertex_connectivity(Graph.petersen()) == 3


@settings(max_examples=60)
@given(graphs(min_n=2, max_n=10))
def test_connectivity_matches_networkx(g):
    h = to_nx(g)
    kappa, cut = minimum_vertex_cut(g)
    expected = g.n - 1 if g.is_complete() else nx.node_connectivity(h)
    assert kappa == expected
    if not g.is_complete():
        assert kappa <= g.min_degree()
        if nx.is_connected(h):
            rest = g.vertices & ~cut
            assert popcount(cut) == kappa
            assert len(components(g, rest)) >= 2


def test_limited_cut_search_reports_only_small_cuts():
    g = Graph.petersen()
    assert minimum_vertex_cut(g, limit=2) == (3, 0)
    assert minimum_vertex_cut(g, limit=3)[0] == 3


def test_bfs_path_is_shortest():
    g = Graph.cycle(8)
    assert bfs_path(g, 0, 1 << 3, g.vertices) == [0, 1, 2, 3]
    assert bfs_path(g, 0, 1 << 4, g.vertices & ~(1 << 1)) == [0, 7, 6, 5, 4]
    assert bfs_path(g, 0, 1 << 4, g.vertices & ~(1 << 1) & ~(1 << 6)) is None


# menger ------------------------------------------------------------------------


def test_menger_single_sink_vertex_blocks_two_sources():
    with pytest.raises(NoDisjointFamily) as info:
        menger_disjoint_paths(Graph.complete(5), to_mask([0, 1]), 1 << 4)
    assert info.value.cut == 1 << 4


def test_menger_direct_edges():
    paths = menger_disjoint_paths(Graph.complete(5), to_mask([0, 1]), to_mask([3, 4]))
    assert sorted(p[-1] for p in paths) == [3, 4]
    assert all(len(p) == 2 for p in paths)


def test_menger_petersen_into_inner_cycle():
    g = Graph.petersen()
    paths = menger_disjoint_paths(g, to_mask([0, 1, 2]), to_mask(range(5, 10)))
    check_family(g, paths, to_mask([0, 1, 2]), to_mask(range(5, 10)), 0)


def check_family(g, paths, sources, sinks, forbidden):
    assert [p[0] for p in paths] == list(bits(sources))
    seen = set()
    for p in paths:
        assert g.is_path(p)
        assert sinks >> p[-1] & 1
        assert not any(sinks >> v & 1 for v in p[:-1])
        assert not any(forbidden >> v & 1 for v in p)
        assert not seen & set(p)
        seen |= set(p)


def brute_family_exists(g, sources, sinks, forbidden):
    """Exhaustive search over simple paths for a disjoint family."""
    src = list(bits(sources))
    options = []
    for s in src:
        found = []

        def walk(path):
            v = path[-1]
            if sinks >> v & 1:
                found.append(tuple(path))
                return
            for u in bits(g.rows[v] & ~forbidden & ~sources):
                if u not in path:
                    walk(path + [u])

        walk([s])
        options.append(found)

    def pick(i, used):
        if i == len(src):
            return True
        return any(not used & set(p) and pick(i + 1, used | set(p)) for p in options[i])

    return pick(0, set())


@settings(max_examples=80)
@given(graphs(min_n=3, max_n=7), st.data())
def test_menger_agrees_with_exhaustive_family_search(g, data):
    verts = list(range(g.n))
    labels = data.draw(st.lists(st.sampled_from("sxf."), min_size=g.n, max_size=g.n))
    sources = to_mask(v for v in verts if labels[v] == "s")
    sinks = to_mask(v for v in verts if labels[v] == "x")
    forbidden = to_mask(v for v in verts if labels[v] == "f")
    exists = brute_family_exists(g, sources, sinks, forbidden)
    try:
        paths = menger_disjoint_paths(g, sources, sinks, forbidden)
    except NoDisjointFamily as exc:
        assert not exists
        assert popcount(exc.cut) < popcount(sources)
        return
    assert exists
    check_family(g, paths, sources, sinks, forbidden)


# graph6 ------------------------------------------------------------------------


@given(graphs(min_n=0, max_n=70, p=0.3))
@settings(max_examples=40)
def test_graph6_matches_networkx(g):
    text = encode_graph6(g)
    assert text == nx.to_graph6_bytes(to_nx(g), header=False).decode().strip()
    assert decode_graph6(text) == g


def test_graph6_reads_networkx_atlas():
    for h in nx.graph_atlas_g()[1:60]:
        text = nx.to_graph6_bytes(h, header=False).decode().strip()
        assert decode_graph6(text) == from_nx(h)


@pytest.mark.parametrize("bad", ["", "A", "B~~~", "C\x1f"])
def test_graph6_rejects_malformed(bad):
    with pytest.raises(Graph6Error):
        decode_graph6(bad)


def test_graph_rejects_asymmetric_rows():
    with pytest.raises(ValueError):
        Graph(2, (0b10, 0))
