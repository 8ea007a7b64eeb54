from fractions import Fraction

import pytest

from pathpart.errors import ConstructionFailed
from pathpart.families import cycle_blowup, pendant_clique, split_graph, two_cliques_cut
from pathpart.graphcore import Graph, bits, popcount
from pathpart.instances import PartitionInstance, is_valid_partition
from pathpart.outcome import FAILED, FOUND
from pathpart.regkit import blowup, build_decomposition
from pathpart.spine import (MAX_ABSORB_ORDER, IndependentSetSignal, NotTwoConnected, build_spine,
                            dispatch_solve, find_absorbing_path, route_starts, run_spine)

EPS, DELTA = Fraction(1, 20), Fraction(1, 10)


def check_colouring(st):
    m = len(st.cycle)
    reds = [i for i, c in enumerate(st.edge_colors) if c == "red"]
    # red edges are pairwise disjoint on the cycle
    assert all((b - a) % m not in (1, m - 1) for a in reds for b in reds if a != b)
    blue_runs = sum(st.edge_colors[i] == "blue" and st.edge_colors[(i + 1) % m] == "blue" for i in range(m))
    assert blue_runs == m % 2
    assert len(st.couples) == m // 2
    for a, b in st.couples:
        assert popcount(st.members[a]) == popcount(st.members[b])


def test_even_cycle_spine():
    g, decomp = blowup(Graph.cycle(6), 20, Fraction(3, 5), seed=1, eps=EPS, delta=DELTA)
    st = build_spine(g, decomp, 3)
    assert sorted(st.cycle) == list(range(6))
    assert st.junction is None and st.transport == 0
    check_colouring(st)


@pytest.mark.parametrize("seed", range(3))
def test_odd_cycle_spine_keeps_a_junction(seed):
    inst, decomp = cycle_blowup(140, 3, seed, length=7)
    st = build_spine(inst.graph, decomp, 3)
    assert len(st.cycle) == 7
    check_colouring(st)
    assert st.junction == st.cycle[-1]
    assert popcount(st.transport) >= 3
    assert popcount(st.garbage) <= (2 * decomp.delta + 7 * decomp.eps) * inst.n


def test_tree_of_clusters_is_rejected():
    g, decomp = blowup(Graph.path(4), 10, Fraction(3, 5), seed=0, eps=EPS, delta=DELTA)
    with pytest.raises(NotTwoConnected):
        build_spine(g, decomp, 3)


def with_extra_vertex(g, neighbours):
    edges = list(g.edges()) + [(g.n, u) for u in neighbours]
    return Graph.from_edges(g.n + 1, edges)


def test_direct_absorbing_path():
    g, decomp = blowup(Graph.cycle(6), 12, 1, seed=0, eps=EPS, delta=DELTA)
    v = g.n
    g = with_extra_vertex(g, [0, 12])
    decomp = build_decomposition(g, list(decomp.clusters), 1 << v, EPS, DELTA)
    st = build_spine(g, decomp, 2)
    ap = find_absorbing_path(st, v)
    assert ap.order == 3 and ap.path[1] == v


def test_bipartite_blocking_set_signals_the_independent_route():
    # a complete bipartite blow-up of C4; v sees only one colour class,
    # so every path through v is unbalanced
    g, decomp = blowup(Graph.cycle(4), 10, 1, seed=0, eps=EPS, delta=DELTA)
    v = g.n
    g = with_extra_vertex(g, [0, 1, 20, 21])
    decomp = build_decomposition(g, list(decomp.clusters), 1 << v, EPS, DELTA)
    st = build_spine(g, decomp, 2)
    with pytest.raises(IndependentSetSignal) as info:
        find_absorbing_path(st, v)
    block = info.value.vertices
    assert popcount(block) == 20
    assert all(not g.rows[x] & block for x in bits(block))


def test_exhausted_clusters_fail_with_the_floor_step():
    inst, decomp = cycle_blowup(120, 3, 0)
    st = build_spine(inst.graph, decomp, 3)
    v = min(bits(st.garbage))
    st.absorb_used = {cl: 1 for pair in st.couples for cl in pair}
    with pytest.raises(ConstructionFailed) as info:
        find_absorbing_path(st, v, per_cluster_floor=1)
    assert info.value.step == "per-cluster-floor"


def test_absorbing_paths_on_a_fixture():
    inst, decomp = cycle_blowup(120, 3, 2)
    st = build_spine(inst.graph, decomp, 3)
    for v in list(bits(st.garbage))[:6]:
        ap = find_absorbing_path(st, v)
        assert ap.order <= MAX_ABSORB_ORDER
        assert v in ap.path
        assert st.couple_of(ap.path[0]) == (ap.couple, 0)
        assert st.couple_of(ap.path[-1]) == (ap.couple, 1)


def test_stubs_for_starts_inside_and_outside_the_couples():
    inst, decomp = cycle_blowup(120, 3, 4)
    st = build_spine(inst.graph, decomp, 3)
    inside = [min(bits(st.members[a])) for a, _ in st.couples]
    outside = next(v for v in bits(st.garbage) if inst.graph.rows[v] & st.couple_vertices)
    starts = (inside[0], inside[1], outside)
    inst = PartitionInstance(inst.graph, 3, starts, (30, 40, inst.n - 70))
    routes = route_starts(st, inst)
    assert routes.stubs[0] == [inside[0]] and routes.stubs[1] == [inside[1]]
    assert len(routes.stubs[2]) == 2
    st.check_balance("after routing")


def audit(st):
    assert st.violations == []
    st.check_balance("final audit")
    for ap in st.absorbing:
        assert ap.order <= MAX_ABSORB_ORDER
        extra = sum(1 for x in ap.path if st.couple_of(x) is None)
        # cluster vertices come in balanced pairs, so splicing shifts parity by the garbage count
        assert (ap.order - extra) % 2 == 0


@pytest.mark.parametrize("n", [120, 300])
def test_even_blowups_are_partitioned(n):
    for seed in range(20):
        inst, decomp = cycle_blowup(n, 2 + seed % 3, seed)
        out, st = run_spine(inst, decomp)
        assert out.tag == FOUND, (seed, out.step, out.detail)
        assert is_valid_partition(inst, out.partition)
        audit(st)


def test_odd_blowups_are_partitioned():
    for seed in range(20):
        inst, decomp = cycle_blowup(300, 2 + seed % 3, seed, length=7)
        out, st = run_spine(inst, decomp)
        assert out.tag == FOUND, (seed, out.step, out.detail)
        assert is_valid_partition(inst, out.partition)
        audit(st)


def test_two_singleton_paths_finish_at_their_stubs():
    inst, decomp = cycle_blowup(120, 3, 3)
    inst = PartitionInstance(inst.graph, 3, inst.starts, (1, 1, inst.n - 2))
    out, st = run_spine(inst, decomp)
    assert out.tag == FOUND
    assert [len(p) for p in out.partition.paths] == [1, 1, inst.n - 2]
    assert any("complete at the stub" in s for s in out.steps)


def test_small_blowups_fail_with_named_steps():
    for seed in range(20):
        inst, decomp = cycle_blowup(60, 3, seed, length=7)
        out, st = run_spine(inst, decomp)
        if out.tag == FAILED:
            assert out.step and out.detail
        else:
            assert is_valid_partition(inst, out.partition)


@pytest.mark.parametrize("make, route", [
    (lambda: pendant_clique(120, 3, 1), "degree"),
    (lambda: split_graph(120, 3, 1), "independent"),
    (lambda: two_cliques_cut(120, 3, 1)[0], "connectivity"),
])
def test_dispatch_routes(make, route):
    inst = make()
    out = dispatch_solve(inst)
    assert out.tag == FOUND and out.route == route
    assert is_valid_partition(inst, out.partition)


def test_dispatch_falls_back_to_exact_search_on_tiny_graphs():
    g = Graph.from_edges(6, [e for e in Graph.complete(6).edges() if e not in [(0, 1), (2, 3), (4, 5)]])
    out = dispatch_solve(PartitionInstance(g, 3, (0, 2, 4), (2, 2, 2)))
    assert out.tag == FOUND and out.route == "oracle"


def test_dispatch_below_the_threshold():
    small = dispatch_solve(PartitionInstance(Graph.cycle(8), 2, (0, 4), (4, 4)))
    assert small.tag == FOUND and small.route == "oracle"
    large = dispatch_solve(PartitionInstance(Graph.path(14), 2, (0, 1), (7, 7)))
    assert large.tag == FAILED and large.step == "precondition"
    assert large.route is not None
