import json

from hypothesis import given
from hypothesis import strategies as st

from pathpart.graphcore import Graph
from pathpart.instances import (PartitionInstance, PathPartition, check_condition, is_valid_partition,
                                validate_instance, validate_partition)

from conftest import graphs

K6 = Graph.complete(6)
K6_MINUS_PM = Graph.complete(6).complement().with_edges([(0, 1), (2, 3), (4, 5)]).complement()


def test_valid_instance():
    assert validate_instance(PartitionInstance(K6, 3, (0, 1, 2), (1, 2, 3))) == []


def test_duplicate_starts_reported():
    problems = validate_instance(PartitionInstance(K6, 3, (0, 0, 2), (1, 2, 3)))
    assert any("duplicate" in p for p in problems)


def test_size_sum_reported():
    problems = validate_instance(PartitionInstance(K6, 3, (0, 1, 2), (1, 2, 2)))
    assert any("sum" in p for p in problems)


def test_every_violation_is_reported():
    problems = validate_instance(PartitionInstance(K6, 3, (0, 0, 9), (0, 2, 2)))
    assert len(problems) == 4


def test_small_k_is_accepted_but_tagged():
    inst = PartitionInstance(K6, 2, (0, 1), (3, 3))
    assert validate_instance(inst) == []
    assert not inst.covers_k
    assert PartitionInstance(K6, 3, (0, 1, 2), (2, 2, 2)).covers_k


def test_condition_margins():
    assert K6_MINUS_PM.edge_count() == 12
    tight = check_condition(PartitionInstance(K6_MINUS_PM, 3, (0, 2, 4), (2, 2, 2)))
    assert tight.holds and tight.margin == 0
    c6 = check_condition(PartitionInstance(Graph.cycle(6), 3, (0, 2, 4), (2, 2, 2)))
    assert not c6.holds and c6.margin == -4
    pet = check_condition(PartitionInstance(Graph.petersen(), 3, (0, 1, 2), (3, 3, 4)))
    assert not pet.holds and pet.margin == -6


def test_partition_examples():
    inst = PartitionInstance(K6, 3, (0, 1, 2), (1, 2, 3))
    assert is_valid_partition(inst, PathPartition(((0,), (1, 3), (2, 4, 5))))
    problems = validate_partition(inst, PathPartition(((0,), (1, 3), (2, 4, 4))))
    assert any("repeated" in p for p in problems)
    c6 = PartitionInstance(Graph.cycle(6), 3, (0, 2, 4), (2, 2, 2))
    assert is_valid_partition(c6, [(0, 1), (2, 3), (4, 5)])


def test_partition_violations_are_specific():
    c6 = PartitionInstance(Graph.cycle(6), 3, (0, 2, 4), (2, 2, 2))
    assert any("not an edge" in p for p in validate_partition(c6, [(0, 1), (2, 4), (3, 5)]))
    assert any("starts at" in p for p in validate_partition(c6, [(1, 0), (2, 3), (4, 5)]))
    assert any("uncovered" in p for p in validate_partition(c6, [(0, 1), (2, 3), (4,)]))
    assert any("expected 3 paths" in p for p in validate_partition(c6, [(0, 1), (2, 3)]))


def test_json_round_trip():
    inst = PartitionInstance(Graph.petersen(), 3, (0, 1, 2), (3, 3, 4))
    assert PartitionInstance.from_json(json.dumps(inst.to_json())) == inst
    part = PathPartition(((0, 1), (2, 3)))
    assert PathPartition.from_json(json.dumps(part.to_json())) == part


@given(graphs(min_n=3, max_n=9), st.data())
def test_valid_partition_covers_each_vertex_once(g, data):
    order = data.draw(st.permutations(range(g.n)))
    cut = sorted(data.draw(st.sets(st.integers(1, g.n - 1), min_size=2, max_size=2)))
    paths = [order[:cut[0]], order[cut[0]:cut[1]], order[cut[1]:]]
    inst = PartitionInstance(g, 3, tuple(p[0] for p in paths), tuple(len(p) for p in paths))
    if is_valid_partition(inst, paths):
        flat = [v for p in paths for v in p]
        assert sorted(flat) == list(range(g.n))
        assert all(g.is_path(p) for p in paths)
    else:
        assert not all(g.is_path(p) for p in paths)


@given(graphs(min_n=3, max_n=9), st.data())
def test_condition_is_monotone_under_edge_addition(g, data):
    inst = PartitionInstance(g, 3, (0, 1, 2), (1, 1, g.n - 2))
    missing = [(u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v)]
    if not missing:
        return
    extra = data.draw(st.lists(st.sampled_from(missing), min_size=1, max_size=4))
    bigger = PartitionInstance(g.with_edges(extra), 3, inst.starts, inst.sizes)
    if check_condition(inst).holds:
        assert check_condition(bigger).holds
    assert check_condition(bigger).sigma2 >= check_condition(inst).sigma2
