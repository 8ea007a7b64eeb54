"""Problem instances, candidate partitions and the independent validator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .graphcore import Graph, sigma2


@dataclass(frozen=True)
class PartitionInstance:
    graph: Graph
    k: int
    starts: tuple[int, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(self.starts))
        object.__setattr__(self, "sizes", tuple(self.sizes))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def covers_k(self) -> bool:
        """False for k < 3, where the degree-sum statement is not claimed."""
        return self.k >= 3

    def sorted_order(self) -> list[int]:
        """Path indices by ascending size, ties by index."""
        return sorted(range(self.k), key=lambda i: (self.sizes[i], i))

    def to_json(self) -> dict:
        return {"graph": self.graph.to_graph6(), "k": self.k,
                "starts": list(self.starts), "sizes": list(self.sizes)}

    @classmethod
    def from_json(cls, data: dict | str) -> "PartitionInstance":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(Graph.from_graph6(data["graph"]), int(data["k"]),
                   tuple(data["starts"]), tuple(data["sizes"]))


@dataclass(frozen=True)
class PathPartition:
    paths: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(tuple(p) for p in self.paths))

    def to_json(self) -> dict:
        return {"paths": [list(p) for p in self.paths]}

    @classmethod
    def from_json(cls, data: dict | str) -> "PathPartition":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(tuple(p) for p in data["paths"]))


@dataclass(frozen=True)
class ConditionCheck:
    holds: bool
    sigma2: int | float
    threshold: int

    @property
    def margin(self) -> int | float:
        return self.sigma2 - self.threshold


def validate_instance(inst: PartitionInstance) -> list[str]:
    """Every violated instance invariant; an empty list means the instance is valid."""
    problems = []
    n = inst.graph.n
    if inst.k < 1:
        problems.append(f"k must be positive, got {inst.k}")
    if len(inst.starts) != inst.k:
        problems.append(f"expected {inst.k} starts, got {len(inst.starts)}")
    if len(inst.sizes) != inst.k:
        problems.append(f"expected {inst.k} sizes, got {len(inst.sizes)}")
    if len(set(inst.starts)) != len(inst.starts):
        problems.append("duplicate starts")
    bad = [x for x in inst.starts if not 0 <= x < n]
    if bad:
        problems.append(f"starts outside [0, {n}): {bad}")
    if any(s < 1 for s in inst.sizes):
        problems.append("sizes must be positive")
    if sum(inst.sizes) != n:
        problems.append(f"sum of sizes {sum(inst.sizes)} != n = {n}")
    return problems


def check_condition(inst: PartitionInstance) -> ConditionCheck:
    """Compare sigma2 of the graph with n + k - 1."""
    s = sigma2(inst.graph)
    threshold = inst.graph.n + inst.k - 1
    return ConditionCheck(s >= threshold, s, threshold)


def validate_partition(inst: PartitionInstance, cand: PathPartition | Sequence[Sequence[int]]) -> list[str]:
    """Ground-truth acceptor: disjointness, coverage, adjacency, starts and sizes."""
    paths = cand.paths if isinstance(cand, PathPartition) else tuple(tuple(p) for p in cand)
    g = inst.graph
    problems = []
    if len(paths) != inst.k:
        problems.append(f"expected {inst.k} paths, got {len(paths)}")
    seen: dict[int, int] = {}
    for i, p in enumerate(paths):
        if not p:
            problems.append(f"path {i} is empty")
            continue
        for v in p:
            if not 0 <= v < g.n:
                problems.append(f"path {i} names vertex {v} outside the graph")
            elif v in seen:
                problems.append(f"repeated vertex {v} (paths {seen[v]} and {i})")
            else:
                seen[v] = i
        for a, b in zip(p, p[1:]):
            if 0 <= a < g.n and 0 <= b < g.n and not g.has_edge(a, b):
                problems.append(f"path {i}: {a}-{b} is not an edge")
        if i < inst.k:
            if p[0] != inst.starts[i]:
                problems.append(f"path {i} starts at {p[0]}, not {inst.starts[i]}")
            if len(p) != inst.sizes[i]:
                problems.append(f"path {i} has {len(p)} vertices, not {inst.sizes[i]}")
    missing = [v for v in range(g.n) if v not in seen]
    if missing:
        problems.append(f"uncovered vertices {missing}")
    return problems


def is_valid_partition(inst: PartitionInstance, cand) -> bool:
    return not validate_partition(inst, cand)

