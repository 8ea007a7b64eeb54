"""Exact path-partition search and exhaustive conjecture sweeps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Iterator

from .errors import BudgetExhausted, Graph6Error
from .graphcore import Graph, bits, canonical_form, components, sigma2
from .instances import PartitionInstance, PathPartition, check_condition, validate_instance, validate_partition
from .outcome import BUDGET, FOUND, INFEASIBLE, SolveOutcome

log = logging.getLogger(__name__)

EXHAUSTIVE = "exhaustive search, no budget cut"


class _Abort(Exception):
    pass


class _Search:
    def __init__(self, inst: PartitionInstance, budget: int | None):
        self.g = inst.graph
        self.inst = inst
        self.order = inst.sorted_order()
        self.budget = budget
        self.nodes = 0
        self.dead: set[tuple[int, int, int]] = set()
        self.paths: dict[int, list[int]] = {i: [inst.starts[i]] for i in range(inst.k)}

    def tick(self):
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise _Abort

    def pending(self, pos: int) -> list[tuple[int, int]]:
        """(head, remaining) of every unfinished path from position ``pos`` on."""
        out = []
        for idx in self.order[pos:]:
            p = self.paths[idx]
            r = self.inst.sizes[idx] - len(p)
            if r > 0:
                out.append((p[-1], r))
        return out

    def viable(self, free: int, pos: int) -> bool:
        rows = self.g.rows
        heads = self.pending(pos)
        if sum(r for _, r in heads) != free.bit_count():
            return False
        comps = components(self.g, free)
        for h, r in heads:
            reach = rows[h] & free
            if not reach:
                return False
            if max(c.bit_count() for c in comps if c & reach) < r:
                return False
        for c in comps:
            if sum(r for h, r in heads if rows[h] & c) < c.bit_count():
                return False
        return True

    def run(self, pos: int, free: int) -> bool:
        self.tick()
        while pos < len(self.order) and len(self.paths[self.order[pos]]) == self.inst.sizes[self.order[pos]]:
            pos += 1
        if pos == len(self.order):
            return free == 0
        idx = self.order[pos]
        path = self.paths[idx]
        tail = path[-1]
        key = (free, pos, tail)
        if key in self.dead:
            return False
        if not self.viable(free, pos):
            self.dead.add(key)
            return False
        rows = self.g.rows
        cands = sorted(bits(rows[tail] & free), key=lambda v: ((rows[v] & free).bit_count(), v))
        for v in cands:
            path.append(v)
            if self.run(pos, free & ~(1 << v)):
                return True
            path.pop()
        self.dead.add(key)
        return False


def solve_exact(inst: PartitionInstance, budget: int | None = None) -> SolveOutcome:
    """Exhaustive backtracking: Found, Infeasible (exhaustive) or BudgetExhausted.

    Paths are grown one at a time, shortest prescribed size first, always
    extending to the free neighbour with fewest onward options. Failed states
    are memoised, which keeps the search deterministic for a fixed budget.
    """
    problems = validate_instance(inst)
    if problems:
        raise ValueError("; ".join(problems))
    search = _Search(inst, budget)
    free = inst.graph.vertices
    for x in inst.starts:
        free &= ~(1 << x)
    try:
        ok = search.run(0, free)
    except _Abort:
        return SolveOutcome(BUDGET, nodes_explored=search.nodes, route="oracle")
    if not ok:
        return SolveOutcome(INFEASIBLE, nodes_explored=search.nodes, certificate=EXHAUSTIVE, route="oracle")
    part = PathPartition(tuple(tuple(search.paths[i]) for i in range(inst.k)))
    assert not validate_partition(inst, part)
    return SolveOutcome(FOUND, part, nodes_explored=search.nodes, route="oracle")


# batch verification -----------------------------------------------------


def size_multisets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Nondecreasing k-tuples of positive integers summing to n."""

    def rec(left: int, parts: int, lo: int):
        if parts == 1:
            if left >= lo:
                yield (left,)
            return
        for first in range(lo, left // parts + 1):
            for rest in rec(left - first, parts - 1, first):
                yield (first,) + rest

    if k >= 1 and n >= k:
        yield from rec(n, k, 1)


@dataclass
class BatchPolicy:
    budget: int | None = 1_000_000
    workers: int = 1
    require_connected: bool = False


@dataclass
class BatchReport:
    graphs: int = 0
    checked_graphs: int = 0
    instances: int = 0
    found: int = 0
    infeasible: int = 0
    budget_exhausted: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    undecided: list[dict] = field(default_factory=list)
    parse_errors: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "graphs": self.graphs,
            "checked_graphs": self.checked_graphs,
            "instances": self.instances,
            "found": self.found,
            "infeasible": self.infeasible,
            "budget_exhausted": self.budget_exhausted,
            "counterexamples": self.counterexamples,
            "undecided": self.undecided,
            "parse_errors": self.parse_errors,
        }


def _sweep_graph(args: tuple[int, str, int, BatchPolicy]) -> tuple[int, dict]:
    lineno, line, k, policy = args
    try:
        g = Graph.from_graph6(line)
    except (Graph6Error, ValueError) as exc:
        return lineno, {"error": str(exc)}
    res = {"checked": False, "instances": 0, "found": 0, "infeasible": [], "undecided": []}
    if g.n < k:
        return lineno, res
    if policy.require_connected and len(components(g)) > 1:
        return lineno, res
    probe = PartitionInstance(g, k, tuple(range(k)), (1,) * (k - 1) + (g.n - k + 1,))
    if not check_condition(probe).holds:
        return lineno, res
    res["checked"] = True
    for sizes in size_multisets(g.n, k):
        for starts in permutations(range(g.n), k):
            inst = PartitionInstance(g, k, starts, sizes)
            out = solve_exact(inst, policy.budget)
            res["instances"] += 1
            if out.tag == FOUND:
                res["found"] += 1
            elif out.tag == INFEASIBLE:
                res["infeasible"].append(inst.to_json())
            else:
                res["undecided"].append(inst.to_json())
    return lineno, res


def verify_batch(lines: Iterable[str], k: int, policy: BatchPolicy | None = None) -> BatchReport:
    """Sweep every start injection and sorted size multiset for each graph.

    Graphs failing the degree-sum condition are counted but not searched.
    Malformed lines are recorded in ``parse_errors`` and skipped. Results are
    aggregated in input order whatever the worker count.
    """
    policy = policy or BatchPolicy()
    jobs = [(i + 1, line.strip(), k, policy) for i, line in enumerate(lines)
            if line.strip()]
    if policy.workers > 1:
        with ProcessPoolExecutor(policy.workers) as pool:
            results = list(pool.map(_sweep_graph, jobs, chunksize=8))
    else:
        results = [_sweep_graph(j) for j in jobs]
    report = BatchReport()
    for lineno, res in sorted(results, key=lambda r: r[0]):
        if "error" in res:
            report.parse_errors.append({"line": lineno, "error": res["error"]})
            continue
        report.graphs += 1
        report.checked_graphs += res["checked"]
        report.instances += res["instances"]
        report.found += res["found"]
        report.infeasible += len(res["infeasible"])
        report.budget_exhausted += len(res["undecided"])
        report.counterexamples.extend(res["infeasible"])
        report.undecided.extend(res["undecided"])
    log.info("swept %d graphs, %d instances", report.graphs, report.instances)
    return report


# sharpness ----------------------------------------------------------------


def graphs_with_sigma2(n: int, target: int) -> Iterator[Graph]:
    """Graphs on n vertices with sigma2 exactly ``target``, one per isomorphism class.

    Enumerates complements H: sigma2(G) = target means every edge uv of H has
    d_H(u) + d_H(v) <= 2(n-1) - target, with equality on some edge. Sparser
    complements come first.
    """
    cap = 2 * (n - 1) - target
    if cap < 2:
        return
    pairs = list(combinations(range(n), 2))
    seen: set[tuple[int, ...]] = set()
    for m in range(1, len(pairs) + 1):
        emitted = False
        for edges in _bounded_edge_sets(n, pairs, m, cap):
            emitted = True
            g = Graph.from_edges(n, edges).complement()
            if sigma2(g) != target:
                continue
            key = canonical_form(g)
            if key in seen:
                continue
            seen.add(key)
            yield g
        if not emitted:
            return


def _bounded_edge_sets(n, pairs, m, cap) -> Iterator[tuple[tuple[int, int], ...]]:
    deg = [0] * n
    chosen: list[tuple[int, int]] = []

    def rec(start: int):
        if len(chosen) == m:
            yield tuple(chosen)
            return
        for idx in range(start, len(pairs) - (m - len(chosen)) + 1):
            u, v = pairs[idx]
            deg[u] += 1
            deg[v] += 1
            if all(deg[a] + deg[b] <= cap for a, b in chosen + [(u, v)]):
                chosen.append((u, v))
                yield from rec(idx + 1)
                chosen.pop()
            deg[u] -= 1
            deg[v] -= 1

    yield from rec(0)


def find_sharpness_witness(n: int, k: int, budget: int | None = None,
                           graphs: Iterable[Graph] | None = None) -> PartitionInstance | None:
    """First instance with sigma2 = n + k - 2 and no valid path partition.

    ``graphs`` overrides the candidate family; candidates whose sigma2 is not
    exactly n + k - 2 are ignored. ``budget`` bounds total search nodes.
    """
    if not n >= k >= 3:
        raise ValueError("need n >= k >= 3")
    target = n + k - 2
    family = graphs_with_sigma2(n, target) if graphs is None else graphs
    spent = 0
    for g in family:
        if g.n != n or sigma2(g) != target:
            continue
        for sizes in size_multisets(n, k):
            for starts in permutations(range(n), k):
                left = None if budget is None else budget - spent
                if left is not None and left <= 0:
                    raise BudgetExhausted(spent)
                out = solve_exact(PartitionInstance(g, k, starts, sizes), left)
                spent += out.nodes_explored
                if out.tag == INFEASIBLE:
                    return PartitionInstance(g, k, starts, sizes)
                if out.tag == BUDGET:
                    raise BudgetExhausted(spent)
    return None
