"""Seeded instance families that exercise each extremal construction."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .graphcore import Graph, sigma2
from .instances import PartitionInstance
from .regkit import ClusterDecomposition, build_decomposition


def _relabel(g: Graph, rng: random.Random) -> tuple[Graph, list[int]]:
    perm = list(range(g.n))
    rng.shuffle(perm)
    return Graph.from_edges(g.n, [(perm[u], perm[v]) for u, v in g.edges()]), perm


def _random_sizes(rng: random.Random, n: int, k: int, largest_min: int) -> tuple[int, ...]:
    """k positive sizes summing to n whose maximum is at least ``largest_min``."""
    spare = n - largest_min
    if spare < k - 1:
        raise ValueError("n too small for the requested largest size")
    cuts = sorted(rng.randint(0, spare - (k - 1)) for _ in range(k - 1))
    small = [1 + b - a for a, b in zip([0] + cuts, cuts)]
    sizes = small + [n - sum(small)]
    rng.shuffle(sizes)
    return tuple(sizes)


def _check(inst: PartitionInstance) -> PartitionInstance:
    assert sigma2(inst.graph) >= inst.n + inst.k - 1, "family generator produced a graph below the threshold"
    return inst


def pendant_clique(n: int, k: int, seed: int) -> PartitionInstance:
    """A clique B hanging off a small clique around one low-degree vertex.

    The low vertex ``a`` sees only a clique S of delta vertices; most of S
    sees all of B, a few "weak" members of S see only k + 1 or so vertices of
    B, and a handful of B edges are deleted where the degree sum allows.
    """
    rng = random.Random(seed)
    top = min((n - k + 1) // 8, max(n // 10, k + 2))
    if top < k + 2:
        raise ValueError(f"n = {n} is too small for k = {k}")
    delta = rng.randint(k + 2, top)
    a = 0
    S = list(range(1, delta + 1))
    B = list(range(delta + 1, n))
    weak = S[: rng.randint(1, min(2, delta - k - 1))]
    edges = [(a, s) for s in S]
    edges += [(s, t) for i, s in enumerate(S) for t in S[i + 1:]]
    edges += [(b, c) for i, b in enumerate(B) for c in B[i + 1:]]
    slack = {b: delta - k - 1 for b in B}
    for s in S:
        if s in weak:
            chosen = rng.sample(B, min(len(B), k + 1 + rng.randint(0, 3)))
            edges += [(s, b) for b in chosen]
            for b in B:
                if b not in chosen:
                    slack[b] -= 1
        else:
            edges += [(s, b) for b in B]
    drop = set()
    for _ in range(rng.randint(0, n)):
        b, c = rng.sample(B, 2)
        if slack[b] > 0 and slack[c] > 0 and (min(b, c), max(b, c)) not in drop:
            drop.add((min(b, c), max(b, c)))
            slack[b] -= 1
            slack[c] -= 1
    g = Graph.from_edges(n, [e for e in edges if (min(e), max(e)) not in drop])
    g, _ = _relabel(g, rng)
    sizes = _random_sizes(rng, n, k, max(8 * delta, rng.randint(n // 3, n // 2)))
    starts = tuple(rng.sample(range(n), k))
    return _check(PartitionInstance(g, k, starts, sizes))


def split_graph(n: int, k: int, seed: int, low_a: int = 0, eps: float = 0.05) -> PartitionInstance:
    """A clique B joined to an independent set A of order about n/2.

    Each A-vertex misses a few B-vertices as long as the degree sum allows;
    ``low_a`` B-vertices are made to see few of A.
    """
    rng = random.Random(seed)
    for _ in range(200):
        top = (n - k + 1) // 2
        a = rng.randint(max(top - 2, min(top, math.ceil((0.5 - eps) * n))), top)
        A = list(range(a))
        B = list(range(a, n))
        need = -(-(n + k - 1) // 2)
        edges = [(u, v) for i, u in enumerate(B) for v in B[i + 1:]]
        low = set(rng.sample(B, low_a)) if low_a else set()
        for x in A:
            room = max(0, len(B) - need)
            miss = {b for b in low if rng.random() < 0.7}
            miss = set(sorted(miss)[:room])
            others = [b for b in B if b not in low]
            miss |= set(rng.sample(others, rng.randint(0, room - len(miss))))
            edges += [(x, b) for b in B if b not in miss]
        g = Graph.from_edges(n, edges)
        if sigma2(g) >= n + k - 1:
            break
    else:
        raise ValueError("could not meet the degree-sum threshold")
    g, _ = _relabel(g, rng)
    sizes = _random_sizes(rng, n, k, rng.randint(n // 3, n // 2))
    starts = tuple(rng.sample(range(n), k))
    return _check(PartitionInstance(g, k, starts, sizes))


def two_cliques_cut(n: int, k: int, seed: int, extra_cut: int | None = None) -> tuple[PartitionInstance, int]:
    """Two cliques joined only through a small cut; returns the instance and the cut.

    Each cut vertex sees all of its home clique and most of the other one.
    """
    rng = random.Random(seed)
    for _ in range(200):
        c = k + 1 + (rng.randint(0, 2) if extra_cut is None else extra_cut)
        rest = n - c
        a = rng.randint(math.ceil(0.35 * rest), rest // 2)
        A = list(range(a))
        B = list(range(a, rest))
        C = list(range(rest, n))
        edges = [(u, v) for side in (A, B, C) for i, u in enumerate(side) for v in side[i + 1:]]
        budget = {v: (c - k - 1) // 2 for v in A + B}
        for j, x in enumerate(C):
            home, away = (A, B) if j % 2 == 0 else (B, A)
            edges += [(x, v) for v in home]
            open_ = [v for v in away if budget[v] > 0]
            miss = set(rng.sample(open_, min(len(open_), rng.randint(0, len(away) // 3))))
            for v in miss:
                budget[v] -= 1
            edges += [(x, v) for v in away if v not in miss]
        g = Graph.from_edges(n, edges)
        if sigma2(g) >= n + k - 1:
            break
    else:
        raise ValueError("could not meet the degree-sum threshold")
    g, perm = _relabel(g, rng)
    sizes = _random_sizes(rng, n, k, rng.randint(n // 3, n // 2))
    starts = tuple(rng.sample(range(n), k))
    return _check(PartitionInstance(g, k, starts, sizes)), sum(1 << perm[x] for x in C)


def cycle_blowup(n: int, k: int, seed: int, length: int = 6, density: float = 0.6, hub: bool | None = None,
                 eps=Fraction(1, 20), delta=Fraction(1, 10)) -> tuple[PartitionInstance, ClusterDecomposition]:
    """Random blow-up of a cycle of clusters plus a few loosely attached extra vertices.

    Consecutive clusters are joined with the given edge density. Odd cycles get
    a hub cluster joined to every other cluster (``hub`` forces this either
    way). Between k and 2k extra vertices see about 40% of every cluster and
    form the garbage set of the returned decomposition. The degree-sum
    threshold is not enforced.
    """
    rng = random.Random(seed)
    if hub is None:
        hub = length % 2 == 1
    extra = rng.randint(k, 2 * k)
    L = (n - extra) // length
    extra = n - L * length
    clusters = [list(range(i * L, (i + 1) * L)) for i in range(length)]
    spare = list(range(L * length, n))
    edges = []
    pairs = [(i, (i + 1) % length) for i in range(length)]
    if hub:
        pairs += [(0, j) for j in range(2, length - 1)]
    for a, b in pairs:
        edges += [(u, v) for u in clusters[a] for v in clusters[b] if rng.random() < density]
    for x in spare:
        for cl in clusters:
            edges += [(x, v) for v in cl if rng.random() < 0.4]
    g = Graph.from_edges(n, edges)
    g, perm = _relabel(g, rng)
    masks = [sum(1 << perm[v] for v in cl) for cl in clusters]
    garbage = sum(1 << perm[v] for v in spare)
    decomp = build_decomposition(g, masks, garbage, eps, delta)
    sizes = _random_sizes(rng, n, k, rng.randint(n // 2, 2 * n // 3))
    starts = tuple(rng.sample(range(n), k))
    return PartitionInstance(g, k, starts, sizes), decomp
