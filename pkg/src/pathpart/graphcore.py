"""Immutable bitset graphs and the primitives every other module queries.

Vertex sets are plain Python ints used as bitsets: bit ``v`` is set when
vertex ``v`` is a member. ``Graph.rows[v]`` is the neighbourhood of ``v``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExhausted, Graph6Error, NoDisjointFamily

INF = math.inf


def bits(mask: int) -> Iterator[int]:
    """Yield the members of a bitset in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return mask.bit_count()


def to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError("row count does not match n")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.rows):
            if row >> v & 1:
                raise ValueError(f"self-loop at {v}")
            if row & ~full:
                raise ValueError(f"row {v} names vertices outside [0, n)")
            for u in bits(row):
                if not self.rows[u] >> v & 1:
                    raise ValueError(f"asymmetric adjacency {v}-{u}")

    # construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << v) for v in range(n)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, (0,) * n)

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        return cls.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))

    @classmethod
    def complete_bipartite(cls, a: int, b: int) -> "Graph":
        return cls.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)))

    @classmethod
    def petersen(cls) -> "Graph":
        outer = [(i, (i + 1) % 5) for i in range(5)]
        spokes = [(i, i + 5) for i in range(5)]
        inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
        return cls.from_edges(10, outer + spokes + inner)

    # queries ----------------------------------------------------------

    @property
    def vertices(self) -> int:
        return (1 << self.n) - 1

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def neighbors(self, v: int) -> int:
        return self.rows[v]

    def degree(self, v: int, within: int | None = None) -> int:
        if within is None:
            return self.rows[v].bit_count()
        return (self.rows[v] & within).bit_count()

    def degrees(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def min_degree(self, within: int | None = None) -> int:
        mask = self.vertices if within is None else within
        return min((self.degree(v, mask) for v in bits(mask)), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bits(self.rows[u] >> (u + 1) << (u + 1))]

    def edge_count(self) -> int:
        return sum(self.degrees()) // 2

    def is_complete(self) -> bool:
        return all(r.bit_count() == self.n - 1 for r in self.rows)

    def complement(self) -> "Graph":
        full = self.vertices
        return Graph(self.n, tuple(full ^ r ^ (1 << v) for v, r in enumerate(self.rows)))

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = list(self.rows)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return Graph(self.n, tuple(rows))

    def without_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = list(self.rows)
        for u, v in edges:
            rows[u] &= ~(1 << v)
            rows[v] &= ~(1 << u)
        return Graph(self.n, tuple(rows))

    def induced(self, mask: int) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..|mask|-1`` plus the old labels."""
        labels = list(bits(mask))
        index = {v: i for i, v in enumerate(labels)}
        edges = [(index[u], index[v]) for u in labels for v in bits(self.rows[u] & mask) if u < v]
        return Graph.from_edges(len(labels), edges), labels

    def is_path(self, seq: Sequence[int]) -> bool:
        if len(set(seq)) != len(seq):
            return False
        return all(self.has_edge(a, b) for a, b in zip(seq, seq[1:]))

    def is_cycle(self, seq: Sequence[int]) -> bool:
        return len(seq) >= 3 and self.is_path(seq) and self.has_edge(seq[-1], seq[0])

    # graph6 -------------------------------------------------------------

    def to_graph6(self) -> str:
        return encode_graph6(self)

    @classmethod
    def from_graph6(cls, text: str) -> "Graph":
        return decode_graph6(text)


# graph6 -------------------------------------------------------------------


def _encode_n(n: int) -> list[int]:
    if n < 63:
        return [n]
    if n <= 258047:
        return [63, n >> 12 & 63, n >> 6 & 63, n & 63]
    return [63, 63] + [n >> s & 63 for s in (30, 24, 18, 12, 6, 0)]


def encode_graph6(g: Graph) -> str:
    out = _encode_n(g.n)
    acc = width = 0
    for j in range(1, g.n):
        for i in range(j):
            acc = acc << 1 | (g.rows[i] >> j & 1)
            width += 1
            if width == 6:
                out.append(acc)
                acc = width = 0
    if width:
        out.append(acc << (6 - width))
    return "".join(chr(c + 63) for c in out)


def decode_graph6(text: str) -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise Graph6Error("empty graph6 string")
    data = [ord(c) - 63 for c in s]
    if any(d < 0 or d > 63 for d in data):
        raise Graph6Error(f"character outside graph6 range in {text!r}")
    if data[0] < 63:
        n, pos = data[0], 1
    elif len(data) >= 2 and data[1] == 63:
        if len(data) < 8:
            raise Graph6Error("truncated size field")
        n, pos = 0, 8
        for d in data[2:8]:
            n = n << 6 | d
    else:
        if len(data) < 4:
            raise Graph6Error("truncated size field")
        n = data[1] << 12 | data[2] << 6 | data[3]
        pos = 4
    nbits = n * (n - 1) // 2
    need = (nbits + 5) // 6
    body = data[pos:]
    if len(body) != need:
        raise Graph6Error(f"expected {need} data bytes for n={n}, got {len(body)}")
    rows = [0] * n
    k = 0
    for j in range(1, n):
        for i in range(j):
            if body[k // 6] >> (5 - k % 6) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            k += 1
    if nbits % 6 and body[-1] & ((1 << (6 - nbits % 6)) - 1):
        raise Graph6Error("nonzero padding bits")
    return Graph(n, tuple(rows))


# degree conditions --------------------------------------------------------


def sigma2(g: Graph) -> int | float:
    """Minimum degree sum over nonadjacent pairs; ``inf`` for complete graphs."""
    deg = g.degrees()
    best = INF
    for u in range(g.n):
        non = g.vertices ^ g.rows[u] ^ (1 << u)
        non >>= u + 1
        v = u + 1
        while non:
            if non & 1:
                best = min(best, deg[u] + deg[v])
            non >>= 1
            v += 1
    return best


def sigma2_pair(g: Graph) -> tuple[int, int] | None:
    """A nonadjacent pair achieving ``sigma2``, or ``None``."""
    deg = g.degrees()
    best = None
    for u, v in combinations(range(g.n), 2):
        if not g.has_edge(u, v) and (best is None or deg[u] + deg[v] < deg[best[0]] + deg[best[1]]):
            best = (u, v)
    return best


def _refine(g: Graph, colors: list[int]) -> list[int]:
    """Colour refinement; colour ids depend only on isomorphism-invariant signatures."""
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in bits(g.rows[v])))) for v in range(g.n)]
        ranking = {sig: i for i, sig in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if len(ranking) == len(set(colors)):
            return new
        colors = new


def canonical_form(g: Graph) -> tuple[int, ...]:
    """Isomorphism certificate by individualisation and refinement.

    No automorphism pruning, so meant for small graphs only.
    """
    best = None

    def search(colors: list[int]):
        nonlocal best
        colors = _refine(g, colors)
        if len(set(colors)) == g.n:
            order = sorted(range(g.n), key=colors.__getitem__)
            pos = {v: i for i, v in enumerate(order)}
            cert = tuple(sum(1 << pos[u] for u in bits(g.rows[v])) for v in order)
            if best is None or cert < best:
                best = cert
            return
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min(c for c, m in counts.items() if m > 1)
        for v in range(g.n):
            if colors[v] == target:
                split = [2 * c + (1 if c > target or (c == target and u != v) else 0) for u, c in enumerate(colors)]
                search(split)

    search([0] * g.n)
    return best if best is not None else ()


# independence -------------------------------------------------------------


def _color_bound(rows: Sequence[int], cand: int) -> list[tuple[int, int]]:
    """Greedy colouring of ``cand`` in the clique graph ``rows``.

    Returns ``(vertex, colour_number)`` in increasing colour order; any
    clique inside the vertices up to position ``i`` has at most
    ``colour_number`` members.
    """
    order = []
    color = 0
    rest = cand
    while rest:
        color += 1
        avail = rest
        while avail:
            v = lowest(avail)
            avail &= ~rows[v] & ~(1 << v)
            rest &= ~(1 << v)
            order.append((v, color))
    return order


def maximum_independent_set(g: Graph, budget: int | None = None, within: int | None = None) -> int:
    """A maximum independent set of ``g[within]`` as a bitset.

    Branch and bound for a maximum clique of the complement, pruned with
    greedy-colouring upper bounds. Raises ``BudgetExhausted`` when more than
    ``budget`` search nodes are needed.
    """
    full = g.vertices if within is None else within
    comp = [(full ^ r) & ~(1 << v) for v, r in enumerate(g.rows)]
    best = 0
    best_size = 0
    nodes = 0

    def expand(clique: int, size: int, cand: int):
        nonlocal best, best_size, nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExhausted(nodes)
        order = _color_bound(comp, cand)
        for v, color in reversed(order):
            if size + color <= best_size:
                return
            new = clique | 1 << v
            nxt = cand & comp[v]
            if nxt:
                expand(new, size + 1, nxt)
            elif size + 1 > best_size:
                best, best_size = new, size + 1
            cand &= ~(1 << v)

    if full:
        expand(0, 0, full)
    return best


def independence_number(g: Graph, budget: int | None = None) -> int:
    return popcount(maximum_independent_set(g, budget))


def is_independent(g: Graph, mask: int) -> bool:
    return all(not (g.rows[v] & mask) for v in bits(mask))


# connectivity -------------------------------------------------------------


def components(g: Graph, within: int | None = None) -> list[int]:
    """Connected components of ``g[within]`` as bitsets, ordered by lowest vertex."""
    rest = g.vertices if within is None else within
    out = []
    while rest:
        comp = frontier = rest & -rest
        while frontier:
            grow = 0
            for v in bits(frontier):
                grow |= g.rows[v]
            frontier = grow & rest & ~comp
            comp |= frontier
        out.append(comp)
        rest &= ~comp
    return out


def is_connected(g: Graph, within: int | None = None) -> bool:
    return len(components(g, within)) <= 1


def bfs_path(g: Graph, source: int, targets: int, within: int) -> list[int] | None:
    """Shortest path from ``source`` to any vertex of ``targets`` inside ``within``.

    ``source`` need not lie in ``within``; ties go to the lowest vertex id.
    """
    if targets >> source & 1:
        return [source]
    parent = {source: -1}
    seen = within & ~(1 << source)
    layer = [source]
    while layer:
        nxt = []
        for u in layer:
            reach = g.rows[u] & seen
            for v in bits(reach):
                parent[v] = u
                if targets >> v & 1:
                    path = [v]
                    while parent[path[-1]] != -1:
                        path.append(parent[path[-1]])
                    return path[::-1]
                nxt.append(v)
            seen &= ~reach
        layer = nxt
    return None


class _VertexFlow:
    """Unit vertex-capacity max flow by shortest augmenting paths.

    Vertex ``v`` is split into ``2v`` (in) and ``2v+1`` (out); the super
    source is ``2n`` and the super sink ``2n+1``.
    """

    def __init__(self, g: Graph, allowed: int, sources: Sequence[int], sinks: int, through_sources: bool):
        self.g = g
        self.n = g.n
        self.S = 2 * g.n
        self.T = 2 * g.n + 1
        self.cap: dict[tuple[int, int], int] = {}
        self.adj: dict[int, set[int]] = {}
        src_mask = to_mask(sources)
        for v in bits(allowed | src_mask):
            self._arc(2 * v, 2 * v + 1)
            for u in bits(g.rows[v] & allowed):
                if not through_sources and src_mask >> u & 1:
                    continue
                self._arc(2 * v + 1, 2 * u, self.n)
        for s in sources:
            self._arc(self.S, 2 * s)
        for t in bits(sinks):
            self._arc(2 * t + 1, self.T)

    def _arc(self, a: int, b: int, c: int = 1):
        self.cap[(a, b)] = self.cap.get((a, b), 0) + c
        self.cap.setdefault((b, a), 0)
        self.adj.setdefault(a, set()).add(b)
        self.adj.setdefault(b, set()).add(a)

    def augment(self) -> bool:
        parent = {self.S: None}
        queue = deque([self.S])
        while queue:
            a = queue.popleft()
            for b in sorted(self.adj.get(a, ())):
                if b not in parent and self.cap[(a, b)] > 0:
                    parent[b] = a
                    if b == self.T:
                        while parent[b] is not None:
                            p = parent[b]
                            self.cap[(p, b)] -= 1
                            self.cap[(b, p)] += 1
                            b = p
                        return True
                    queue.append(b)
        return False

    def run(self, limit: int | None = None) -> int:
        flow = 0
        while (limit is None or flow < limit) and self.augment():
            flow += 1
        return flow

    def reachable(self) -> set[int]:
        seen = {self.S}
        queue = deque([self.S])
        while queue:
            a = queue.popleft()
            for b in self.adj.get(a, ()):
                if b not in seen and self.cap[(a, b)] > 0:
                    seen.add(b)
                    queue.append(b)
        return seen

    def min_cut(self) -> int:
        """Vertices whose in-node is reachable in the residual graph but out-node is not."""
        seen = self.reachable()
        return to_mask(v for v in range(self.n) if 2 * v in seen and 2 * v + 1 not in seen)

    def paths(self, sources: Sequence[int]) -> list[list[int]]:
        out = []
        for s in sources:
            path = [s]
            node = 2 * s + 1
            while True:
                nxt = next((b for b in sorted(self.adj[node]) if b != self.T and b % 2 == 0
                            and self.cap.get((b, node), 0) > 0), None)
                if nxt is None:
                    break
                path.append(nxt // 2)
                node = nxt + 1
            out.append(path)
        return out


def local_connectivity(g: Graph, s: int, t: int, limit: int | None = None) -> tuple[int, int]:
    """Max number of internally disjoint s-t paths and a minimum separating set.

    ``s`` and ``t`` must be nonadjacent.
    """
    allowed = g.vertices & ~(1 << s) & ~(1 << t)
    flow = _VertexFlow(g, allowed | 1 << t, [s], 1 << t, through_sources=False)
    # s itself has capacity one in the split graph; give it unbounded supply
    flow.cap[(flow.S, 2 * s)] = g.n
    flow.cap[(2 * s, 2 * s + 1)] = g.n
    flow.cap[(2 * t, 2 * t + 1)] = g.n
    flow.cap[(2 * t + 1, flow.T)] = g.n
    value = flow.run(limit)
    cut = flow.min_cut() & ~(1 << s) & ~(1 << t)
    return value, cut


def minimum_vertex_cut(g: Graph, limit: int | None = None) -> tuple[int, int]:
    """``(kappa, cut)``: vertex connectivity and a minimum separating set.

    Complete graphs give ``(n - 1, 0)``. Uses the classical scheme that only
    sources among the first ``kappa + 1`` vertices need to be tried. With
    ``limit``, only cuts of at most that size are looked for; a graph that has
    none gives ``(limit + 1, 0)``.
    """
    if g.is_complete():
        return max(g.n - 1, 0), 0
    best = min(g.degrees())
    v0 = g.degrees().index(best)
    best_cut = g.rows[v0]
    if limit is not None and best > limit:
        best, best_cut = limit + 1, 0
    i = 0
    while i <= best and i < g.n:
        for j in range(i + 1, g.n):
            # common neighbours already give that many disjoint paths
            if g.has_edge(i, j) or (g.rows[i] & g.rows[j]).bit_count() >= best:
                continue
            value, cut = local_connectivity(g, i, j, limit=best)
            if value < best:
                best, best_cut = value, cut
        i += 1
    return best, best_cut


def vertex_connectivity(g: Graph) -> int:
    return minimum_vertex_cut(g)[0]


def menger_disjoint_paths(g: Graph, sources: int, sink_region: int, forbidden: int = 0) -> list[list[int]]:
    """One path per source into ``sink_region``, pairwise vertex-disjoint.

    Paths avoid ``forbidden``, never pass through another source and stop at
    their first vertex of ``sink_region``. Returned in ascending source order.
    Raises ``NoDisjointFamily`` carrying a blocking vertex set otherwise.
    """
    if sources & sink_region or sources & forbidden or sink_region & forbidden:
        raise ValueError("sources, sink_region and forbidden must be pairwise disjoint")
    src = list(bits(sources))
    allowed = g.vertices & ~forbidden & ~sources
    flow = _VertexFlow(g, allowed, src, sink_region, through_sources=False)
    value = flow.run()
    if value < len(src):
        raise NoDisjointFamily(flow.min_cut(), value, len(src))
    paths = []
    for p in flow.paths(src):
        for idx, v in enumerate(p):
            if sink_region >> v & 1:
                p = p[: idx + 1]
                break
        paths.append(p)
    return paths
