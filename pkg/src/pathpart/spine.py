"""The main construction on a cluster decomposition, plus the route dispatcher.

A long cycle in the reduced graph is coloured so that red edges form a
matching; each red edge becomes a couple, a pair of equal-size clusters.
Every path runs through couples in cycle order, using equally many vertices
from both clusters of each couple it touches ("balancing"). Garbage vertices
are spliced in by short absorbing paths, and the last path sweeps up every
vertex that is left. On an odd cycle one cluster has two blue edges; a few of
its vertices (T0) are kept as stepping stones across that junction.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import networkx as nx

from .builders import bipanconnected_path, hamiltonian_between, ore_long_cycle
from .errors import (BudgetExhausted, ConstructionFailed, InvariantViolation, PathPartitionError,
                     PreconditionNotMet)
from .graphcore import Graph, bfs_path, bits, is_independent, lowest, minimum_vertex_cut, popcount, to_mask
from .instances import PartitionInstance, PathPartition, check_condition, validate_partition
from .outcome import FOUND, SolveOutcome
from .regkit import ClusterDecomposition, Pair, TrimTooDeep, trim_to_super_regular

log = logging.getLogger(__name__)

ROUTE = "spine"
MAX_ABSORB_ORDER = 17


class NotTwoConnected(PreconditionNotMet):
    pass


class DegreeTooLow(PreconditionNotMet):
    pass


class IndependentSetSignal(PathPartitionError):
    """No short absorbing path exists and the blocking clusters span no edge.

    Not a failure: the dispatcher reroutes to the large-independent-set case.
    """

    def __init__(self, vertices: int, v: int):
        self.vertices = vertices
        self.v = v
        super().__init__(f"absorbing {v} is blocked by an independent set of {popcount(vertices)} vertices")


@dataclass(frozen=True)
class AbsorbingPath:
    path: tuple[int, ...]
    absorbed: int
    couple: int

    @property
    def order(self) -> int:
        return len(self.path)


@dataclass
class SpineState:
    g: Graph
    decomp: ClusterDecomposition
    k: int
    cycle: list[int]
    edge_colors: list[str]
    couples: list[tuple[int, int]]
    members: dict[int, int]
    garbage: int
    transport: int = 0
    junction: Optional[int] = None
    used: int = 0
    X: int = 0
    hold: int = 0
    ignored_clusters: set = field(default_factory=set)
    absorb_used: dict = field(default_factory=dict)
    absorbing: list[AbsorbingPath] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    log: list[str] = field(default_factory=list)

    # lookups ------------------------------------------------------------

    @property
    def c(self) -> int:
        return len(self.couples)

    def couple_of(self, v: int) -> Optional[tuple[int, int]]:
        """(couple index, 0 for the first cluster or 1 for the second) or None."""
        for j, pair in enumerate(self.couples):
            for side, cl in enumerate(pair):
                if self.members[cl] >> v & 1:
                    return j, side
        return None

    @property
    def couple_vertices(self) -> int:
        return to_mask(v for pair in self.couples for cl in pair for v in bits(self.members[cl]))

    def avail(self, mask: int) -> int:
        return mask & ~self.used & ~self.X & ~self.hold

    def side_mask(self, j: int, side: int) -> int:
        return self.members[self.couples[j][side]]

    @property
    def floor(self) -> Fraction:
        """Per-cluster budget for absorbing paths before a cluster is ignored."""
        d = self.decomp
        return 16 * (2 * d.delta + 7 * d.eps) * self.g.n / (d.eps * max(1, d.r))

    # mutations ------------------------------------------------------------

    def check_balance(self, label: str) -> None:
        for j, (a, b) in enumerate(self.couples):
            na = popcount(self.members[a] & ~self.used)
            nb = popcount(self.members[b] & ~self.used)
            if na != nb:
                msg = f"after {label}: couple {j} has {na} and {nb} unused vertices"
                self.violations.append(msg)
                raise InvariantViolation(msg)

    def take(self, vertices, label: str) -> None:
        m = to_mask(vertices)
        if m & self.used:
            raise ConstructionFailed("bookkeeping", f"{label} reuses {sorted(bits(m & self.used))}")
        self.used |= m
        self.X &= ~m
        self.hold &= ~m
        self.check_balance(label)

    def to_garbage(self, v: int) -> None:
        for cl in self.members:
            self.members[cl] &= ~(1 << v)
        self.garbage |= 1 << v


# spine --------------------------------------------------------------------


def _equalize(g: Graph, a: int, b: int) -> tuple[int, int, int]:
    """Drop the least-connected vertices of the larger side; returns (a, b, dropped)."""
    dropped = 0
    while popcount(a) != popcount(b):
        big, small = (a, b) if popcount(a) > popcount(b) else (b, a)
        worst = min(bits(big), key=lambda v: ((g.rows[v] & small).bit_count(), -v))
        dropped |= 1 << worst
        if big == a:
            a &= ~(1 << worst)
        else:
            b &= ~(1 << worst)
    return a, b, dropped


def _color(cycle: list[int]) -> list[str]:
    m = len(cycle)
    colors = []
    for i in range(m):
        red = i % 2 == 0 and (m % 2 == 0 or i < m - 1)
        colors.append("red" if red else "blue")
    return colors


def _transport_set(g: Graph, c0: int, minus: int, plus: int, k: int) -> int:
    """At least k vertices of c0 matched into both neighbouring clusters."""
    matched = None
    for other in (minus, plus):
        h = nx.Graph()
        top = [("t", t) for t in bits(c0)]
        h.add_nodes_from(top)
        h.add_edges_from((("t", t), ("o", o)) for t in bits(c0) for o in bits(g.rows[t] & other))
        match = nx.bipartite.hopcroft_karp_matching(h, top_nodes=top)
        ok = {t for t in bits(c0) if ("t", t) in match}
        matched = ok if matched is None else matched & ok
    ranked = sorted(matched, key=lambda t: (-min((g.rows[t] & minus).bit_count(), (g.rows[t] & plus).bit_count()), t))
    if len(ranked) < k:
        raise ConstructionFailed("transport", f"only {len(ranked)} junction vertices see both neighbours, need {k}")
    return to_mask(ranked[:k])


def build_spine(g: Graph, decomp: ClusterDecomposition, k: int) -> SpineState:
    """Long reduced cycle, red/blue colouring, trimmed equal couples and the junction set."""
    R = decomp.reduced
    if R.n < 3 or minimum_vertex_cut(R)[0] < 2:
        raise NotTwoConnected(f"reduced graph on {R.n} clusters is not 2-connected")
    cycle = ore_long_cycle(R)
    m = len(cycle)
    if m % 2:
        # put the junction (two blue edges) on the best-connected cluster
        hub = max(cycle, key=lambda c: (R.degree(c), -c))
        i = cycle.index(hub)
        cycle = cycle[i + 1:] + cycle[:i + 1]
    colors = _color(cycle)
    members = {c: decomp.clusters[c] for c in range(decomp.r)}
    garbage = decomp.garbage | to_mask(v for c in range(decomp.r) if c not in cycle for v in bits(members[c]))
    for c in range(decomp.r):
        if c not in cycle:
            members.pop(c)
    couples = [(cycle[i], cycle[i + 1]) for i in range(m) if colors[i] == "red"]
    for a, b in couples:
        try:
            pair = trim_to_super_regular(g, Pair(members[a], members[b]), decomp.eps, decomp.delta)
        except TrimTooDeep as exc:
            raise ConstructionFailed("super-regular-trim", f"couple ({a}, {b}): {exc}") from exc
        na, nb, dropped = _equalize(g, pair.left, pair.right)
        garbage |= (members[a] & ~na) | (members[b] & ~nb)
        members[a], members[b] = na, nb
    state = SpineState(g, decomp, k, cycle, colors, couples, members, garbage)
    if m % 2:
        c0 = cycle[-1]
        t0 = _transport_set(g, members[c0], members[cycle[-2]], members[cycle[0]], k)
        state.garbage |= members[c0] & ~t0
        state.transport = t0
        state.junction = c0
        members[c0] = t0
    bound = (2 * decomp.delta + 7 * decomp.eps) * g.n
    if popcount(state.garbage) > bound:
        raise InvariantViolation(f"|garbage| = {popcount(state.garbage)} > (2 delta + 7 eps) n = {float(bound):g}")
    state.check_balance("build_spine")
    state.log.append(f"spine: cycle of {m} clusters, {len(couples)} couples, |garbage| = {popcount(state.garbage)}"
                     + (f", |T0| = {popcount(state.transport)}" if m % 2 else ""))
    return state


# absorbing paths ------------------------------------------------------------

GARB = -1


def _cluster_walks(st: SpineState, v: int, couples: list[int], ignored: set, budget: int = 40_000):
    """Cluster-level walks X ... [v] ... Y with X, Y spouses and every couple balanced.

    Yielded shortest first; GARB marks a position taken by another garbage vertex.
    """
    g = st.g
    nodes = [cl for pair in st.couples for cl in pair if cl not in ignored]
    free = {cl: st.avail(st.members[cl]) for cl in nodes}
    garb = st.avail(st.garbage) & ~(1 << v)
    free[GARB] = garb
    reach = {}
    for a in free:
        row = 0
        for x in bits(free[a]):
            row |= g.rows[x]
        reach[a] = row
    adj = {a: [b for b in free if reach[a] & free[b] and not (a == GARB and b == GARB)] for a in free}
    vadj = [a for a in free if g.rows[v] & free[a]]
    index = {cl: (j, s) for j, pair in enumerate(st.couples) for s, cl in enumerate(pair)}
    count = 0

    for length in range(2, MAX_ABSORB_ORDER):
        for j in couples:
            for s in (0, 1):
                start = st.couples[j][s]
                if start in ignored or not free[start]:
                    continue
                goal = st.couples[j][1 - s]
                imb = {}
                walk = [start]

                def bump(node, sign):
                    if node == GARB:
                        return
                    jj, ss = index[node]
                    imb[jj] = imb.get(jj, 0) + (sign if ss == 0 else -sign)

                bump(start, 1)

                def rec(passed: bool, used_garb: int):
                    nonlocal count
                    count += 1
                    if count > budget:
                        raise BudgetExhausted(count)
                    size = len(walk) - (1 if passed else 0)
                    left = length - size
                    off = sum(abs(x) for x in imb.values())
                    if left < off or (left == 0 and not passed):
                        return
                    cur = walk[-1]
                    if left == 0:
                        if passed and cur == goal and off == 0:
                            yield list(walk)
                        return
                    options = list(adj[cur]) if cur != "v" else vadj
                    if not passed and cur in vadj and cur != "v":
                        options = options + ["v"]
                    for nxt in options:
                        if nxt == "v":
                            walk.append("v")
                            yield from rec(True, used_garb)
                            walk.pop()
                            continue
                        if nxt == GARB and used_garb >= 1:
                            continue
                        if cur == "v" and nxt not in vadj:
                            continue
                        walk.append(nxt)
                        bump(nxt, 1)
                        yield from rec(passed, used_garb + (nxt == GARB))
                        bump(nxt, -1)
                        walk.pop()

                yield from rec(False, 0)


def _realize(st: SpineState, v: int, walk: list, budget: int = 3000) -> Optional[list[int]]:
    """Pick actual vertices for a cluster walk, growing both arms out from v."""
    g = st.g
    vi = walk.index("v")
    order = list(range(vi + 1, len(walk))) + list(range(vi - 1, -1, -1))
    prev_of = {p: (p - 1 if p > vi else p + 1) for p in order}
    pool = {}
    for p, node in enumerate(walk):
        if node == "v":
            continue
        pool[p] = st.avail(st.garbage) & ~(1 << v) if node == GARB else st.avail(st.members[node])
    chosen = {vi: v}
    taken = 1 << v
    nodes = 0

    def nxt_pool(p):
        q = p + 1 if p > vi else p - 1
        return pool.get(q, 0)

    def rec(i: int) -> bool:
        nonlocal taken, nodes
        if i == len(order):
            return True
        nodes += 1
        if nodes > budget:
            return False
        p = order[i]
        cand = pool[p] & g.rows[chosen[prev_of[p]]] & ~taken
        after = nxt_pool(p)
        ranked = sorted(bits(cand), key=lambda x: (-(g.rows[x] & after & ~taken).bit_count() if after else 0, x))
        for x in ranked[:6]:
            if after and not (g.rows[x] & after & ~taken & ~(1 << x)):
                continue
            chosen[p] = x
            taken |= 1 << x
            if rec(i + 1):
                return True
            taken &= ~(1 << x)
            del chosen[p]
        return False

    if not rec(0):
        return None
    return [chosen[p] for p in range(len(walk))]


def _independent_signal(st: SpineState, v: int) -> Optional[int]:
    """The vertex set of X_AB' for v when it spans no edge, else None."""
    R = st.decomp.reduced
    spouse = {a: b for a, b in st.couples} | {b: a for a, b in st.couples}
    hits = sorted(spouse, key=lambda cl: (-(st.g.rows[v] & st.avail(st.members[cl])).bit_count(), cl))
    if len(hits) < 2:
        return None
    A2, B2 = spouse[hits[0]], spouse[hits[1]]
    both = lambda cl: R.has_edge(cl, A2) and R.has_edge(cl, B2)
    x_ab = [pair for pair in st.couples if both(pair[0]) or both(pair[1])]
    prime = [cl for pair in x_ab for cl in pair if not both(cl)]
    mask = to_mask(x for cl in prime for x in bits(st.avail(st.members[cl])))
    if mask and popcount(mask) >= (Fraction(1, 2) - 2 * st.decomp.eps) * st.g.n and is_independent(st.g, mask):
        return mask
    return None


def find_absorbing_path(st: SpineState, v: int, couple: Optional[int] = None, avoid_clusters=(),
                        per_cluster_floor=None, tries: int = 300) -> AbsorbingPath:
    """A balanced path of order at most 17 through garbage vertex v, ends in one couple.

    Shortest cluster routes are tried first, so a direct couple route a-v-b
    wins whenever it exists. Raises IndependentSetSignal when the blocking
    clusters are edgeless, DegreeTooLow when v sees too few clusters.
    """
    if not st.garbage >> v & 1 or st.used >> v & 1:
        raise PreconditionNotMet(f"{v} is not an unused garbage vertex")
    floor = st.floor if per_cluster_floor is None else per_cluster_floor
    ignored = set(avoid_clusters) | {cl for cl, n in st.absorb_used.items() if n >= floor}
    if len(set(avoid_clusters)) > st.decomp.eps * st.decomp.r + 2:
        raise PreconditionNotMet(f"asked to avoid {len(set(avoid_clusters))} clusters, more than eps * r")
    seen = [cl for pair in st.couples for cl in pair if st.g.rows[v] & st.members[cl]]
    if len(seen) < st.decomp.r / (8 * st.k):
        raise DegreeTooLow(f"{v} has neighbours in {len(seen)} clusters < r/(8k) = {st.decomp.r / (8 * st.k):g}")
    targets = list(range(st.c)) if couple is None else [couple]
    attempts = 0
    try:
        for walk in _cluster_walks(st, v, targets, ignored):
            attempts += 1
            path = _realize(st, v, walk)
            if path is not None:
                j = st.couple_of(path[0])[0]
                if st.couple_of(path[0])[1] == 1:
                    path = path[::-1]
                ap = AbsorbingPath(tuple(path), v, j)
                _audit_absorbing(st, ap)
                return ap
            if attempts >= tries:
                break
    except BudgetExhausted:
        pass
    signal = _independent_signal(st, v)
    if signal is not None:
        raise IndependentSetSignal(signal, v)
    where = "any couple" if couple is None else f"couple {couple}"
    if ignored:
        raise ConstructionFailed("per-cluster-floor",
                                 f"no absorbing path for {v} in {where}; clusters {sorted(ignored)} are over budget {float(floor):g}")
    raise ConstructionFailed("absorbing-path", f"no balanced path of order <= {MAX_ABSORB_ORDER} through {v} in {where}")


def _audit_absorbing(st: SpineState, ap: AbsorbingPath) -> None:
    """Order, endpoints and per-couple balance of an absorbing path."""
    problems = []
    if ap.order > MAX_ABSORB_ORDER:
        problems.append(f"order {ap.order} > {MAX_ABSORB_ORDER}")
    a, b = st.couple_of(ap.path[0]), st.couple_of(ap.path[-1])
    if a is None or b is None or a[0] != b[0] or a[1] == b[1]:
        problems.append("endpoints are not spouses")
    tally: dict[int, int] = {}
    for x in ap.path:
        where = st.couple_of(x)
        if where:
            tally[where[0]] = tally.get(where[0], 0) + (1 if where[1] == 0 else -1)
    if any(tally.values()):
        problems.append(f"unbalanced couple usage {tally}")
    if not st.g.is_path(ap.path):
        problems.append("not a path")
    if problems:
        msg = f"absorbing path for {ap.absorbed}: " + "; ".join(problems)
        st.violations.append(msg)
        raise InvariantViolation(msg)


# starts ---------------------------------------------------------------------


@dataclass
class StartRoutes:
    stubs: dict[int, list[int]]
    leads: dict[int, int]
    done: set[int]


def route_starts(st: SpineState, inst: PartitionInstance) -> StartRoutes:
    """Shortest entry path x_i ... x_i' into a couple, then one balancing edge x_i' y.

    Paths that are already long enough stop here; a couple left unbalanced
    by a truncated stub loses one vertex of its larger cluster to garbage.
    """
    g = st.g
    st.X = to_mask(inst.starts)
    stubs, leads, done = {}, {}, set()
    for i in inst.sorted_order():
        x, size = inst.starts[i], inst.sizes[i]
        target = st.avail(st.couple_vertices)
        if st.couple_of(x) is not None:
            stub = [x]
        else:
            within = st.avail(st.garbage | st.transport) | target
            stub = bfs_path(g, x, target, within)
            if stub is None:
                raise ConstructionFailed("no-route", f"start {x} cannot reach the spine")
        if size <= len(stub):
            stub = stub[:size]
            last = st.couple_of(stub[-1])
            if last is not None:
                j, s = last
                spare = st.avail(st.side_mask(j, 1 - s))
                if not spare:
                    raise ConstructionFailed("rebalance", f"couple {j} has no spare vertex to discard")
                w = min(bits(spare), key=lambda u: (g.degree(u, st.couple_vertices), u))
                st.to_garbage(w)
                st.log.append(f"path {i}: stub complete, vertex {w} moved to garbage to rebalance couple {j}")
            st.take(stub, f"stub {i}")
            stubs[i] = stub
            done.add(i)
            continue
        j, s = st.couple_of(stub[-1])
        cand = st.avail(st.side_mask(j, 1 - s)) & g.rows[stub[-1]]
        if not cand:
            raise ConstructionFailed("no-route", f"entry vertex {stub[-1]} has no free spouse neighbour")
        y = max(bits(cand), key=lambda u: (g.degree(u, st.avail(st.couple_vertices)), -u))
        st.take(stub + [y], f"stub {i}")
        stubs[i] = stub
        leads[i] = y
    return StartRoutes(stubs, leads, done)


# growing paths through couples ------------------------------------------------


def _direction(st: SpineState, path: list[int]) -> int:
    for v in path:
        where = st.couple_of(v)
        if where is not None:
            return 1 if where[1] == 0 else -1
    raise ConstructionFailed("direction", "path never enters a couple")


def _hops(st: SpineState, f: int, j: int, d: int) -> list[list[int]]:
    """Ways to step from exit vertex f of couple j into the next couple along d."""
    nj = (j + d) % st.c
    entry = st.avail(st.side_mask(nj, 0 if d == 1 else 1))
    crossing = st.junction is not None and ((d == 1 and j == st.c - 1) or (d == -1 and j == 0))
    rows = st.g.rows
    if not crossing:
        return [[e] for e in bits(rows[f] & entry)]
    out = []
    for t in bits(st.avail(st.transport) & rows[f]):
        out.extend([t, e] for e in bits(rows[t] & entry))
    return out


def _weakest_first_run(g: Graph, pools: tuple[int, int], end: int, end_side: int, ext: int,
                       ok: Optional[Callable[[int], bool]], fixed: Optional[int], tries: int = 12) -> Optional[list[int]]:
    """Alternating walk that always steps to the vertex with the fewest free neighbours left.

    Spending weakly attached vertices early keeps the remainder of the couple
    dense for later runs. Ties are broken at random on retries.
    """
    rng = random.Random(end * 7919 + ext)
    for attempt in range(tries):
        taken = 1 << end
        path = [end]
        side = end_side
        for step in range(ext):
            nside = 1 - side
            cand = pools[nside] & g.rows[path[-1]] & ~taken
            last = step == ext - 1
            if last:
                pick = [x for x in bits(cand) if (fixed is None or x == fixed) and (ok is None or ok(x))]
            else:
                if fixed is not None:
                    cand &= ~(1 << fixed)
                    if step == ext - 2:
                        cand &= g.rows[fixed]
                onward = pools[side] & ~taken
                pick = [x for x in bits(cand) if g.rows[x] & onward & ~(1 << x)]
            if not pick:
                break
            key = lambda x: ((g.rows[x] & pools[side] & ~taken).bit_count(), rng.random() if attempt else x)
            x = min(pick, key=key)
            path.append(x)
            taken |= 1 << x
            side = nside
        else:
            return path[1:]
    return None


def _extend(st: SpineState, j: int, end: int, ext: int, ok: Optional[Callable[[int], bool]] = None,
            fixed: Optional[int] = None, extra: int = 0) -> list[int]:
    """``ext`` new vertices of couple j after ``end``, alternating sides.

    The last one is ``fixed`` if given, otherwise any vertex passing ``ok``.
    ``extra`` adds vertices (a held exit) to the pools.
    """
    if ext == 0:
        return []
    g = st.g
    U = st.avail(st.side_mask(j, 0)) | (extra & st.side_mask(j, 0))
    W = st.avail(st.side_mask(j, 1)) | (extra & st.side_mask(j, 1))
    end_side = st.couple_of(end)[1]
    f_side = end_side if ext % 2 == 0 else 1 - end_side
    pool_f = (U, W)[f_side] & ~(1 << end)
    if fixed is not None:
        cands = [fixed]
    else:
        other = (W, U)[f_side]
        cands = sorted((x for x in bits(pool_f) if ok is None or ok(x)),
                       key=lambda x: (-(g.rows[x] & other).bit_count(), x))
        if ext == 1:
            cands = [x for x in cands if g.has_edge(end, x)]
    if ext >= 2:
        run = _weakest_first_run(g, (U & ~(1 << end), W & ~(1 << end)), end, end_side, ext, ok, fixed)
        if run is not None:
            return run
    last: Exception | None = None
    for f in cands[:12]:
        if ext == 1:
            if g.has_edge(end, f):
                return [f]
            continue
        sides = (U | (1 << end if end_side == 0 else 0), W | (1 << end if end_side == 1 else 0))
        try:
            return bipanconnected_path(g, sides[0], sides[1], end, f, ext, check=False)[1:]
        except PathPartitionError as exc:
            last = exc
    raise ConstructionFailed("couple-path", f"no alternating run of {ext} vertices from {end} in couple {j}: {last}")


def _connect(st: SpineState, j: int, end: int, ap: AbsorbingPath) -> list[int]:
    """Connector vertices plus the absorbing path, oriented to continue from ``end``."""
    g = st.g
    end_side = st.couple_of(end)[1]
    free = {s: st.avail(st.side_mask(j, s)) & ~to_mask(ap.path) for s in (0, 1)}
    for path in (list(ap.path), list(ap.path)[::-1]):
        p = path[0]
        p_side = st.couple_of(p)[1]
        if p_side != end_side and g.has_edge(end, p):
            return path
        if p_side == end_side:
            ys = free[1 - end_side] & g.rows[end] & g.rows[p]
            if ys:
                return [lowest(ys)] + path
    for path in (list(ap.path), list(ap.path)[::-1]):
        p = path[0]
        if st.couple_of(p)[1] == end_side:
            continue
        for y in bits(free[1 - end_side] & g.rows[end]):
            us = free[end_side] & g.rows[y] & g.rows[p]
            if us:
                return [y, lowest(us)] + path
    raise ConstructionFailed("absorb-connect", f"cannot link {end} to the absorbing path of {ap.absorbed}")


def _odd_absorb(st: SpineState, j: int, end: int, rem: int):
    """An absorbing path in couple j reached from ``end`` through exactly one connector."""
    g = st.g
    end_side = st.couple_of(end)[1]
    for v in _direct_candidates(st, j) + [x for x in bits(st.avail(st.garbage)) if x not in _direct_candidates(st, j)]:
        try:
            ap = find_absorbing_path(st, v, couple=j, tries=20)
        except (ConstructionFailed, IndependentSetSignal, DegreeTooLow):
            continue
        if ap.order + 1 > rem - 1:
            continue
        ys_pool = st.avail(st.side_mask(j, 1 - end_side)) & ~to_mask(ap.path) & g.rows[end]
        for path in (list(ap.path), list(ap.path)[::-1]):
            if st.couple_of(path[0])[1] != end_side:
                continue
            ys = ys_pool & g.rows[path[0]]
            if ys:
                y = lowest(ys)
                return ap, [y], [y] + path
    return None


def _direct_candidates(st: SpineState, j: int) -> list[int]:
    U, W = st.avail(st.side_mask(j, 0)), st.avail(st.side_mask(j, 1))
    rows = st.g.rows
    return [v for v in bits(st.avail(st.garbage)) if rows[v] & U and rows[v] & W]


def _absorb_here(st: SpineState, j: int, direct_only: bool) -> Optional[AbsorbingPath]:
    cands = _direct_candidates(st, j)
    if not direct_only:
        cands += [v for v in bits(st.avail(st.garbage)) if v not in cands]
    for v in cands[:8]:
        try:
            ap = find_absorbing_path(st, v, couple=j, tries=40)
        except (ConstructionFailed, IndependentSetSignal, DegreeTooLow):
            continue
        return ap
    return None


def _record(st: SpineState, ap: AbsorbingPath) -> None:
    st.absorbing.append(ap)
    for x in ap.path:
        where = st.couple_of(x)
        if where is not None:
            cl = st.couples[where[0]][where[1]]
            st.absorb_used[cl] = st.absorb_used.get(cl, 0) + 1


def _grow(st: SpineState, path: list[int], size: int, quota: int, reserve: int, label: str) -> list[int]:
    """Extend a stub through consecutive couples to exactly ``size`` vertices."""
    g = st.g
    d = _direction(st, path)
    s = 0 if d == 1 else 1
    j = st.couple_of(path[-1])[0]
    pending: list[int] = []
    absorbed = flips = 0
    for _ in range(st.c + 3):
        rem = size - len(path)
        if rem == 0:
            break
        # garbage quota, direct routes only
        while absorbed < quota and rem >= 8:
            ap = _absorb_here(st, j, direct_only=True)
            if ap is None:
                break
            try:
                piece = _connect(st, j, path[-1], ap)
            except ConstructionFailed:
                break
            if len(piece) > rem - 2:
                break
            st.take(ap.path, f"{label} absorbs {ap.absorbed}")
            _record(st, ap)
            conn = [x for x in piece if x not in ap.path]
            pending += conn
            st.hold |= to_mask(conn)
            path += piece
            absorbed += 1
            rem = size - len(path)
        end = path[-1]
        on_exit = st.couple_of(end)[1] == 1 - s
        par = 0 if on_exit else 1

        def capacity(res: int) -> int:
            fs = popcount(st.avail(st.side_mask(j, s))) - res
            fx = popcount(st.avail(st.side_mask(j, 1 - s))) - res
            return 2 * min(fs, fx) if on_exit else min(2 * fx - 1, 2 * fs + 1)

        cap = capacity(reserve)
        hop_len = 2 if st.junction is not None and ((d == 1 and j == st.c - 1) or (d == -1 and j == 0)) else 1
        if rem <= cap + 1 or rem < hop_len + 1 + par:
            if rem > cap + 1:
                cap = capacity(0)
            ext = rem if (rem - par) % 2 == 0 else rem - 1
            tail = ext != rem
            garb = st.avail(st.garbage)
            ok = (lambda f: bool(g.rows[f] & garb)) if tail else None
            try:
                run = _extend(st, j, end, ext, ok=ok) if ext <= cap else None
            except ConstructionFailed:
                run = None
            if run is not None and (not tail or ext > 0 or g.rows[end] & garb):
                last = run[-1] if run else end
                extra = [lowest(g.rows[last] & garb)] if tail else []
                st.take(pending + run + extra, f"{label} final run")
                return path + run + extra
            if tail and rem >= 4 and flips < 2:
                # an absorbing path behind a single connector lands on the other side
                flips += 1
                piece = _odd_absorb(st, j, end, rem)
                if piece is not None:
                    ap, conn, whole = piece
                    st.take(ap.path, f"{label} absorbs {ap.absorbed}")
                    _record(st, ap)
                    pending += conn
                    st.hold |= to_mask(conn)
                    path += whole
                    continue
            if rem <= 2 or rem < hop_len + 1 + par:
                raise ConstructionFailed("parity", f"{label}: {rem} vertices short in couple {j} with no garbage "
                                         f"vertex to fix the parity")
        ext = min(max(cap, par), rem - hop_len - 1)
        if (ext - par) % 2:
            ext -= 1
        if ext < 0:
            raise ConstructionFailed("couple-capacity", f"{label}: couple {j} has no room left (cap {cap})")
        run = None
        while run is None and ext >= par:
            try:
                run = _extend(st, j, end, ext, ok=lambda f: bool(_hops(st, f, j, d)))
            except ConstructionFailed:
                ext -= 2
        if run is None:
            raise ConstructionFailed("couple-path", f"{label}: no alternating run out of couple {j} from {end}")
        last = run[-1] if run else end
        options = _hops(st, last, j, d)
        if not options:
            raise ConstructionFailed("hop", f"{label}: exit {last} of couple {j} has no way into the next couple")
        hop = options[0]
        st.take(pending + run + hop[:-1], f"{label} run in couple {j}")
        path += run + hop
        pending = [hop[-1]]
        st.hold |= 1 << hop[-1]
        j = (j + d) % st.c
    if len(path) != size:
        raise ConstructionFailed("route-length", f"{label} reached {len(path)} of {size} vertices after a full lap")
    return path


def _chain_absorbers(st: SpineState, j: int, path: list[int], aps: list[AbsorbingPath], pending: list[int],
                     label: str) -> None:
    """Splice the absorbing paths of couple j onto the path, stepping ahead when none links."""
    aps = list(aps)
    stalls = 0
    while aps:
        for ap in aps:
            try:
                piece = _connect(st, j, path[-1], ap)
            except ConstructionFailed:
                continue
            conn = [x for x in piece if x not in ap.path]
            pending += conn
            st.hold |= to_mask(conn)
            path += piece
            aps.remove(ap)
            break
        else:
            stalls += 1
            if stalls > 4:
                raise ConstructionFailed("absorb-connect", f"{label}: cannot link {path[-1]} to the absorbing paths "
                                         f"of {[ap.absorbed for ap in aps]}")
            step = _extend(st, j, path[-1], 2)
            pending += step
            st.hold |= to_mask(step)
            path += step


def _prune_couples(st: SpineState, label: str) -> int:
    """Move weakly attached leftovers of each couple to garbage, one spouse pair at a time.

    A leftover vertex seeing under a quarter of the other side (or fewer than
    two vertices of it) would block the final Hamiltonian run; it leaves together with the
    worst vertex of the other side so the couple stays balanced.
    """
    g = st.g
    moved = 0
    for j in range(st.c):
        while True:
            sides = (st.avail(st.side_mask(j, 0)), st.avail(st.side_mask(j, 1)))
            m = min(popcount(sides[0]), popcount(sides[1]))
            if m < 4:
                break
            scored = [((g.rows[v] & sides[1 - s]).bit_count(), v, s) for s in (0, 1) for v in bits(sides[s])]
            deg, v, s = min(scored)
            if deg >= 2 and 4 * deg >= m:
                break
            partner = min(bits(sides[1 - s]), key=lambda u: ((g.rows[u] & sides[s] & ~(1 << v)).bit_count(), u))
            st.to_garbage(v)
            st.to_garbage(partner)
            moved += 2
    if moved:
        st.log.append(f"{label}: {moved} weakly attached couple vertices moved to garbage")
    return moved


def _sweep_last(st: SpineState, path: list[int], label: str) -> list[int]:
    """Route the largest path through every couple and absorb all remaining garbage."""
    g = st.g
    d = _direction(st, path)
    exit_side = 1 if d == 1 else 0
    j0 = st.couple_of(path[-1])[0]
    route = [(j0 + d * t) % st.c for t in range(st.c)]
    keep = 0
    if st.junction is not None:
        cross = st.c - 1 if d == 1 else 0
        if cross != route[-1]:
            near = st.side_mask(cross, exit_side)
            far = st.side_mask((cross + d) % st.c, 1 - exit_side)
            ts = sorted(bits(st.avail(st.transport)),
                        key=lambda t: (-min((g.rows[t] & near).bit_count(), (g.rows[t] & far).bit_count()), t))
            if not ts:
                raise ConstructionFailed("transport", f"{label}: no junction vertex left to cross with")
            keep = 1 << ts[0]
        for t in bits(st.avail(st.transport) & ~keep):
            st.transport &= ~(1 << t)
            st.members[st.junction] &= ~(1 << t)
            st.garbage |= 1 << t
    st.hold |= keep
    # garbage with two free neighbours in some couple rides along in that couple's final run;
    # the rest gets proper absorbing paths first
    by_couple: dict[int, list[AbsorbingPath]] = {j: [] for j in route}
    riders = _assign_riders(st, route)
    for v in sorted(bits(st.avail(st.garbage) & ~st.hold), key=lambda x: (popcount(g.rows[x] & st.couple_vertices), x)):
        if not st.avail(st.garbage) >> v & 1:
            continue
        ap = None
        for j in sorted(route, key=lambda j: (-popcount(st.avail(st.side_mask(j, 0))), j)):
            if popcount(st.avail(st.side_mask(j, 0))) < 3:
                break
            try:
                ap = find_absorbing_path(st, v, couple=j, tries=30)
                break
            except ConstructionFailed:
                continue
        if ap is None:
            ap = find_absorbing_path(st, v)
        st.take(ap.path, f"{label} absorbs {v}")
        _record(st, ap)
        by_couple[ap.couple].append(ap)
    st.hold &= ~keep
    for j in route:
        st.hold &= ~riders[j]
    pending: list[int] = []
    for idx, j in enumerate(route):
        _chain_absorbers(st, j, path, by_couple[j], pending, label)
        extra = riders[j] & ~st.used
        rest = st.avail(st.side_mask(j, 0) | st.side_mask(j, 1)) | extra
        within = rest | (1 << path[-1])
        final = idx == len(route) - 1
        if final:
            ends = sorted(bits(rest), key=lambda f: ((g.rows[f] & rest).bit_count(), f))
        else:
            ends = sorted((f for f in bits(rest & st.side_mask(j, exit_side)) if _hops(st, f, j, d)),
                          key=lambda f: ((g.rows[f] & rest).bit_count(), f))
        run = [] if not rest else None
        for f in ends[:12]:
            for seed in range(3):
                found = hamiltonian_between(g.rows, path[-1], f, within, seed=seed, budget=20_000)
                if found is not None:
                    run = found[1:]
                    break
            if run is not None:
                break
        if run is None:
            raise ConstructionFailed("couple-path", f"{label}: no path from {path[-1]} through the "
                                     f"{popcount(rest)} vertices left in couple {j}" + ("" if final else " to an exit"))
        if final:
            st.take(pending + run, f"{label} sweeps couple {j}")
            path += run
            break
        nxt = (j + d) % st.c
        far = st.avail(st.side_mask(nxt, exit_side))
        last = run[-1] if run else path[-1]
        options = _hops(st, last, j, d) if st.couple_of(last) == (j, exit_side) else []
        if not options:
            raise ConstructionFailed("hop", f"{label}: couple {j} is used up and {last} cannot step onward")
        hop = max(options, key=lambda h: ((g.rows[h[-1]] & far).bit_count(), -h[-1]))
        st.take(pending + run + hop[:-1], f"{label} sweeps couple {j}")
        path += run + hop
        pending = [hop[-1]]
        st.hold |= 1 << hop[-1]
    return path


def _assign_riders(st: SpineState, route: list[int]) -> dict[int, int]:
    """Hand garbage vertices to couples where they have two free neighbours, spreading the load.

    Assigned vertices are held so absorbing paths leave them alone.
    """
    g = st.g
    riders = {j: 0 for j in route}
    rest = {j: st.avail(st.side_mask(j, 0) | st.side_mask(j, 1)) for j in route}
    garb = st.avail(st.garbage)
    for v in sorted(bits(garb), key=lambda x: (sum((g.rows[x] & rest[j]).bit_count() >= 2 for j in route), x)):
        best = None
        for j in route:
            hits = (g.rows[v] & rest[j]).bit_count()
            # keep riders a minority so the run can still weave them in
            if hits >= 2 and 3 * popcount(riders[j]) < popcount(rest[j]):
                score = hits / (1 + popcount(riders[j]))
                if best is None or score > best[0]:
                    best = (score, j)
        if best is not None:
            riders[best[1]] |= 1 << v
            st.hold |= 1 << v
    return riders


# assembly ---------------------------------------------------------------------


def size_guard(st: SpineState) -> Fraction:
    """Upper bound 3|C| + 17(2 delta + 7 eps) n on the vertices the largest path must spend."""
    d = st.decomp
    return 3 * len(st.cycle) + MAX_ABSORB_ORDER * (2 * d.delta + 7 * d.eps) * st.g.n


def _finish(st: SpineState, inst: PartitionInstance, routes: StartRoutes, steps: list[str]) -> PathPartition:
    order = inst.sorted_order()
    last = order[-1]
    garbage0 = popcount(st.avail(st.garbage))
    # the largest path keeps a share of every couple so its sweep has room to turn
    L = max((popcount(st.members[a]) for a, _ in st.couples), default=0)
    share = inst.sizes[last] / (4 * inst.n)
    paths: dict[int, list[int]] = {}
    for i in order[:-1]:
        stub = routes.stubs[i]
        if i in routes.done:
            paths[i] = stub
            steps.append(f"P{i}: complete at the stub, {len(stub)} vertices")
            continue
        body = stub + [routes.leads[i]]
        quota = math.ceil(garbage0 * inst.sizes[i] / inst.n)
        reserve = max(2 + math.ceil(popcount(st.avail(st.garbage)) / max(1, st.c)), math.ceil(share * L))
        paths[i] = _grow(st, body, inst.sizes[i], quota, reserve, f"P{i}")
        steps.append(f"P{i}: {len(paths[i])} vertices")
    if last in routes.done:
        raise ConstructionFailed("route-length", "the largest path finished inside its entry stub")
    paths[last] = _sweep_last(st, routes.stubs[last] + [routes.leads[last]], f"P{last}")
    steps.extend(x for x in st.log if x not in steps)
    steps.append(f"P{last}: {len(paths[last])} vertices, {len(st.absorbing)} absorbing paths in total")
    if len(paths[last]) != inst.sizes[last]:
        raise ConstructionFailed("route-length", f"largest path has {len(paths[last])} vertices, "
                                 f"needs {inst.sizes[last]}")
    return PathPartition(tuple(tuple(paths[i]) for i in range(inst.k)))


def assemble(st: SpineState, inst: PartitionInstance, routes: Optional[StartRoutes] = None,
             strict_guard: bool = False) -> SolveOutcome:
    """Grow every path to its order through the couples, absorbing garbage on the way.

    ``routes`` defaults to a fresh :func:`route_starts`. The size guard is
    logged; with ``strict_guard`` a breach ends the run as Failed.
    """
    steps = list(st.log)
    try:
        if routes is None:
            routes = route_starts(st, inst)
        guard = size_guard(st)
        n_k = max(inst.sizes)
        if guard >= n_k:
            steps.append(f"size guard: 3|C| + 17(2 delta + 7 eps) n = {float(guard):g} >= n_k = {n_k}")
            log.info("spine size guard breached: %s", steps[-1])
            if strict_guard:
                return SolveOutcome.failed("size-guard", f"{float(guard):g} >= n_k = {n_k}", route=ROUTE, steps=steps)
        part = _finish(st, inst, routes, steps)
    except InvariantViolation as exc:
        return SolveOutcome.failed("invariant", str(exc), route=ROUTE, steps=steps)
    except ConstructionFailed as exc:
        return SolveOutcome.failed(exc.step, exc.detail, route=ROUTE, steps=steps)
    problems = validate_partition(inst, part)
    if problems:
        return SolveOutcome.failed("validate", "; ".join(problems), route=ROUTE, steps=steps)
    return SolveOutcome(FOUND, part, route=ROUTE, steps=steps)


def run_spine(inst: PartitionInstance, decomp: ClusterDecomposition,
              strict_guard: bool = False) -> tuple[SolveOutcome, Optional[SpineState]]:
    """Build the spine and assemble; also returns the state for auditing (None if building failed)."""
    try:
        st = build_spine(inst.graph, decomp, inst.k)
    except InvariantViolation as exc:
        return SolveOutcome.failed("invariant", str(exc), route=ROUTE), None
    except ConstructionFailed as exc:
        return SolveOutcome.failed(exc.step, exc.detail, route=ROUTE), None
    return assemble(st, inst, strict_guard=strict_guard), st


def solve_spine(inst: PartitionInstance, decomp: ClusterDecomposition, strict_guard: bool = False) -> SolveOutcome:
    """Run the couple construction on a cluster decomposition of ``inst.graph``.

    Precondition failures (reduced graph not 2-connected, a garbage vertex
    with too few cluster neighbours, an independent-set signal) are raised;
    everything else ends in Found or Failed with the step that broke.
    """
    return run_spine(inst, decomp, strict_guard)[0]


# dispatch ---------------------------------------------------------------------


@dataclass
class DispatchConfig:
    """Knobs for :func:`dispatch_solve`.

    ``indep_eps`` of None uses the independent-set route's own default;
    ``clusters`` is the initial cluster count for the heuristic partition.
    Any Failed outcome on at most ``fallback_threshold`` vertices is retried
    with the exact search.
    """
    eps: Fraction = Fraction(1, 20)
    delta: Fraction = Fraction(1, 10)
    indep_eps: Optional[Fraction] = Fraction(1, 20)
    fallback_threshold: int = 12
    clusters: int = 6
    decomposition: Optional[ClusterDecomposition] = None
    oracle_budget: Optional[int] = 5_000_000
    mis_budget: int = 200_000
    strict_guard: bool = False


def _small_cut(g: Graph, k: int, eps) -> int:
    """A minimum vertex cut of G if it is small (at most max(eps n, 2k + 2)), else 0."""
    limit = max(int(eps * g.n), 2 * k + 2)
    kappa, cut = minimum_vertex_cut(g, limit=limit)
    return cut if kappa <= limit else 0


def _lifted_cuts(g: Graph, decomp: Optional[ClusterDecomposition], k: int, eps) -> list[int]:
    """Vertex cuts worth trying: the reduced graph's cut lifted to G, then a small cut of G itself."""
    cuts = []
    if decomp is not None and decomp.reduced.n >= 2:
        kappa, rcut = minimum_vertex_cut(decomp.reduced)
        if kappa <= eps * decomp.reduced.n:
            cuts.append(decomp.garbage | to_mask(v for c in bits(rcut) for v in bits(decomp.clusters[c])))
    gcut = _small_cut(g, k, eps)
    if gcut and gcut not in cuts:
        cuts.append(gcut)
    return cuts


def _try_connectivity(inst: PartitionInstance, cuts: list[int], steps: list[str]) -> Optional[SolveOutcome]:
    from .xconnect import solve_low_connectivity
    for cut in cuts:
        try:
            out = solve_low_connectivity(inst, cut)
        except (PreconditionNotMet, ConstructionFailed) as exc:
            steps.append(f"connectivity route skipped for cut of {popcount(cut)}: {exc}")
            continue
        return out
    return None


def _independent(inst: PartitionInstance, cfg: DispatchConfig) -> SolveOutcome:
    from .xindep import solve_large_independent
    try:
        return solve_large_independent(inst, eps=cfg.indep_eps)
    except PreconditionNotMet as exc:
        return SolveOutcome.failed("precondition", str(exc), route="independent")


def _constructive(inst: PartitionInstance, cfg: DispatchConfig, steps: list[str]) -> SolveOutcome:
    from .graphcore import maximum_independent_set
    from .regkit import heuristic_partition
    from .xdegree import solve_low_degree
    from .xindep import default_eps

    g = inst.graph
    n_k = max(inst.sizes)
    delta_g = g.min_degree()
    if 8 * delta_g <= n_k:
        steps.append(f"delta = {delta_g} <= n_k/8 = {n_k / 8:g}: low-degree route")
        try:
            return solve_low_degree(inst)
        except PreconditionNotMet as exc:
            return SolveOutcome.failed("precondition", str(exc), route="degree")
    decomp = cfg.decomposition
    if decomp is None:
        try:
            decomp = heuristic_partition(g, cfg.eps, cfg.clusters, cfg.delta)
        except PreconditionNotMet as exc:
            steps.append(f"no cluster decomposition: {exc}")
            decomp = None
    out = _try_connectivity(inst, _lifted_cuts(g, decomp, inst.k, cfg.eps), steps)
    if out is not None:
        return out
    indep_eps = default_eps(inst.k) if cfg.indep_eps is None else Fraction(cfg.indep_eps)
    try:
        A = maximum_independent_set(g, budget=cfg.mis_budget)
        alpha = popcount(A)
        steps.append(f"alpha = {alpha}")
        if alpha >= (Fraction(1, 2) - indep_eps) * g.n:
            steps.append(f"alpha >= (1/2 - {indep_eps}) n: independent-set route")
            return _independent(inst, cfg)
    except BudgetExhausted:
        steps.append(f"alpha not settled within {cfg.mis_budget} search nodes")
    if decomp is None:
        return SolveOutcome.failed("decomposition", steps[-1] if steps else "", route=ROUTE)
    try:
        return solve_spine(inst, decomp, strict_guard=cfg.strict_guard)
    except IndependentSetSignal as exc:
        steps.append(f"independent-set signal from {exc.v}: independent-set route")
        return _independent(inst, cfg)
    except PreconditionNotMet as exc:
        return SolveOutcome.failed("precondition", str(exc), route=ROUTE)


def dispatch_solve(inst: PartitionInstance, config: Optional[DispatchConfig] = None) -> SolveOutcome:
    """Pick the construction that fits the instance, falling back to exact search on small n.

    The returned outcome always names its route; Found is only returned for
    a partition that passes validation.
    """
    from .oracle import solve_exact

    cfg = config or DispatchConfig()
    steps: list[str] = []
    cond = check_condition(inst)
    if not cond.holds:
        steps.append(f"sigma2 = {cond.sigma2} < n + k - 1 = {cond.threshold}")
        out = SolveOutcome.failed("precondition", steps[-1], route=None)
    else:
        out = _constructive(inst, cfg, steps)
    if not out.found and inst.n <= cfg.fallback_threshold:
        steps.append(f"{out.route or 'no'} route ended {out.tag} at {out.step}; exact search fallback")
        exact = solve_exact(inst, budget=cfg.oracle_budget)
        exact.route = "oracle"
        exact.steps = steps + out.steps + exact.steps
        out = exact
    else:
        out.steps = steps + out.steps
    if out.found:
        problems = validate_partition(inst, out.partition)
        if problems:
            return SolveOutcome.failed("validate", "; ".join(problems), route=out.route, steps=out.steps)
    if out.route is None:
        out.route = "oracle" if inst.n <= cfg.fallback_threshold else ROUTE
    return out
