"""Path partitions when some vertex has very small degree.

The vertex set splits around a minimum-degree vertex ``a`` into B (the
non-neighbours of a), A (the low-B-degree part of a and N(a), a clique) and C
(the rest of N(a)). A is covered by short disjoint paths into B, C is strung
into one path through B, and everything else is routed inside B, whose
subsets of order at least 3 n_k / 8 are panconnected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .builders import check_williamson, panconnected_path
from .errors import ConstructionFailed, InvariantViolation, NoDisjointFamily, PathPartitionError, PreconditionNotMet
from .graphcore import Graph, bits, lowest, menger_disjoint_paths, popcount, sigma2, to_mask
from .instances import PartitionInstance, PathPartition, check_condition, validate_partition
from .outcome import FOUND, SolveOutcome

log = logging.getLogger(__name__)

ROUTE = "degree"


@dataclass(frozen=True)
class DegreeSplit:
    a: int
    A: int
    B: int
    C: int
    delta: int
    proxies: dict = field(default_factory=dict)

    def membership(self, v: int) -> str:
        return "A" if self.A >> v & 1 else "B" if self.B >> v & 1 else "C"


def split_low_degree(g: Graph, k: int) -> DegreeSplit:
    """Split around the lowest-id minimum-degree vertex and verify the split invariants."""
    degs = g.degrees()
    delta = min(degs)
    a = degs.index(delta)
    closed = g.rows[a] | (1 << a)
    B = g.vertices & ~closed
    # 8 |N(v) & B| < n + k - delta - 1 puts v in A
    bound = g.n + k - delta - 1
    A = to_mask(v for v in bits(closed) if 8 * (g.rows[v] & B).bit_count() < bound)
    C = closed & ~A
    split = DegreeSplit(a, A, B, C, delta)
    for u in bits(A):
        missing = A & ~g.rows[u] & ~(1 << u)
        if missing:
            raise InvariantViolation(f"A is not a clique: {u} and {lowest(missing)} are nonadjacent")
    if popcount(B) != g.n - 1 - delta:
        raise InvariantViolation(f"|B| = {popcount(B)} != n - 1 - delta = {g.n - 1 - delta}")
    if B and sigma2(g) >= g.n + k - 1:
        dB = g.min_degree(B)
        if dB < g.n + k - 1 - 2 * delta:
            raise InvariantViolation(f"delta(G[B]) = {dB} < n + k - 1 - 2 delta = {g.n + k - 1 - 2 * delta}")
    return split


def panconnected_subset_path(split: DegreeSplit, g: Graph, bsub: int, u: int, v: int, length: int,
                             n_k: int | None = None) -> list[int]:
    """A u-v path of ``length`` edges inside G[bsub] for a large subset of B."""
    if bsub & ~split.B:
        raise PreconditionNotMet("subset is not contained in B")
    if n_k is not None and 8 * popcount(bsub) < 3 * n_k:
        raise PreconditionNotMet(f"|Bsub| = {popcount(bsub)} < 3 n_k / 8 = {3 * n_k / 8:g}")
    check_williamson(g, bsub)
    return panconnected_path(g, u, v, length, within=bsub, check=False)


class RemainingB:
    """Unreserved vertices of B, with an owner registry for every reservation."""

    def __init__(self, free: int):
        self.free = free
        self.owner: dict[int, str] = {}
        self.history: list[tuple[str, int]] = []

    @property
    def count(self) -> int:
        return popcount(self.free)

    def reserve(self, v: int, who: str) -> None:
        if not self.free >> v & 1:
            raise ConstructionFailed("reserve", f"vertex {v} is not remaining (owner {self.owner.get(v)})")
        self.free &= ~(1 << v)
        self.owner[v] = who
        self.history.append((who, self.count))

    def reserve_all(self, vs, who: str) -> None:
        for v in vs:
            self.reserve(v, who)

    def release(self, v: int) -> None:
        self.owner.pop(v, None)
        self.free |= 1 << v

    def require(self, bound: float, step: str) -> None:
        if not self.count >= bound:
            raise ConstructionFailed("remaining-B-count", f"{step}: {self.count} remaining < {bound:g}")


def _shortcut(g: Graph, path: list[int]) -> list[int]:
    """Splice out detours: jump to the farthest later vertex adjacent to the current one."""
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        j = max(j for j in range(i + 1, len(path)) if g.has_edge(path[i], path[j]))
        out.append(path[j])
        i = j
    return out


def _best_neighbors(g: Graph, v: int, pool: int, B: int, count: int) -> list[int]:
    cands = sorted(bits(g.rows[v] & pool), key=lambda b: (-(g.rows[b] & B).bit_count(), b))
    return cands[:count]


def _path_from(g: Graph, split: DegreeSplit, start: int, count: int, pool: int, n_k: int) -> list[int]:
    """A path of ``count`` vertices from ``start`` inside pool (which contains start)."""
    if count == 1:
        return [start]
    if count == 2:
        nb = g.rows[start] & pool
        if not nb:
            raise ConstructionFailed("b-path", f"{start} has no remaining neighbour")
        return [start, lowest(nb)]
    end = lowest(pool & ~(1 << start))
    return panconnected_subset_path(split, g, pool, start, end, count - 1, n_k)


def _cover(g: Graph, split: DegreeSplit, s: int, t: int | None, pool: int, n_k: int) -> list[int]:
    """A path from s through every vertex of pool, ending at t when given."""
    m = popcount(pool)
    if m == 1:
        return [s]
    if m == 2:
        other = lowest(pool & ~(1 << s))
        if not g.has_edge(s, other):
            raise ConstructionFailed("cover-B", f"{s}-{other} is not an edge")
        return [s, other]
    if t is None:
        t = max(bits(pool & ~(1 << s)), key=lambda w: (-(g.rows[w] & pool).bit_count(), -w))
    return panconnected_subset_path(split, g, pool, s, t, m - 1, n_k)


def _link(g: Graph, x: int, y: int, ledger: RemainingB, who: str) -> list[int]:
    """Interior of an x-y path with at most one intermediate remaining vertex."""
    if g.has_edge(x, y):
        return []
    common = g.rows[x] & g.rows[y] & ledger.free
    if not common:
        raise ConstructionFailed("link", f"{x} and {y} have no common remaining neighbour")
    w = max(bits(common), key=lambda b: (popcount(g.rows[b] & ledger.free), -b))
    ledger.reserve(w, who)
    return [w]


def _run(inst: PartitionInstance, steps: list[str]) -> PathPartition:
    g, k = inst.graph, inst.k
    split = split_low_degree(g, k)
    steps.append(f"split a={split.a} |A|={popcount(split.A)} |B|={popcount(split.B)} |C|={popcount(split.C)}")
    if not split.B:
        raise ConstructionFailed("split", "B is empty")
    order = inst.sorted_order()
    last = order[-1]
    n_k = inst.sizes[last]
    X = to_mask(inst.starts)
    A, B, C = split.A, split.B, split.C
    ledger = RemainingB(B & ~X)
    start_of = {x: i for i, x in enumerate(inst.starts)}

    # cover A: disjoint paths from X & A and a cleanup vertex into B
    xa = A & X
    v = lowest(A & ~X) if A & ~X else None
    sources = xa | (0 if v is None else 1 << v)
    try:
        menger = menger_disjoint_paths(g, sources, B & ~X, X & ~sources)
    except NoDisjointFamily as exc:
        raise ConstructionFailed("cover-A", f"only {exc.flow} of {exc.needed} disjoint paths into B") from exc
    menger = [_shortcut(g, p) for p in menger]
    for p in menger:
        if len(p) > 4:
            raise ConstructionFailed("cover-A", f"path from {p[0]} has order {len(p)} > 4")
    used = 0
    done: dict[int, list[int]] = {}
    prefix: dict[int, list[int]] = {}
    proxy: dict[int, int] = {}
    vpath: list[int] = []
    for p in menger:
        if p[0] == v:
            vpath = p
            used |= to_mask(p)
            ledger.reserve(p[-1], "proxy of cleanup vertex")
            continue
        i = start_of[p[0]]
        if len(p) >= inst.sizes[i]:
            done[i] = p[: inst.sizes[i]]
            used |= to_mask(done[i])
            ledger.reserve_all([w for w in done[i] if ledger.free >> w & 1], f"path {i}")
            steps.append(f"path {i} completed inside the A cover")
            continue
        prefix[i] = p[:-1]
        proxy[i] = p[-1]
        used |= to_mask(p)
        ledger.reserve(p[-1], f"proxy of x{i}")
    a_rest = A & ~X & ~used
    if v is not None:
        a_rest &= ~(1 << v)
    # tail of the last path, read from the B side: proxy(v), ..., v, leftover A
    tail = list(reversed(vpath)) + list(bits(a_rest)) if vpath else []
    used |= a_rest

    # proxies for starts in C and B
    for i, x in enumerate(inst.starts):
        if i in done or i in proxy:
            continue
        if B >> x & 1:
            prefix[i], proxy[i] = [], x
        elif C >> x & 1:
            if inst.sizes[i] == 1:
                done[i] = [x]
                continue
            nb = _best_neighbors(g, x, ledger.free, B, 1)
            if not nb:
                raise ConstructionFailed("proxy", f"start {x} in C has no remaining B-neighbour")
            ledger.reserve(nb[0], f"proxy of x{i}")
            prefix[i], proxy[i] = [x], nb[0]
        else:
            raise ConstructionFailed("cover-A", f"start {x} in A received no path")
    if last in done:
        raise ConstructionFailed("cover-A", "the largest path completed inside the A cover")

    # string the free part of C into one path that starts and ends in B
    c_rest = C & ~X & ~used
    if 8 * popcount(C) > n_k:
        raise ConstructionFailed("string-C", f"|C| = {popcount(C)} > n_k/8 = {n_k / 8:g}")
    ends = []
    for c in bits(c_rest):
        nb = _best_neighbors(g, c, ledger.free, B, 2)
        if len(nb) < 2:
            raise ConstructionFailed("string-C", f"vertex {c} of C has {len(nb)} < 2 remaining B-neighbours")
        ledger.reserve_all(nb, "P_C")
        ends.append((nb[0], c, nb[1]))
    pc: list[int] = []
    for j, (b_in, c, b_out) in enumerate(ends):
        if j:
            pc += _link(g, pc[-1], b_in, ledger, "P_C")
        pc += [b_in, c, b_out]
    if pc and not len(pc) < 4 * popcount(C):
        raise ConstructionFailed("string-C", f"|P_C| = {len(pc)} >= 4|C| = {4 * popcount(C)}")

    # P_i for every unfinished path except the largest
    need = 3 * n_k / 8 + 1
    paths: dict[int, list[int]] = dict(done)
    for i in order[:-1]:
        if i in paths:
            continue
        ledger.require(need, f"before path {i}")
        count = inst.sizes[i] - len(prefix[i])
        body = _path_from(g, split, proxy[i], count, ledger.free | 1 << proxy[i], n_k)
        ledger.reserve_all(body[1:], f"path {i}")
        paths[i] = prefix[i] + body
        steps.append(f"path {i}: {len(paths[i])} vertices from proxy {proxy[i]}")

    # the largest path sweeps up P_C, the cleanup tail and all remaining B
    ledger.require(need, "before the final path")
    s = proxy[last]
    if pc and tail:
        link = _link(g, pc[-1], tail[0], ledger, "final link")
        body = _cover(g, split, s, pc[0], ledger.free | 1 << s | 1 << pc[0], n_k)
        rest = pc[1:] + link + tail
    elif pc:
        body = _cover(g, split, s, pc[0], ledger.free | 1 << s | 1 << pc[0], n_k)
        rest = pc[1:]
    elif tail:
        body = _cover(g, split, s, tail[0], ledger.free | 1 << s | 1 << tail[0], n_k)
        rest = tail[1:]
    else:
        body = _cover(g, split, s, None, ledger.free | 1 << s, n_k)
        rest = []
    paths[last] = prefix[last] + body + rest
    steps.append(f"final path: {len(paths[last])} vertices")
    return PathPartition(tuple(tuple(paths[i]) for i in range(k)))


def solve_low_degree(inst: PartitionInstance) -> SolveOutcome:
    """Construct the partition when delta(G) <= n_k / 8.

    Returns Found with a validated partition or Failed naming the first step
    whose quantitative requirement does not hold at this n.
    """
    cond = check_condition(inst)
    if not cond.holds:
        raise PreconditionNotMet(f"sigma2 = {cond.sigma2} < n + k - 1 = {cond.threshold}")
    n_k = max(inst.sizes)
    delta = inst.graph.min_degree()
    if 8 * delta > n_k:
        raise PreconditionNotMet(f"delta = {delta} > n_k/8 = {n_k / 8:g}")
    steps: list[str] = []
    try:
        part = _run(inst, steps)
    except ConstructionFailed as exc:
        return SolveOutcome.failed(exc.step, exc.detail, route=ROUTE, steps=steps)
    except PathPartitionError as exc:
        return SolveOutcome.failed("panconnected-subset", str(exc), route=ROUTE, steps=steps)
    problems = validate_partition(inst, part)
    if problems:
        return SolveOutcome.failed("validate", "; ".join(problems), route=ROUTE, steps=steps)
    return SolveOutcome(FOUND, part, route=ROUTE, steps=steps)
