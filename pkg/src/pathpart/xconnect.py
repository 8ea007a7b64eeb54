"""Path partitions when a small cut splits the graph into two dense sides.

With G = A + C + B and no A-B edges, the degree-sum condition makes every
side vertex miss fewer than |C| others on its own side, so any side subset of
order at least 2|C| + 2 is panconnected. Each cut vertex gets a private
neighbour (proxy) on each side. Short paths live inside one side; a path too
long for its side crosses once through a cut vertex; the last path strings all
remaining cut vertices together through their proxies and then sweeps both
sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .builders import check_williamson, panconnected_path
from .errors import ConstructionFailed, PathPartitionError, PreconditionNotMet
from .graphcore import Graph, bits, components, popcount, to_mask
from .instances import PartitionInstance, PathPartition, check_condition, validate_partition
from .outcome import FOUND, SolveOutcome

ROUTE = "connectivity"


class NotTwoComponents(PreconditionNotMet):
    pass


class ProxyReservationFailed(ConstructionFailed):
    def __init__(self, detail: str):
        super().__init__("proxy-reservation", detail)


@dataclass(frozen=True)
class SplitDecomposition:
    Aside: int
    Bside: int
    cut: int
    proxiesA: dict = field(default_factory=dict)
    proxiesB: dict = field(default_factory=dict)

    def side_of(self, v: int) -> str:
        return "A" if self.Aside >> v & 1 else "B" if self.Bside >> v & 1 else "C"

    def side(self, name: str) -> int:
        return self.Aside if name == "A" else self.Bside

    def proxies(self, name: str) -> dict:
        return self.proxiesA if name == "A" else self.proxiesB

    @property
    def reserve(self) -> int:
        """How many vertices a side keeps back for the closing path."""
        return 4 * popcount(self.cut)


def _other(name: str) -> str:
    return "B" if name == "A" else "A"


def _reserve_proxies(g: Graph, cut: int, side: int, X: int) -> dict:
    """Injective map cut -> side \\ X along edges, by bipartite matching."""
    h = nx.Graph()
    cut_nodes = [("c", c) for c in bits(cut)]
    h.add_nodes_from(cut_nodes)
    for c in bits(cut):
        for s in bits(g.rows[c] & side & ~X):
            h.add_edge(("c", c), ("s", s))
    match = nx.bipartite.hopcroft_karp_matching(h, top_nodes=cut_nodes)
    missing = [c for c in bits(cut) if ("c", c) not in match]
    if missing:
        raise ProxyReservationFailed(f"cut vertices {missing} cannot all get distinct neighbours outside X")
    return {c: match[("c", c)][1] for c in bits(cut)}


def split_by_cut(g: Graph, cut: int, inst: PartitionInstance) -> SplitDecomposition:
    """Split G along ``cut`` and reserve one proxy per cut vertex on each side."""
    parts = components(g, g.vertices & ~cut)
    if len(parts) != 2:
        raise NotTwoComponents(f"removing the cut leaves {len(parts)} components, not 2")
    cond = check_condition(inst)
    if not cond.holds:
        raise PreconditionNotMet(f"sigma2 = {cond.sigma2} < n + k - 1 = {cond.threshold}")
    n_k = max(inst.sizes)
    if 8 * g.min_degree() < n_k:
        raise PreconditionNotMet(f"min degree {g.min_degree()} < n_k/8 = {n_k / 8}")
    A, B = sorted(parts, key=lambda m: (-popcount(m), m))
    X = to_mask(inst.starts)
    s = popcount(cut)
    for name, side in (("A", A), ("B", B)):
        d = g.min_degree(side)
        if not d > popcount(side) - s:
            raise PreconditionNotMet(f"min degree {d} inside side {name} is not > |side| - |cut| = {popcount(side) - s}")
    return SplitDecomposition(A, B, cut, _reserve_proxies(g, cut, A, X), _reserve_proxies(g, cut, B, X))


def panconnected_side_path(g: Graph, decomp: SplitDecomposition, subset: int, u: int, v: int, length: int) -> list[int]:
    """A u-v path of ``length`` edges inside a subset of one side of order at least 2|cut| + 2."""
    if not (subset & ~decomp.Aside == 0 or subset & ~decomp.Bside == 0):
        raise PreconditionNotMet("subset must lie inside one side")
    need = 2 * popcount(decomp.cut) + 2
    if popcount(subset) < need:
        raise PreconditionNotMet(f"|subset| = {popcount(subset)} < 2|cut| + 2 = {need}")
    check_williamson(g, subset)
    if length == 1:
        if not g.has_edge(u, v):
            raise ConstructionFailed("side-path", f"{u} and {v} are not adjacent")
        return [u, v]
    return panconnected_path(g, u, v, length, within=subset, check=False)


def _fixed_path(g: Graph, u: int, v: int, count: int, pool: int) -> list[int]:
    """A u-v path on exactly ``count`` vertices of pool (which holds u and v)."""
    if count == 1:
        if u != v:
            raise ConstructionFailed("side-path", "one-vertex path needs equal endpoints")
        return [u]
    if count == 2:
        if not g.has_edge(u, v):
            raise ConstructionFailed("side-path", f"{u} and {v} are not adjacent")
        return [u, v]
    if count > popcount(pool):
        raise ConstructionFailed("side-path", f"needs {count} vertices, pool has {popcount(pool)}")
    return panconnected_path(g, u, v, count - 1, within=pool, check=False)


def _open_path(g: Graph, u: int, count: int, pool: int) -> list[int]:
    """A path from u on exactly ``count`` vertices of pool, other end free."""
    if count == 1:
        return [u]
    if count > popcount(pool):
        raise ConstructionFailed("side-capacity", f"needs {count} vertices, only {popcount(pool)} available")
    ends = sorted(bits(pool & ~(1 << u)), key=lambda x: (-g.degree(x, pool), x))
    if count == 2:
        ends = [x for x in ends if g.has_edge(u, x)]
    last: Exception | None = None
    for v in ends[:6]:
        try:
            return _fixed_path(g, u, v, count, pool)
        except PathPartitionError as exc:
            last = exc
    raise ConstructionFailed("side-path", f"no path of {count} vertices from {u}: {last}")


class _State:
    """Unused vertices and the per-call views A^v, B^v."""

    def __init__(self, g: Graph, decomp: SplitDecomposition, inst: PartitionInstance):
        self.g = g
        self.d = decomp
        self.free = g.vertices
        self.X = to_mask(inst.starts)
        self.live_cut = decomp.cut
        self.prox = {"A": dict(decomp.proxiesA), "B": dict(decomp.proxiesB)}
        self.pending = 0

    def proxies(self, name: str) -> dict:
        return self.prox[name]

    def proxy_mask(self, name: str) -> int:
        return to_mask(p for c, p in self.prox[name].items() if self.live_cut >> c & 1)

    def rematch(self, name: str) -> None:
        """Re-reserve proxies on side ``name`` after a path took some of them."""
        live = self.live_cut & self.free
        if not live:
            return
        pool = self.d.side(name) & self.free & ~self.X
        if not pool:
            # the side is used up; the closing path stays on the other side
            for c in bits(live):
                self.prox[name].pop(c, None)
            return
        self.prox[name].update(_reserve_proxies(self.g, live, pool, 0))

    def view(self, name: str, v: int | None = None) -> int:
        base = self.d.side(name) & self.free & ~self.proxy_mask(name) & ~self.X
        return base | (1 << v if v is not None else 0)

    def use(self, path) -> None:
        m = to_mask(path)
        if m & ~self.free:
            raise ConstructionFailed("bookkeeping", f"vertices {sorted(bits(m & ~self.free))} used twice")
        self.free &= ~m
        self.live_cut &= ~m
        for name in "AB":
            if any(self.live_cut >> c & 1 and not self.free >> p & 1 for c, p in self.prox[name].items()):
                self.rematch(name)

    def crossing(self, name: str) -> int | None:
        """A live cut vertex outside X whose proxies on both sides are unused."""
        for c in bits(self.live_cut & self.free & ~self.X):
            a, b = self.prox[name].get(c), self.prox[_other(name)].get(c)
            if a is not None and b is not None and self.free >> a & 1 and self.free >> b & 1:
                return c
        return None


def _cross(st: _State, name: str, start: int, count: int, c: int, lowest_head: int, label: str,
           steps: list[str]) -> list[int]:
    g, reserve = st.g, st.d.reserve
    pool = st.view(name, start)
    a, b = st.proxies(name)[c], st.proxies(_other(name))[c]
    here = pool | 1 << a
    far_pool = st.view(_other(name), b)
    # keep about ``reserve`` vertices on this side, unless the far side is too small
    m = popcount(here) - reserve if popcount(pool) > reserve else 3
    m = max(m, count - 1 - popcount(far_pool))
    m = max(lowest_head, min(m, count - 2, popcount(here)))
    head = _fixed_path(g, start, a, m, here) if start != a else [a]
    far = count - len(head) - 1
    if far > popcount(far_pool):
        raise ConstructionFailed("far-side-capacity",
                                 f"{label} needs {far} vertices beyond the cut, |{_other(name)}^b| = {popcount(far_pool)}")
    tail = _open_path(g, b, far, far_pool)
    steps.append(f"{label}: {len(head)} in side {name}, cut {c}, {len(tail)} in side {_other(name)}")
    return head + [c] + tail


def _place(st: _State, name: str, start: int, count: int, steps: list[str], label: str) -> list[int]:
    """A path from ``start`` (on side ``name``) on ``count`` vertices, crossing once if needed.

    Tries in turn: stay inside keeping the reserve; cross if a cut vertex can
    be spared; stay inside without the reserve, borrowing proxies if needed;
    cross with the last cut vertex.
    """
    g, reserve = st.g, st.d.reserve
    pool = st.view(name, start)
    if count <= popcount(pool) - reserve:
        steps.append(f"{label}: {count} vertices inside side {name}")
        return _open_path(g, start, count, pool)
    c = st.crossing(name)
    lowest_head = 1 if c is not None and start == st.proxies(name)[c] else 2
    # keep one cut vertex for every later path and one for the closing path
    spare_cut = popcount(st.live_cut & st.free & ~st.X) >= 1 + st.pending
    wide = (st.d.side(name) & st.free & ~st.X) | 1 << start

    def inside(within: int, note: str):
        def run():
            path = _open_path(g, start, count, within)
            steps.append(f"{label}: {count} vertices inside side {name}, {note}")
            return path
        return run

    def cross():
        return _cross(st, name, start, count, c, lowest_head, label, steps)

    can_cross = c is not None and count >= lowest_head + 2
    attempts = []
    if can_cross and spare_cut:
        attempts.append(cross)
    if count <= popcount(pool):
        attempts.append(inside(pool, "reserve not kept"))
    elif count <= popcount(wide):
        # borrow proxies; State.use re-matches the survivors
        attempts.append(inside(wide, "proxies borrowed"))
    if can_cross and not spare_cut:
        attempts.append(cross)
    last: Exception = ConstructionFailed(
        "no cut vertex available", f"{label} needs {count} > |{name}^x| = {popcount(pool)} and no cut vertex can be crossed")
    for attempt in attempts:
        try:
            return attempt()
        except ConstructionFailed as exc:
            last = exc
    raise last


def _link(st: _State, name: str, x: int, y: int, avoid: int) -> list[int]:
    """Vertices strictly between x and y on a short path inside side ``name``."""
    if st.g.has_edge(x, y):
        return []
    pool = st.d.side(name) & st.free & ~st.X & ~st.proxy_mask(name) & ~avoid
    common = st.g.rows[x] & st.g.rows[y] & pool
    if common:
        return [next(bits(common))]
    raise ConstructionFailed("cut-string-link", f"{x} and {y} have no free common neighbour in side {name}")


def _string_cut(st: _State, first: str, cuts: list[int], bounce: int | None) -> list[int]:
    """P_C: alternate through the cut vertices via proxies, bouncing once at index ``bounce``."""
    g, d = st.g, st.d
    path: list[int] = []
    side = first
    used = 0
    for j, c in enumerate(cuts):
        entry = st.proxies(side)[c]
        if path:
            mid = _link(st, side, path[-1], entry, used | to_mask(path) | 1 << entry)
            path += mid
        path += [entry, c]
        used |= to_mask(path)
        if j == bounce:
            pool = d.side(side) & st.free & ~st.X & ~st.proxy_mask(side) & ~used
            out = g.rows[c] & pool
            if not out:
                raise ConstructionFailed("cut-string-bounce", f"cut vertex {c} has no second free neighbour in side {side}")
            path.append(next(bits(out)))
        else:
            side = _other(side)
            path.append(st.proxies(side)[c])
        used |= to_mask(path)
    return path


def _close(st: _State, inst: PartitionInstance, i: int, steps: list[str]) -> list[int]:
    """The last path: cover one side, string the remaining cut, cover the other side."""
    g, d = st.g, st.d
    x = inst.starts[i]
    where = d.side_of(x)
    cuts = [c for c in bits(st.live_cut & st.free) if c != x]
    if where == "C":
        first = max("AB", key=lambda s: popcount(d.side(s) & st.free))
        lead = [x, st.proxies(first)[x]]
    else:
        first, lead = where, [x]
    second = _other(first)
    if not d.side(first) & st.free & ~to_mask(lead) or not d.side(second) & st.free:
        # one side is used up: a single sweep of the other side and the cut
        pool = ((d.Aside | d.Bside | d.cut) & st.free & ~to_mask(lead[:-1])) | 1 << lead[-1]
        steps.append(f"closing path stays on one side with {len(cuts)} cut vertices")
        return lead[:-1] + _open_path(g, lead[-1], popcount(pool), pool)
    if not cuts:
        if d.side(second) & st.free:
            raise ConstructionFailed("no cut vertex available", "both sides keep free vertices but no cut vertex is left")
        pool = (d.side(first) & st.free) | to_mask(lead)
        return lead[:-1] + _open_path(g, lead[-1], popcount(pool) - len(lead) + 1, pool & ~to_mask(lead[:-1]))
    st.use(lead)
    options = [None] if len(cuts) % 2 else [len(cuts) - 1, 0]
    last: Exception | None = None
    for bounce in options:
        try:
            pc = _string_cut(st, first, cuts, bounce)
        except ConstructionFailed as exc:
            last = exc
            continue
        bound = 5 * (popcount(d.cut) + 1)
        if len(pc) >= bound:
            raise ConstructionFailed("cut-string-length", f"|P_C| = {len(pc)} >= 5(|cut| + 1) = {bound}")
        steps.append(f"P_C: {len(pc)} vertices through {len(cuts)} cut vertices")
        inner = to_mask(pc)
        pool1 = (d.side(first) & st.free & ~inner) | 1 << lead[-1] | 1 << pc[0]
        pa = _fixed_path(g, lead[-1], pc[0], popcount(pool1), pool1)
        pool2 = (d.side(second) & st.free & ~inner) | 1 << pc[-1]
        pb = _open_path(g, pc[-1], popcount(pool2), pool2)
        return lead[:-1] + pa + pc[1:] + pb[1:]
    raise last if last else ConstructionFailed("cut-string", "no arrangement")


def _run(inst: PartitionInstance, decomp: SplitDecomposition, steps: list[str]) -> PathPartition:
    st = _State(inst.graph, decomp, inst)
    order = inst.sorted_order()
    paths: dict[int, list[int]] = {}
    for j, i in enumerate(order[:-1]):
        st.pending = len(order) - 1 - j
        x, count = inst.starts[i], inst.sizes[i]
        st.X &= ~(1 << x)
        where = decomp.side_of(x)
        if where == "C":
            spare = {s: popcount(st.view(s)) for s in "AB"}
            side = max("AB", key=lambda s: (spare[s], s == "A"))
            p = st.proxies(side)[x]
            st.use([x])
            rest = [] if count == 1 else _place(st, side, p, count - 1, steps, f"path {i}")
            st.use(rest)
            paths[i] = [x] + rest
            continue
        else:
            path = _place(st, where, x, count, steps, f"path {i}")
        st.use(path)
        paths[i] = path
    last = order[-1]
    st.X &= ~(1 << inst.starts[last])
    paths[last] = _close(st, inst, last, steps)
    return PathPartition(tuple(tuple(paths[i]) for i in range(inst.k)))


def solve_low_connectivity(inst: PartitionInstance, cut: int) -> SolveOutcome:
    """Construct the partition along a cut that leaves two dense sides."""
    decomp = split_by_cut(inst.graph, cut, inst)
    steps = [f"|A|={popcount(decomp.Aside)} |B|={popcount(decomp.Bside)} |cut|={popcount(cut)}"]
    try:
        part = _run(inst, decomp, steps)
    except ConstructionFailed as exc:
        return SolveOutcome.failed(exc.step, exc.detail, route=ROUTE, steps=steps)
    except PathPartitionError as exc:
        return SolveOutcome.failed("construct", str(exc), route=ROUTE, steps=steps)
    problems = validate_partition(inst, part)
    if problems:
        return SolveOutcome.failed("validate", "; ".join(problems), route=ROUTE, steps=steps)
    return SolveOutcome(FOUND, part, route=ROUTE, steps=steps)
