"""Path partitions when the independence number is close to n/2.

With A a maximum independent set and B its complement, most paths alternate
between A and B. Because |B| > |A|, some B-heavy pieces are needed: a path Q
built from B-B edges (matching edges or small stars) joined through A, a
path R that sweeps up the B vertices with few A-neighbours, and short stubs
for starts that lie in such vertices. The B-surplus these pieces must carry
is the quantity ``tau``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import networkx as nx

from .builders import bipanconnected_path
from .errors import ConstructionFailed, InvariantViolation, PathPartitionError, PreconditionNotMet
from .graphcore import Graph, bits, lowest, maximum_independent_set, popcount, to_mask
from .instances import PartitionInstance, PathPartition, check_condition, validate_partition
from .outcome import FOUND, SolveOutcome

log = logging.getLogger(__name__)

ROUTE = "independent"
GAMMA = 10


class NeitherCase(PathPartitionError):
    """G[B] has neither enough independent edges nor enough high-degree vertices."""


def default_eps(k: int) -> Fraction:
    return Fraction(1, 100 * k)


def tau_value(b_minus_a: int, o_a: int, o_b: int, dx: int, e_d: int, pd_surplus: Optional[int]) -> int:
    """The B-surplus the absorbing pieces must carry.

    ``pd_surplus`` is the B-minus-A count of the path through the start-free
    low-A-degree vertices, or None when there are none.
    """
    tau = b_minus_a + o_a - o_b - dx - e_d
    if pd_surplus is not None:
        tau -= pd_surplus
    return tau


def choose_pd_surplus(b_minus_a: int, o_a: int, o_b: int, dx: int, e_d: int, d_free: int, t: int, k: int) -> Optional[int]:
    """2|D' - X|, or one less when the leading vertex must be dropped to keep tau >= t - 2k."""
    if d_free == 0:
        return None
    full = 2 * d_free
    if tau_value(b_minus_a, o_a, o_b, dx, e_d, full) >= max(0, t - 2 * k):
        return full
    return full - 1


@dataclass(frozen=True)
class IndepDecomposition:
    n: int
    k: int
    eps: Fraction
    A: int
    B: int
    X: int
    t: int
    Cclique: int
    Bprime: int
    D: int
    Dprime: int
    OA: int
    OBprime: int
    EDprime: int
    pd_surplus: Optional[int]
    tau: int
    violations: tuple[str, ...] = ()

    @property
    def d_free(self) -> int:
        return self.Dprime & ~self.X

    def bounds_hold(self) -> bool:
        dx = popcount(self.Dprime & self.X)
        return 0 <= self.t - 2 * self.k <= self.tau <= self.t - 2 * dx <= self.t


def decompose_independent(g: Graph, inst: PartitionInstance, eps=None, A: Optional[int] = None,
                          budget: Optional[int] = None, strict: bool = True) -> IndepDecomposition:
    """Compute every set of the decomposition and check the structural claims.

    Raises PreconditionNotMet when alpha(G) < (1/2 - eps) n and, in strict
    mode, InvariantViolation naming the first claim that fails. Otherwise the
    failed claims are listed in ``violations``.
    """
    n, k = g.n, inst.k
    eps = default_eps(k) if eps is None else Fraction(eps).limit_denominator(10**6)
    if A is None:
        A = maximum_independent_set(g, budget=budget)
    a, b = popcount(A), n - popcount(A)
    if a < (Fraction(1, 2) - eps) * n:
        raise PreconditionNotMet(f"alpha = {a} < (1/2 - eps) n = {float((Fraction(1, 2) - eps) * n):g}")
    B = g.vertices & ~A
    X = to_mask(inst.starts)
    t = b - a + k
    cclique = to_mask(v for v in bits(B) if 2 * (g.rows[v] & B).bit_count() < t - 1)
    # at least ((|A| - 1)/|B|) (n + k - 1)/2 neighbours in A
    bprime = to_mask(v for v in bits(B) if 2 * b * (g.rows[v] & A).bit_count() >= (a - 1) * (n + k - 1))
    D = B & ~bprime
    dprime = to_mask(v for v in bits(B) if 100 * (g.rows[v] & A).bit_count() < n)
    size_of = {x: inst.sizes[i] for i, x in enumerate(inst.starts)}
    oa = to_mask(x for x in bits(A & X) if size_of[x] % 2 == 1)
    ob = to_mask(x for x in bits(bprime & X) if size_of[x] % 2 == 1)
    ed = to_mask(x for x in bits(dprime & X) if size_of[x] % 2 == 0)
    dx = popcount(dprime & X)
    pd = choose_pd_surplus(b - a, popcount(oa), popcount(ob), dx, popcount(ed), popcount(dprime & ~X), t, k)
    tau = tau_value(b - a, popcount(oa), popcount(ob), dx, popcount(ed), pd)
    dec = IndepDecomposition(n, k, eps, A, B, X, t, cclique, bprime, D, dprime, oa, ob, ed, pd, tau)
    problems = _check(g, dec)
    if strict and problems:
        raise InvariantViolation(problems[0])
    object.__setattr__(dec, "violations", tuple(problems))
    return dec


def _check(g: Graph, d: IndepDecomposition) -> list[str]:
    n, k, t = d.n, d.k, d.t
    out = []
    if d.Dprime & ~d.D:
        out.append("claim D' subset of D fails")
    if 2 * popcount(d.D) > t - 2 * k + 1:
        out.append(f"claim |D| <= (t - 2k + 1)/2 fails: |D| = {popcount(d.D)}, t = {t}")
    if 2 * popcount(d.Bprime) < n + k - 1:
        out.append(f"claim |B'| >= (n + k - 1)/2 fails: |B'| = {popcount(d.Bprime)}")
    if not 2 * k - 1 <= t <= 2 * d.eps * n + k:
        out.append(f"claim 2k - 1 <= t <= 2 eps n + k fails: t = {t}")
    if 2 * popcount(d.Cclique) > t - 1:
        out.append(f"claim |C| <= (t - 1)/2 fails: |C| = {popcount(d.Cclique)}")
    if any(d.Cclique & ~g.rows[v] & ~(1 << v) for v in bits(d.Cclique)):
        out.append("claim C is a clique fails")
    if not 0 <= d.tau <= t:
        out.append(f"claim 0 <= tau <= t fails: t = {t}, tau = {d.tau}")
    return out


# matching or stars ---------------------------------------------------------


@dataclass(frozen=True)
class MatchingCase:
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class StarsCase:
    centers: tuple[int, ...]


def _greedy_matching(g: Graph, within: int) -> list[tuple[int, int]]:
    free = within
    out = []
    for v in sorted(bits(within), key=lambda x: ((g.rows[x] & within).bit_count(), x)):
        if not free >> v & 1:
            continue
        nb = g.rows[v] & free & ~(1 << v)
        if nb:
            u = lowest(nb)
            out.append((min(u, v), max(u, v)))
            free &= ~(1 << u) & ~(1 << v)
    return out


def maximum_matching(g: Graph, within: int) -> list[tuple[int, int]]:
    h = nx.Graph()
    h.add_nodes_from(bits(within))
    h.add_edges_from((u, v) for u in bits(within) for v in bits(g.rows[u] & within) if u < v)
    return sorted(tuple(sorted(e)) for e in nx.max_weight_matching(h, maxcardinality=True))


def matching_or_stars(g: Graph, decomp: IndepDecomposition, gamma: int = GAMMA) -> Union[MatchingCase, StarsCase]:
    """Enough independent edges in G[B] (preferred), or enough high-degree centres."""
    t, n = decomp.t, decomp.n
    need_edges = gamma * (t - 1) / 2
    greedy = _greedy_matching(g, decomp.B)
    if len(greedy) >= need_edges:
        return MatchingCase(tuple(greedy))
    exact = maximum_matching(g, decomp.B)
    if len(exact) >= need_edges:
        return MatchingCase(tuple(exact))
    rest = decomp.B & ~decomp.Cclique
    centers = [v for v in bits(rest) if (2 * gamma + 1) * (g.rows[v] & rest).bit_count() >= n]
    centers.sort(key=lambda v: (-(g.rows[v] & rest).bit_count(), v))
    if len(centers) >= math.ceil((t - 1) / 2):
        return StarsCase(tuple(centers))
    raise NeitherCase(f"{len(exact)} independent edges < {need_edges:g} and {len(centers)} centres "
                      f"< {math.ceil((t - 1) / 2)}")


# absorbers -----------------------------------------------------------------


class Registry:
    """Owner of every reserved vertex; reservations are unique across all pieces."""

    def __init__(self, taken: int = 0):
        self.taken = taken
        self.owner: dict[int, str] = {}

    def free(self, v: int) -> bool:
        return not self.taken >> v & 1

    def take(self, vs, who: str) -> None:
        for v in vs:
            if self.taken >> v & 1:
                raise ConstructionFailed("reserve", f"vertex {v} already owned by {self.owner.get(v, 'a path')}")
            self.taken |= 1 << v
            self.owner[v] = who

    def give_back(self, vs) -> None:
        for v in vs:
            self.taken &= ~(1 << v)
            self.owner.pop(v, None)

    def pick(self, g: Graph, pool: int, who: str, near: int = 0) -> int:
        """Reserve the free member of pool with most neighbours in ``near``."""
        cands = pool & ~self.taken
        if not cands:
            raise ConstructionFailed(who, "no free unique neighbour")
        v = max(bits(cands), key=lambda x: ((g.rows[x] & near).bit_count(), -x))
        self.take([v], who)
        return v


@dataclass
class AbsorberPaths:
    PDprime: list[int]
    Q: list[int]
    Rpath: list[int]
    stubs: dict[int, list[int]]
    blocks: list[list[int]] = field(default_factory=list)
    spare: list[list[int]] = field(default_factory=list)
    pd_blocks: list[list[int]] = field(default_factory=list)

    @property
    def Qprime(self) -> list[list[int]]:
        return [p for p in [self.Q, self.Rpath, *self.stubs.values()] if p]

    def surplus(self, B: int) -> int:
        return sum(1 if B >> v & 1 else -1 for p in self.Qprime for v in p)

    def vertices(self) -> int:
        return to_mask(v for p in self.Qprime for v in p) | to_mask(v for b in self.spare for v in b)


def _stubs(g: Graph, d: IndepDecomposition, inst: PartitionInstance, reg: Registry) -> dict[int, list[int]]:
    out = {}
    A_free, Bp_free = d.A & ~d.X, d.Bprime & ~d.X
    for i, x in enumerate(inst.starts):
        if d.Dprime >> x & 1:
            beta = reg.pick(g, g.rows[x] & Bp_free, f"stub of x{i}", d.A)
            alpha = reg.pick(g, g.rows[beta] & A_free, f"stub of x{i}", d.Bprime)
            out[i] = [x, beta, alpha]
        elif d.D >> x & 1:
            out[i] = [x, reg.pick(g, g.rows[x] & A_free, f"stub of x{i}", d.Bprime)]
    return out


def _pd_blocks(g: Graph, d: IndepDecomposition, reg: Registry) -> list[list[int]]:
    Bp_free = d.Bprime & ~d.X
    blocks = []
    for dv in bits(d.d_free):
        reg.take([dv], "P_D'")
        b1 = reg.pick(g, g.rows[dv] & Bp_free, "P_D'", d.A)
        b2 = reg.pick(g, g.rows[dv] & Bp_free, "P_D'", d.A)
        blocks.append([b1, dv, b2])
    return blocks


def _r_path(g: Graph, d: IndepDecomposition, reg: Registry) -> list[int]:
    A_free, Bp_free = d.A & ~d.X, d.Bprime & ~d.X
    segs = []
    for dv in bits(d.D & ~d.Dprime & ~d.X):
        reg.take([dv], "R")
        p = reg.pick(g, g.rows[dv] & A_free, "R", d.Bprime)
        q = reg.pick(g, g.rows[dv] & A_free, "R", d.Bprime)
        segs.append([p, dv, q])
    path: list[int] = []
    for j, seg in enumerate(segs):
        path += seg
        nxt = g.rows[segs[j + 1][0]] if j + 1 < len(segs) else g.vertices
        path.append(reg.pick(g, g.rows[seg[-1]] & nxt & Bp_free, "R", d.A))
    return path


def _unit_pool(g: Graph, d: IndepDecomposition, case, reg: Registry, want: int) -> list[list[int]]:
    """Reserve B-B blocks worth at least ``want`` surplus, plus one single-edge block."""
    Bp_free = d.Bprime & ~d.X
    units: list[list[int]] = []
    worth = 0
    single = False
    usable = d.B & ~d.X
    has_a = to_mask(v for v in bits(usable) if g.rows[v] & d.A & ~d.X)
    if isinstance(case, MatchingCase):
        for u, v in case.edges:
            if worth >= want + 1:
                break
            if has_a >> u & 1 and has_a >> v & 1 and reg.free(u) and reg.free(v):
                reg.take([u, v], "Q")
                units.append([u, v])
                worth += 1
        return units
    for c in case.centers:
        if worth >= want and single:
            break
        if not reg.free(c) or d.X >> c & 1:
            continue
        leaves = [x for x in bits(g.rows[c] & Bp_free & ~reg.taken)]
        if len(leaves) >= 2 and worth < want:
            leaves.sort(key=lambda x: (-(g.rows[x] & d.A).bit_count(), x))
            reg.take([leaves[0], c, leaves[1]], "Q")
            units.append([leaves[0], c, leaves[1]])
            worth += 2
        elif leaves and has_a >> c & 1 and not single:
            reg.take([c, leaves[0]], "Q")
            units.append([c, leaves[0]])
            single = True
            worth += 1
    if not single:
        for u in bits(Bp_free & ~reg.taken):
            nb = g.rows[u] & Bp_free & ~reg.taken
            if nb:
                v = lowest(nb)
                reg.take([u, v], "Q")
                units.append([u, v])
                break
    return units


def _select_blocks(pd: list[list[int]], units: list[list[int]], need: int,
                   lead_ok: bool = True) -> Optional[tuple[list[list[int]], list[list[int]]]]:
    """Blocks whose surplus sum(|b| - 1) equals ``need``; the first P_D' block may drop its lead vertex."""
    base = [list(b) for b in pd]
    have = 2 * len(base)
    options = [(base, have)] if lead_ok or not base else []
    if base:
        dropped = [b[:] for b in base]
        dropped[0] = dropped[0][1:]
        options.append((dropped, have - 1))
    for blocks, worth in options:
        rest = need - worth
        if rest < 0:
            continue
        pairs = [u for u in units if len(u) == 3]
        singles = [u for u in units if len(u) == 2]
        chosen = []
        for u in pairs:
            if rest >= 2:
                chosen.append(u)
                rest -= 2
        for u in singles:
            if rest >= 1:
                chosen.append(u)
                rest -= 1
        if rest == 0:
            return blocks + chosen, [u for u in units if u not in chosen]
    return None


def _join_blocks(g: Graph, d: IndepDecomposition, blocks: list[list[int]], reg: Registry) -> list[int]:
    A_free = d.A & ~d.X
    path: list[int] = []
    for j, blk in enumerate(blocks):
        path += blk
        nxt = g.rows[blocks[j + 1][0]] if j + 1 < len(blocks) else g.vertices
        path.append(reg.pick(g, g.rows[blk[-1]] & nxt & A_free, "Q connector", d.Bprime))
    return path


def build_absorbers(g: Graph, decomp: IndepDecomposition, case, inst: PartitionInstance,
                    surplus: Optional[int] = None, registry: Optional[Registry] = None,
                    spare: int = 0) -> AbsorberPaths:
    """Build P_D', Q, R and the start stubs so that Q' carries ``surplus`` (default tau).

    Q begins in B and ends in A. ``spare`` extra surplus worth of B-B blocks is
    reserved but left unused for later resizing.
    """
    target = decomp.tau if surplus is None else surplus
    reg = registry or Registry(decomp.X)
    stubs = _stubs(g, decomp, inst, reg)
    pd = _pd_blocks(g, decomp, reg)
    R = _r_path(g, decomp, reg)
    stub_surplus = sum(1 if decomp.B >> v & 1 else -1 for p in stubs.values() for v in p)
    need = target - stub_surplus
    units = _unit_pool(g, decomp, case, reg, max(0, need - 2 * len(pd)) + spare)
    picked = _select_blocks(pd, units, need)
    if picked is None:
        raise ConstructionFailed("Q-surplus", f"cannot reach Q surplus {need} with {len(pd)} P_D' blocks "
                                 f"and {len(units)} B-B blocks")
    blocks, unused = picked
    dropped = [v for b in pd for v in b if not any(v in c for c in blocks)]
    reg.give_back(dropped)
    Q = _join_blocks(g, decomp, blocks, reg) if blocks else []
    pd_len = sum(len(b) for b in blocks[: len(pd)])
    out = AbsorberPaths(Q[: pd_len + len(pd)] if pd else [], Q, R, stubs, blocks, unused, pd)
    if out.surplus(decomp.B) != target:
        raise InvariantViolation(f"Q' surplus {out.surplus(decomp.B)} != {target}")
    return out


# the solver ----------------------------------------------------------------


def _side(d: IndepDecomposition, v: int) -> str:
    return "A" if d.A >> v & 1 else "B"


def _slab_path(g: Graph, d: IndepDecomposition, reg: Registry, start: int, edges: int, slab: int) -> list[int]:
    """An alternating path of ``edges`` edges from start inside a fresh balanced-ish slab.

    The slab holds what the path needs on each side plus a common slack of
    up to ``slab`` extra vertices, limited by what is still free.
    """
    if edges == 0:
        return [start]
    A_free = d.A & ~reg.taken & ~(1 << start)
    B_free = d.Bprime & ~reg.taken & ~(1 << start)
    own_free, other_free = (A_free, B_free) if d.A >> start & 1 else (B_free, A_free)
    if edges == 1:
        nb = g.rows[start] & other_free
        if not nb:
            raise ConstructionFailed("slab", f"start {start} has no free neighbour across")
        return [start, max(bits(nb), key=lambda x: ((g.rows[x] & own_free).bit_count(), -x))]
    need_own = (edges + 2) // 2 - 1
    need_other = (edges + 1) // 2
    extra = min(popcount(own_free) - need_own, popcount(other_free) - need_other, max(2, slab - need_other))
    if extra < 0:
        raise ConstructionFailed("slab-size", f"path needs {need_own + 1} and {need_other} vertices on its two "
                                 f"sides, only {popcount(own_free) + 1} and {popcount(other_free)} are free")
    other = sorted(bits(other_free), key=lambda x: (-(g.rows[x] & own_free).bit_count() - 2 * g.has_edge(x, start), x))
    V = to_mask(other[:need_other + extra])
    own = sorted(bits(own_free), key=lambda x: (-(g.rows[x] & V).bit_count(), x))
    U = to_mask(own[:need_own + extra]) | 1 << start
    ends = U & ~(1 << start) if edges % 2 == 0 else V
    last_err: Exception | None = None
    for end in sorted(bits(ends), key=lambda x: (-(g.rows[x] & (U | V)).bit_count(), x))[:4]:
        try:
            return bipanconnected_path(g, U, V, start, end, edges, check=False)
        except PathPartitionError as exc:
            last_err = exc
    raise ConstructionFailed("slab-path", str(last_err))


def _link(g: Graph, d: IndepDecomposition, reg: Registry, e: int, s: int) -> list[int]:
    """Alternating connector between e and s through free A / B' vertices."""
    A_free = d.A & ~reg.taken
    B_free = d.Bprime & ~reg.taken
    se, ss = _side(d, e), _side(d, s)
    if se != ss and g.has_edge(e, s):
        return []
    if se == ss:
        pool = B_free if se == "A" else A_free
        return [reg.pick(g, g.rows[e] & g.rows[s] & pool, "link")]
    first_pool, second_pool = (B_free, A_free) if se == "A" else (A_free, B_free)
    for x in bits(g.rows[e] & first_pool):
        hits = g.rows[x] & g.rows[s] & second_pool
        if hits:
            y = lowest(hits)
            reg.take([x, y], "link")
            return [x, y]
    raise ConstructionFailed("link", f"no alternating connector between {e} and {s}")


def _sweep(g: Graph, d: IndepDecomposition, reg: Registry, e: int) -> list[int]:
    """An alternating path from e through every free vertex."""
    A_free = d.A & ~reg.taken
    B_free = d.B & ~reg.taken
    if not A_free and not B_free:
        return [e]
    U = A_free | (1 << e if d.A >> e & 1 else 0)
    V = B_free | (1 << e if d.B >> e & 1 else 0)
    total = popcount(U) + popcount(V)
    own, other = (U, V) if U >> e & 1 else (V, U)
    if popcount(other) == popcount(own):
        end_side = other
    elif popcount(own) == popcount(other) + 1:
        end_side = own & ~(1 << e)
    else:
        raise ConstructionFailed("sweep-balance", f"free sides {popcount(own)} (start side) and "
                                 f"{popcount(other)} differ by more than allowed")
    if total == 2:
        w = lowest(end_side)
        if not g.has_edge(e, w):
            raise ConstructionFailed("sweep", f"{e}-{w} is not an edge")
        return [e, w]
    last_err: Exception | None = None
    for end in sorted(bits(end_side), key=lambda x: ((g.rows[x] & (U | V)).bit_count(), x))[:6]:
        try:
            return bipanconnected_path(g, U, V, e, end, total - 1, check=False)
        except PathPartitionError as exc:
            last_err = exc
    raise ConstructionFailed("sweep", str(last_err))


def _run(inst: PartitionInstance, eps, steps: list[str]) -> PathPartition:
    g, k, n = inst.graph, inst.k, inst.n
    d = decompose_independent(g, inst, eps, strict=False)
    steps.extend(f"warning: {v}" for v in d.violations)
    steps.append(f"|A|={popcount(d.A)} |B|={popcount(d.B)} t={d.t} tau={d.tau} |D|={popcount(d.D)} |D'|={popcount(d.Dprime)}")
    case = matching_or_stars(g, d)
    steps.append("matching case" if isinstance(case, MatchingCase) else "stars case")
    reg = Registry(d.X)
    ab = build_absorbers(g, d, case, inst, registry=reg, spare=k + 1)
    order = inst.sorted_order()
    last = order[-1]
    paths: dict[int, list[int]] = {}
    slab = math.ceil(n / (25 * k))
    for i in order[:-1]:
        size = inst.sizes[i]
        head = ab.stubs.get(i, [inst.starts[i]])
        if size <= len(head):
            paths[i] = head[:size]
            reg.give_back(head[size:])
            continue
        body = _slab_path(g, d, reg, head[-1], size - len(head), slab)
        reg.take(body[1:], f"path {i}")
        paths[i] = head + body[1:]
        steps.append(f"path {i}: {size} vertices")
    # size Q from the identity #B - #A = #BB edges + [first in B] + [last in B] - 1
    head = ab.stubs.get(last, [inst.starts[last]])
    owned = to_mask(v for p in paths.values() for v in p)
    rest = g.vertices & ~owned
    fb, fa = popcount(rest & d.B), popcount(rest & d.A)
    bb_head = sum(1 for u, v in zip(head, head[1:]) if d.B >> u & 1 and d.B >> v & 1)
    base = fb - fa - (d.B >> head[0] & 1) + 1 - bb_head
    reg.give_back([v for b in ab.blocks + ab.spare for v in b] + [v for v in ab.Q if d.A >> v & 1])
    pd = ab.pd_blocks
    pool = ab.blocks[len(pd):] + ab.spare
    lead_ok = not pd or reg.free(pd[0][0])
    choice = None
    for need in (base, base - 1):
        choice = _select_blocks(pd, pool, need, lead_ok)
        if choice is not None:
            break
    if choice is None:
        raise ConstructionFailed("Q-surplus", f"no block selection reaches surplus {base} or {base - 1}")
    blocks, unused = choice
    reg.take([v for b in blocks for v in b], "Q")
    Q = _join_blocks(g, d, blocks, reg) if blocks else []
    steps.append(f"Q: {len(Q)} vertices, surplus {sum(len(b) - 1 for b in blocks)}")
    chain = list(head)
    for piece in (Q, ab.Rpath):
        if piece:
            chain += _link(g, d, reg, chain[-1], piece[0]) + piece
    reg.take([v for v in chain if reg.free(v)], "final path")
    tail = _sweep(g, d, reg, chain[-1])
    paths[last] = chain + tail[1:]
    steps.append(f"final path: {len(paths[last])} vertices")
    return PathPartition(tuple(tuple(paths[i]) for i in range(k)))


def solve_large_independent(inst: PartitionInstance, eps=None) -> SolveOutcome:
    """Construct the partition when alpha(G) >= (1/2 - eps) n.

    Returns Found with a validated partition or Failed naming the step and
    the inequality that did not hold at this n.
    """
    cond = check_condition(inst)
    if not cond.holds:
        raise PreconditionNotMet(f"sigma2 = {cond.sigma2} < n + k - 1 = {cond.threshold}")
    steps: list[str] = []
    try:
        part = _run(inst, eps, steps)
    except ConstructionFailed as exc:
        return SolveOutcome.failed(exc.step, exc.detail, route=ROUTE, steps=steps)
    except (InvariantViolation, NeitherCase) as exc:
        return SolveOutcome.failed("decompose", str(exc), route=ROUTE, steps=steps)
    except PreconditionNotMet:
        raise
    except PathPartitionError as exc:
        return SolveOutcome.failed("construct", str(exc), route=ROUTE, steps=steps)
    problems = validate_partition(inst, part)
    if problems:
        return SolveOutcome.failed("validate", "; ".join(problems), route=ROUTE, steps=steps)
    return SolveOutcome(FOUND, part, route=ROUTE, steps=steps)
