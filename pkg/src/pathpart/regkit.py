"""Regular pairs, pair surgery, reduced graphs and synthetic blow-ups.

Densities are exact ``Fraction`` values and every threshold comparison is
done in rational arithmetic. Path lengths are counted in edges.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .builders import bipanconnected_path
from .errors import ConstructionFailed, LengthOutOfBand, PathPartitionError, PreconditionNotMet
from .graphcore import Graph, bits, lowest, popcount, sigma2, to_mask

EXACT_LIMIT = 16


class TrimTooDeep(PathPartitionError):
    """Trimming removed more than an eps fraction of a side."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x).limit_denominator(10**9)


@dataclass(frozen=True)
class Pair:
    left: int
    right: int

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("pair sides must be nonempty")
        if self.left & self.right:
            raise ValueError("pair sides must be disjoint")

    def swap(self) -> "Pair":
        return Pair(self.right, self.left)


def edge_count(g: Graph, a: int, b: int) -> int:
    return sum((g.rows[x] & b).bit_count() for x in bits(a))


def density(g: Graph, pair: Pair) -> Fraction:
    return Fraction(edge_count(g, pair.left, pair.right), popcount(pair.left) * popcount(pair.right))


def _min_size(eps: Fraction, size: int) -> int:
    """Smallest integer strictly greater than eps * size."""
    return int(eps * size) + 1


@dataclass(frozen=True)
class RegularityResult:
    regular: bool
    witness: Optional[tuple[int, int]] = None
    deviation: Fraction = Fraction(0)
    exact: bool = True

    @property
    def one_sided(self) -> bool:
        """True when ``regular`` only means no witness was found."""
        return not self.exact


def _extremes_by_size(g: Graph, x: int, right: int) -> tuple[list[int], list[tuple[int, int]]]:
    """Degrees of right-side vertices into x, sorted, with their vertex ids."""
    pairs = sorted(((g.rows[y] & x).bit_count(), y) for y in bits(right))
    return [d for d, _ in pairs], pairs


def _exact_regular(g: Graph, pair: Pair, eps: Fraction) -> RegularityResult:
    # For fixed X and |Y| = s, e(X, Y) ranges over [sum of s smallest, sum of s largest] degrees into X.
    d = density(g, pair)
    left = list(bits(pair.left))
    ra = _min_size(eps, len(left))
    rb = _min_size(eps, popcount(pair.right))
    best = RegularityResult(True, None, Fraction(0))
    for size in range(ra, len(left) + 1):
        for xs in combinations(left, size):
            x = to_mask(xs)
            degs, ids = _extremes_by_size(g, x, pair.right)
            low = high = 0
            prefix = [0]
            for deg in degs:
                prefix.append(prefix[-1] + deg)
            total = prefix[-1]
            for s in range(rb, len(degs) + 1):
                low = prefix[s]
                high = total - prefix[len(degs) - s]
                for e, ys in ((low, ids[:s]), (high, ids[len(degs) - s:])):
                    dev = abs(Fraction(e, size * s) - d)
                    if dev >= eps and dev > best.deviation:
                        best = RegularityResult(False, (x, to_mask(y for _, y in ys)), dev)
            if not best.regular:
                return best
    return best


def _witness_search(g: Graph, pair: Pair, eps: Fraction, rng: random.Random, rounds: int = 12) -> RegularityResult:
    """Degree-outlier seeded alternating search for a density deviation."""
    d = density(g, pair)
    la, lb = popcount(pair.left), popcount(pair.right)
    ra, rb = _min_size(eps, la), _min_size(eps, lb)
    best = RegularityResult(True, None, Fraction(0), exact=False)

    def improve(x: int, y: int, up: bool) -> tuple[int, int]:
        # alternately pick the best-responding Y for X and X for Y, each at every admissible size
        for _ in range(4):
            for side in (0, 1):
                src, dst, lim = (x, pair.right, rb) if side == 0 else (y, pair.left, ra)
                ranked = sorted(bits(dst), key=lambda v: ((g.rows[v] & src).bit_count(), v), reverse=up)
                other = popcount(src)
                best_sz, best_dev = lim, Fraction(-1)
                run = 0
                for i, v in enumerate(ranked):
                    run += (g.rows[v] & src).bit_count()
                    if i + 1 >= lim:
                        dev = abs(Fraction(run, (i + 1) * other) - d)
                        if dev > best_dev:
                            best_sz, best_dev = i + 1, dev
                chosen = to_mask(ranked[:best_sz])
                if side == 0:
                    y = chosen
                else:
                    x = chosen
        return x, y

    left = list(bits(pair.left))
    by_deg = sorted(left, key=lambda v: ((g.rows[v] & pair.right).bit_count(), v))
    seeds = [to_mask(by_deg[:max(ra, la // 2)]), to_mask(by_deg[-max(ra, la // 2):])]
    for v in left[: min(len(left), 6)]:
        nb = g.rows[v] & pair.right
        if popcount(nb) >= rb:
            ys = nb
            seeds.append(to_mask(u for u in left if popcount(g.rows[u] & ys) * lb >= popcount(ys) * popcount(g.rows[v] & pair.right)) or 1 << v)
    for _ in range(rounds):
        seeds.append(to_mask(rng.sample(left, max(ra, min(la, rng.randint(ra, la))))))
    for seed in seeds:
        if popcount(seed) < ra:
            continue
        for up in (True, False):
            x, y = improve(seed, pair.right, up)
            if popcount(x) < ra or popcount(y) < rb:
                continue
            dev = abs(Fraction(edge_count(g, x, y), popcount(x) * popcount(y)) - d)
            if dev >= eps and dev > best.deviation:
                best = RegularityResult(False, (x, y), dev, exact=False)
    return best


def check_eps_regular(g: Graph, pair: Pair, eps, mode: str = "exact", seed: int = 0) -> RegularityResult:
    """Decide (exact mode) or probe (witness mode) eps-regularity of a pair.

    Exact mode enumerates every admissible X and, for each size of Y, the two
    extreme choices of Y; it needs both sides of at most 16 vertices. Witness
    mode works at any size but a ``regular`` verdict is one-sided.
    """
    eps = _frac(eps)
    if mode == "exact":
        if popcount(pair.left) > EXACT_LIMIT or popcount(pair.right) > EXACT_LIMIT:
            raise PreconditionNotMet(f"exact regularity needs sides of at most {EXACT_LIMIT} vertices")
        return _exact_regular(g, pair, eps)
    if mode != "witness":
        raise ValueError(f"unknown mode {mode!r}")
    return _witness_search(g, pair, eps, random.Random(seed))


@dataclass(frozen=True)
class SuperRegularResult:
    holds: bool
    witness: Optional[tuple[int, int]] = None
    reason: str = ""
    exact: bool = True


def check_super_regular(g: Graph, pair: Pair, eps, delta, mode: str = "exact", seed: int = 0) -> SuperRegularResult:
    """Check the one-sided density floor on large sub-pairs plus per-vertex degree floors."""
    eps, delta = _frac(eps), _frac(delta)
    la, lb = popcount(pair.left), popcount(pair.right)
    for side, other, size in ((pair.left, pair.right, lb), (pair.right, pair.left, la)):
        for v in bits(side):
            if not (g.rows[v] & other).bit_count() > delta * size:
                return SuperRegularResult(False, (1 << v, other), f"vertex {v} has degree "
                                          f"{(g.rows[v] & other).bit_count()} <= {float(delta * size):g}")
    ra, rb = _min_size(eps, la), _min_size(eps, lb)
    if mode == "exact":
        if la > EXACT_LIMIT or lb > EXACT_LIMIT:
            raise PreconditionNotMet(f"exact check needs sides of at most {EXACT_LIMIT} vertices")
        left = list(bits(pair.left))
        for size in range(ra, la + 1):
            for xs in combinations(left, size):
                x = to_mask(xs)
                degs, ids = _extremes_by_size(g, x, pair.right)
                run = 0
                for s in range(1, len(degs) + 1):
                    run += degs[s - 1]
                    if s >= rb and not run > delta * size * s:
                        return SuperRegularResult(False, (x, to_mask(y for _, y in ids[:s])),
                                                  f"e(X, Y) = {run} <= {float(delta * size * s):g}")
        return SuperRegularResult(True)
    rng = random.Random(seed)
    left = list(bits(pair.left))
    for _ in range(64):
        x = to_mask(rng.sample(left, rng.randint(ra, la)))
        degs, ids = _extremes_by_size(g, x, pair.right)
        run = 0
        px = popcount(x)
        for s in range(1, len(degs) + 1):
            run += degs[s - 1]
            if s >= rb and not run > delta * px * s:
                return SuperRegularResult(False, (x, to_mask(y for _, y in ids[:s])),
                                          f"e(X, Y) = {run} <= {float(delta * px * s):g}", exact=False)
    return SuperRegularResult(True, exact=False)


def trim_to_super_regular(g: Graph, pair: Pair, eps, delta) -> Pair:
    """Drop low-degree vertices until every survivor has at least
    (delta - eps) * |opposite side| neighbours across.

    Raises TrimTooDeep when either side shrinks below (1 - eps) of its size.
    """
    eps, delta = _frac(eps), _frac(delta)
    floor = delta - eps
    a, b = pair.left, pair.right
    while True:
        la, lb = popcount(a), popcount(b)
        drop_a = to_mask(v for v in bits(a) if (g.rows[v] & b).bit_count() < floor * lb)
        drop_b = to_mask(v for v in bits(b) if (g.rows[v] & a).bit_count() < floor * la)
        if not drop_a and not drop_b:
            break
        a &= ~drop_a
        b &= ~drop_b
        if not a or not b:
            break
    for new, old, name in ((a, pair.left, "left"), (b, pair.right, "right")):
        if popcount(new) < (1 - eps) * popcount(old):
            raise TrimTooDeep(f"{name} side kept {popcount(new)} of {popcount(old)} vertices")
    return Pair(a, b)


def short_pair_path(g: Graph, pair: Pair, a: int, b: int, avoid: int = 0) -> list[int]:
    """An a-b path of one or three edges using only pair edges."""
    if not (pair.left >> a & 1 and pair.right >> b & 1):
        raise ValueError("a must lie in the left side and b in the right side")
    if g.has_edge(a, b):
        return [a, b]
    for b2 in bits(g.rows[a] & pair.right & ~avoid & ~(1 << b)):
        hits = g.rows[b2] & g.rows[b] & pair.left & ~avoid & ~(1 << a)
        if hits:
            return [a, b2, lowest(hits), b]
    raise ConstructionFailed("short-pair-path", f"no path of length <= 3 from {a} to {b}")


def odd_path_in_pair(g: Graph, pair: Pair, u: int, v: int, length: int, delta) -> list[int]:
    """A u-v path of exactly ``length`` edges alternating across a balanced pair.

    ``length`` must be odd and lie in 3 <= length <= delta*L or
    (1 - delta)*L <= length <= L.
    """
    delta = _frac(delta)
    size = popcount(pair.left)
    if popcount(pair.right) != size:
        raise PreconditionNotMet("pair is not balanced")
    if length % 2 == 0:
        raise LengthOutOfBand(f"length {length} is even")
    if not (3 <= length <= delta * size or (1 - delta) * size <= length <= size):
        raise LengthOutOfBand(f"length {length} outside [3, {float(delta * size):g}] and "
                              f"[{float((1 - delta) * size):g}, {size}]")
    if not (pair.left >> u & 1 and pair.right >> v & 1):
        raise ValueError("u must lie in the left side and v in the right side")
    try:
        return bipanconnected_path(g, pair.left, pair.right, u, v, length, check=False)
    except PathPartitionError as exc:
        raise ConstructionFailed("odd-path-in-pair", str(exc)) from exc


# decompositions -----------------------------------------------------------


@dataclass
class ClusterDecomposition:
    n: int
    garbage: int
    clusters: list[int]
    L: int
    eps: Fraction
    delta: Fraction
    densities: list[list[Fraction]]
    reduced: Graph
    irregular: list[tuple[int, int]] = field(default_factory=list)
    capped: bool = False

    @property
    def r(self) -> int:
        return len(self.clusters)

    @property
    def xi(self) -> Fraction:
        return Fraction(self.L, self.n)

    def cluster_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.clusters) for v in bits(c)}

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "garbage": list(bits(self.garbage)),
            "clusters": [list(bits(c)) for c in self.clusters],
            "L": self.L,
            "eps": float(self.eps),
            "delta": float(self.delta),
            "densities": [[d.numerator, d.denominator] for row in self.densities for d in row],
        }

    @classmethod
    def from_json(cls, data: dict | str, g: Graph | None = None) -> "ClusterDecomposition":
        if isinstance(data, str):
            data = json.loads(data)
        r = len(data["clusters"])
        flat = [Fraction(a, b) for a, b in data["densities"]]
        table = [flat[i * r:(i + 1) * r] for i in range(r)]
        delta = _frac(data["delta"])
        reduced = Graph.from_edges(r, [(i, j) for i in range(r) for j in range(i + 1, r) if table[i][j] > delta])
        n = data.get("n", g.n if g is not None else 0)
        return cls(n, to_mask(data["garbage"]), [to_mask(c) for c in data["clusters"]], data["L"],
                   _frac(data["eps"]), delta, table, reduced)


def build_decomposition(g: Graph, clusters: list[int], garbage: int, eps, delta) -> ClusterDecomposition:
    eps, delta = _frac(eps), _frac(delta)
    r = len(clusters)
    sizes = {popcount(c) for c in clusters}
    if len(sizes) > 1:
        raise ValueError("clusters must have equal size")
    table = [[Fraction(0)] * r for _ in range(r)]
    for i, j in combinations(range(r), 2):
        table[i][j] = table[j][i] = density(g, Pair(clusters[i], clusters[j]))
    reduced = Graph.from_edges(r, [(i, j) for i, j in combinations(range(r), 2) if table[i][j] > delta])
    return ClusterDecomposition(g.n, garbage, list(clusters), sizes.pop() if sizes else 0,
                                eps, delta, table, reduced)


def _similarity_clusters(g: Graph, pool: int, size: int) -> list[int]:
    """Greedy clusters of vertices sharing many neighbours with a seed vertex."""
    out = []
    while popcount(pool) >= size:
        seed = lowest(pool)
        rest = sorted(bits(pool & ~(1 << seed)), key=lambda v: (-(g.rows[v] & g.rows[seed]).bit_count(), v))
        c = (1 << seed) | to_mask(rest[: size - 1])
        out.append(c)
        pool &= ~c
    return out


def heuristic_partition(g: Graph, eps, m: int, delta=Fraction(1, 10), max_iter: int = 4,
                        seed: int = 0) -> ClusterDecomposition:
    """Equal-size clusters refined along irregularity witnesses.

    Starts from ``m`` similarity-grown clusters; each round, clusters touched by
    witnesses are split in two along the witness sets and re-cut to a common
    size, with remainders going to the garbage set while it stays within
    eps * n. Pairs still carrying witnesses are reported in ``irregular`` and
    ``capped`` flags that the round limit or garbage budget stopped refinement.
    """
    eps = _frac(eps)
    if g.n < m / eps:
        raise PreconditionNotMet(f"n = {g.n} < m/eps = {float(m / eps):g}")
    size = g.n // m
    clusters = _similarity_clusters(g, g.vertices, size)
    garbage = g.vertices & ~to_mask(v for c in clusters for v in bits(c))
    decomp = build_decomposition(g, clusters, garbage, eps, delta)
    for it in range(max_iter + 1):
        witnesses = {}
        for i, j in combinations(range(len(clusters)), 2):
            res = check_eps_regular(g, Pair(clusters[i], clusters[j]), eps, mode="witness", seed=seed + it)
            if not res.regular:
                witnesses[(i, j)] = res.witness
        decomp.irregular = sorted(witnesses)
        if not witnesses:
            return decomp
        if it == max_iter:
            break
        marks = [0] * len(clusters)
        for (i, j), (x, y) in witnesses.items():
            marks[i] |= x
            marks[j] |= y
        parts = []
        for c, mk in zip(clusters, marks):
            inside, outside = c & mk, c & ~mk
            parts.extend(p for p in (inside, outside) if p)
        new_size = max(1, size // 2)
        new_clusters = []
        leftover = garbage
        for p in parts:
            members = list(bits(p))
            while len(members) >= new_size:
                new_clusters.append(to_mask(members[:new_size]))
                members = members[new_size:]
            leftover |= to_mask(members)
        if popcount(leftover) > eps * g.n or new_size < 2:
            decomp.capped = True
            return decomp
        clusters, garbage, size = new_clusters, leftover, new_size
        decomp = build_decomposition(g, clusters, garbage, eps, delta)
    decomp.capped = True
    return decomp


def blowup(template: Graph, L: int, dens, seed: int, eps=Fraction(1, 20), delta=None,
           resample: int = 20) -> tuple[Graph, ClusterDecomposition]:
    """Replace each template vertex by L vertices and each edge by a random pair.

    Pairs are resampled until every vertex has at least (density/2)*L
    neighbours across; any remaining shortfall is fixed by adding edges.
    Returns the graph and its ground-truth decomposition.
    """
    dens = _frac(dens)
    if not 0 < dens <= 1:
        raise ValueError("density must lie in (0, 1]")
    if L < 4:
        raise ValueError("L must be at least 4")
    delta = dens / 4 if delta is None else _frac(delta)
    rng = random.Random(seed)
    n = template.n * L
    floor = dens * L / 2
    edges = []
    for s, t in template.edges():
        base_s, base_t = s * L, t * L
        for _ in range(resample):
            block = [[rng.random() < dens for _ in range(L)] for _ in range(L)]
            if all(sum(row) >= floor for row in block) and all(sum(block[i][j] for i in range(L)) >= floor for j in range(L)):
                break
        for i in range(L):
            while sum(block[i]) < floor:
                block[i][min(j for j in range(L) if not block[i][j])] = True
        for j in range(L):
            while sum(block[i][j] for i in range(L)) < floor:
                block[min(i for i in range(L) if not block[i][j])][j] = True
        edges.extend((base_s + i, base_t + j) for i in range(L) for j in range(L) if block[i][j])
    g = Graph.from_edges(n, edges)
    clusters = [to_mask(range(t * L, (t + 1) * L)) for t in range(template.n)]
    return g, build_decomposition(g, clusters, 0, eps, delta)


@dataclass(frozen=True)
class DegreeSumCheck:
    holds: bool
    sigma2_reduced: float
    bound: Fraction
    pair: Optional[tuple[int, int]] = None
    reason: str = ""


def reduced_degree_sum_check(g: Graph, decomp: ClusterDecomposition, c) -> DegreeSumCheck:
    """Check sigma2(R) >= (c - 2 delta - 4 eps) |R| given sigma2(G) >= c n."""
    c = _frac(c)
    s = sigma2(g)
    bound = (c - 2 * decomp.delta - 4 * decomp.eps) * decomp.r
    if s < c * g.n:
        return DegreeSumCheck(False, sigma2(decomp.reduced), bound, None,
                              f"precondition rejected: sigma2(G) = {s} < c*n = {float(c * g.n):g}")
    sr = sigma2(decomp.reduced)
    if sr >= bound:
        return DegreeSumCheck(True, sr, bound)
    deg = decomp.reduced.degrees()
    worst = min(((i, j) for i, j in combinations(range(decomp.r), 2) if not decomp.reduced.has_edge(i, j)),
                key=lambda p: deg[p[0]] + deg[p[1]])
    return DegreeSumCheck(False, sr, bound, worst, f"clusters {worst} have degree sum {sr} < {float(bound):g}")
