"""Constructive path and cycle builders in dense graphs.

Lengths are counted in edges throughout this module. Every routine that
takes ``within`` works inside the induced subgraph on that vertex bitset.
"""

from __future__ import annotations

import math
import random

from .errors import ConstructionFailed, ParityMismatch, PreconditionNotMet
from .graphcore import Graph, bfs_path, bits, lowest, minimum_vertex_cut, popcount, sigma2, to_mask

SEARCH_BUDGET = 200_000


def _exact_length_search(g: Graph, u: int, v: int, length: int, within: int,
                         alternate: tuple[int, int] | None = None, budget: int = SEARCH_BUDGET) -> list[int] | None:
    """Depth-first search for a u-v path with exactly ``length`` edges.

    With ``alternate=(U, V)`` only edges between the two sides are used.
    Returns None when the search space is exhausted; raises ConstructionFailed
    when the budget runs out first.
    """
    rows = g.rows
    if alternate is not None:
        side_u, side_v = alternate
        rows = list(g.rows)
        for x in bits(side_u):
            rows[x] = g.rows[x] & side_v
        for x in bits(side_v):
            rows[x] = g.rows[x] & side_u
    path = [u]
    nodes = 0

    def dist_ok(free: int, tail: int, left: int) -> bool:
        # v must be reachable from tail within ``left`` steps through free vertices
        frontier = 1 << tail
        seen = frontier
        for _ in range(left):
            grow = 0
            for x in bits(frontier):
                grow |= rows[x]
            if grow >> v & 1:
                return True
            frontier = grow & free & ~seen
            seen |= frontier
            if not frontier:
                return False
        return False

    def rec(free: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise ConstructionFailed("exact-length-search", f"budget {budget} exhausted")
        tail = path[-1]
        left = length - (len(path) - 1)
        if left == 1:
            return bool(rows[tail] >> v & 1)
        if not dist_ok(free, tail, left):
            return False
        for w in bits(rows[tail] & free):
            path.append(w)
            if rec(free & ~(1 << w)):
                return True
            path.pop()
        return False

    free = within & ~(1 << u) & ~(1 << v)
    if rec(free):
        return path + [v]
    return None


def _insert_one(g: Graph, path: list[int], outside: int) -> bool:
    """Lengthen ``path`` by one edge by inserting a common outside neighbour of a consecutive pair."""
    rows = g.rows
    for i in reversed(range(len(path) - 1)):
        common = rows[path[i]] & rows[path[i + 1]] & outside
        if common:
            path.insert(i + 1, lowest(common))
            return True
    return False


def _swap_insert(g: Graph, path: list[int], outside: int) -> bool:
    """Swap an interior vertex for an outside one, then re-insert the freed vertex."""
    rows = g.rows
    for i in range(1, len(path) - 1):
        for w in bits(rows[path[i - 1]] & rows[path[i + 1]] & outside):
            x = path[i]
            trial = path[:i] + [w] + path[i + 1:]
            if _insert_one(g, trial, (outside & ~(1 << w)) | 1 << x):
                path[:] = trial
                return True
    return False


def grow_path(g: Graph, u: int, v: int, length: int, within: int) -> list[int] | None:
    """Greedy u-v path of exactly ``length`` edges by repeated vertex insertion.

    Returns None when the greedy moves stall; callers then fall back to search.
    """
    if u == v:
        return None
    rows = g.rows
    others = within & ~(1 << u) & ~(1 << v)
    if rows[u] >> v & 1:
        common = rows[u] & rows[v] & others
        if not common:
            return None
        path = [u, lowest(common), v]
    else:
        path = bfs_path(g, u, 1 << v, within | 1 << v)
        if path is None:
            return None
    if len(path) - 1 > length:
        return None
    while len(path) - 1 < length:
        outside = within & ~to_mask(path)
        if not (_insert_one(g, path, outside) or _swap_insert(g, path, outside)):
            return None
    return path


def hamiltonian_between(rows, u: int, v: int, within: int, seed: int = 0, budget: int = 50_000) -> list[int] | None:
    """A u-v path through every vertex of ``within`` by Posa rotations, or None.

    The path grows from u with v held back; when stuck, a rotation about a
    neighbour of the current end exposes a new end. ``rows`` may be a
    restricted adjacency (for example only the edges across a bipartition).
    """
    if u == v:
        return [u] if within == 1 << u else None
    target = popcount(within)
    rng = random.Random(seed)
    path = [u]
    inpath = 1 << u
    for _ in range(budget):
        end = path[-1]
        if len(path) == target - 1:
            if rows[end] >> v & 1:
                return path + [v]
        else:
            out = rows[end] & within & ~inpath & ~(1 << v)
            if out:
                # fewest onward options first, so stragglers are not stranded
                w = min(bits(out), key=lambda x: ((rows[x] & within & ~inpath).bit_count(), x))
                path.append(w)
                inpath |= 1 << w
                continue
        pivots = [i for i, x in enumerate(path[:-2]) if rows[end] >> x & 1]
        if not pivots:
            return None
        i = rng.choice(pivots)
        path[i + 1:] = path[i + 1:][::-1]
    return None


def check_williamson(g: Graph, within: int) -> None:
    m = popcount(within)
    d = g.min_degree(within)
    if 2 * d < m + 2:
        raise PreconditionNotMet(f"min degree {d} < (|U| + 2)/2 = {(m + 2) / 2} on |U| = {m}")


def panconnected_path(g: Graph, u: int, v: int, length: int, within: int | None = None,
                      check: bool = True) -> list[int]:
    """A u-v path with exactly ``length`` edges inside ``g[within]``.

    Requires min degree >= (m + 2)/2 on the m vertices of ``within`` and
    2 <= length <= m - 1. Grows a shortest path by vertex insertion and falls
    back to a budgeted exact search if the greedy moves stall.
    """
    within = g.vertices if within is None else within
    m = popcount(within)
    if not (within >> u & 1 and within >> v & 1) or u == v:
        raise PreconditionNotMet("endpoints must be distinct members of the vertex set")
    if not 2 <= length <= m - 1:
        raise PreconditionNotMet(f"length {length} outside [2, {m - 1}]")
    if check:
        check_williamson(g, within)
    path = grow_path(g, u, v, length, within)
    if path is None and length == m - 1:
        path = hamiltonian_between(g.rows, u, v, within)
    if path is None:
        path = _exact_length_search(g, u, v, length, within)
    if path is None:
        raise ConstructionFailed("panconnected-path", f"no {u}-{v} path of length {length}")
    assert len(path) == length + 1 and g.is_path(path) and path[0] == u and path[-1] == v
    return path


def _grow_alternating(g: Graph, path: list[int], length: int, side_u: int, side_v: int) -> bool:
    rows = g.rows
    while len(path) - 1 < length:
        used = to_mask(path)
        done = False
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            a_side, b_side = (side_u, side_v) if side_u >> a & 1 else (side_v, side_u)
            # a - b2 - a2 - b with b2 on b's side, a2 on a's side
            for b2 in bits(rows[a] & b_side & ~used):
                hits = rows[b2] & rows[b] & a_side & ~used
                if hits:
                    path[i + 1:i + 1] = [b2, lowest(hits)]
                    done = True
                    break
            if done:
                break
        if not done:
            return False
    return True


def bipanconnected_path(g: Graph, side_u: int, side_v: int, u: int, v: int, length: int,
                        check: bool = True) -> list[int]:
    """A u-v path of exactly ``length`` edges alternating between the two sides.

    Requires |U| = |V| = m, every vertex with at least 3m/4 neighbours on the
    opposite side, length >= 2, and length parity matching the sides of u, v.
    """
    m = popcount(side_u)
    if side_u & side_v:
        raise ValueError("sides must be disjoint")
    both = side_u | side_v
    if not (both >> u & 1 and both >> v & 1) or u == v:
        raise PreconditionNotMet("endpoints must be distinct members of the two sides")
    same = bool(side_u >> u & 1) == bool(side_u >> v & 1)
    if length < 2:
        raise PreconditionNotMet(f"length {length} < 2")
    if same != (length % 2 == 0):
        raise ParityMismatch(f"length {length} has the wrong parity for endpoints on "
                             f"{'the same side' if same else 'opposite sides'}")
    if check:
        if popcount(side_v) != m:
            raise PreconditionNotMet(f"unbalanced sides {m} and {popcount(side_v)}")
        worst = min(min((g.rows[x] & side_v).bit_count() for x in bits(side_u)),
                    min((g.rows[x] & side_u).bit_count() for x in bits(side_v)))
        if 4 * worst < 3 * m:
            raise PreconditionNotMet(f"bipartite min degree {worst} < 3m/4 = {3 * m / 4}")
    if same:
        own, other = (side_u, side_v) if side_u >> u & 1 else (side_v, side_u)
        limit = 2 * min(popcount(own) - 1, popcount(other))
    else:
        limit = 2 * min(popcount(side_u), popcount(side_v)) - 1
    if length > limit:
        raise PreconditionNotMet(f"length {length} exceeds the longest possible alternating path {limit}")
    sub = Graph(g.n, tuple(
        (g.rows[x] & side_v) if side_u >> x & 1 else (g.rows[x] & side_u) if side_v >> x & 1 else 0
        for x in range(g.n)))
    path = None
    if not same and sub.has_edge(u, v):
        rows = sub.rows
        for b2 in bits(rows[u] & side_v & ~(1 << v) if side_u >> u & 1 else rows[u] & side_u & ~(1 << v)):
            hits = rows[b2] & rows[v] & ~(1 << u)
            if hits:
                path = [u, b2, lowest(hits), v]
                break
    else:
        path = bfs_path(sub, u, 1 << v, both)
    if path is not None and len(path) - 1 <= length and _grow_alternating(sub, path, length, side_u, side_v):
        result = path
    elif length == popcount(both) - 1 and (result := hamiltonian_between(sub.rows, u, v, both)) is not None:
        pass
    else:
        result = _exact_length_search(g, u, v, length, both, alternate=(side_u, side_v))
    if result is None:
        raise ConstructionFailed("bipanconnected-path", f"no alternating {u}-{v} path of length {length}")
    assert len(result) == length + 1 and sub.is_path(result)
    return result


# long cycles ---------------------------------------------------------------


def _extend_rotate(g: Graph, path: list[int], within: int, budget: int = 2000) -> list[int]:
    """Extend at either end; when stuck, apply Posa rotations to expose new ends."""
    rows = g.rows
    steps = 0
    seen_ends: set[tuple[int, ...]] = set()
    while steps < budget:
        steps += 1
        used = to_mask(path)
        free = within & ~used
        ext = rows[path[-1]] & free
        if ext:
            path.append(lowest(ext))
            continue
        ext = rows[path[0]] & free
        if ext:
            path.insert(0, lowest(ext))
            continue
        # rotation: end y adjacent to p_i gives p_0..p_i y p_{k-1}..p_{i+1}
        key = (path[0], path[-1], len(path))
        if key in seen_ends:
            break
        seen_ends.add(key)
        y = path[-1]
        moved = False
        for i in range(len(path) - 2):
            if rows[y] >> path[i] & 1:
                cand = path[:i + 1] + path[i + 1:][::-1]
                if rows[cand[-1]] & free:
                    path[:] = cand
                    moved = True
                    break
        if not moved:
            path.reverse()
            y = path[-1]
            for i in range(len(path) - 2):
                if rows[y] >> path[i] & 1:
                    cand = path[:i + 1] + path[i + 1:][::-1]
                    if rows[cand[-1]] & free:
                        path[:] = cand
                        moved = True
                        break
        if not moved:
            break
    return path


def _close(g: Graph, path: list[int]) -> list[int] | None:
    """A cycle on exactly the vertices of ``path`` via a crossing pair, if one exists."""
    rows = g.rows
    x, y = path[0], path[-1]
    if len(path) >= 3 and rows[x] >> y & 1:
        return list(path)
    for i in range(1, len(path) - 2):
        if rows[x] >> path[i + 1] & 1 and rows[y] >> path[i] & 1:
            return path[:i + 1] + path[i + 1:][::-1]
    return None


def _longest_cycle_search(g: Graph, target: int, budget: int) -> list[int] | None:
    """Exhaustive search for a cycle with at least ``target`` vertices."""
    rows = g.rows
    nodes = 0
    best: list[int] | None = None

    for start in range(g.n):
        allowed = g.vertices & ~((1 << start) - 1)
        path = [start]

        def rec(free: int) -> bool:
            nonlocal nodes, best
            nodes += 1
            if nodes > budget:
                raise ConstructionFailed("ore-cycle-search", f"budget {budget} exhausted")
            tail = path[-1]
            if len(path) >= max(3, target) and rows[tail] >> start & 1:
                best = list(path)
                return True
            for w in bits(rows[tail] & free):
                path.append(w)
                if rec(free & ~(1 << w)):
                    return True
                path.pop()
            return False

        if rec(allowed & ~(1 << start)):
            return best
    return None


def ore_long_cycle(g: Graph, budget: int = SEARCH_BUDGET) -> list[int]:
    """A cycle with at least min(sigma2, n) vertices in a 2-connected graph.

    Rotation-extension builds a long path that is closed through a crossing
    pair and re-opened whenever an outside vertex attaches to the cycle. If
    that stalls below the bound, a budgeted exhaustive search finishes the job.
    """
    if g.n < 3 or minimum_vertex_cut(g)[0] < 2:
        raise PreconditionNotMet("graph is not 2-connected")
    s2 = sigma2(g)
    target = g.n if math.isinf(s2) else min(int(s2), g.n)
    rows = g.rows
    best: list[int] = []
    for start in range(g.n):
        path = _extend_rotate(g, [start], g.vertices)
        for _ in range(g.n):
            cyc = _close(g, path)
            if cyc is None:
                break
            if len(cyc) > len(best):
                best = cyc
            if len(cyc) == g.n:
                break
            free = g.vertices & ~to_mask(cyc)
            hook = next(((i, lowest(rows[c] & free)) for i, c in enumerate(cyc) if rows[c] & free), None)
            if hook is None:
                break
            i, w = hook
            path = _extend_rotate(g, cyc[i + 1:] + cyc[:i + 1] + [w], g.vertices)
        if len(best) >= target:
            break
    if len(best) < target:
        found = _longest_cycle_search(g, target, budget)
        if found is None:
            raise ConstructionFailed("ore-cycle", f"no cycle with {target} vertices")
        best = found
    assert g.is_cycle(best)
    return best


# brute force --------------------------------------------------------------


def path_lengths_from(g: Graph, u: int) -> list[int]:
    """For each vertex v, a bitmask of the edge-lengths of simple u-v paths."""
    lengths = [0] * g.n
    layer = {(1 << u, u)}
    step = 0
    while layer:
        step += 1
        nxt = set()
        for mask, tail in layer:
            for w in bits(g.rows[tail] & ~mask):
                lengths[w] |= 1 << step
                nxt.add((mask | 1 << w, w))
        layer = nxt
    return lengths


def is_panconnected_bruteforce(g: Graph) -> bool:
    """Exhaustive check that every pair is joined by paths of all lengths 2..n-1."""
    if g.n > 12:
        raise PreconditionNotMet("brute-force panconnectivity is limited to n <= 12")
    need = ((1 << g.n) - 1) & ~0b11
    for u in range(g.n):
        lengths = path_lengths_from(g, u)
        if any(lengths[v] & need != need for v in range(g.n) if v != u):
            return False
    return True
