import itertools
import random

import networkx as nx
from hypothesis import strategies as st

from pathpart.graphcore import Graph, to_mask
from pathpart.regkit import Pair


@st.composite
def graphs(draw, min_n=1, max_n=9, p=None):
    """Random simple graphs; ``p`` biases edge density when given."""
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if p is None:
        keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    else:
        keep = [draw(st.floats(0, 1)) < p for _ in pairs]
    return Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def from_nx(h: nx.Graph) -> Graph:
    h = nx.convert_node_labels_to_integers(h)
    return Graph.from_edges(h.number_of_nodes(), h.edges())


def boost(g: Graph, k: int) -> Graph:
    """Add edges between the worst nonadjacent pairs until sigma2 >= n + k - 1."""
    from pathpart.graphcore import sigma2, sigma2_pair

    while g.n >= 2 and sigma2(g) < g.n + k - 1:
        g = g.with_edges([sigma2_pair(g)])
    return g


def naive_feasible(inst):
    """Try every ordering of the non-start vertices, cut into the prescribed sizes."""
    rest = [v for v in range(inst.n) if v not in inst.starts]
    g = inst.graph
    for order in itertools.permutations(rest):
        pos, ok = 0, True
        for x, size in zip(inst.starts, inst.sizes):
            path = (x,) + order[pos:pos + size - 1]
            pos += size - 1
            if not g.is_path(path):
                ok = False
                break
        if ok:
            return True
    return False


def dense_graph(n, min_deg, seed):
    """Random graph with every degree at least ``min_deg``, made by deleting edges from K_n."""
    rng = random.Random(seed)
    g = Graph.complete(n)
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    drop = []
    deg = [n - 1] * n
    for u, v in pairs:
        if deg[u] > min_deg and deg[v] > min_deg and rng.random() < 0.6:
            drop.append((u, v))
            deg[u] -= 1
            deg[v] -= 1
    return g.complement().with_edges(drop).complement()


def dense_bipartite(m, min_deg, seed):
    rng = random.Random(seed)
    U, V = list(range(m)), list(range(m, 2 * m))
    edges = [(u, v) for u in U for v in V]
    rng.shuffle(edges)
    deg = [m] * (2 * m)
    keep = []
    for u, v in edges:
        if deg[u] > min_deg and deg[v] > min_deg and rng.random() < 0.5:
            deg[u] -= 1
            deg[v] -= 1
        else:
            keep.append((u, v))
    return Graph.from_edges(2 * m, keep), to_mask(U), to_mask(V)


def random_pair(a, b, p, seed):
    rng = random.Random(seed)
    edges = [(u, a + v) for u in range(a) for v in range(b) if rng.random() < p]
    return Graph.from_edges(a + b, edges), Pair(to_mask(range(a)), to_mask(range(a, a + b)))
