"""The ten acceptance criteria, one verdict line each.

Every test prints ``[PASS]`` or ``[FAIL]`` with the measured numbers, then
asserts. Criteria that cannot hold as stated are strict xfails: their line
reads FAIL and the suite stays green only while they keep failing.
"""

import itertools
import math
import random
import re
from fractions import Fraction

import networkx as nx
import pytest

from pathpart.builders import (bipanconnected_path, is_panconnected_bruteforce, ore_long_cycle,
                               panconnected_path)
from pathpart.errors import ConstructionFailed
from pathpart.families import cycle_blowup, pendant_clique, split_graph, two_cliques_cut
from pathpart.graphcore import Graph, bits, popcount, sigma2, to_mask
from pathpart.instances import PartitionInstance, is_valid_partition
from pathpart.oracle import BatchPolicy, find_sharpness_witness, solve_exact, verify_batch
from pathpart.outcome import FOUND, INFEASIBLE
from pathpart.regkit import (Pair, blowup, check_eps_regular, check_super_regular, odd_path_in_pair,
                             trim_to_super_regular)
from pathpart.spine import MAX_ABSORB_ORDER, run_spine
from pathpart.xconnect import solve_low_connectivity
from pathpart.xdegree import solve_low_degree
from pathpart.xindep import (build_absorbers, choose_pd_surplus, decompose_independent, matching_or_stars,
                             solve_large_independent, tau_value)

from conftest import dense_bipartite, dense_graph, from_nx, naive_feasible, random_pair

EPS = Fraction(1, 20)


@pytest.fixture
def verdict(capsys):
    def say(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        return ok
    return say


# 1 -------------------------------------------------------------------------------


def test_criterion_1_sweep_of_small_connected_graphs(verdict):
    lines = [nx.to_graph6_bytes(h, header=False).decode().strip()
             for h in nx.graph_atlas_g() if h.number_of_nodes() in (6, 7) and nx.is_connected(h)]
    report = verify_batch(lines, 3, BatchPolicy(budget=None, workers=2))
    ok = not report.counterexamples and not report.undecided and report.instances > 0
    verdict(1, ok, f"{report.graphs} connected graphs on 6-7 vertices, {report.checked_graphs} meet "
                   f"sigma2 >= n + 2, {report.instances} instances, {len(report.counterexamples)} counterexamples")
    assert ok


# 2 -------------------------------------------------------------------------------


def random_instance(rng):
    n = rng.randint(2, 8)
    p = rng.choice([0.3, 0.5, 0.7, 0.9])
    g = Graph.from_edges(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])
    k = rng.randint(1, min(3, n))
    cuts = sorted(rng.sample(range(1, n), k - 1))
    sizes = tuple(b - a for a, b in zip([0] + cuts, cuts + [n]))
    return PartitionInstance(g, k, tuple(rng.sample(range(n), k)), sizes)


def test_criterion_2_exact_search_agrees_with_enumeration(verdict):
    rng = random.Random(2)
    agree = found = 0
    for _ in range(500):
        inst = random_instance(rng)
        out = solve_exact(inst)
        expected = naive_feasible(inst)
        found += out.tag == FOUND
        agree += (out.tag == FOUND) == expected and out.tag in (FOUND, INFEASIBLE)
    verdict(2, agree == 500, f"{agree}/500 instances agree ({found} feasible)")
    assert agree == 500


# 3 -------------------------------------------------------------------------------


def test_criterion_3_degree_sum_bound_is_tight(verdict):
    witnesses = []
    for n in range(6, 9):
        inst = find_sharpness_witness(n, 3)
        if inst is not None:
            witnesses.append(inst)
            break
    ok = bool(witnesses) and all(sigma2(w.graph) == w.n + 1 and not naive_feasible(w) for w in witnesses)
    w = witnesses[0] if witnesses else None
    verdict(3, ok, "no witness" if w is None else
            f"n = {w.n}, graph6 {w.graph.to_graph6()}, starts {w.starts}, sizes {w.sizes}, "
            f"sigma2 = {sigma2(w.graph)}, enumeration finds no partition")
    assert ok


# 4 -------------------------------------------------------------------------------


def test_criterion_4_panconnected_builder(verdict):
    failures = requests = 0
    brute_ok = 0
    for seed in range(500):
        n = 6 + seed % 5
        g = dense_graph(n, math.ceil((n + 2) / 2), seed)
        brute_ok += is_panconnected_bruteforce(g)
        for u, v in itertools.combinations(range(n), 2):
            for length in range(2, n):
                requests += 1
                try:
                    p = panconnected_path(g, u, v, length)
                except ConstructionFailed:
                    failures += 1
                    continue
                if not (len(p) == length + 1 and g.is_path(p) and p[0] == u and p[-1] == v):
                    failures += 1
    ok = failures == 0 and brute_ok == 500
    verdict(4, ok, f"500 graphs, {requests} requests, {failures} failures, "
                   f"{brute_ok}/500 panconnected by exhaustive check")
    assert ok


# 5 -------------------------------------------------------------------------------


def test_criterion_5_bipanconnected_builder(verdict):
    failures = requests = 0
    for seed in range(200):
        m = 4 + seed % 3
        g, U, V = dense_bipartite(m, math.ceil(3 * m / 4), seed)
        for u, v in itertools.permutations(range(2 * m), 2):
            same = (u < m) == (v < m)
            for length in range(2, 2 * m):
                if same != (length % 2 == 0):
                    continue
                requests += 1
                try:
                    p = bipanconnected_path(g, U, V, u, v, length)
                except ConstructionFailed:
                    failures += 1
                    continue
                alternates = all((a < m) != (b < m) for a, b in zip(p, p[1:]))
                if not (len(p) == length + 1 and g.is_path(p) and alternates and p[0] == u and p[-1] == v):
                    failures += 1
    verdict(5, failures == 0, f"200 graphs, {requests} parity-valid requests, {failures} failures")
    assert failures == 0


# 6 -------------------------------------------------------------------------------


def test_criterion_6_long_cycles(verdict):
    rng = random.Random(6)
    short = done = 0
    while done < 200:
        n = rng.randint(3, 12)
        h = nx.gnp_random_graph(n, rng.uniform(0.25, 0.9), seed=rng.randrange(10**9))
        if not nx.is_biconnected(h):
            continue
        g = from_nx(h)
        cyc = ore_long_cycle(g)
        bound = n if math.isinf(sigma2(g)) else min(sigma2(g), n)
        done += 1
        short += not (g.is_cycle(cyc) and len(cyc) >= bound)
    verdict(6, short == 0, f"200 two-connected graphs, {short} cycles below min(sigma2, n)")
    assert short == 0


# 7 -------------------------------------------------------------------------------


def test_criterion_7a_planted_irregular_pair(verdict):
    hits = 0
    for seed in range(100):
        rng = random.Random(seed)
        L = 20
        edges = [(u, L + v) for u in range(L) for v in range(L)
                 if rng.random() < (0.9 if (u < L // 2) == (v < L // 2) else 0.1)]
        g = Graph.from_edges(2 * L, edges)
        res = check_eps_regular(g, Pair(to_mask(range(L)), to_mask(range(L, 2 * L))), 0.1, mode="witness", seed=seed)
        hits += not res.regular
    verdict("7a", hits >= 95, f"planted block pair flagged irregular on {hits}/100 seeds")
    assert hits >= 95


@pytest.mark.xfail(strict=True, reason="a 16 + 16 sample of a p = 0.6 pair always holds sparse 2 x 2 sub-pairs")
def test_criterion_7b_trimmed_random_pair(verdict):
    kept, passed, reasons = [], 0, []
    for seed in range(20):
        g, pair = random_pair(40, 40, 0.6, seed)
        out = trim_to_super_regular(g, pair, 0.1, 0.5)
        kept.append(min(popcount(out.left), popcount(out.right)))
        rng = random.Random(seed)
        sample = Pair(to_mask(rng.sample(list(bits(out.left)), 16)), to_mask(rng.sample(list(bits(out.right)), 16)))
        res = check_super_regular(g, sample, 0.1, 0.5)
        passed += res.holds
        reasons.append(res.reason)
    retained = min(kept) >= 36
    ok = retained and passed == 20
    verdict("7b", ok, f"retention {min(kept)}/40 >= 36: {retained}; exact super-regular check on 16 + 16 samples "
                      f"passed {passed}/20 (first refusal: {reasons[0]})")
    assert ok


def test_criterion_7c_odd_paths_in_pairs(verdict):
    failures = requests = 0
    delta = Fraction(2, 5)
    for seed in range(50):
        g, d = blowup(Graph.complete(2), 30, 0.6, seed)
        pair = trim_to_super_regular(g, Pair(d.clusters[0], d.clusters[1]), 0.1, delta)
        L = popcount(pair.left)
        u, v = min(bits(pair.left)), min(bits(pair.right))
        for length in range(3, L + 1, 2):
            if not (length <= delta * L or (1 - delta) * L <= length):
                continue
            requests += 1
            try:
                p = odd_path_in_pair(g, pair, u, v, length, delta)
                failures += not (len(p) == length + 1 and g.is_path(p))
            except ConstructionFailed:
                failures += 1
    verdict("7c", failures == 0, f"50 pairs, {requests} in-band odd lengths, {failures} failures")
    assert failures == 0


# 8 -------------------------------------------------------------------------------


def tau_samples(count, seed):
    """Field combinations with |D| <= (t - 2k + 1)/2 and size parities summing to n's parity."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        k = rng.randint(2, 6)
        t = rng.randint(2 * k - 1, 2 * k + 40)
        where = [rng.choice("ABdD") for _ in range(k)]
        odd = [rng.random() < 0.5 for _ in range(k)]
        if sum(odd) % 2 != (t - k) % 2:
            odd[0] = not odd[0]
        cap = (t - 2 * k + 1) // 2
        dx = where.count("d")
        if dx + where.count("D") > cap:
            continue
        d_free = rng.randint(0, cap - dx - where.count("D"))
        oa = sum(1 for w, o in zip(where, odd) if w == "A" and o)
        ob = sum(1 for w, o in zip(where, odd) if w == "B" and o)
        ed = sum(1 for w, o in zip(where, odd) if w == "d" and not o)
        pd = choose_pd_surplus(t - k, oa, ob, dx, ed, d_free, t, k)
        out.append((k, t, dx, tau_value(t - k, oa, ob, dx, ed, pd)))
    return out


@pytest.mark.xfail(strict=True, reason="t - 2k <= tau is not implied once D' has vertices outside X")
def test_criterion_8_tau_chain(verdict):
    samples = tau_samples(10_000, 8)
    literal = sum(0 <= t - 2 * k <= tau <= t - 2 * dx <= t for k, t, dx, tau in samples)
    provable = sum(0 <= tau <= t - 2 * dx <= t for k, t, dx, tau in samples)
    ok = literal == len(samples)
    verdict("8 (tau chain)", ok, f"0 <= t-2k <= tau <= t-2|D'X| <= t held on {literal}/10000; "
                                 f"0 <= tau <= t-2|D'X| <= t held on {provable}/10000")
    assert provable == len(samples)
    assert ok


def test_criterion_8_absorber_surplus(verdict):
    returned = refused = exact = 0
    for seed in range(40):
        inst = split_graph(120, 2 + seed % 3, seed, low_a=seed % 3)
        g = inst.graph
        d = decompose_independent(g, inst, EPS, strict=False)
        try:
            ab = build_absorbers(g, d, matching_or_stars(g, d), inst)
        except ConstructionFailed:
            refused += 1
            continue
        returned += 1
        exact += ab.surplus(d.B) == d.tau
    ok = returned > 0 and exact == returned
    verdict("8 (absorbers)", ok, f"|Q' in B| - |Q' in A| = tau on {exact}/{returned} returned absorber sets "
                                 f"({refused} builds refused)")
    assert ok


# 9 and 10 ------------------------------------------------------------------------

def run_family(name, n, k, seed):
    if name == "pendant-clique":
        inst = pendant_clique(n, k, seed)
        return inst, solve_low_degree(inst), None
    if name == "two-cliques-cut":
        inst, cut = two_cliques_cut(n, k, seed)
        return inst, solve_low_connectivity(inst, cut), None
    if name == "split-graph":
        inst = split_graph(n, k, seed)
        return inst, solve_large_independent(inst, eps=EPS), None
    length = 6 if name == "C6-blowup" else 7
    inst, decomp = cycle_blowup(n, k, seed, length=length)
    out, st = run_spine(inst, decomp)
    return inst, out, st


NAMES = ["pendant-clique", "two-cliques-cut", "split-graph", "C6-blowup", "C7-blowup"]


@pytest.fixture(scope="module")
def family_runs():
    runs = {}
    for name in NAMES:
        for n in (60, 120, 300):
            for seed in range(20):
                runs[name, n, seed] = run_family(name, n, 2 + seed % 3, seed)
    return runs


def test_criterion_9_extremal_routes(verdict, family_runs):
    lines, ok = [], True
    for name in NAMES:
        counts = {}
        for n in (60, 120, 300):
            counts[n] = sum(out.tag == FOUND and is_valid_partition(inst, out.partition)
                            for (nm, nn, _), (inst, out, _) in family_runs.items() if nm == name and nn == n)
        ok &= max(counts.values()) == 20
        lines.append(f"{name} " + "/".join(f"{counts[n]}" for n in (60, 120, 300)))
    unnamed = [(key, out.step) for key, (_, out, _) in family_runs.items()
               if out.tag != FOUND and not (out.step and re.search(r"\d", out.detail or ""))]
    ok &= not unnamed
    verdict(9, ok, "Found of 20 at n = 60/120/300: " + ", ".join(lines) + f"; {len(unnamed)} failures without a bound")
    assert ok


def test_criterion_10_spine_invariants(verdict, family_runs):
    runs = absorbing = 0
    problems = []
    for (name, n, seed), (inst, out, st) in family_runs.items():
        if st is None:
            continue
        runs += 1
        problems += st.violations
        if out.step == "invariant":
            problems.append(out.detail)
        for ap in st.absorbing:
            absorbing += 1
            tally = {}
            for x in ap.path:
                where = st.couple_of(x)
                if where:
                    tally[where[0]] = tally.get(where[0], 0) + (1 if where[1] == 0 else -1)
            if ap.order > MAX_ABSORB_ORDER or any(tally.values()):
                problems.append(f"{name} n={n} seed={seed}: absorbing path of order {ap.order}, tally {tally}")
        try:
            st.check_balance("audit")
        except Exception as exc:
            problems.append(str(exc))
    ok = not problems and absorbing > 0
    verdict(10, ok, f"{runs} spine runs, {absorbing} absorbing paths, {len(problems)} invariant violations")
    assert ok
