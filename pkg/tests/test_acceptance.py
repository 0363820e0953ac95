"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary. Run just this file with ``pytest tests/test_acceptance.py``.
"""
import functools
import math
import time
from collections import deque

import numpy as np
import pytest

from ampcsim import ranks
from ampcsim.baselines import mpc_cycle_cc, mpc_mis_rootset, mpc_mm_rootset, mpc_msf_boruvka
from ampcsim.graph import (Graph, cycle_union, degree_weights, generate_grid, generate_matching,
                           generate_path, generate_random, generate_star, generate_tree,
                           generate_two_cycles, random_weights, ternarize)
from ampcsim.matching import ampc_mis, ampc_mm_constant, ampc_mm_loglog
from ampcsim.msf import dense_msf, find_light_edges, kkt_msf, msf, msf_empirical, truncated_prim
from ampcsim.oracles import kruskal, seq_greedy_mis, seq_greedy_mm, union_find_cc
from ampcsim.runtime import Runtime
from ampcsim.twocycle import ampc_two_cycle

RESULTS = []
_RUNTIMES = []  # every AMPC runtime created here, for the quota sweep
_MPC_BYTES_KV = []


def verdict(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def rt_for(n, **kw):
    rt = Runtime(n, eps=0.5, quota_slack=8, **kw)
    _RUNTIMES.append(rt)
    return rt


def _mpc(res):
    _MPC_BYTES_KV.append(res.metrics.bytes_kv)
    return res


def _rand_size(rng, n_max, m_max, density=10):
    n = int(round(math.exp(rng.uniform(math.log(10), math.log(n_max)))))
    m = int(rng.integers(n // 2, min(density * n, m_max, n * (n - 1) // 2) + 1))
    return n, m


@functools.lru_cache(maxsize=None)
def small_suite():
    """100 random graphs with n <= 1000, sparse to moderately dense."""
    rng = np.random.default_rng(2024)
    out = []
    for i in range(100):
        n = int(rng.integers(1, 1001))
        m = int(rng.integers(0, min(n * (n - 1) // 2, 10 * n) + 1))
        out.append((generate_random(n, m, seed=i), i))
    return out


def test_criterion_01_msf_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    runs = bad = 0
    for i in range(50):
        n, m = _rand_size(rng, 10**4, 10**5)
        seed = i % 3
        g = generate_random(n, m, seed=1000 + i)
        g = random_weights(g, seed=seed) if i % 2 == 0 else degree_weights(g)
        want = kruskal(g)
        outs = [msf(g, runtime=rt_for(n, seed=seed)).edges,
                kkt_msf(g, runtime=rt_for(n, seed=seed)).edges,
                msf_empirical(g, runtime=rt_for(n, seed=seed)).edges,
                dense_msf(g, runtime=rt_for(n, seed=seed)).edges,
                _mpc(mpc_msf_boruvka(g, seed=seed, runtime=Runtime(n, seed=seed))[0]).edges]
        runs += len(outs)
        bad += sum(not np.array_equal(o, want) for o in outs)
    dt = time.perf_counter() - t0
    verdict(1, "MSF exactness", bad == 0 and dt < 60,
            f"{runs - bad}/{runs} runs equal Kruskal, {dt:.1f}s (limit 60s)")


def test_criterion_02_mis_mm_exactness():
    t0 = time.perf_counter()
    bad = 0
    for g, seed in small_suite():
        vr, er = ranks.vertex_ranks(g.n, seed), ranks.edge_ranks(g.eid, seed)
        mis = seq_greedy_mis(g, vr)
        mm = seq_greedy_mm(g, er)
        bad += not np.array_equal(ampc_mis(g, rank=vr, runtime=rt_for(g.n)).in_set, mis)
        bad += not np.array_equal(
            _mpc(mpc_mis_rootset(g, rank=vr, runtime=Runtime(g.n))[0]).in_set, mis)
        bad += not np.array_equal(ampc_mm_constant(g, rank=er, runtime=rt_for(g.n)).edges, mm)
        bad += not np.array_equal(ampc_mm_loglog(g, rank=er, runtime=rt_for(g.n)).edges, mm)
        bad += not np.array_equal(
            _mpc(mpc_mm_rootset(g, rank=er, runtime=Runtime(g.n))[0]).edges, mm)
    dt = time.perf_counter() - t0
    verdict(2, "MIS/MM exactness", bad == 0 and dt < 60,
            f"{500 - bad}/500 runs equal the sequential greedy result, {dt:.1f}s (limit 60s)")


def structure_suite():
    return [generate_random(1000, 1500, seed=1), generate_random(1000, 10_000, seed=2),
            generate_random(10_000, 20_000, seed=3), generate_random(10_000, 100_000, seed=4),
            degree_weights(generate_random(10_000, 100_000, seed=5)), generate_path(5000),
            generate_star(2000), generate_grid(60, 60), generate_tree(8000, seed=6),
            generate_matching(3000), generate_two_cycles(4000)]


def test_criterion_03_round_structure():
    problems = []
    two_round = budget_ok = 0
    suite = structure_suite()
    for k, g in enumerate(suite):
        mis = ampc_mis(g, runtime=rt_for(g.n))
        if mis.metrics.shuffles != 1:
            problems.append(f"graph {k}: MIS used {mis.metrics.shuffles} shuffles")
        if mis.truncated_per_iteration[0] == 0:
            budget_ok += 1
            if mis.metrics.rounds != 2:
                problems.append(f"graph {k}: MIS took {mis.metrics.rounds} rounds")
            else:
                two_round += 1
        for fn in (ampc_mm_constant, ampc_mm_loglog):
            s = fn(g, runtime=rt_for(g.n)).metrics.shuffles
            if s != 1:
                problems.append(f"graph {k}: {fn.__name__} used {s} shuffles")
        s = msf_empirical(g, runtime=rt_for(g.n)).metrics.shuffles
        if s != 5:
            problems.append(f"graph {k}: empirical MSF used {s} shuffles")
    ok = not problems and budget_ok > 0
    verdict(3, "round structure", ok,
            f"{len(suite)} graphs; MIS/MM 1 shuffle, empirical MSF 5 shuffles; MIS in 2 rounds "
            f"on {two_round}/{budget_ok} graphs where the budget sufficed"
            + (f"; {problems[:3]}" if problems else ""))


def test_criterion_04_constant_rounds():
    counts = {}
    for fam in ("cycle", "tree"):
        for n in (10**3, 10**4, 10**5):
            g = cycle_union([n], shuffle_seed=n) if fam == "cycle" else generate_tree(n, seed=n)
            g = random_weights(g, seed=1)
            counts[(fam, n)] = msf(g, eps=0.5, runtime=rt_for(n)).metrics.rounds
    same = all(len({counts[(f, n)] for n in (10**3, 10**4, 10**5)}) == 1
               for f in ("cycle", "tree"))
    verdict(4, "constant rounds in n", same,
            ", ".join(f"{f} n={n}: {r}" for (f, n), r in counts.items()))


def ternary_suite():
    gs = []
    for n in (10**3, 10**4, 10**5):
        gs += [generate_tree(n, seed=n), cycle_union([n], shuffle_seed=n),
               generate_random(n, 3 * n, seed=n)]
    gs += [generate_star(3000), generate_grid(100, 100), generate_two_cycles(5000),
           degree_weights(generate_random(10**4, 10**5, seed=9))]
    return [random_weights(g, seed=i) if g.weight is None else g for i, g in enumerate(gs)]


def test_criterion_05_shrink_bound():
    worst = 0.0
    bad = 0
    suite = ternary_suite()
    for i, g in enumerate(suite):
        tg = ternarize(g)
        n = tg.base.n
        out = truncated_prim(tg, eps=0.5, runtime=rt_for(n, seed=i))
        bound = 3 * n / math.ceil(n ** 0.25)
        left = out.rep.num_classes()
        worst = max(worst, left / bound)
        bad += left > bound
    verdict(5, "shrink bound", bad == 0,
            f"{len(suite) - bad}/{len(suite)} inputs within 3n/ceil(n^(eps/2)); "
            f"worst ratio to the bound {worst:.3f}")


def test_criterion_06_query_bound():
    t0 = time.perf_counter()
    ratios = []
    for fam in ("tree", "cycle"):
        for n in (10**4, 10**5):
            qs = []
            for seed in range(5):
                g = generate_tree(n, seed=seed) if fam == "tree" else cycle_union(
                    [n], shuffle_seed=seed)
                tg = ternarize(random_weights(g, seed=seed))
                nt = tg.base.n
                out = truncated_prim(tg, eps=0.5, runtime=rt_for(nt, seed=seed))
                qs.append(out.total_queries / (8 * nt * math.log(nt)))
            ratios.append((fam, n, float(np.mean(qs))))
    dt = time.perf_counter() - t0
    ok = all(r <= 1 for _, _, r in ratios) and dt < 120
    verdict(6, "query bound", ok,
            "mean queries / (8 n ln n): " + ", ".join(f"{f} {n}: {r:.3f}" for f, n, r in ratios)
            + f"; {dt:.1f}s (limit 120s)")


def test_criterion_07_kkt_bound():
    t0 = time.perf_counter()
    n, m = 10**4, 10**5
    p = 1 / math.log2(n)
    counts = []
    for seed in range(10):
        g = random_weights(generate_random(n, m, seed=seed), seed=seed)
        res = kkt_msf(g, runtime=rt_for(n, seed=seed), sample_prob=p)
        counts.append(res.info["light_edges"])
        assert np.array_equal(res.edges, kruskal(g))
    bound = 4 * n * math.log2(n)
    dt = time.perf_counter() - t0
    verdict(7, "KKT light-edge bound", np.mean(counts) <= bound and dt < 60,
            f"mean light+cross edges {np.mean(counts):.0f} <= {bound:.0f}; {dt:.1f}s (limit 60s)")


def _brute_light(n, tree_edges, keys_tree, pairs_keys):
    adj = [[] for _ in range(n)]
    for (a, b), k in zip(tree_edges, keys_tree):
        adj[a].append((b, k))
        adj[b].append((a, k))
    heavy_to = np.full((n, n), -2, dtype=np.int64)  # -2: different tree
    for s in range(n):
        heavy_to[s, s] = -1
        dq = deque([s])
        while dq:
            x = dq.popleft()
            for y, k in adj[x]:
                if heavy_to[s, y] == -2:
                    heavy_to[s, y] = max(heavy_to[s, x], k)
                    dq.append(y)
    return heavy_to


def test_criterion_08_light_edges_exact():
    rng = np.random.default_rng(8)
    checked = bad = 0
    for t in range(50):
        n = int(rng.integers(2, 201))
        tree = generate_tree(n, seed=t)
        # drop a few tree edges now and then so the forest has several parts
        keep = rng.random(tree.m) > (0.1 if t % 3 == 0 else 0.0)
        tsrc, tdst = tree.src[keep], tree.dst[keep]
        tset = {(min(a, b), max(a, b)) for a, b in zip(tsrc.tolist(), tdst.tolist())}
        rest = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in tset]
        src = np.array([a for a, _ in tset] + [a for a, _ in rest], dtype=np.int64)
        dst = np.array([b for _, b in tset] + [b for _, b in rest], dtype=np.int64)
        w = rng.integers(0, 3 * n, size=len(src))
        g = Graph(n, src, dst, w)
        in_f = np.arange(g.m) < len(tset)
        f = g.edge_subgraph(in_f)
        res = find_light_edges(g, f)
        keys = g.order_keys()
        heavy_to = _brute_light(n, list(zip(g.src[in_f].tolist(), g.dst[in_f].tolist())),
                                keys[in_f].tolist(), None)
        for e in np.flatnonzero(~in_f).tolist():
            a, b = int(g.src[e]), int(g.dst[e])
            h = heavy_to[a, b]
            want = 0 if h == -2 else (1 if keys[e] <= h else 2)
            checked += 1
            bad += int(res.label[e]) != want
    verdict(8, "F-light exactness", bad == 0,
            f"{checked - bad}/{checked} non-forest edges labelled like the brute force")


def test_criterion_09_degree_reduction():
    worst = 0.0
    iters = []
    for seed in range(5):
        g = generate_random(1000, 20_000, seed=seed)
        res = ampc_mm_loglog(g, runtime=rt_for(g.n, seed=seed), seed=seed)
        delta = g.max_degree()
        for i, d in enumerate(res.info["max_degree"], 1):
            bound = 2 * 5 * delta ** (0.5 ** (i - 1)) * math.log2(g.n)
            worst = max(worst, d / bound)
        iters.append(res.iterations)
    verdict(9, "degree reduction", worst <= 1,
            f"max Delta(G_i)/bound {worst:.3f} over 5 seeds; iterations {iters}")


def test_criterion_10_mpc_phase_counts():
    n, m = 10**5, 10**6
    mis_p, mm_p = [], []
    for seed in range(5):
        g = generate_random(n, m, seed=seed)
        mis_p.append(len(mpc_mis_rootset(g, runtime=Runtime(n, seed=seed))[1]))
        res, log = mpc_mm_rootset(g, runtime=Runtime(n, seed=seed))
        _mpc(res)
        mm_p.append(len(log))
    bound = 4 * math.log2(n)
    verdict(10, "MPC phase counts", max(mis_p + mm_p) <= bound,
            f"MIS phases {mis_p}, MM phases {mm_p}, bound {bound:.1f}")


def test_criterion_11_one_vs_two_cycles():
    t0 = time.perf_counter()
    cases = []
    for k in (10**3, 10**4, 10**5):
        for seed in range(3):
            cases.append((cycle_union([k, k], shuffle_seed=seed), 2, seed))
            cases.append((cycle_union([2 * k], shuffle_seed=seed), 1, seed))
    cases.append((cycle_union([300, 9700], shuffle_seed=7), 2, 7))
    cases.append((cycle_union([3, 5, 40_000], shuffle_seed=8), 3, 8))
    right = 0
    worst = 0.0
    for g, want, seed in cases:
        res = ampc_two_cycle(g, runtime=rt_for(g.n, seed=seed))
        right += res.components == want == len(np.unique(union_find_cc(g)))
        bound = 8 * (1 / res.sample_prob) * math.log(g.n)
        worst = max(worst, res.longest_walk / bound)
    dt = time.perf_counter() - t0
    verdict(11, "1-vs-2-cycle", right == len(cases) and worst <= 1 and dt < 60,
            f"{right}/{len(cases)} correct; longest walk / (8 ln n / p) = {worst:.3f}; "
            f"{dt:.1f}s (limit 60s)")


def test_criterion_12_model_discipline():
    # a sweep of its own so the criterion stands alone, then everything above
    for g in (generate_random(5000, 40_000, seed=12), generate_grid(50, 50)):
        w = random_weights(g, seed=1)
        msf(w, runtime=rt_for(g.n))
        kkt_msf(w, runtime=rt_for(g.n))
        msf_empirical(w, runtime=rt_for(g.n))
        ampc_mis(g, runtime=rt_for(g.n))
        ampc_mm_constant(g, runtime=rt_for(g.n))
        ampc_mm_loglog(g, runtime=rt_for(g.n))
        _mpc(mpc_mis_rootset(g, small_threshold=100)[0])
        _mpc(mpc_mm_rootset(g, small_threshold=100)[0])
        _mpc(mpc_msf_boruvka(w, small_threshold=100)[0])
    rt = Runtime(20_000)
    mpc_cycle_cc(generate_two_cycles(10_000), runtime=rt)
    _MPC_BYTES_KV.append(rt.metrics.bytes_kv)
    ampc_two_cycle(generate_two_cycles(10_000), runtime=rt_for(20_000))
    events = sum(r.quota_events for r in _RUNTIMES)
    good_s = all(r.S == max(2, math.ceil(r.n ** 0.5)) and r.quota_limit == 8 * r.S
                 for r in _RUNTIMES)
    kv = sum(_MPC_BYTES_KV)
    verdict(12, "model discipline", events == 0 and kv == 0 and good_s,
            f"{len(_RUNTIMES)} AMPC runs, {events} quota events; "
            f"{len(_MPC_BYTES_KV)} MPC runs, bytes_kv total {kv}")


def test_criterion_13_caching():
    suite = [g for g, _ in small_suite() if g.m >= 1]
    suite += [Graph(2, [0], [1]), generate_path(200), generate_star(500), generate_grid(30, 30),
              generate_random(5000, 50_000, seed=13)]
    same = strict = 0
    flat = []
    for g in suite:
        vr, er = ranks.vertex_ranks(g.n, 1), ranks.edge_ranks(g.eid, 1)
        for name, fn, r in (("mis", ampc_mis, vr), ("mm", ampc_mm_constant, er),
                            ("mm-loglog", ampc_mm_loglog, er)):
            on = fn(g, rank=r, runtime=rt_for(g.n, caching=True))
            off = fn(g, rank=r, runtime=rt_for(g.n, caching=False))
            out_on = on.in_set if name == "mis" else on.edges
            out_off = off.in_set if name == "mis" else off.edges
            same += np.array_equal(out_on, out_off)
            if on.metrics.total_queries < off.metrics.total_queries:
                strict += 1
            else:
                flat.append((name, g.n, g.m, on.metrics.total_queries))
    total = 3 * len(suite)
    detail = (f"outputs identical on {same}/{total} runs; strictly fewer queries on "
              f"{strict}/{total}")
    if flat:
        smallest = min(flat, key=lambda x: (x[2], x[1]))
        detail += (f"; no saving on {len(flat)} runs, all on graphs with n <= "
                   f"{max(f[1] for f in flat)} (e.g. {smallest[0]} on n={smallest[1]}, "
                   f"m={smallest[2]}: {smallest[3]} queries either way)")
    verdict(13, "caching", same == total and strict == total, detail)
