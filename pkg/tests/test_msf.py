import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ampcsim.errors import InvalidSize
from ampcsim.graph import (Graph, cycle_union, degree_weights, generate_random, generate_tree,
                           generate_two_cycles, random_weights, ternarize)
from ampcsim.msf import (FlightLabel, StopReason, connectivity, dense_msf, find_light_edges,
                         kkt_msf, kkt_sample_prob, msf, msf_empirical, truncated_prim)
from ampcsim.oracles import kruskal, same_partition, union_find_cc
from ampcsim.runtime import Runtime

ALL = [msf, kkt_msf, msf_empirical]


def test_prim_searches_on_a_path():
    g = Graph(3, [0, 1], [1, 2], [1, 2])
    tg = ternarize(g)
    out = truncated_prim(tg, vertex_rank=np.array([1, 0, 2]), limit=3, keep_visits=True)
    s1 = out.search(1)
    assert s1.stop_reason == StopReason.COMPONENT_DONE
    assert sorted(s1.discovered_msf_edges) == [0, 1]
    for v in (0, 2):
        s = out.search(v)
        assert s.stop_reason == StopReason.HIT_LOWER_RANK and s.hit == 1
        assert s.discovered_msf_edges == [out.contracted.eid.tolist()[0]] if out.contracted.m else True
    assert out.contracted.m == 0


def test_prim_single_vertex():
    out = truncated_prim(ternarize(Graph(1, [], [])))
    s = out.search(0)
    assert s.stop_reason == StopReason.COMPONENT_DONE and s.discovered_msf_edges == []


def test_prim_limit_one_on_a_cycle():
    n = 1000
    g = random_weights(cycle_union([n], shuffle_seed=1), seed=2)
    out = truncated_prim(ternarize(g), limit=1)
    assert set(out.stop.tolist()) <= {StopReason.EXPLORED, StopReason.HIT_LOWER_RANK}
    assert 0 < out.contracted.n <= 3 * n / 2


@given(st.integers(2, 60), st.integers(0, 10_000), st.integers(1, 6))
def test_prim_finds_only_msf_edges(n, seed, limit):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, min(3 * n, n * (n - 1) // 2) + 1))
    g = generate_random(n, m, seed=seed).with_weights(rng.integers(0, 4, size=m))
    tg = ternarize(g)
    out = truncated_prim(tg, limit=limit)
    base_msf = set(kruskal(Graph(tg.base.n, tg.base.src, tg.base.dst, tg.msf_keys())).tolist())
    assert set(out.msf_edges.tolist()) <= base_msf


def test_msf_examples(cycle4):
    r = msf(cycle4)
    assert r.edges.tolist() == [0, 1, 2] and r.total_weight == 6
    t = random_weights(generate_tree(200, seed=1), seed=3)
    assert msf(t).edges.tolist() == list(range(199))
    k = 300
    r = msf(degree_weights(generate_two_cycles(k)))
    assert r.num_components == 2 and len(r.edges) == 2 * k - 2


def test_dense_examples():
    k4 = generate_random(4, 6, seed=0).with_weights([5, 3, 8, 1, 9, 2])
    assert np.array_equal(np.sort(dense_msf(k4).edges), kruskal(k4))
    one = Graph(2, [0], [1], [4])
    assert dense_msf(one).edges.tolist() == [0]
    two = Graph(6, [0, 1, 0, 3, 4, 3], [1, 2, 2, 4, 5, 5], [1, 2, 3, 1, 2, 3])
    assert np.sort(dense_msf(two).edges).tolist() == [0, 1, 3, 4]


def test_dense_branch_is_used_for_dense_input():
    g = random_weights(generate_random(60, 1000, seed=3), seed=5, high=50)
    r = msf(g, runtime=Runtime(60))
    assert r.info["branch"] == "dense" and np.array_equal(r.edges, kruskal(g))


def test_kkt_examples():
    g = random_weights(generate_random(200, 800, seed=4), seed=5)
    r = kkt_msf(g, sample_prob=1.0)
    assert np.array_equal(r.edges, kruskal(g)) and r.info["sampled_edges"] == g.m
    g = random_weights(generate_random(1000, 5000, seed=6), seed=7)
    r = kkt_msf(g)
    assert r.total_weight == int(g.weight[kruskal(g)].sum())
    assert kkt_sample_prob(1024) == pytest.approx(0.1)
    with pytest.raises(InvalidSize):
        kkt_msf(Graph(1, [], []))


def test_find_light_edges_examples():
    g = Graph(3, [0, 1, 0], [1, 2, 2], [1, 5, 3])
    f = g.edge_subgraph(np.array([True, True, False]))
    fl = find_light_edges(g, f)
    assert fl.label.tolist() == [FlightLabel.LIGHT] * 3
    g = Graph(3, [0, 1, 0], [1, 2, 2], [1, 5, 6])
    fl = find_light_edges(g, g.edge_subgraph(np.array([True, True, False])))
    assert fl.label[2] == FlightLabel.HEAVY and fl.label[:2].tolist() == [1, 1]
    g = Graph(4, [0, 2, 1], [1, 3, 2], [1, 1, 9])
    fl = find_light_edges(g, g.edge_subgraph(np.array([True, True, False])))
    assert fl.label[2] == FlightLabel.CROSS_COMPONENT


def test_empirical_examples():
    t = random_weights(generate_tree(500, seed=2), seed=4)
    r = msf_empirical(t)
    assert r.edges.tolist() == list(range(499)) and r.num_components == 1
    g = degree_weights(generate_random(10_000, 100_000, seed=1))
    rt = Runtime(g.n)
    r = msf_empirical(g, rt)
    assert r.total_weight == int(g.weight[kruskal(g)].sum())
    assert r.metrics.shuffles == 5


def test_connectivity_examples():
    assert connectivity(generate_two_cycles(400)).num_classes() == 2
    assert connectivity(Graph(7, [], [])).num_classes() == 7
    g = generate_random(300, 3000, seed=2)
    assert connectivity(g).num_classes() == len(np.unique(union_find_cc(g))) == 1


@given(st.integers(1, 80), st.integers(0, 10_000))
def test_all_variants_match_kruskal_with_ties(n, seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, min(4 * n, n * (n - 1) // 2) + 1))
    g = generate_random(n, m, seed=seed).with_weights(rng.integers(0, 3, size=m))
    want = kruskal(g)
    labels = union_find_cc(g)
    for fn in ALL + [lambda g, runtime: dense_msf(g, runtime)]:
        if fn is kkt_msf and n < 2:
            continue
        r = fn(g, runtime=Runtime(max(n, 1)))
        assert np.array_equal(np.sort(r.edges), want)
        if hasattr(r, "components"):
            assert same_partition(r.components.rep, labels)


@pytest.mark.parametrize("n", [1_000, 10_000])
def test_sparse_msf_round_count_and_shrink(n):
    g = random_weights(cycle_union([n], shuffle_seed=n), seed=1)
    rt = Runtime(n)
    r = msf(g, runtime=rt)
    assert r.info["branch"] == "sparse"
    nb = r.info["base_n"]
    assert r.info["contracted_n"] <= 3 * nb / math.ceil(nb ** 0.25)
    assert rt.metrics.shuffles == 4 and rt.quota_events == 0


def test_msf_with_unweighted_input_uses_edge_order():
    g = generate_random(50, 120, seed=9)
    r = msf(g)
    assert len(r.edges) == 50 - len(np.unique(union_find_cc(g)))
