import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ampcsim.errors import ComponentTooLarge, NotACycleGraph
from ampcsim.graph import Graph, cycle_union, generate_path, generate_two_cycles
from ampcsim.oracles import union_find_cc
from ampcsim.runtime import Runtime
from ampcsim.twocycle import ampc_two_cycle, auto_sample_prob, cycle_arcs, sample_searches


def _components(g):
    return len(np.unique(union_find_cc(g)))


def test_arcs_follow_the_cycle(cycle4):
    tail, succ = cycle_arcs(cycle4)
    # walking from any arc visits every vertex once before returning
    a, seen = 0, []
    for _ in range(4):
        seen.append(int(tail[a]))
        a = int(succ[a])
    assert a == 0 and sorted(seen) == [0, 1, 2, 3]


@pytest.mark.parametrize("seed", range(10))
def test_two_cycles_with_small_sample_prob(seed):
    r = ampc_two_cycle(generate_two_cycles(1000), sample_prob=1 / 32,
                       runtime=Runtime(2000, seed=seed))
    assert r.components == 2


def test_every_vertex_sampled():
    r = ampc_two_cycle(cycle_union([3, 5, 7]), sample_prob=1.0)
    assert r.components == 3 and r.samples == 15 and r.depth == 1
    with pytest.raises(ComponentTooLarge):
        ampc_two_cycle(generate_two_cycles(1000), sample_prob=1.0)


def test_single_cycle_one_shuffle():
    g = cycle_union([10**4], shuffle_seed=5)
    rt = Runtime(g.n)
    r = ampc_two_cycle(g, runtime=rt)
    assert r.components == 1
    assert r.metrics.shuffles == 1 and r.metrics.total_queries > 0
    assert rt.quota_events == 0


def test_cycles_without_samples_still_count():
    # many triangles: most get no sample at p = 1/64
    g = cycle_union([3] * 200 + [5000], shuffle_seed=2)
    r = ampc_two_cycle(g, sample_prob=1 / 64)
    assert r.components == 201 and r.unsampled_cycles > 0


@settings(max_examples=100)
@given(st.lists(st.integers(3, 10**4), min_size=1, max_size=5), st.integers(0, 10**6))
def test_matches_union_find(lengths, seed):
    g = cycle_union(lengths, shuffle_seed=seed)
    r = ampc_two_cycle(g, runtime=Runtime(g.n, seed=seed))
    assert r.components == _components(g) == len(lengths)


def test_total_steps_cover_every_edge_twice():
    for seed in range(5):
        g = cycle_union([4000, 3000, 2500], shuffle_seed=seed)
        r = ampc_two_cycle(g, sample_prob=1 / 32, runtime=Runtime(g.n, seed=seed))
        assert r.unsampled_cycles == 0
        assert r.total_steps == 2 * g.n


def test_walk_length_bound():
    p = 1 / 64
    for seed in range(5):
        g = cycle_union([10**5], shuffle_seed=seed)
        r = ampc_two_cycle(g, sample_prob=p, runtime=Runtime(g.n, seed=seed))
        assert r.longest_walk <= 8 * (1 / p) * math.log(g.n)


def test_sample_searches_agree_with_engine():
    g = cycle_union([300, 200], shuffle_seed=1)
    searches = sample_searches(g, 1 / 8, seed=3)
    r = ampc_two_cycle(g, sample_prob=1 / 8, runtime=Runtime(g.n, seed=3))
    assert len(searches) == r.samples
    assert sum(sum(s.steps) for s in searches) == r.total_steps
    assert max(max(s.steps) for s in searches) == r.longest_walk


def test_deep_fallback():
    g = cycle_union([10**5], shuffle_seed=0)
    r = ampc_two_cycle(g, sample_prob=1 / 4)
    assert r.components == 1 and r.depth > 1 and len(r.levels) == r.depth
    assert r.metrics.shuffles == 1
    with pytest.raises(ComponentTooLarge):
        ampc_two_cycle(g, sample_prob=1 / 4, max_depth=1)


def test_rejects_other_graphs():
    with pytest.raises(NotACycleGraph):
        ampc_two_cycle(generate_path(6))
    with pytest.raises(NotACycleGraph):
        ampc_two_cycle(Graph(4, [0, 0, 0], [1, 2, 3]))
    with pytest.raises(ValueError):
        ampc_two_cycle(generate_two_cycles(10), sample_prob=0)


def test_auto_sample_prob():
    assert auto_sample_prob(10**6, 8000) == 1 / 64
    assert auto_sample_prob(100, 80) > 1 / 64
    assert auto_sample_prob(2, 1) == 1.0
