import numpy as np
import pytest
from hypothesis import given, strategies as st

from ampcsim.graph import Graph, generate_path, generate_tree
from ampcsim.listrank import forest_arcs, forest_connectivity, rank_cycles, shrink, shrink_levels
from ampcsim.oracles import same_partition, union_find_labels
from ampcsim.runtime import Runtime


def _cycles(rng, lens):
    n = int(sum(lens))
    perm = rng.permutation(n)
    succ = np.empty(n, dtype=np.int64)
    heads, members, pos = [], [], 0
    for k in lens:
        c = perm[pos:pos + k]
        succ[c] = np.roll(c, -1)
        heads.append(int(c[0]))
        members.append(c)
        pos += k
    return succ, heads, members


@given(st.lists(st.integers(1, 200), min_size=1, max_size=5), st.integers(0, 10_000),
       st.booleans())
def test_rank_cycles_offsets_and_labels(lens, seed, simulated):
    rng = np.random.default_rng(seed)
    succ, heads, members = _cycles(rng, lens)
    n = len(succ)
    w = np.ones((n, 2), dtype=np.int64)
    w[:, 1] = rng.integers(-3, 4, size=n)
    mask = np.zeros(n, dtype=bool)
    mask[heads] = True
    rt = Runtime(n) if simulated else None
    cr = rank_cycles(succ, weights=w, heads=mask, runtime=rt)
    for h, c in zip(heads, members):
        cur, acc = h, np.zeros(2, dtype=np.int64)
        for _ in range(len(c)):
            assert np.array_equal(cr.offset[cur], acc)
            assert cr.label[cur] == c.min()
            acc += w[cur]
            cur = succ[cur]
        assert np.array_equal(cr.total[h], acc)
    if rt is not None:
        assert rt.metrics.shuffles == 0 and rt.quota_events == 0


def test_shrink_with_p_one_keeps_every_node():
    rng = np.random.default_rng(1)
    succ, _, _ = _cycles(rng, [30, 12])
    level, nsucc, *_ = shrink(succ, 1.0)
    assert len(nsucc) == len(succ)


def test_shrink_levels_shape():
    lv = shrink_levels(10_000, 0.5)
    assert len(lv) == 7 and lv[0] == pytest.approx(0.1) and lv[-1] == pytest.approx(1 / np.log2(1e4))


def test_rank_cycles_round_count_constant_in_n():
    counts = set()
    for n in (1_000, 10_000, 100_000):
        rng = np.random.default_rng(n)
        succ, _, _ = _cycles(rng, [n])
        rt = Runtime(n)
        rank_cycles(succ, runtime=rt)
        counts.add(rt.metrics.rounds)
    assert len(counts) == 1


def test_forest_arcs_form_euler_cycles():
    f = generate_tree(50, seed=2)
    tail, head, succ, first = forest_arcs(f)
    assert len(tail) == 2 * f.m
    assert np.array_equal(np.sort(succ), np.arange(2 * f.m))


def test_forest_connectivity_examples():
    two = forest_connectivity(Graph(4, [0, 2], [1, 3]), Runtime(4))
    assert two.num_classes() == 2
    path = forest_connectivity(generate_path(10_000), Runtime(10_000))
    assert path.num_classes() == 1


@given(st.integers(1, 300), st.integers(0, 10_000))
def test_forest_connectivity_matches_union_find(n, seed):
    rng = np.random.default_rng(seed)
    t = generate_tree(n, seed=seed)
    keep = rng.random(t.m) < 0.7
    f = t.edge_subgraph(keep)
    cm = forest_connectivity(f, Runtime(n))
    assert same_partition(cm.rep, union_find_labels(n, f.src, f.dst))
