import numpy as np
import pytest
from hypothesis import given, strategies as st

from ampcsim.errors import CycleDetected, NotAForest, NotAncestor
from ampcsim.graph import Graph, generate_path, generate_star, generate_tree
from ampcsim.runtime import Runtime
from ampcsim.tree import (NEUTRAL, build_hld, build_pivots, euler_tour, lca, level_rmq,
                          path_max, pointer_jump, rmq_build, rmq_query, root_forest)


def _root_path(rf, u):
    out = [u]
    while rf.parent[out[-1]] != out[-1]:
        out.append(int(rf.parent[out[-1]]))
    return out


def test_root_forest_small():
    rf = root_forest(Graph(2, [0], [1]))
    assert rf.parent.tolist() == [0, 0] and rf.level.tolist() == [0, 1]
    rf = root_forest(generate_path(3))
    assert rf.level.tolist() == [0, 1, 2]
    rf = root_forest(Graph(4, [0, 2], [1, 3]))
    assert len(np.unique(rf.component_id)) == 2


def test_root_forest_rejects_cycles():
    with pytest.raises(NotAForest):
        root_forest(Graph(3, [0, 1, 2], [1, 2, 0]))


@pytest.mark.parametrize("n", [1, 2, 7, 300])
def test_root_forest_on_simulator_matches_memory(n):
    f = generate_tree(n, seed=n)
    keys = np.arange(f.m)
    a = root_forest(f, keys=keys)
    b = root_forest(f, Runtime(n), keys=keys)
    assert np.array_equal(a.parent, b.parent)
    assert np.array_equal(a.level, b.level)
    assert np.array_equal(a.up_key, b.up_key)
    a.tour = None
    assert np.array_equal(euler_tour(a).tour, euler_tour(b).tour)


def test_rmq_examples():
    t = rmq_build([3, 1, 4, 1, 5])
    assert rmq_query(t, 1, 3) == 1
    for i in range(5):
        assert rmq_query(t, i, i) == i
    inc = rmq_build(np.arange(10, 20))
    assert rmq_query(inc, 0, 9) == 0


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=60), st.data())
def test_rmq_matches_scan(vals, data):
    a = np.array(vals)
    i = data.draw(st.integers(0, len(a) - 1))
    j = data.draw(st.integers(i, len(a) - 1))
    for mode, pick in (("min", np.argmin), ("max", np.argmax)):
        got = rmq_query(rmq_build(a, mode), i, j)
        assert got == i + pick(a[i:j + 1])  # leftmost on ties


def test_euler_tour_examples():
    assert euler_tour(root_forest(Graph(1, [], []))).tour.tolist() == [0]
    assert euler_tour(root_forest(Graph(2, [0], [1]))).tour.tolist() == [0, 1, 0]
    assert euler_tour(root_forest(Graph(3, [0, 0], [1, 2]))).tour.tolist() == [0, 1, 0, 2, 0]


def _binary_tree(n):
    child = np.arange(1, n)
    return Graph(n, (child - 1) // 2, child)


def _naive_lca(rf, u, w):
    up = set(_root_path(rf, u))
    for x in _root_path(rf, w):
        if x in up:
            return x


def test_lca_examples():
    rf = root_forest(_binary_tree(7))
    et = euler_tour(rf)
    lr = level_rmq(rf, et)
    assert lca(rf, et, lr, 4, 4) == 4
    assert lca(rf, et, lr, 5, 0) == 0
    assert lca(rf, et, lr, 3, 6) == 0


@given(st.integers(1, 120), st.integers(0, 10_000))
def test_lca_matches_ancestor_sets(n, seed):
    rf = root_forest(generate_tree(n, seed=seed))
    et = euler_tour(rf)
    lr = level_rmq(rf, et)
    rng = np.random.default_rng(seed)
    for u, w in rng.integers(0, n, size=(10, 2)):
        assert lca(rf, et, lr, int(u), int(w)) == _naive_lca(rf, int(u), int(w))


def test_pivots_on_path_and_binary_tree():
    f = generate_path(20)
    rf = root_forest(f, keys=np.arange(f.m))
    hld = build_hld(rf)
    piv = build_pivots(rf, hld)
    for u in range(1, 20):
        assert sorted(p for p, _ in piv.row(u)) == [0, u]
    b = _binary_tree(15)
    rf = root_forest(b, keys=np.arange(b.m))
    hld = build_hld(rf)
    piv = build_pivots(rf, hld)
    for leaf in range(7, 15):
        light = sum(1 for x in _root_path(rf, leaf)[:-1] if hld.is_light(rf)[x])
        assert len(piv.row(leaf)) <= 2 * light + 2 <= 2 * 4 + 2


def test_star_has_one_heavy_child():
    rf = root_forest(generate_star(6), keys=np.arange(5))
    hld = build_hld(rf)
    assert hld.heavy_child[0] == 1
    assert int(hld.is_light(rf).sum()) == 4


def test_path_max_examples():
    f = Graph(3, [0, 1], [1, 2], [7, 2])
    rf = root_forest(f, keys=f.weight)
    hld = build_hld(rf)
    piv = build_pivots(rf, hld)
    assert path_max(2, 0, rf, hld, piv) == 7
    assert path_max(1, 1, rf, hld, piv) == NEUTRAL
    with pytest.raises(NotAncestor):
        path_max(0, 2, rf, hld, piv)


@given(st.integers(2, 200), st.integers(0, 10_000))
def test_path_max_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    f = generate_tree(n, seed=seed)
    keys = rng.permutation(f.m)
    rf = root_forest(f, keys=keys)
    hld = build_hld(rf)
    piv = build_pivots(rf, hld)
    us = rng.integers(0, n, size=20)
    for u in us.tolist():
        path = _root_path(rf, u)
        a = path[int(rng.integers(0, len(path)))]
        want = NEUTRAL
        x = u
        while x != a:
            want = max(want, int(rf.up_key[x]))
            x = int(rf.parent[x])
        assert path_max(u, a, rf, hld, piv) == want


def test_pointer_jump_examples():
    chain = np.maximum(np.arange(8) - 1, 0)
    cm = pointer_jump(chain)
    assert cm.rep.tolist() == [0] * 8 and cm.rounds <= 4
    ident = pointer_jump(np.arange(5))
    assert ident.rep.tolist() == list(range(5)) and ident.rounds == 1
    star = pointer_jump(np.zeros(6, dtype=np.int64))
    assert star.rounds == 1


def test_pointer_jump_on_simulator():
    n = 500
    rng = np.random.default_rng(0)
    parent = np.array([0] + [int(rng.integers(0, i)) for i in range(1, n)])
    rt = Runtime(n)
    cm = pointer_jump(parent, rt)
    assert np.all(cm.rep == 0)
    assert rt.metrics.shuffles == 0 and rt.quota_events == 0


def test_pointer_jump_detects_cycles():
    with pytest.raises(CycleDetected):
        pointer_jump([1, 2, 0])
