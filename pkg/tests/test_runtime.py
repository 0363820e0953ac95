import json

import numpy as np
import pytest

from ampcsim.errors import ConfigError, QuotaExceeded, StoreFrozen
from ampcsim.runtime import (ArrayTable, RoundPlan, RunMetrics, Runtime, decode_key,
                             encode_key, lookup, sizeof)


def _write_round(rt, pairs):
    def body(ctx, read, write):
        if ctx.machine_id == 0:
            for k, v in pairs:
                write.write(k, v)
    return rt.run_round(RoundPlan(1), body, name="load")


def test_reads_see_only_the_previous_store():
    rt = Runtime(16)
    _write_round(rt, [(b"a", 1)])
    seen = {}

    def body(ctx, read, write):
        write.write(b"b", 2)
        seen["b"] = ctx.lookup(b"b")
        seen["a"] = ctx.lookup(b"a")

    rt.run_round(RoundPlan(1), body)
    assert seen == {"b": [], "a": [1]}
    assert rt.current.get(b"b") == [2]


def test_quota_boundary():
    rt = Runtime(16, space=16, quota_slack=1)

    def body(ctx, read, write):
        for i in range(17):
            ctx.lookup(encode_key(1, i))

    with pytest.raises(QuotaExceeded):
        rt.run_round(RoundPlan(1), body)
    assert rt.quota_events == 1

    ok = Runtime(16, space=16, quota_slack=1)
    ok.run_round(RoundPlan(1), lambda ctx, r, w: [ctx.lookup(encode_key(1, i)) for i in range(16)])
    assert ok.metrics.total_queries == 16


def test_counters_add_up_over_machines():
    rt = Runtime(100)
    before = rt.metrics.total_queries

    def body(ctx, read, write):
        for i in range(3 if ctx.machine_id == 0 else 5):
            ctx.lookup(encode_key(2, ctx.machine_id, i))

    rt.run_round(RoundPlan(2), body)
    assert rt.metrics.total_queries - before == 8
    assert rt.metrics.max_machine_comm_per_round >= 5
    assert rt.tally_matches()


def test_lookup_absent_key_and_caching():
    rt = Runtime(10)
    _write_round(rt, [(b"k", "v")])
    counts = {}

    def body(ctx, read, write):
        assert lookup(ctx, read, b"missing") == []
        counts["after_miss"] = ctx.queries_used
        first = ctx.lookup(b"k")
        second = ctx.lookup(b"k")
        assert first == second == ["v"]
        counts["after_repeat"] = ctx.queries_used

    rt.run_round(RoundPlan(1), body)
    assert counts == {"after_miss": 1, "after_repeat": 2}


def test_lookup_without_caching_counts_every_call():
    rt = Runtime(10, caching=False)
    _write_round(rt, [(b"k", 1)])
    used = []
    rt.run_round(RoundPlan(1), lambda ctx, r, w: (
        [ctx.lookup(b"k") for _ in range(7)], used.append(ctx.queries_used)))
    assert used == [7]


def test_cache_is_per_machine():
    rt = Runtime(10)
    _write_round(rt, [(b"k", 1)])
    used = {}

    def body(ctx, read, write):
        ctx.lookup(b"k")
        ctx.lookup(b"k")
        used[ctx.machine_id] = ctx.queries_used

    rt.run_round(RoundPlan(3), body)
    assert used == {0: 1, 1: 1, 2: 1}


def test_shuffle_groups_and_counts():
    rt = Runtime(10)
    out = rt.shuffle([("a", 1), ("b", 2), ("a", 3)])
    assert out == {"a": [1, 3], "b": [2]}
    assert rt.metrics.shuffles == 1
    assert rt.shuffle([]) == {}
    assert rt.metrics.shuffles == 2
    before = rt.metrics.bytes_shuffled
    items = [(i, i * 10) for i in range(20)]
    out = rt.shuffle(items)
    assert all(len(v) == 1 for v in out.values()) and len(out) == 20
    assert rt.metrics.bytes_shuffled - before == sum(sizeof(k) + sizeof(v) for k, v in items)


def test_frozen_store_required():
    rt = Runtime(4)
    rt.current.frozen = False
    with pytest.raises(StoreFrozen):
        rt.run_round(RoundPlan(1), lambda ctx, r, w: None)


def test_keys_round_trip():
    k = encode_key(7, 3, 5)
    ns, payload = decode_key(k)
    assert ns == 7 and len(payload) == 16
    assert encode_key(1, 2) != encode_key(2, 2)


def test_config_validation():
    for bad in ({"eps": 0}, {"eps": 1.5}, {"space": 1}, {"quota_slack": 0}, {"machines": 0},
                {"prim_truncation": "x"}):
        with pytest.raises(ConfigError):
            Runtime(10, **bad)


def test_space_defaults_to_n_power_eps():
    assert Runtime(10_000).S == 100
    assert Runtime(10_000, eps=0.25).S == 10
    assert Runtime(10_000, space=7).S == 7
    assert Runtime(10_000).quota_limit == 800


def test_metrics_json_round_trip():
    m = RunMetrics(3, 1, 10, 4, 7, 100, 40)
    data = json.loads(m.dumps())
    assert set(data) == {"rounds", "shuffles", "total_queries", "total_writes",
                         "max_machine_comm", "bytes_shuffled", "bytes_kv"}
    assert RunMetrics.from_json(data) == m


def test_determinism_of_rounds_and_threads():
    def run(threads):
        rt = Runtime(64, threads=threads)
        _write_round(rt, [(encode_key(1, i), i * i) for i in range(64)])

        def body(ctx, read, write):
            for v in ctx.items:
                write.write(encode_key(2, v), sum(ctx.lookup(encode_key(1, v))))

        rt.run_round(rt.plan(64), body, items=np.arange(64))
        return rt.metrics, sorted(rt.current.entries.items())

    assert run(1) == run(4)


def test_array_table_fetch_row_charges_once_with_cache():
    rt = Runtime(9)
    table = ArrayTable([0, 2, 2, 5], nbr=np.array([1, 2, 0, 1, 2]))

    def load(ctx, read, write):
        write.put_table("adj", table)

    rt.run_round(RoundPlan(1), load)
    used = []

    def body(ctx, read, write):
        assert ctx.fetch_row("adj", 2)["nbr"].tolist() == [0, 1, 2]
        ctx.fetch_row("adj", 2)
        used.append(ctx.queries_used)

    rt.run_round(RoundPlan(1), body)
    assert used == [1]


def test_bulk_round_enforces_quota():
    rt = Runtime(100, space=10, quota_slack=1)
    plan = RoundPlan(2)
    rt.bulk_round("ok", plan, [0, 1], [10, 10])
    with pytest.raises(QuotaExceeded):
        rt.bulk_round("bad", plan, [0, 0], [6, 5])


def test_plan_assignment_is_stable():
    p = RoundPlan(5, salt=3, seed=1)
    ids = np.arange(100)
    assert np.array_equal(p.assign(ids), p.assign(ids))
    items, mach, starts = p.arrange(ids)
    assert sorted(items.tolist()) == ids.tolist()
    assert np.all(np.diff(mach) >= 0) and starts[-1] == 100
