"""Counting the cycles of a 2-regular graph in a constant number of rounds.

Sampled vertices walk out in both directions along the cycle until they reach
another sample. The samples and the walks between them form a much smaller
union of cycles that one machine can count. Cycles that got no sample at all
are caught afterwards: none of their vertices was passed by a walk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, ranks
from .errors import ComponentTooLarge, NotACycleGraph
from .graph import Graph
from .runtime import RoundPlan, Runtime

_I64 = np.int64
DEFAULT_SAMPLE_PROB = 1 / 64
MAX_DEPTH = 3


@dataclass
class SampleSearch:
    start: int
    hits: tuple  # sample reached by each of the two walks
    steps: tuple  # edges traversed by each walk


@dataclass
class TwoCycleResult:
    components: int
    samples: int
    longest_walk: int
    total_steps: int
    depth: int
    unsampled_cycles: int
    sample_prob: float = 0.0
    metrics: object = None
    levels: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "components": self.components,
            "samples": self.samples,
            "longest_walk": self.longest_walk,
            "total_steps": self.total_steps,
            "depth": self.depth,
            "unsampled_cycles": self.unsampled_cycles,
            "sample_prob": self.sample_prob,
        }


def cycle_arcs(g: Graph):
    """Directed arcs of a 2-regular graph and the arc following each one.

    Arc ``2i`` runs along edge ``i`` from ``src`` to ``dst``, arc ``2i+1`` back.
    Entering a vertex through one incidence, the walk leaves through the other.
    Returns ``(tail, succ)``.
    """
    if g.n and not np.all(g.degrees() == 2):
        raise NotACycleGraph("every vertex must have degree exactly 2")
    m = g.m
    tail = np.empty(2 * m, dtype=_I64)
    tail[0::2] = g.src
    tail[1::2] = g.dst
    # incidence slots: leaving arc and the arc that enters through the same slot
    out_arc = np.arange(2 * m, dtype=_I64)
    in_arc = out_arc ^ 1
    order = np.argsort(tail, kind="stable")
    a, b = order[0::2], order[1::2]  # the two slots of each vertex, paired up
    succ = np.empty(2 * m, dtype=_I64)
    succ[in_arc[a]] = out_arc[b]
    succ[in_arc[b]] = out_arc[a]
    return tail, succ


def _runtime(runtime, n):
    return runtime if runtime is not None else Runtime(max(n, 1))


def auto_sample_prob(n: int, quota: int) -> float:
    """``DEFAULT_SAMPLE_PROB`` unless walks of length ``~ln(n)/p`` would not fit the quota."""
    need = 4 * math.log(max(n, 2)) / max(quota, 1)
    return min(1.0, max(DEFAULT_SAMPLE_PROB, need))


def ampc_two_cycle(g: Graph, sample_prob: float | None = None,
                   runtime: Runtime | None = None, seed: int | None = None,
                   max_depth: int = MAX_DEPTH) -> TwoCycleResult:
    """Number of cycles in ``g`` (every vertex must have degree 2).

    ``sample_prob=None`` picks ``auto_sample_prob``. The graph is written once; everything after that is store lookups. When
    the sampled graph does not fit on one machine the search is repeated on
    it, at most ``max_depth`` times, before giving up with ComponentTooLarge.
    """
    tail, succ = cycle_arcs(g)
    rt = _runtime(runtime, g.n)
    if sample_prob is None:
        sample_prob = auto_sample_prob(g.n, rt.quota_limit)
    if not 0 < sample_prob <= 1:
        raise ValueError(f"sample_prob must lie in (0, 1], got {sample_prob}")
    start = rt.metrics.copy()
    seed = rt.config.seed if seed is None else seed
    rt.record_shuffle(g.m * 32, 2 * g.m, "write-cycle-graph")
    if sample_prob >= 1:
        # every vertex is a sample: the contracted graph is the input itself
        if g.m > rt.quota_limit:
            raise ComponentTooLarge(f"{g.n} vertices do not fit on one machine")
        ids = np.arange(g.n, dtype=_I64)
        c = _count_on_one_machine(g.n, ids, g.src, g.dst, rt)
        out = TwoCycleResult(c, g.n, 1 if g.n else 0, 2 * g.n, 1, 0, 1.0)
        out.metrics = rt.metrics.minus(start)
        return out
    out = _count(g.n, tail, succ, sample_prob, rt, seed, 1, max_depth)
    out.sample_prob = sample_prob
    out.metrics = rt.metrics.minus(start)
    return out


def _count(n, tail, succ, p, rt, seed, depth, max_depth) -> TwoCycleResult:
    ids = np.arange(n, dtype=_I64)
    sampled = ranks.coin(seed, ranks.VERTEX_SAMPLE, ids, p, salt=depth)
    samples = np.flatnonzero(sampled)
    k = len(samples)

    # both outgoing arcs of a sample go to the sample's machine
    plan = rt.plan(k, cost_per_item=2.0 / p)
    order_s, mach_s, starts = plan.arrange(samples)
    arcs_of = np.full((n, 2), -1, dtype=_I64)
    by_tail = np.argsort(tail, kind="stable")
    arcs_of[tail[by_tail[0::2]], 0] = by_tail[0::2]
    arcs_of[tail[by_tail[1::2]], 1] = by_tail[1::2]
    first_arc = arcs_of[order_s].reshape(-1)
    walk_starts = starts * 2
    stop = sampled[tail].astype(np.int8)
    end, steps, q, rec_off, rec = kernels.walk_batch(succ, stop, succ[first_arc], walk_starts,
                                                     rt.config.caching, True)
    hit = tail[end]
    per_sample_q = q[0::2] + q[1::2]
    rt.bulk_round("twocycle-search", plan, mach_s, per_sample_q,
                  np.full(k, 2, dtype=_I64), bytes_kv=int(q.sum()) * 24,
                  extra={"samples": int(k), "p": p, "depth": depth})

    visited = np.zeros(n, dtype=bool)
    visited[samples] = True
    visited[tail[rec]] = True
    unsampled = _cleanup(n, tail, succ, ~visited, rt)

    # one contracted edge per segment: keep the walk whose reverse starts later
    pred = np.empty_like(succ)
    pred[succ] = np.arange(len(succ), dtype=_I64)
    last = pred[end]
    keep = first_arc < (last ^ 1)
    src = np.repeat(order_s, 2)[keep]
    dst = hit[keep]
    longest = int(steps.max()) if len(steps) else 0
    total = int(steps.sum())
    level = {"depth": depth, "samples": int(k), "longest_walk": longest,
             "total_steps": total, "unsampled_cycles": unsampled}

    if len(src) <= rt.quota_limit:
        counted = _count_on_one_machine(k, samples, src, dst, rt)
        return TwoCycleResult(counted + unsampled, int(k), longest, total, depth, unsampled,
                              levels=[level])
    if depth >= max_depth:
        raise ComponentTooLarge(
            f"{k} samples do not fit on one machine (limit {rt.quota_limit}); "
            "lower sample_prob or raise max_depth")
    local = np.full(n, -1, dtype=_I64)
    local[samples] = np.arange(k, dtype=_I64)
    sub = Graph(k, local[src], local[dst], check=False)
    t2, s2 = cycle_arcs(sub)
    inner = _count(k, t2, s2, p, rt, seed, depth + 1, max_depth)
    inner.components += unsampled
    inner.unsampled_cycles += unsampled
    inner.samples = int(k)
    inner.longest_walk = max(longest, inner.longest_walk)
    inner.total_steps = total
    inner.levels = [level] + inner.levels
    return inner


def _cleanup(n, tail, succ, unvisited, rt) -> int:
    """Count the cycles through the ``unvisited`` vertices, which cover whole cycles.

    Each such vertex walks in one direction until it meets a smaller id or
    comes back to itself; only the smallest vertex of a cycle comes back.
    """
    verts = np.flatnonzero(unvisited)
    if not len(verts):
        return 0
    by_tail = np.argsort(tail, kind="stable")
    arc = np.empty(n, dtype=_I64)
    arc[tail[by_tail[0::2]]] = by_tail[0::2]
    plan = rt.plan(len(verts), cost_per_item=4.0)
    items, mach, starts = plan.arrange(verts)
    w = np.ones((len(succ), 1), dtype=_I64)
    end, _, q, _, _, _, _ = kernels.walk_min_batch(
        succ, tail, tail, w, np.zeros(len(succ), dtype=np.int8), arc[items], starts,
        rt.config.caching)
    leaders = int(np.sum(end == arc[items]))
    rt.bulk_round("twocycle-cleanup", plan, mach, q, (end == arc[items]).astype(_I64),
                  bytes_kv=int(q.sum()) * 24, extra={"vertices": int(len(verts))})
    return leaders


def _count_on_one_machine(k, samples, src, dst, rt) -> int:
    """Read the sampled graph onto one machine and count its cycles."""
    plan = RoundPlan(1)
    rt.bulk_round("twocycle-count", plan, np.zeros(1, dtype=_I64),
                  np.array([len(src)], dtype=_I64), np.ones(1, dtype=_I64),
                  bytes_kv=len(src) * 24)
    if not k:
        return 0
    local = np.full(int(samples.max()) + 1, -1, dtype=_I64)
    local[samples] = np.arange(k, dtype=_I64)
    parent = np.arange(k)
    a, b = local[src], local[dst]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = k
    for u, v in zip(a.tolist(), b.tolist()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def sample_searches(g: Graph, sample_prob: float = DEFAULT_SAMPLE_PROB, seed: int = 0):
    """Per-sample view of the first-level search, for inspection and tests."""
    tail, succ = cycle_arcs(g)
    sampled = ranks.coin(seed, ranks.VERTEX_SAMPLE, np.arange(g.n, dtype=_I64), sample_prob,
                         salt=1)
    out = []
    for s in np.flatnonzero(sampled).tolist():
        hits, steps = [], []
        for a in np.flatnonzero(tail == s).tolist():
            cur, c = int(succ[a]), 1
            while not sampled[tail[cur]]:
                cur = int(succ[cur])
                c += 1
            hits.append(int(tail[cur]))
            steps.append(c)
        out.append(SampleSearch(s, tuple(hits), tuple(steps)))
    return out
