"""Random-greedy MIS and maximal matching through local query processes.

Each vertex (or edge) decides its own status by recursively querying the
status of neighbours that come earlier in the random order, reading the
rank-sorted adjacency from the store. Answers equal the sequential greedy
outcome for the same ranks. Queries that run out of budget are retried in
the next iteration with the resolved part of the graph already recorded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import kernels, ranks
from .errors import IterationBudgetExceeded
from .graph import Graph
from .runtime import RunMetrics, Runtime

_I64 = np.int64


class MisState(IntEnum):
    UNKNOWN = 0  # also the answer of a truncated query
    IN_MIS = kernels.IN_SET
    NOT_IN_MIS = kernels.NOT_IN_SET


TRUNCATED = kernels.TRUNCATED


class EdgeState(IntEnum):
    TRUNCATED = kernels.TRUNCATED
    IN_MM = kernels.IN_SET
    NOT_IN_MM = kernels.NOT_IN_SET


FREE = -1
VERTEX_TRUNCATED = -2


def _rt(runtime, n) -> Runtime:
    return runtime if runtime is not None else Runtime(max(n, 1))


def _budget(rt: Runtime, budget):
    return rt.S if budget is None else int(budget)


# ----------------------------------------------------------------------
# MIS


@dataclass
class MisResult:
    in_set: np.ndarray  # boolean mask
    iterations: int
    metrics: RunMetrics
    truncated_per_iteration: list = field(default_factory=list)

    @property
    def vertices(self) -> np.ndarray:
        return np.flatnonzero(self.in_set)


def lower_adjacency(g: Graph, prio):
    """CSR of each vertex's earlier-priority neighbours in ascending priority."""
    prio = np.asarray(prio, dtype=_I64)
    a = np.concatenate([g.src, g.dst])
    b = np.concatenate([g.dst, g.src])
    keep = prio[b] < prio[a]
    a, b = a[keep], b[keep]
    order = np.lexsort((prio[b], a))
    off = np.zeros(g.n + 1, dtype=_I64)
    np.cumsum(np.bincount(a, minlength=g.n), out=off[1:])
    return off, b[order].copy()


def _ranges(starts, lens):
    """Concatenated ``arange(s, s + l)`` for every pair."""
    lens = np.asarray(lens, dtype=_I64)
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=_I64)
    return np.repeat(np.asarray(starts, dtype=_I64) - (np.cumsum(lens) - lens), lens) + \
        np.arange(total, dtype=_I64)


def _vertex_prio(g: Graph, rank, seed):
    return ranks.priorities(ranks.vertex_ranks(g.n, seed) if rank is None else np.asarray(rank))


def mis_query(g: Graph, v: int, rank=None, seed: int = 0, budget: int | None = None,
              known=None) -> MisState:
    """Status of ``v`` in the greedy MIS, or ``UNKNOWN`` if ``budget`` fetches do not suffice."""
    prio = _vertex_prio(g, rank, seed)
    off, nbr = lower_adjacency(g, prio)
    known = np.zeros(g.n, dtype=np.int8) if known is None else np.asarray(known, dtype=np.int8)
    b = g.n + 1 if budget is None else budget
    ans, _ = kernels.mis_batch(off, nbr, known, np.array([v], dtype=_I64),
                               np.array([0, 1], dtype=_I64), b, True)
    return MisState(int(ans[0]))


def ampc_mis(g: Graph, rank=None, eps: float | None = None, runtime: Runtime | None = None,
             budget: int | None = None, seed: int | None = None) -> MisResult:
    """Greedy MIS: one shuffle to write the rank-directed graph, then query rounds.

    Within a machine vertices are processed in ascending priority so later
    queries find earlier answers in the machine cache.
    """
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    seed = rt.config.seed if seed is None else seed
    prio = _vertex_prio(g, rank, seed)
    off, nbr = lower_adjacency(g, prio)
    n = g.n
    rt.record_shuffle(len(nbr) * 16 + n * 8, len(nbr) + n, "rank-directed-adjacency")
    if budget is None and eps is not None:
        budget = math.ceil(max(n, 1) ** eps)
    b = _budget(rt, budget)
    known = np.zeros(n, dtype=np.int8)
    cost = 1.0 + (g.m / n if n else 0.0)
    iterations = 0
    truncated = []
    live = np.arange(n, dtype=_I64)
    while len(live):
        iterations += 1
        if iterations > 1:
            # drop resolved vertices; a live vertex next to a member is out
            carried = n - len(live)
            nlow = off[live + 1] - off[live]
            plan = rt.plan(len(live), cost_per_item=cost, carry_pairs=carried)
            rt.bulk_round("mis-prune", plan, plan.assign(live), nlow,
                          np.ones(len(live), dtype=_I64), bytes_kv=int(nlow.sum()) * 9,
                          carry_count=carried)
            src = np.repeat(live, nlow)
            hit_member = np.zeros(n, dtype=bool)
            hit_member[src[known[nbr[_ranges(off[live], nlow)]] == MisState.IN_MIS]] = True
            known[live[hit_member[live]]] = MisState.NOT_IN_MIS
            live = live[known[live] == 0]
            keep = np.zeros(n, dtype=bool)
            keep[live] = True
            off, nbr = lower_adjacency(g.induced_subgraph(keep), prio)
            if not len(live):
                break
        carried = n - len(live)
        plan = rt.plan(len(live), cost_per_item=cost, carry_pairs=carried)
        items, mach, starts = plan.arrange(live, order_key=prio[live])
        ans, q = kernels.mis_batch(off, nbr, known, items, starts, b, rt.config.caching)
        done = ans != TRUNCATED
        rt.bulk_round("mis-query", plan, mach, q, done.astype(_I64),
                      bytes_kv=int(q.sum()) * (8 + 8 * max(1, int(cost))),
                      carry_count=carried, extra={"truncated": int((~done).sum())})
        known[items[done]] = ans[done]
        truncated.append(int((~done).sum()))
        live = np.sort(items[~done])
    return MisResult(known == MisState.IN_MIS, iterations, rt.metrics.minus(start), truncated)


# ----------------------------------------------------------------------
# maximal matching


@dataclass
class MatchingResult:
    edges: np.ndarray  # sorted matched edge ids
    mate: np.ndarray  # partner per vertex, -1 if unmatched
    iterations: int
    metrics: RunMetrics
    info: dict = field(default_factory=dict)


@dataclass
class Incidence:
    """Per-vertex incident edges in ascending edge priority."""

    off: np.ndarray
    edge: np.ndarray  # edge index
    other: np.ndarray
    posu: np.ndarray  # position of edge e in the list of src[e]
    posv: np.ndarray
    eprio: np.ndarray

    @property
    def deg(self) -> np.ndarray:
        return np.diff(self.off)


def incidence(g: Graph, eprio) -> Incidence:
    eprio = np.asarray(eprio, dtype=_I64)
    m = g.m
    a = np.concatenate([g.src, g.dst])
    b = np.concatenate([g.dst, g.src])
    idx = np.concatenate([np.arange(m, dtype=_I64)] * 2)
    order = np.lexsort((eprio[idx], a))
    off = np.zeros(g.n + 1, dtype=_I64)
    np.cumsum(np.bincount(a, minlength=g.n), out=off[1:])
    slot = np.empty(2 * m, dtype=_I64)
    slot[order] = np.arange(2 * m, dtype=_I64) - off[a[order]]
    return Incidence(off, idx[order].copy(), b[order].copy(), slot[:m].copy(), slot[m:].copy(),
                     eprio)


def _edge_prio(g: Graph, rank, seed):
    return ranks.priorities(ranks.edge_ranks(g.eid, seed) if rank is None else np.asarray(rank))


class MatchingState:
    """Stored matching records over the residual graph.

    ``mate`` is the partner of every vertex (-1 while unknown). The query
    processes run on the residual graph of edges whose endpoints are both
    unmatched; ``fin`` is the length of each vertex's incidence prefix known
    to be outside the matching.
    """

    def __init__(self, g: Graph, eprio):
        self.g = g
        self.eprio = np.asarray(eprio, dtype=_I64)
        self.mate = np.full(g.n, -1, dtype=_I64)
        self.sel = np.arange(g.m, dtype=_I64)
        self._build()

    def _build(self):
        g, sel = self.g, self.sel
        self.sub = Graph(g.n, g.src[sel], g.dst[sel], check=False)
        self.inc = incidence(self.sub, self.eprio[sel])
        self.fin = np.zeros(g.n, dtype=_I64)

    def run(self, items, is_edge, mstart, budget, caching, cutoff=None):
        sub, inc = self.sub, self.inc
        cutoff = self.g.m if cutoff is None else int(cutoff)
        return kernels.mm_batch(inc.off, inc.edge, inc.other, sub.src, sub.dst, inc.eprio,
                                inc.posu, inc.posv, self.mate, self.fin, cutoff,
                                np.asarray(items, dtype=_I64),
                                np.asarray(is_edge, dtype=np.int8), mstart, budget, caching)

    def apply_vertex_answers(self, items, answer, progress):
        matched = answer >= 0
        v = items[matched]
        u = answer[matched]
        self.mate[v] = u
        self.mate[u] = v
        rest = ~matched
        self.fin[items[rest]] = np.maximum(self.fin[items[rest]], progress[rest])

    def live_edges(self, cutoff=None) -> np.ndarray:
        """Mask over residual edges that are still undecided."""
        sub, inc = self.sub, self.inc
        live = (self.mate[sub.src] < 0) & (self.mate[sub.dst] < 0)
        live &= (inc.posu >= self.fin[sub.src]) & (inc.posv >= self.fin[sub.dst])
        if cutoff is not None:
            live &= inc.eprio < cutoff
        return live

    def needs_prune(self) -> bool:
        return not self.live_edges().all()

    def live_vertices(self, cutoff=None) -> np.ndarray:
        live = self.live_edges(cutoff)
        return np.unique(np.concatenate([self.sub.src[live], self.sub.dst[live]]))

    def prune(self, rt: Runtime | None = None):
        """Drop decided edges; every unmatched vertex reads its neighbours' records."""
        if rt is not None:
            free = self.mate < 0
            sub = self.sub
            touched = np.unique(np.concatenate([sub.src, sub.dst]))
            items = touched[free[touched]]
            if len(items):
                deg = np.diff(self.inc.off)[items] - self.fin[items]
                carried = self.g.n - len(items)
                plan = rt.plan(len(items), cost_per_item=1.0 + float(deg.mean()),
                               carry_pairs=carried)
                rt.bulk_round("mm-prune", plan, plan.assign(items), np.maximum(deg, 0),
                              np.ones(len(items), dtype=_I64), bytes_kv=int(deg.sum()) * 16,
                              carry_count=carried)
        self.sel = self.sel[self.live_edges()]
        self._build()

    def matched_edges(self) -> np.ndarray:
        g = self.g
        sel = (self.mate[g.src] == g.dst) & (self.mate[g.dst] == g.src)
        return np.sort(g.eid[sel])


def edge_query(g: Graph, e: int, rank=None, seed: int = 0, budget: int | None = None
               ) -> EdgeState:
    """Greedy-matching status of the edge at index ``e``."""
    st = MatchingState(g, _edge_prio(g, rank, seed))
    b = 2 * g.n + 2 if budget is None else budget
    ans, _, _ = st.run([e], [1], np.array([0, 1], dtype=_I64), b, True)
    return EdgeState(int(ans[0]))


def vertex_query(g: Graph, v: int, rank=None, seed: int = 0, budget: int | None = None):
    """Partner of ``v`` (>= 0), ``FREE`` or ``VERTEX_TRUNCATED``, plus the fetches used."""
    st = MatchingState(g, _edge_prio(g, rank, seed))
    b = 2 * g.n + 2 if budget is None else budget
    ans, _, q = st.run([v], [0], np.array([0, 1], dtype=_I64), b, True)
    return int(ans[0]), int(q[0])


def iteration_cap(eps: float, c: float = 4) -> int:
    return math.ceil(c / eps)


def _mm_rounds(rt: Runtime, st: MatchingState, items, budget, cutoff, name, cost):
    """One query round of vertex processes; returns the answers."""
    n = st.g.n
    carried = n - len(items)
    plan = rt.plan(len(items), cost_per_item=cost, carry_pairs=carried)
    items, mach, starts = plan.arrange(items)
    ans, prog, q = st.run(items, np.zeros(len(items), dtype=np.int8), starts, budget,
                          rt.config.caching, cutoff)
    writes = np.where(ans >= 0, 2, 1)
    rt.bulk_round(name, plan, mach, q, writes, bytes_kv=int(q.sum()) * 24,
                  carry_count=carried,
                  extra={"truncated": int((ans == VERTEX_TRUNCATED).sum())})
    st.apply_vertex_answers(items, ans, prog)
    return ans


def ampc_mm_constant(g: Graph, rank=None, eps: float | None = None,
                     runtime: Runtime | None = None, budget: int | None = None,
                     c: float = 4, seed: int | None = None) -> MatchingResult:
    """Greedy maximal matching by repeated budgeted vertex processes.

    Unsettled vertices keep the resolved prefix of their incidence list
    between iterations; iterations are capped at ``ceil(c / eps)``.
    """
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    eps = rt.config.eps if eps is None else eps
    seed = rt.config.seed if seed is None else seed
    st = MatchingState(g, _edge_prio(g, rank, seed))
    rt.record_shuffle(2 * g.m * 24 + g.n * 8, 2 * g.m + g.n, "rank-sorted-incidence")
    b = _budget(rt, budget)
    cap = iteration_cap(eps, c)
    cost = 1.0 + (2 * g.m / g.n if g.n else 0.0)
    iterations = 0
    items = st.live_vertices()
    while len(items):
        iterations += 1
        if iterations > cap:
            raise IterationBudgetExceeded(
                f"matching not finished after {cap} iterations ({len(items)} live vertices)")
        if st.needs_prune():
            st.prune(rt)
            items = st.live_vertices()
        _mm_rounds(rt, st, items, b, None, "mm-vertex-query", cost)
        items = st.live_vertices()
    return MatchingResult(st.matched_edges(), st.mate, iterations, rt.metrics.minus(start))


def loglog_rounds(max_degree: int) -> int:
    if max_degree < 2:
        return 1
    return math.ceil(math.log2(max(math.log2(max_degree), 1.0))) + 1


def prefix_threshold(max_degree: int, i: int) -> float:
    """Normalized-rank cutoff of iteration ``i`` (1-based)."""
    return float(max_degree) ** (-(0.5 ** i))


def ampc_mm_loglog(g: Graph, rank=None, runtime: Runtime | None = None,
                   budget: int | None = None, seed: int | None = None) -> MatchingResult:
    """Greedy maximal matching over growing rank prefixes.

    While the residual graph has large degree, iteration ``i`` only looks at
    edges whose normalized rank is at most ``Delta ** (-0.5 ** i)``; the
    union of the prefix matchings is the greedy matching of the whole graph.
    """
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    seed = rt.config.seed if seed is None else seed
    if rank is None:
        rank = ranks.edge_ranks(g.eid, seed)
    rank = np.asarray(rank)
    eprio = ranks.priorities(rank)
    st = MatchingState(g, eprio)
    rt.record_shuffle(2 * g.m * 24 + g.n * 8, 2 * g.m + g.n, "rank-sorted-incidence")
    b = _budget(rt, budget)
    n = g.n
    delta = g.max_degree()
    k = loglog_rounds(delta)
    dense_limit = 10 * math.log2(max(n, 2))
    if rank.dtype == np.uint64:
        norm = rank.astype(np.float64) / float(2**64)
    else:
        norm = (eprio + 0.5) / max(g.m, 1)
    # priority of the first edge above each threshold
    norm_sorted = np.sort(norm)
    degrees = []
    thresholds = []
    iterations = 0
    cost = 1.0 + (2 * g.m / n if n else 0.0)
    for i in range(1, k + 2):
        free = st.mate < 0
        alive = free[g.src] & free[g.dst]
        if not alive.any():
            break
        deg_i = int(np.bincount(np.concatenate([g.src[alive], g.dst[alive]]), minlength=n).max())
        final = i > k
        if not final and deg_i > dense_limit:
            t = prefix_threshold(delta, i)
            cutoff = int(np.searchsorted(norm_sorted, t, side="right"))
        else:
            t = 1.0
            cutoff = g.m
        degrees.append(deg_i)
        thresholds.append(t)
        iterations += 1
        # greedy matching of the prefix, by repeated vertex processes
        while True:
            items = st.live_vertices(cutoff)
            if not len(items):
                break
            if st.needs_prune():
                st.prune(rt)
                items = st.live_vertices(cutoff)
            _mm_rounds(rt, st, items, b, cutoff, f"mm-prefix-{i}", cost)
        if cutoff == g.m:
            break
    return MatchingResult(st.matched_edges(), st.mate, iterations, rt.metrics.minus(start),
                          {"k": k, "max_degree": degrees, "thresholds": thresholds})
