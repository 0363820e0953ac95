"""Minimum spanning forest and connectivity on the simulator.

Edges are compared by the strict total order ``(weight, eid)`` throughout, so
every variant returns exactly the same edge set as Kruskal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import kernels, ranks
from .errors import InvalidSize
from .graph import ContractionMap, Graph, TernarizedGraph, contract_graph, ternarize
from .listrank import forest_connectivity, rank_cycles, shrink  # noqa: F401  (re-exported)
from .runtime import RunMetrics, Runtime
from .tree import (
    NEUTRAL, build_hld, build_pivots, euler_tour, lca, level_rmq, path_max, pointer_jump,
    root_forest,
)

_I64 = np.int64
_EDGE_BYTES = 32  # (src, dst, weight, eid)


class StopReason(IntEnum):
    EXPLORED = kernels.EXPLORED
    COMPONENT_DONE = kernels.COMPONENT_DONE
    HIT_LOWER_RANK = kernels.HIT_LOWER


class FlightLabel(IntEnum):
    CROSS_COMPONENT = 0
    LIGHT = 1
    HEAVY = 2


@dataclass
class PrimSearchResult:
    owner: int
    discovered_msf_edges: list
    stop_reason: StopReason
    visited: list | None
    hit: int = -1


@dataclass
class PrimOutcome:
    """Everything one round of truncated searches produced."""

    msf_edges: np.ndarray  # edge indices of the searched graph, sorted
    contracted: Graph  # eid = edge index in the searched graph, weight = order key
    rep: ContractionMap
    stop: np.ndarray
    hit: np.ndarray
    explored: np.ndarray
    queries: np.ndarray  # per searching vertex
    limit: int
    metrics: RunMetrics
    _msf_off: np.ndarray = field(repr=False, default=None)
    _msf_idx: np.ndarray = field(repr=False, default=None)
    _vis_off: np.ndarray = field(repr=False, default=None)
    _vis: np.ndarray = field(repr=False, default=None)

    @property
    def total_queries(self) -> int:
        return int(self.queries.sum())

    def search(self, v: int) -> PrimSearchResult:
        a, b = self._msf_off[v], self._msf_off[v + 1]
        visited = None
        if self._vis is not None:
            visited = [v] + self._vis[self._vis_off[v]:self._vis_off[v + 1]].tolist()
            if self.hit[v] >= 0:
                visited.append(int(self.hit[v]))
        return PrimSearchResult(v, self._msf_idx[a:b].tolist(), StopReason(int(self.stop[v])),
                                visited, int(self.hit[v]))


@dataclass
class MsfResult:
    edges: np.ndarray  # sorted input edge ids
    total_weight: int
    components: ContractionMap
    metrics: RunMetrics | None = None
    info: dict = field(default_factory=dict)

    @property
    def num_components(self) -> int:
        return self.components.num_classes()


@dataclass
class FlightResult:
    label: np.ndarray  # FlightLabel per edge of g
    threshold: np.ndarray  # order key of the heaviest F edge on the path; -1 for cross edges

    @property
    def keep(self) -> np.ndarray:
        return self.label != FlightLabel.HEAVY


def _rt(runtime, n) -> Runtime:
    return runtime if runtime is not None else Runtime(max(n, 1))


def _keyed(g: Graph, keys) -> Graph:
    """Copy of ``g`` weighted by unique order keys with eid = edge index."""
    return Graph(g.n, g.src, g.dst, np.asarray(keys, dtype=_I64), np.arange(g.m, dtype=_I64),
                 check=False)


def _sorted_csr(g: Graph, keys):
    kg = _keyed(g, keys)
    off, nbr, eidx = kg.adjacency()
    return off, nbr, eidx, np.asarray(keys, dtype=_I64)[eidx]


def _book_contraction(rt: Runtime, g: Graph, out: Graph, name: str, final=None):
    """Two shuffles: relabel endpoints, then dedupe parallel edges."""
    rt.record_shuffle(g.m * _EDGE_BYTES + g.n * 16, g.m + g.n, f"{name}-relabel")
    extra = "" if final is None else "+" + final
    rt.record_shuffle(g.m * _EDGE_BYTES, out.m, f"{name}-dedupe{extra}")


# ----------------------------------------------------------------------
# truncated Prim


def prim_limit(n: int, eps: float, by_queries: bool = False) -> int:
    n = max(n, 2)
    return math.ceil(n ** eps) if by_queries else math.ceil(n ** (eps / 2))


def truncated_prim(tg: TernarizedGraph, vertex_rank=None, eps: float | None = None,
                   runtime: Runtime | None = None, keep_visits: bool = False,
                   limit: int | None = None) -> PrimOutcome:
    """One truncated Prim search per vertex, then contraction of the hit forest.

    A search from ``v`` grows Prim's tree over the store-resident adjacency and
    stops when it has explored the vertex limit, when the component is
    exhausted, or when it reaches a vertex of lower rank. Vertices are then
    merged along ``v -> hit`` pointers.
    """
    g = tg.base
    n = g.n
    rt = _rt(runtime, n)
    eps = rt.config.eps if eps is None else eps
    start = rt.metrics.copy()
    keys = tg.msf_keys()
    if vertex_rank is None:
        vertex_rank = ranks.vertex_ranks(n, rt.config.seed)
    prio = ranks.priorities(np.asarray(vertex_rank))
    by_queries = rt.config.prim_truncation == "queries"
    if limit is None:
        limit = prim_limit(n, eps, by_queries)
    off, nbr, eidx, ekey = _sorted_csr(g, keys)

    plan = rt.plan(n, cost_per_item=max(1.0, math.log(max(n, 2))))
    items, mach, starts = plan.arrange(np.arange(n, dtype=_I64))
    stop, hit, explored, q, msf_off, msf_pos, vis_off, vis = kernels.prim_batch(
        off, nbr, ekey, prio, items, starts, limit, by_queries, keep_visits, rt.config.caching)
    nfound = np.diff(msf_off)
    rt.bulk_round("truncated-prim", plan, mach, q, 1 + nfound,
                  bytes_kv=int(q.sum()) * 3 * 24,
                  extra={"limit": limit, "explored_max": int(explored.max(initial=0))})

    # results indexed by vertex
    inv = np.empty(n, dtype=_I64)
    inv[items] = np.arange(n, dtype=_I64)
    msf_idx_by_item = eidx[msf_pos]
    order = np.argsort(items, kind="stable")
    lens = nfound[order]
    m_off = np.zeros(n + 1, dtype=_I64)
    np.cumsum(lens, out=m_off[1:])
    take = np.repeat(msf_off[:-1][order], lens) + _ranges(lens)
    msf_by_v = msf_idx_by_item[take]
    v_vis_off = v_vis = None
    if keep_visits:
        vl = np.diff(vis_off)[order]
        v_vis_off = np.zeros(n + 1, dtype=_I64)
        np.cumsum(vl, out=v_vis_off[1:])
        v_vis = vis[np.repeat(vis_off[:-1][order], vl) + _ranges(vl)]

    stop, hit, explored, q = stop[inv], hit[inv], explored[inv], q[inv]
    parent = np.where(stop == kernels.HIT_LOWER, hit, np.arange(n, dtype=_I64))
    cm = pointer_jump(parent, rt, name="contract-forest")
    contracted = contract_graph(_keyed(g, keys), cm.rep, drop_isolated=True)
    _book_contraction(rt, g, contracted, "prim-contract")
    return PrimOutcome(np.unique(msf_by_v), contracted, cm, stop, hit, explored, q, limit,
                       rt.metrics.minus(start), m_off, msf_by_v, v_vis_off, v_vis)


def _ranges(cnt):
    cnt = np.asarray(cnt, dtype=_I64)
    total = int(cnt.sum())
    if total == 0:
        return np.zeros(0, dtype=_I64)
    return np.arange(total, dtype=_I64) - np.repeat(np.cumsum(cnt) - cnt, cnt)


# ----------------------------------------------------------------------
# dense MSF: Boruvka phases, then one machine


def _kruskal_local(n: int, src, dst, keys):
    """Kruskal over unique keys; returns (chosen edge indices, component roots)."""
    parent = np.arange(n, dtype=_I64).tolist()

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    s, d = np.asarray(src).tolist(), np.asarray(dst).tolist()
    for i in np.argsort(keys, kind="stable").tolist():
        a, b = find(s[i]), find(d[i])
        if a != b:
            if a < b:
                a, b = b, a
            parent[a] = b
            chosen.append(i)
    roots = np.array([find(v) for v in range(n)], dtype=_I64)
    return np.array(chosen, dtype=_I64), roots


@dataclass
class DenseResult:
    edges: np.ndarray  # eids of the input graph
    rep: np.ndarray  # per input vertex: a representative input vertex of its component
    phases: int


def dense_msf(g: Graph, runtime: Runtime | None = None, threshold: int | None = None,
              final_label: str | None = None) -> DenseResult:
    """Min-edge contraction phases while the graph is large, then Kruskal on one machine."""
    rt = _rt(runtime, g.n)
    if threshold is None:
        threshold = rt.config.small_threshold
    cur = g
    to_cur = np.arange(g.n, dtype=_I64)  # input vertex -> vertex of ``cur``
    picked = []
    phases = 0
    while cur.m > threshold:
        phases += 1
        key = cur.order_keys()
        n, m = cur.n, cur.m
        a = np.concatenate([cur.src, cur.dst])
        b = np.concatenate([cur.dst, cur.src])
        k2 = np.concatenate([key, key])
        best = np.full(n, m, dtype=_I64)
        np.minimum.at(best, a, k2)
        edge_of_key = np.empty(m, dtype=_I64)
        edge_of_key[key] = np.arange(m, dtype=_I64)
        has = best < m
        vs = np.flatnonzero(has)
        e = edge_of_key[best[vs]]
        other = np.where(cur.src[e] == vs, cur.dst[e], cur.src[e])
        parent = np.arange(n, dtype=_I64)
        parent[vs] = other
        mutual = parent[parent] == np.arange(n)
        parent[mutual & (np.arange(n) < parent)] = np.flatnonzero(mutual & (np.arange(n) < parent))
        picked.append(cur.eid[np.unique(e)])
        rt.record_shuffle(2 * m * _EDGE_BYTES, 2 * m, "min-edge")
        cm = pointer_jump(parent, rt, name="min-edge-chase")
        nxt = contract_graph(cur, cm.rep)
        _book_contraction(rt, cur, nxt, "min-edge-contract")
        to_cur = np.searchsorted(nxt.labels, cm.rep[to_cur])
        cur = nxt
    chosen, roots = _kruskal_local(cur.n, cur.src, cur.dst, cur.order_keys())
    if final_label is None:
        rt.record_shuffle(cur.m * _EDGE_BYTES, cur.m, "finish-one-machine")
    picked.append(cur.eid[chosen])
    comp_cur = roots[to_cur]
    # representative input vertex: smallest member of each class
    low = np.full(cur.n, g.n, dtype=_I64)
    np.minimum.at(low, comp_cur, np.arange(g.n, dtype=_I64))
    rep = low[comp_cur]
    edges = np.unique(np.concatenate(picked)) if picked else np.zeros(0, dtype=_I64)
    return DenseResult(edges, rep, phases)


# ----------------------------------------------------------------------
# MSF driver


def _as_weighted(g: Graph) -> Graph:
    if g.weight is None:
        return g.with_weights(np.zeros(g.m, dtype=_I64))
    return g


def _weight_of(g: Graph, eids) -> int:
    if g.weight is None or not len(eids):
        return 0
    return int(g.weight[g.edge_index_of(eids)].sum())


def msf(g: Graph, eps: float | None = None, runtime: Runtime | None = None) -> MsfResult:
    """Minimum spanning forest with components.

    Sparse inputs are ternarized, shrunk by truncated Prim searches and
    finished by :func:`dense_msf`; dense inputs go to :func:`dense_msf` directly.
    """
    g = _as_weighted(g)
    n, m = g.n, g.m
    rt = _rt(runtime, n)
    eps = rt.config.eps if eps is None else eps
    start = rt.metrics.copy()
    info = {}
    if n == 0:
        return MsfResult(np.zeros(0, dtype=_I64), 0, ContractionMap(np.zeros(0, dtype=_I64)),
                         rt.metrics.minus(start), info)
    if m >= n ** (1 + eps / 2):
        info["branch"] = "dense"
        d = dense_msf(g, rt)
        edges = np.sort(d.edges)
        comp = d.rep
    else:
        info["branch"] = "sparse"
        tg = ternarize(g)
        base = tg.base
        rt.record_shuffle(base.m * _EDGE_BYTES, 2 * base.m, "write-ternarized")
        out = truncated_prim(tg, eps=eps, runtime=rt)
        c = out.contracted
        d = dense_msf(c, rt)
        idx = np.union1d(out.msf_edges, d.edges)
        idx = idx[~tg.is_dummy[idx]]
        edges = np.sort(tg.orig_eid[idx])
        # compose: base vertex -> prim root -> dense representative -> input vertex
        r = out.rep.rep
        pos = np.searchsorted(c.labels, r)
        pos = np.minimum(pos, max(c.n - 1, 0))
        inside = (c.n > 0) & (c.labels[pos] == r) if c.n else np.zeros(len(r), dtype=bool)
        comp_base = r.copy()
        if c.n:
            comp_base[inside] = c.labels[d.rep[pos[inside]]]
        comp = tg.origin[comp_base[:n]]
        plan = rt.plan(n, cost_per_item=2)
        two = np.full(n, 2, dtype=_I64)
        rt.bulk_round("component-labels", plan, plan.assign(np.arange(n)), two,
                      np.ones(n, dtype=_I64))
        info.update(prim_limit=out.limit, prim_queries=out.total_queries,
                    contracted_n=c.n, contracted_m=c.m, base_n=base.n,
                    dense_phases=d.phases)
    cm = ContractionMap(comp, rounds=rt.metrics.rounds - start.rounds)
    cm = ContractionMap(cm.canonical(), cm.rounds)
    return MsfResult(edges, _weight_of(g, edges), cm, rt.metrics.minus(start), info)


# ----------------------------------------------------------------------
# light-edge filtering


def find_light_edges(g: Graph, f: Graph, runtime: Runtime | None = None) -> FlightResult:
    """Label every edge of ``g`` against the forest ``f`` (a subgraph of ``g``).

    An edge is light when its order key is at most the heaviest key on the
    forest path between its endpoints; edges across forest components are
    labelled separately and count as light.
    """
    keys = g.order_keys()
    fk = keys[g.edge_index_of(f.eid)]
    rf = root_forest(f, runtime, keys=fk)
    et = euler_tour(rf)
    n = g.n
    if runtime is not None:
        runtime.record_shuffle(n * 24, n, "hld-sizes")
        runtime.record_shuffle(n * 24, n, "hld-paths")
    lrmq = level_rmq(rf, et)
    hld = build_hld(rf)
    piv = build_pivots(rf, hld)
    if runtime is not None:
        plen = np.diff(piv.offsets)
        plan = runtime.plan(n, cost_per_item=2 * float(plen.mean()) if n else 1.0)
        runtime.bulk_round("pivots", plan, plan.assign(np.arange(n)), 2 * plen, plen)
    u, v = g.src, g.dst
    cross = rf.component_id[u] != rf.component_id[v]
    label = np.full(g.m, FlightLabel.CROSS_COMPONENT, dtype=np.int8)
    thr = np.full(g.m, -1, dtype=_I64)
    same = np.flatnonzero(~cross)
    if len(same):
        a = lca(rf, et, lrmq, u[same], v[same])
        t = np.maximum(path_max(u[same], a, rf, hld, piv, check=False),
                       path_max(v[same], a, rf, hld, piv, check=False))
        thr[same] = t
        label[same] = np.where(keys[same] <= t, FlightLabel.LIGHT, FlightLabel.HEAVY)
    if runtime is not None:
        plan = runtime.plan(g.m, cost_per_item=12)
        runtime.bulk_round("classify-edges", plan, plan.assign(g.eid), np.full(g.m, 12),
                           np.ones(g.m, dtype=_I64))
    return FlightResult(label, thr)


def kkt_sample_prob(n: int) -> float:
    return 1.0 / max(2, math.ceil(math.log2(max(n, 2))))


def kkt_msf(g: Graph, runtime: Runtime | None = None, sample_prob: float | None = None,
            eps: float | None = None) -> MsfResult:
    """MSF through a sampled forest: only edges light against it can be in the answer."""
    if g.n < 2:
        raise InvalidSize("need at least two vertices")
    g = _as_weighted(g)
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    p = kkt_sample_prob(g.n) if sample_prob is None else sample_prob
    mask = ranks.coin(rt.config.seed, ranks.EDGE_SAMPLE, g.eid, p)
    h = g.edge_subgraph(mask)
    fres = msf(h, eps, rt)
    f = g.edge_subgraph(np.isin(g.eid, fres.edges))
    fl = find_light_edges(g, f, rt)
    light = g.edge_subgraph(fl.keep)
    res = msf(light, eps, rt)
    res.metrics = rt.metrics.minus(start)
    res.info.update(sample_prob=p, sampled_edges=h.m, light_edges=light.m)
    return res


# ----------------------------------------------------------------------
# single-search variant without ternarization


def msf_empirical(g: Graph, runtime: Runtime | None = None,
                  limit: int | None = None, max_stages: int = 1) -> MsfResult:
    """Practical pipeline: one search round, visitor-based contraction, one-machine finish.

    Each search stops after examining ``limit`` edges (default ``S``). Every
    vertex points to the highest-priority search that reached it (or to the
    lower-rank vertex its own search hit); those pointers are chased and the
    graph contracted. With ``max_stages > 1`` the stage repeats while the
    contracted graph is larger than the small-graph threshold; whatever is
    left after the last stage is finished on one machine.
    """
    g = _as_weighted(g)
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    keys0 = g.order_keys()
    cur = _keyed(g, keys0)  # eid = input edge index
    to_cur = np.arange(g.n, dtype=_I64)
    picked = []
    stages = 0
    threshold = rt.config.small_threshold
    while True:
        stages += 1
        n, m = cur.n, cur.m
        lim = rt.S if limit is None else limit
        off, nbr, eidx, ekey = _sorted_csr(cur, cur.weight)
        rt.record_shuffle(2 * m * _EDGE_BYTES, 2 * m, "write-sorted-adjacency")
        prio = ranks.priorities(ranks.vertex_ranks(n, rt.config.seed + stages - 1))
        plan = rt.plan(n, cost_per_item=max(1.0, math.log(max(n, 2))))
        items, mach, starts = plan.arrange(np.arange(n, dtype=_I64))
        stop, hit, explored, q, msf_off, msf_pos, vis_off, vis = kernels.prim_batch(
            off, nbr, ekey, prio, items, starts, lim, True, True, rt.config.caching)
        nvis = np.diff(vis_off)
        rt.bulk_round("search", plan, mach, q, 1 + np.diff(msf_off) + nvis,
                      bytes_kv=int(q.sum()) * 3 * 24)
        picked.append(cur.eid[eidx[msf_pos]])
        # candidate parents: every visitor, plus the vertex a search stopped at
        visitor = np.repeat(items, nvis)
        cand_child = np.concatenate([vis, items[stop == kernels.HIT_LOWER]])
        cand_par = np.concatenate([visitor, hit[stop == kernels.HIT_LOWER]])
        best = np.full(n, n, dtype=_I64)  # best priority position seen
        np.minimum.at(best, cand_child, prio[cand_par])
        vertex_at = np.empty(n, dtype=_I64)
        vertex_at[prio] = np.arange(n, dtype=_I64)
        parent = np.arange(n, dtype=_I64)
        got = best < n
        parent[got] = vertex_at[best[got]]
        rt.record_shuffle(len(cand_child) * 16, len(cand_child), "group-visitors")
        rt.record_shuffle(n * 16, n, "write-visitor-map")
        cm = pointer_jump(parent, rt, name="visitor-chase")
        nxt = contract_graph(cur, cm.rep, drop_isolated=False)
        to_cur = np.searchsorted(nxt.labels, cm.rep[to_cur])
        done = nxt.m <= threshold or stages >= max_stages
        _book_contraction(rt, cur, nxt, "visitor-contract", final="finish" if done else None)
        cur = nxt
        if done:
            break
    chosen, roots = _kruskal_local(cur.n, cur.src, cur.dst, cur.weight)
    picked.append(cur.eid[chosen])
    idx = np.unique(np.concatenate(picked))
    edges = np.sort(g.eid[idx])
    comp = roots[to_cur]
    low = np.full(cur.n, g.n, dtype=_I64)
    np.minimum.at(low, comp, np.arange(g.n, dtype=_I64))
    cm = ContractionMap(low[comp], rounds=rt.metrics.rounds - start.rounds)
    return MsfResult(edges, _weight_of(g, edges), cm, rt.metrics.minus(start),
                     {"stages": stages, "contracted_n": cur.n, "contracted_m": cur.m})


# ----------------------------------------------------------------------
# connectivity


def connectivity(g: Graph, runtime: Runtime | None = None,
                 eps: float | None = None) -> ContractionMap:
    """Component labels (smallest vertex id per component)."""
    rt = _rt(runtime, g.n)
    if g.weight is None:
        g = g.with_weights(g.eid.copy())
    res = msf(g, eps, rt)
    f = g.edge_subgraph(np.isin(g.eid, res.edges))
    return forest_connectivity(f, rt)


__all__ = [
    "FlightLabel", "FlightResult", "MsfResult", "PrimOutcome", "PrimSearchResult",
    "StopReason", "connectivity", "dense_msf", "find_light_edges", "forest_connectivity",
    "kkt_msf", "msf", "msf_empirical", "prim_limit", "rank_cycles", "shrink",
    "truncated_prim", "NEUTRAL",
]
