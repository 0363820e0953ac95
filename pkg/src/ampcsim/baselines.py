"""MPC baselines: every step is a shuffle, nothing is read from the store."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import ranks
from .errors import NotACycleGraph
from .graph import ContractionMap, Graph, contract_graph
from .matching import MatchingResult, MisResult
from .msf import MsfResult, _as_weighted, _kruskal_local, _weight_of
from .runtime import Runtime

_I64 = np.int64
_BIG = np.iinfo(_I64).max


@dataclass
class PhaseRecord:
    phase: int
    live_vertices: int
    live_edges: int
    shuffles: int
    extra: dict = field(default_factory=dict)


@dataclass
class PhaseLog:
    phases: list = field(default_factory=list)

    def add(self, phase, live_vertices, live_edges, shuffles, **extra):
        self.phases.append(PhaseRecord(phase, int(live_vertices), int(live_edges), shuffles,
                                       extra))

    def __len__(self):
        return len(self.phases)

    def to_json(self) -> list:
        return [asdict(p) for p in self.phases]


def _rt(runtime, n) -> Runtime:
    return runtime if runtime is not None else Runtime(max(n, 1))


def _threshold(rt, small_threshold):
    return rt.config.small_threshold if small_threshold is None else small_threshold


def _csr(n, src, dst):
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    order = np.argsort(a, kind="stable")
    off = np.zeros(n + 1, dtype=_I64)
    np.cumsum(np.bincount(a, minlength=n), out=off[1:])
    return off, b[order]


# ----------------------------------------------------------------------
# MIS and matching by local minima


def mpc_mis_rootset(g: Graph, rank=None, small_threshold: int | None = None,
                    runtime: Runtime | None = None, seed: int | None = None):
    """Greedy MIS by phases of local minima. Returns ``(MisResult, PhaseLog)``."""
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    thr = _threshold(rt, small_threshold)
    seed = rt.config.seed if seed is None else seed
    n = g.n
    prio = ranks.priorities(ranks.vertex_ranks(n, seed) if rank is None else np.asarray(rank))
    live = np.ones(n, dtype=bool)
    in_set = np.zeros(n, dtype=bool)
    log = PhaseLog()
    phase = 0
    while live.any():
        le = live[g.src] & live[g.dst]
        m_live = int(le.sum())
        if m_live < thr:
            break
        phase += 1
        s, d = g.src[le], g.dst[le]
        low = np.full(n, _BIG, dtype=_I64)
        np.minimum.at(low, s, prio[d])
        np.minimum.at(low, d, prio[s])
        join = live & (prio < low)
        rt.record_shuffle(4 * m_live * 16, 4 * m_live, "mis-neighbor-min")
        in_set |= join
        gone = join.copy()
        gone[d[join[s]]] = True
        gone[s[join[d]]] = True
        rt.record_shuffle(2 * m_live * 16, 2 * m_live, "mis-remove")
        log.add(phase, live.sum(), m_live, 2, joined=int(join.sum()))
        live &= ~gone
    if live.any():
        # remaining graph fits on one machine: gather it, decide, send answers back
        keep = live[g.src] & live[g.dst]
        rt.record_shuffle(int(keep.sum()) * 16 + int(live.sum()) * 8,
                          int(keep.sum()) + int(live.sum()), "mis-finish-gather")
        off, nb = _csr(n, g.src[keep], g.dst[keep])
        blocked = np.zeros(n, dtype=bool)
        for v in np.flatnonzero(live)[np.argsort(prio[live], kind="stable")].tolist():
            if not blocked[v]:
                in_set[v] = True
                blocked[nb[off[v]:off[v + 1]]] = True
        rt.record_shuffle(int(live.sum()) * 16, int(live.sum()), "mis-finish-scatter")
        log.add(phase + 1, live.sum(), keep.sum(), 2, finish=True)
    return MisResult(in_set, len(log), rt.metrics.minus(start)), log


def mpc_mm_rootset(g: Graph, rank=None, small_threshold: int | None = None,
                   runtime: Runtime | None = None, seed: int | None = None):
    """Greedy matching by phases of locally minimal edges. Returns ``(MatchingResult, PhaseLog)``."""
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    thr = _threshold(rt, small_threshold)
    seed = rt.config.seed if seed is None else seed
    n, m = g.n, g.m
    eprio = ranks.priorities(ranks.edge_ranks(g.eid, seed) if rank is None else np.asarray(rank))
    mate = np.full(n, -1, dtype=_I64)
    log = PhaseLog()
    phase = 0
    while True:
        free = mate < 0
        le = free[g.src] & free[g.dst]
        m_live = int(le.sum())
        if m_live == 0 or m_live < thr:
            break
        phase += 1
        idx = np.flatnonzero(le)
        s, d, p = g.src[idx], g.dst[idx], eprio[idx]
        low = np.full(n, _BIG, dtype=_I64)
        np.minimum.at(low, s, p)
        np.minimum.at(low, d, p)
        rt.record_shuffle(2 * m_live * 16, 2 * m_live, "mm-vertex-min")
        win = (p == low[s]) & (p == low[d])
        mate[s[win]] = d[win]
        mate[d[win]] = s[win]
        rt.record_shuffle(2 * m_live * 16, 2 * m_live, "mm-remove")
        touched = np.unique(np.concatenate([s, d]))
        log.add(phase, len(touched), m_live, 2, matched=int(win.sum()))
    free = mate < 0
    le = free[g.src] & free[g.dst]
    if le.any():
        idx = np.flatnonzero(le)
        rt.record_shuffle(len(idx) * 16, len(idx), "mm-finish-gather")
        for i in idx[np.argsort(eprio[idx], kind="stable")].tolist():
            a, b = int(g.src[i]), int(g.dst[i])
            if mate[a] < 0 and mate[b] < 0:
                mate[a], mate[b] = b, a
        touched = np.unique(np.concatenate([g.src[idx], g.dst[idx]]))
        rt.record_shuffle(len(touched) * 16, len(touched), "mm-finish-scatter")
        log.add(phase + 1, len(touched), len(idx), 2, finish=True)
    sel = (mate[g.src] == g.dst) & (mate[g.dst] == g.src)
    res = MatchingResult(np.sort(g.eid[sel]), mate, len(log), rt.metrics.minus(start))
    return res, log


# ----------------------------------------------------------------------
# Boruvka with random red/blue coloring


def mpc_msf_boruvka(g: Graph, small_threshold: int | None = None, seed: int | None = None,
                    runtime: Runtime | None = None):
    """MSF by phases where blue vertices merge along their lightest edge into red ones.

    Returns ``(MsfResult, PhaseLog)``.
    """
    g = _as_weighted(g)
    rt = _rt(runtime, g.n)
    start = rt.metrics.copy()
    thr = _threshold(rt, small_threshold)
    seed = rt.config.seed if seed is None else seed
    cur = Graph(g.n, g.src, g.dst, g.order_keys(), np.arange(g.m, dtype=_I64), check=False)
    name = np.arange(g.n, dtype=_I64)  # an input vertex standing for each current vertex
    to_cur = np.arange(g.n, dtype=_I64)
    picked = []
    log = PhaseLog()
    phase = 0
    while cur.m >= thr and cur.m > 0:
        phase += 1
        n, m = cur.n, cur.m
        blue = ~ranks.coin(seed, ranks.COLOR, name, 0.5, salt=phase)
        a = np.concatenate([cur.src, cur.dst])
        b = np.concatenate([cur.dst, cur.src])
        w = np.concatenate([cur.weight, cur.weight])
        best = np.full(n, _BIG, dtype=_I64)
        np.minimum.at(best, a, w)
        rt.record_shuffle(2 * m * 24, 2 * m, "boruvka-min-edge")
        sel = (w == best[a]) & blue[a] & ~blue[b]
        rep = np.arange(n, dtype=_I64)
        rep[a[sel]] = b[sel]
        edge_of_key = np.empty(g.m, dtype=_I64)
        edge_of_key[cur.weight] = cur.eid
        picked.append(edge_of_key[w[sel]])
        rt.record_shuffle(int(sel.sum()) * 16 + n * 8, int(sel.sum()) + n, "boruvka-merge")
        nxt = contract_graph(cur, rep, drop_isolated=False)
        rt.record_shuffle(m * 32, m, "boruvka-relabel")
        live_n = int((cur.degrees() > 0).sum())
        log.add(phase, live_n, m, 3, merged=int(sel.sum()))
        to_cur = np.searchsorted(nxt.labels, rep[to_cur])
        name = name[nxt.labels]
        cur = nxt
    chosen, roots = _kruskal_local(cur.n, cur.src, cur.dst, cur.weight)
    rt.record_shuffle(cur.m * 32, cur.m, "boruvka-finish")
    picked.append(cur.eid[chosen])
    log.add(phase + 1, int((cur.degrees() > 0).sum()), cur.m, 1, finish=True)
    comp = name[roots[to_cur]] if g.n else np.zeros(0, dtype=_I64)
    idx = np.unique(np.concatenate(picked))
    edges = np.sort(g.eid[idx])
    cm = ContractionMap(comp, rounds=rt.metrics.rounds - start.rounds)
    cm = ContractionMap(cm.canonical(), cm.rounds)
    return MsfResult(edges, _weight_of(g, edges), cm, rt.metrics.minus(start)), log


# ----------------------------------------------------------------------
# cycle unions by neighbor contraction


def check_cycle_union(g: Graph):
    if g.n and not np.all(g.degrees() == 2):
        raise NotACycleGraph("every vertex must have degree exactly 2")


def mpc_cycle_cc(g: Graph, runtime: Runtime | None = None, seed: int | None = None):
    """Number of cycles, by merging blue vertices into a red neighbour each phase.

    Returns ``(count, PhaseLog)``; each phase record carries its shrink factor.
    """
    check_cycle_union(g)
    rt = _rt(runtime, g.n)
    seed = rt.config.seed if seed is None else seed
    n = g.n
    off, nb = _csr(n, g.src, g.dst)
    left = nb[off[:-1]].copy() if n else np.zeros(0, dtype=_I64)
    right = nb[off[:-1] + 1].copy() if n else np.zeros(0, dtype=_I64)
    ids = np.arange(n, dtype=_I64)  # live vertices keep their input ids
    log = PhaseLog()
    count = 0
    phase = 0
    alive = np.ones(n, dtype=bool)
    while True:
        live = ids[alive]
        # a vertex whose neighbours are itself closes a finished cycle
        closed = live[(left[live] == live) & (right[live] == live)]
        count += len(closed)
        alive[closed] = False
        live = ids[alive]
        if not len(live):
            break
        phase += 1
        red = ranks.coin(seed, ranks.COLOR, live, 0.5, salt=phase)
        is_red = np.zeros(n, dtype=bool)
        is_red[live] = red
        rt.record_shuffle(len(live) * 24, 2 * len(live), "cycle-colors")
        blue = live[~red]
        lr = is_red[left[blue]]
        rr = is_red[right[blue]]
        go = lr | rr
        v = blue[go]
        rt.record_shuffle(len(v) * 24, 2 * len(v), "cycle-merge")
        alive[v] = False
        # survivors skip over merged neighbours; runs of merged vertices are short
        surv = live[alive[live]]
        left[surv] = _skip(surv, left[surv], left, right, alive)
        right[surv] = _skip(surv, right[surv], left, right, alive)
        rt.record_shuffle(len(v) * 24, 2 * len(v), "cycle-relink")
        after = int(alive.sum())
        log.add(phase, len(live), len(live), 3, shrink=len(live) / max(after, 1))
    return count, log


def _skip(start, first, left, right, alive):
    """Follow the cycle from ``start`` through ``first`` to the next live vertex."""
    prev = start.copy()
    cur = first.copy()
    todo = ~alive[cur]
    while todo.any():
        p, c = prev[todo], cur[todo]
        nxt = np.where(left[c] == p, right[c], left[c])
        prev[todo] = c
        cur[todo] = nxt
        todo[todo] = ~alive[nxt]
    return cur
