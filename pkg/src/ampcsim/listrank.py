"""Sampling-based cycle contraction and ranking on the simulator.

A set of disjoint directed cycles (given by a successor array) is shrunk by
repeatedly sampling nodes and letting every sample walk forward to the next
sample. Once the surviving cycles are short, each node walks forward to the
next node of smaller priority; the node that comes back to itself leads its
cycle. Results are pushed back level by level.

Forest rooting and forest connectivity run on top of this through Euler
tours of the trees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, ranks
from .graph import ContractionMap, Graph

_I64 = np.int64
FINISH_SALT = 1 << 20


@dataclass
class CycleRanking:
    label: np.ndarray  # smallest ``val`` on the node's cycle
    offset: np.ndarray  # (N, W) weight from the cycle head (or leader) up to the node
    total: np.ndarray  # (N, W) weight of the whole cycle
    leader: np.ndarray  # node that closed the finishing walk of the cycle
    rounds: int = 0


@dataclass
class ShrinkLevel:
    """One sampling level: the surviving cycle plus how to expand it back."""

    ids: np.ndarray  # original node id of every live node at this level
    succ: np.ndarray  # local successor among ``ids``
    sampled: np.ndarray  # local ids of samples
    unvisited: np.ndarray  # local ids on cycles with no sample
    rec: np.ndarray  # local ids passed by some walk
    owner: np.ndarray  # sample (local id) whose walk passed ``rec``
    partial: np.ndarray  # (len(rec), W) weight from the owner up to ``rec``


def shrink_levels(n: int, eps: float) -> list:
    """Sampling probabilities of the contraction levels for ``n`` nodes."""
    n = max(n, 2)
    count = math.ceil(3 / eps)
    return [n ** (-eps / 2)] * count + [1 / max(1.0, math.log2(n))]


def _segment_cumsum(vals, starts):
    """Exclusive prefix sums restarting at every offset in ``starts`` (CSR)."""
    cs = np.cumsum(vals, axis=0)
    cs = np.concatenate([np.zeros((1,) + vals.shape[1:], dtype=vals.dtype), cs])
    lens = np.diff(starts)
    base = np.repeat(cs[starts[:-1]], lens, axis=0)
    return cs[:-1] - base, cs[starts[1:]] - cs[starts[:-1]]


class _Book:
    """Round booking that is skipped when there is no runtime."""

    def __init__(self, rt):
        self.rt = rt
        self.rounds = 0

    def plan(self, ids, cost, carry=0):
        if self.rt is None:
            k = len(ids)
            return None, np.arange(k, dtype=_I64), np.zeros(k, dtype=_I64), \
                np.array([0, k], dtype=_I64)
        plan = self.rt.plan(len(ids), cost_per_item=cost, carry_pairs=carry)
        mach = plan.assign(ids)
        order = np.lexsort((ids, mach))
        counts = np.bincount(mach, minlength=plan.machine_count)
        starts = np.zeros(plan.machine_count + 1, dtype=_I64)
        np.cumsum(counts, out=starts[1:])
        return plan, order, mach[order], starts

    def book(self, name, plan, mach, queries, writes, carry=0, extra=None):
        self.rounds += 1
        if self.rt is None:
            return
        self.rt.bulk_round(name, plan, mach, queries, writes,
                           bytes_kv=int(np.sum(queries)) * 24, carry_count=carry, extra=extra)

    @property
    def caching(self):
        return True if self.rt is None else self.rt.config.caching


def shrink(succ, p: float, weights=None, val=None, heads=None, runtime=None, seed=None,
           salt: int = 0, book=None):
    """One sampling level. Returns ``(level, next_succ, next_w, next_val, next_heads)``.

    Every sample walks forward to the next sample; the walk's nodes are folded
    into the sample. Cycles without any sample survive unchanged. With
    ``p = 1`` every node is sampled and the cycle keeps its size.
    """
    succ = np.asarray(succ, dtype=_I64)
    k = len(succ)
    w = np.ones((k, 1), dtype=_I64) if weights is None else np.asarray(weights, dtype=_I64)
    val = np.arange(k, dtype=_I64) if val is None else np.asarray(val, dtype=_I64)
    heads = np.zeros(k, dtype=bool) if heads is None else np.asarray(heads, dtype=bool)
    ids = np.arange(k, dtype=_I64)
    level, state = _shrink_step(ids, succ, w, val, heads, p, runtime, seed, salt,
                                book or _Book(runtime))
    return (level,) + state


def _shrink_step(ids, lsucc, lw, lval, lhead, p, rt, seed, salt, book):
    k = len(ids)
    if seed is None:
        seed = 0 if rt is None else rt.config.seed
    sample = ranks.coin(seed, ranks.VERTEX_SAMPLE, ids, p, salt=salt) | lhead
    s_loc = np.flatnonzero(sample)
    plan, order, mach, starts = book.plan(ids[s_loc], cost=1.0 / max(p, 1e-12))
    s_loc = s_loc[order]
    stop = sample.astype(np.int8)
    end, steps, q, rec_off, rec = kernels.walk_batch(lsucc, stop, lsucc[s_loc], starts,
                                                     book.caching, True)
    nrec = np.diff(rec_off)
    owner = np.repeat(s_loc, nrec)
    partial, seg = _segment_cumsum(lw[rec], rec_off)
    partial = partial + lw[owner]
    visited = np.zeros(k, dtype=bool)
    visited[s_loc] = True
    visited[rec] = True
    unvisited = np.flatnonzero(~visited)
    book.book("shrink-walk", plan, mach, q, 1 + nrec, carry=len(unvisited),
              extra={"samples": int(len(s_loc)), "p": p})

    ns = len(s_loc)
    newidx = np.full(k, -1, dtype=_I64)
    newidx[s_loc] = np.arange(ns, dtype=_I64)
    newidx[unvisited] = ns + np.arange(len(unvisited), dtype=_I64)
    seg_val = lval[s_loc].copy()
    if len(rec):
        grp_min = np.minimum.reduceat(lval[rec], rec_off[:-1][nrec > 0])
        seg_val[nrec > 0] = np.minimum(seg_val[nrec > 0], grp_min)
    nsucc = np.concatenate([newidx[end], newidx[lsucc[unvisited]]])
    nw = np.concatenate([lw[s_loc] + seg, lw[unvisited]])
    nval = np.concatenate([seg_val, lval[unvisited]])
    nhead = np.concatenate([lhead[s_loc], lhead[unvisited]])
    level = ShrinkLevel(ids, lsucc, s_loc, unvisited, rec, owner, partial)
    nids = np.concatenate([ids[s_loc], ids[unvisited]])
    return level, (nids, nsucc, nw, nval, nhead)


def rank_cycles(succ, weights=None, val=None, heads=None, runtime=None,
                probs=None) -> CycleRanking:
    """Label and rank every node of a union of disjoint directed cycles.

    ``weights`` is an (N, W) integer matrix whose first column must be
    positive. Offsets are measured from the marked head of each cycle (at
    most one per cycle), or from the cycle's leader when it has none.
    """
    succ = np.asarray(succ, dtype=_I64)
    N = len(succ)
    w = np.ones((N, 1), dtype=_I64) if weights is None else np.asarray(weights, dtype=_I64)
    if w.ndim == 1:
        w = w[:, None]
    w = np.ascontiguousarray(w)
    val = np.arange(N, dtype=_I64) if val is None else np.asarray(val, dtype=_I64)
    heads = np.zeros(N, dtype=bool) if heads is None else np.asarray(heads, dtype=bool)
    rt = runtime
    book = _Book(rt)
    eps = 0.5 if rt is None else rt.config.eps
    seed = 0 if rt is None else rt.config.seed
    if probs is None:
        probs = shrink_levels(N, eps)

    levels = []
    state = (np.arange(N, dtype=_I64), succ, w, val, heads)
    for i, p in enumerate(probs):
        level, state = _shrink_step(*state, p, rt, seed, i + 1, book)
        levels.append(level)

    ids, lsucc, lw, lval, lhead = state
    label, off, total, leader = _finish(ids, lsucc, lw, lval, lhead, rt, seed, book)

    for level in reversed(levels):
        k = len(level.ids)
        W = w.shape[1]
        r_label = np.empty(k, dtype=_I64)
        r_off = np.empty((k, W), dtype=_I64)
        r_tot = np.empty((k, W), dtype=_I64)
        r_lead = np.empty(k, dtype=_I64)
        live = np.concatenate([level.sampled, level.unvisited])
        r_label[live], r_off[live], r_tot[live], r_lead[live] = label, off, total, leader
        o = level.owner
        r_label[level.rec] = r_label[o]
        r_off[level.rec] = r_off[o] + level.partial
        r_tot[level.rec] = r_tot[o]
        r_lead[level.rec] = r_lead[o]
        plan, order, mach, _ = book.plan(level.ids[level.rec], cost=1.0, carry=len(live))
        one = np.ones(len(level.rec), dtype=_I64)
        book.book("shrink-expand", plan, mach, one, one, carry=len(live))
        label, off, total, leader = r_label, r_off, r_tot, r_lead
    return CycleRanking(label, off, total, leader, rounds=book.rounds)


def _finish(ids, lsucc, lw, lval, lhead, rt, seed, book):
    """Rank the short cycles left after sampling."""
    from .tree import pointer_jump

    k = len(ids)
    prio = ranks.priorities(ranks.hash64(seed, ranks.VERTEX_SAMPLE, ids, salt=FINISH_SALT))
    cost = max(1.0, math.log2(max(len(ids), 2)))
    plan, order, mach, starts = book.plan(ids, cost=cost)
    items = np.arange(k, dtype=_I64)[order]
    end, steps, q, wsum, vmin, markoff, hasmark = kernels.walk_min_batch(
        lsucc, prio, lval, lw, lhead.astype(np.int8), items, starts, book.caching)
    book.book("finish-walk", plan, mach, q, np.ones(k, dtype=_I64))
    # results in local order
    inv = np.empty(k, dtype=_I64)
    inv[items] = np.arange(k, dtype=_I64)
    end, wsum, vmin, markoff, hasmark = (end[inv], wsum[inv], vmin[inv], markoff[inv],
                                         hasmark[inv])
    is_leader = end == np.arange(k)
    ptr = np.where(is_leader, np.arange(k, dtype=_I64), end)

    # chase to the leader while summing the forward distance
    d = np.where(is_leader[:, None], 0, wsum)
    jp = ptr.copy()
    while True:
        nxt = jp[jp]
        if np.array_equal(nxt, jp):
            break
        d = d + d[jp]
        jp = nxt
    if rt is not None:
        cm = pointer_jump(ptr, rt, name="finish-chase")
        book.rounds += cm.rounds
        if not np.array_equal(cm.rep, jp):
            raise AssertionError("finishing chase disagrees with doubling")
    leader = jp
    total = wsum[leader]
    pos = np.where(is_leader[:, None], 0, total - d)
    hoff = markoff[leader]
    has = hasmark[leader]
    wrap = (pos[:, 0] < hoff[:, 0]) & has
    rel = np.where(has[:, None], pos - hoff, pos) + np.where(wrap[:, None], total, 0)
    label = vmin[leader]
    plan, order, mach, _ = book.plan(ids, cost=1.0)
    one = np.ones(k, dtype=_I64)
    book.book("finish-leader", plan, mach, one, one)
    return label, rel, total, ids[leader]


# ----------------------------------------------------------------------
# Euler-tour arcs of a forest


def forest_arcs(f: Graph):
    """Arcs ``2i = src->dst`` and ``2i+1 = dst->src`` with the tour successor.

    The successor of ``u->v`` is ``v->x`` where ``x`` follows ``u`` in the
    ascending neighbor order of ``v`` (cyclically). Returns
    ``(tail, head, succ, first_arc)`` with ``first_arc[v]`` the arc to the
    smallest neighbor of ``v`` or -1.
    """
    m = f.m
    tail = np.empty(2 * m, dtype=_I64)
    head = np.empty(2 * m, dtype=_I64)
    tail[0::2], head[0::2] = f.src, f.dst
    tail[1::2], head[1::2] = f.dst, f.src
    arcs = np.arange(2 * m, dtype=_I64)
    order = np.lexsort((head, tail))
    off = np.zeros(f.n + 1, dtype=_I64)
    np.cumsum(np.bincount(tail, minlength=f.n), out=off[1:])
    slot = np.empty(2 * m, dtype=_I64)
    slot[order] = arcs - off[tail[order]]
    deg = np.diff(off)
    # arc u->v is followed by the out-arc of v right after its reverse v->u
    rev = arcs ^ 1
    nslot = (slot[rev] + 1) % np.maximum(deg[head], 1)
    succ = order[off[head] + nslot]
    first_arc = np.full(f.n, -1, dtype=_I64)
    has = deg > 0
    first_arc[has] = order[off[:-1][has]]
    return tail, head, succ, first_arc


def _book_arc_shuffle(rt, f: Graph, name):
    if rt is not None:
        rt.record_shuffle(2 * f.m * 24, 2 * f.m, name)


def forest_connectivity(f: Graph, runtime=None) -> ContractionMap:
    """Component labels (smallest vertex id per tree) of a forest."""
    from .tree import _check_forest

    _check_forest(f)
    tail, head, succ, first_arc = forest_arcs(f)
    _book_arc_shuffle(runtime, f, "forest-tour")
    cr = rank_cycles(succ, val=tail, runtime=runtime)
    rep = np.arange(f.n, dtype=_I64)
    has = first_arc >= 0
    rep[has] = cr.label[first_arc[has]]
    rounds = cr.rounds + 1
    if runtime is not None:
        plan = runtime.plan(int(has.sum()))
        v = np.flatnonzero(has)
        one = np.ones(len(v), dtype=_I64)
        runtime.bulk_round("forest-labels", plan, plan.assign(v), one, one,
                           carry_count=f.n - len(v))
    return ContractionMap(rep, rounds=rounds)


def root_forest_ampc(f: Graph, runtime, keys=None):
    """Root each tree at its smallest vertex using two rankings of its Euler tour.

    The first ranking finds each tree's root and orients every edge (the arc
    that comes first in the tour from the root points downwards). The second
    one walks the tour with children in ascending order and yields levels
    and first-occurrence positions.
    """
    from .tree import NEUTRAL, EulerTour, RootedForest, _check_forest

    _check_forest(f)
    rt = runtime
    n, m = f.n, f.m
    tail, head, succ, first_arc = forest_arcs(f)
    A = 2 * m
    _book_arc_shuffle(rt, f, "tour-pass1")
    cr = rank_cycles(succ, val=tail, runtime=rt)
    # rebase every arc on the arc leaving the root towards its smallest neighbor
    root_of_arc = cr.label
    is_head = np.zeros(A, dtype=bool)
    if A:
        is_head[first_arc[root_of_arc]] = True
    hpos = np.zeros(n, dtype=_I64)
    hpos[tail[is_head]] = cr.offset[is_head, 0]
    tot = cr.total[:, 0]
    pos1 = (cr.offset[:, 0] - hpos[root_of_arc]) % np.maximum(tot, 1)
    if rt is not None:
        plan = rt.plan(A)
        one = np.ones(A, dtype=_I64)
        rt.bulk_round("tour-rebase", plan, plan.assign(np.arange(A)), one, one)

    down = pos1[0::2] < pos1[1::2]  # per edge: src->dst comes first
    parent = np.arange(n, dtype=_I64)
    child = np.where(down, f.dst, f.src)
    parent[child] = np.where(down, f.src, f.dst)
    up_key = None
    if keys is not None:
        up_key = np.full(n, NEUTRAL, dtype=_I64)
        up_key[child] = np.asarray(keys, dtype=_I64)
    comp = np.arange(n, dtype=_I64)
    has = first_arc >= 0
    comp[has] = root_of_arc[first_arc[has]]

    # second tour: children ascending, so the successor skips back through the parent
    arc_down = np.empty(A, dtype=bool)
    arc_down[0::2] = down
    arc_down[1::2] = ~down
    tail2, head2, succ2 = _ordered_tour(n, tail, head, arc_down, parent)
    _book_arc_shuffle(rt, f, "tour-pass2")
    wcols = np.ones((A, 2), dtype=_I64)
    wcols[:, 1] = np.where(arc_down, 1, -1)
    roots = np.flatnonzero(parent == np.arange(n))
    heads = np.zeros(A, dtype=bool)
    start_arc = _first_child_arc(n, tail, head, arc_down)
    heads[start_arc[roots][start_arc[roots] >= 0]] = True
    cr2 = rank_cycles(succ2, weights=wcols, val=tail, heads=heads, runtime=rt)
    pos2 = cr2.offset[:, 0]
    level = np.zeros(n, dtype=_I64)
    downs = np.flatnonzero(arc_down)
    level[head[downs]] = cr2.offset[downs, 1] + 1

    # tours laid out one tree after another in root order
    size = np.bincount(comp, minlength=n)
    tour_len = 2 * size[roots] - 1
    start = np.zeros(len(roots) + 1, dtype=_I64)
    np.cumsum(tour_len, out=start[1:])
    base = np.zeros(n, dtype=_I64)
    base[roots] = start[:-1]
    tour = np.empty(int(start[-1]), dtype=_I64)
    first = np.empty(n, dtype=_I64)
    tour[base[roots]] = roots
    first[roots] = base[roots]
    at = base[comp[tail]] + 1 + pos2
    tour[at] = head
    first[head[downs]] = at[downs]
    if rt is not None:
        plan = rt.plan(A)
        one = np.ones(A, dtype=_I64)
        rt.bulk_round("tour-layout", plan, plan.assign(np.arange(A)), one, one)
    rf = RootedForest(parent, level, comp, up_key)
    rf.tour = EulerTour(tour, first, start, roots)
    return rf


def _first_child_arc(n, tail, head, arc_down):
    """Down arc to the smallest child of every vertex, or -1."""
    out = np.full(n, -1, dtype=_I64)
    d = np.flatnonzero(arc_down)
    if len(d):
        order = d[np.lexsort((head[d], tail[d]))]
        t = tail[order]
        keep = np.ones(len(order), dtype=bool)
        keep[1:] = t[1:] != t[:-1]
        out[t[keep]] = order[keep]
    return out


def _ordered_tour(n, tail, head, arc_down, parent):
    """Tour successor visiting children in ascending id order.

    At vertex ``v`` the out-arcs are ordered children ascending, then the arc
    back to the parent; entering ``v`` from its parent leads to the first
    entry and returning from a child leads to the entry after that child.
    """
    A = len(tail)
    arcs = np.arange(A, dtype=_I64)
    # rank out-arcs: down arcs by child id, the up arc last
    key = np.where(arc_down, head, n)
    order = np.lexsort((key, tail))
    off = np.zeros(n + 1, dtype=_I64)
    np.cumsum(np.bincount(tail, minlength=n), out=off[1:])
    slot = np.empty(A, dtype=_I64)
    slot[order] = arcs - off[tail[order]]
    deg = np.diff(off)
    rev = arcs ^ 1
    # arriving at head(a): via a down arc start at slot 0, via an up arc continue after rev
    nslot = np.where(arc_down, 0, slot[rev] + 1) % np.maximum(deg[head], 1)
    # a root has no up arc: its last child wraps to slot 0, which is the cyclic restart
    succ = order[off[head] + nslot]
    return tail, head, succ
