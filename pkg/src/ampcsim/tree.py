"""Rooted forests, sparse-table RMQ, Euler tours, LCA, heavy-light decomposition,
pivot tables, path maxima and pointer jumping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CycleDetected, DifferentComponents, NotAForest, NotAncestor, OutOfRange
from .graph import ContractionMap, Graph

_I64 = np.int64
NEUTRAL = -1  # path maximum of an empty path; every edge key is >= 0


@dataclass
class RootedForest:
    parent: np.ndarray  # roots point at themselves
    level: np.ndarray
    component_id: np.ndarray  # root of the tree containing each vertex
    up_key: np.ndarray | None = None  # key of the edge to the parent, NEUTRAL at roots
    tour: object = None  # EulerTour already computed while rooting, if any

    @property
    def n(self) -> int:
        return len(self.parent)

    def children(self):
        """CSR ``(offsets, child)`` with children in ascending id."""
        n = self.n
        nonroot = np.flatnonzero(self.parent != np.arange(n))
        par = self.parent[nonroot]
        order = np.lexsort((nonroot, par))
        off = np.zeros(n + 1, dtype=_I64)
        np.cumsum(np.bincount(par, minlength=n), out=off[1:])
        return off, nonroot[order]


def _check_forest(g: Graph) -> np.ndarray:
    """Union-find component labels; raises NotAForest on a cycle."""
    from .oracles import union_find_labels

    labels = union_find_labels(g.n, g.src, g.dst)
    if g.m != g.n - len(np.unique(labels)):
        raise NotAForest(f"{g.m} edges cannot form a forest on {g.n} vertices "
                         f"with {len(np.unique(labels))} components")
    return labels


def root_forest(f: Graph, runtime=None, keys=None) -> RootedForest:
    """Root every tree at its minimum vertex id.

    With a runtime the rooting runs as list ranking over Euler tours on the
    simulator; without one it is a plain in-memory traversal. ``keys`` (one per
    edge of ``f``) become the ``up_key`` of the child endpoint.
    """
    if runtime is not None:
        from .listrank import root_forest_ampc

        return root_forest_ampc(f, runtime, keys)
    labels = _check_forest(f)
    n = f.n
    off, nbr, eidx = f.adjacency()
    parent = np.arange(n, dtype=_I64)
    level = np.zeros(n, dtype=_I64)
    up_key = np.full(n, NEUTRAL, dtype=_I64)
    comp = np.empty(n, dtype=_I64)
    low = np.full(n, n, dtype=_I64)
    np.minimum.at(low, labels, np.arange(n, dtype=_I64))
    roots = np.unique(low[labels])
    seen = np.zeros(n, dtype=bool)
    seen[roots] = True
    comp[roots] = roots
    frontier = roots
    while len(frontier):
        starts, ends = off[frontier], off[frontier + 1]
        cnt = ends - starts
        src = np.repeat(frontier, cnt)
        pos = np.repeat(starts - np.cumsum(cnt) + cnt, cnt) + np.arange(int(cnt.sum()))
        dst = nbr[pos]
        fresh = ~seen[dst]
        src, dst, pos = src[fresh], dst[fresh], pos[fresh]
        seen[dst] = True
        parent[dst] = src
        level[dst] = level[src] + 1
        comp[dst] = comp[src]
        if keys is not None:
            up_key[dst] = np.asarray(keys)[eidx[pos]]
        frontier = dst
    return RootedForest(parent, level, comp, up_key if keys is not None else None)


# ----------------------------------------------------------------------
# sparse-table RMQ


@dataclass
class SparseTableRMQ:
    a: np.ndarray
    b: list  # b[y][x] = best index in a[x : x + 2**y]
    mode: str

    @property
    def levels(self) -> int:
        return len(self.b)


def _better(a, i, j, mode):
    """Elementwise pick between index arrays; ties go to the smaller index."""
    ai, aj = a[i], a[j]
    if mode == "min":
        take_j = (aj < ai) | ((aj == ai) & (j < i))
    else:
        take_j = (aj > ai) | ((aj == ai) & (j < i))
    return np.where(take_j, j, i)


def rmq_build(a, mode: str = "min") -> SparseTableRMQ:
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    a = np.asarray(a)
    k = len(a)
    b = [np.arange(k, dtype=_I64)]
    y = 1
    while (1 << y) <= k:
        prev = b[-1]
        half = 1 << (y - 1)
        width = k - (1 << y) + 1
        b.append(_better(a, prev[:width], prev[half:half + width], mode))
        y += 1
    return SparseTableRMQ(a, b, mode)


def rmq_query(t: SparseTableRMQ, i, j):
    """Index of the best value in ``a[i..j]`` (inclusive); accepts arrays."""
    i = np.asarray(i, dtype=_I64)
    j = np.asarray(j, dtype=_I64)
    k = len(t.a)
    if np.any(i < 0) or np.any(j >= k) or np.any(i > j):
        raise OutOfRange(f"invalid range for array of length {k}")
    span = j - i + 1
    lev = np.floor(np.log2(span)).astype(_I64) if span.ndim else _I64(int(span).bit_length() - 1)
    if span.ndim == 0:
        y = int(lev)
        x1, x2 = int(i), int(j) - (1 << y) + 1
        return int(_better(t.a, np.array([t.b[y][x1]]), np.array([t.b[y][x2]]), t.mode)[0])
    # floor(log2) via float can be off by one near powers of two; fix it up
    lev = np.where((1 << (lev + 1)) <= span, lev + 1, lev)
    lev = np.where((1 << lev) > span, lev - 1, lev)
    out = np.empty(len(i), dtype=_I64)
    for y in np.unique(lev):
        sel = lev == y
        x1 = i[sel]
        x2 = j[sel] - (1 << int(y)) + 1
        out[sel] = _better(t.a, t.b[y][x1], t.b[y][x2], t.mode)
    return out


# ----------------------------------------------------------------------
# Euler tour and LCA


@dataclass
class EulerTour:
    tour: np.ndarray  # concatenated per-tree tours
    first: np.ndarray  # index of each vertex's first occurrence in ``tour``
    start: np.ndarray  # tour offset of each tree, indexed like ``roots``
    roots: np.ndarray

    def tree_tour(self, root: int) -> np.ndarray:
        k = int(np.searchsorted(self.roots, root))
        return self.tour[self.start[k]:self.start[k + 1]]


def euler_tour(rf: RootedForest, tree=None) -> EulerTour:
    """DFS tour of every tree (2*size - 1 entries), children in ascending id."""
    if rf.tour is not None:
        return rf.tour
    n = rf.n
    off, child = rf.children()
    roots = np.flatnonzero(rf.parent == np.arange(n))
    tour = np.empty(max(2 * n - len(roots), 0), dtype=_I64)
    first = np.empty(n, dtype=_I64)
    start = np.zeros(len(roots) + 1, dtype=_I64)
    pos = 0
    for k, r in enumerate(roots):
        start[k] = pos
        tour[pos] = r
        first[r] = pos
        pos += 1
        stack = [(int(r), int(off[r]))]
        while stack:
            v, c = stack[-1]
            if c < off[v + 1]:
                stack[-1] = (v, c + 1)
                w = int(child[c])
                tour[pos] = w
                first[w] = pos
                pos += 1
                stack.append((w, int(off[w])))
            else:
                stack.pop()
                if stack:
                    tour[pos] = stack[-1][0]
                    pos += 1
    start[len(roots)] = pos
    return EulerTour(tour, first, start, roots)


def level_rmq(rf: RootedForest, et: EulerTour) -> SparseTableRMQ:
    return rmq_build(rf.level[et.tour], "min")


def lca(rf: RootedForest, et: EulerTour, lrmq: SparseTableRMQ, u, w):
    """Lowest common ancestor; ``u`` and ``w`` may be arrays."""
    u = np.asarray(u, dtype=_I64)
    w = np.asarray(w, dtype=_I64)
    if np.any(rf.component_id[u] != rf.component_id[w]):
        raise DifferentComponents("vertices lie in different trees")
    fu, fw = et.first[u], et.first[w]
    idx = rmq_query(lrmq, np.minimum(fu, fw), np.maximum(fu, fw))
    res = et.tour[idx]
    return int(res) if np.ndim(res) == 0 else res


# ----------------------------------------------------------------------
# heavy-light decomposition and pivots


@dataclass
class HeavyLightDecomposition:
    heavy_child: np.ndarray  # -1 for leaves
    path_head: np.ndarray  # topmost vertex of each vertex's heavy path (its path id)
    path_pos: np.ndarray  # distance below the head
    layout: np.ndarray  # global position; heavy paths are contiguous, head first
    size: np.ndarray  # subtree sizes
    up_rmq: SparseTableRMQ  # max over up-edge keys in layout order

    def is_light(self, rf: RootedForest) -> np.ndarray:
        """Per vertex: the edge to its parent is light (False at roots)."""
        v = np.arange(rf.n)
        nonroot = rf.parent != v
        return nonroot & (self.heavy_child[rf.parent] != v)


def _order_by_level(rf: RootedForest) -> np.ndarray:
    return np.lexsort((np.arange(rf.n), rf.level))


def build_hld(rf: RootedForest, weights=None) -> HeavyLightDecomposition:
    """Heavy child = largest subtree, ties to the smaller id. ``weights`` are up-edge keys."""
    n = rf.n
    up = np.asarray(weights if weights is not None else rf.up_key, dtype=_I64)
    order = _order_by_level(rf)
    v_all = np.arange(n, dtype=_I64)
    nonroot = rf.parent != v_all
    size = np.ones(n, dtype=_I64)
    levels = rf.level[order]
    bounds = np.flatnonzero(np.diff(levels)) + 1
    groups = np.split(order, bounds) if n else []
    for grp in reversed(groups):
        g = grp[nonroot[grp]]
        np.add.at(size, rf.parent[g], size[g])
    heavy = np.full(n, -1, dtype=_I64)
    kids = v_all[nonroot]
    if len(kids):
        par = rf.parent[kids]
        # per parent: max size, then min id
        o = np.lexsort((kids, -size[kids], par))
        par_sorted = par[o]
        firsts = np.ones(len(o), dtype=bool)
        firsts[1:] = par_sorted[1:] != par_sorted[:-1]
        heavy[par_sorted[firsts]] = kids[o][firsts]
    head = v_all.copy()
    ppos = np.zeros(n, dtype=_I64)
    for grp in groups:
        g = grp[nonroot[grp]]
        cont = heavy[rf.parent[g]] == g
        hv = g[cont]
        head[hv] = head[rf.parent[hv]]
        ppos[hv] = ppos[rf.parent[hv]] + 1
    # layout: group by path (ordered by head's tour-independent key), then by position
    lay_order = np.lexsort((ppos, head))
    layout = np.empty(n, dtype=_I64)
    layout[lay_order] = np.arange(n, dtype=_I64)
    arr = np.full(n, NEUTRAL, dtype=_I64)
    arr[layout] = up
    return HeavyLightDecomposition(heavy, head, ppos, layout, size, rmq_build(arr, "max"))


@dataclass
class PivotTable:
    offsets: np.ndarray  # CSR over vertices
    pivot: np.ndarray  # pivot vertex ids, decreasing level within a row
    maxkey: np.ndarray  # max up-edge key on T[u, pivot]
    level: np.ndarray  # level of each pivot (for searching)

    def row(self, u: int):
        a, b = self.offsets[u], self.offsets[u + 1]
        return list(zip(self.pivot[a:b].tolist(), self.maxkey[a:b].tolist()))


def build_pivots(rf: RootedForest, hld: HeavyLightDecomposition, weights=None) -> PivotTable:
    """Pivots of ``u``: ``u``, its root, and endpoints of light edges on the root path."""
    n = rf.n
    up = np.asarray(weights if weights is not None else rf.up_key, dtype=_I64)
    v_all = np.arange(n, dtype=_I64)
    nonroot = rf.parent != v_all
    light = hld.is_light(rf)
    # does u's row continue with its parent's full row (parent is a pivot of u)?
    par = rf.parent
    par_is_pivot = nonroot & (light | ~nonroot[par] | light[par])
    length = np.ones(n, dtype=_I64)
    order = _order_by_level(rf)
    levels = rf.level[order]
    bounds = np.flatnonzero(np.diff(levels)) + 1
    groups = np.split(order, bounds) if n else []
    for grp in groups:
        g = grp[nonroot[grp]]
        length[g] = 1 + length[par[g]] - np.where(par_is_pivot[g], 0, 1)
    off = np.zeros(n + 1, dtype=_I64)
    np.cumsum(length, out=off[1:])
    total = int(off[-1])
    piv = np.empty(total, dtype=_I64)
    mk = np.empty(total, dtype=_I64)
    piv[off[:-1]] = v_all
    mk[off[:-1]] = NEUTRAL
    for grp in groups:
        g = grp[nonroot[grp]]
        if not len(g):
            continue
        p = par[g]
        skip = np.where(par_is_pivot[g], 0, 1)
        cnt = length[g] - 1
        dst = np.repeat(off[g] + 1, cnt) + _ranges(cnt)
        src = np.repeat(off[p] + skip, cnt) + _ranges(cnt)
        piv[dst] = piv[src]
        wk = np.repeat(up[g], cnt)
        mk[dst] = np.maximum(mk[src], wk)
    return PivotTable(off, piv, mk, rf.level[piv])


def _ranges(cnt):
    """Concatenated aranges 0..c-1 for every c in ``cnt``."""
    cnt = np.asarray(cnt, dtype=_I64)
    total = int(cnt.sum())
    if total == 0:
        return np.zeros(0, dtype=_I64)
    starts = np.cumsum(cnt) - cnt
    return np.arange(total, dtype=_I64) - np.repeat(starts, cnt)


def path_max(u, a, rf: RootedForest, hld: HeavyLightDecomposition, pivots: PivotTable,
             check: bool = True):
    """Max up-edge key on the path from ``u`` up to its ancestor ``a`` (NEUTRAL if u == a)."""
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=_I64))
    a = np.atleast_1d(np.asarray(a, dtype=_I64))
    if check:
        _check_ancestor(u, a, rf)
    M = int(rf.level.max()) + 1 if rf.n else 1
    row_of = np.repeat(np.arange(rf.n, dtype=_I64), np.diff(pivots.offsets))
    keys = row_of * (M + 1) + (M - pivots.level)
    probe = u * (M + 1) + (M - rf.level[a])
    idx = np.searchsorted(keys, probe, side="right") - 1
    p = pivots.pivot[idx]
    best = pivots.maxkey[idx]
    seg = p != a
    if np.any(seg):
        lo = hld.layout[a[seg]] + 1
        hi = hld.layout[p[seg]]
        j = rmq_query(hld.up_rmq, lo, hi)
        best = best.copy()
        best[seg] = np.maximum(best[seg], hld.up_rmq.a[j])
    return int(best[0]) if scalar else best


def _check_ancestor(u, a, rf):
    same = rf.component_id[u] == rf.component_id[a]
    ok = same & (rf.level[a] <= rf.level[u])
    if not np.all(ok):
        raise NotAncestor("second vertex is not an ancestor of the first")
    # walk u up to a's level and compare; cheap enough for validation
    cur = u.copy()
    for _ in range(int((rf.level[u] - rf.level[a]).max(initial=0))):
        move = rf.level[cur] > rf.level[a]
        cur[move] = rf.parent[cur[move]]
    if np.any(cur != a):
        raise NotAncestor("second vertex is not an ancestor of the first")


# ----------------------------------------------------------------------
# pointer jumping


def jump_guard(n: int) -> int:
    return math.ceil(math.log2(max(n, 2))) + 2


def pointer_jump(parent, runtime=None, name: str = "pointer-jump") -> ContractionMap:
    """Map every vertex to the root of its parent-pointer tree.

    In memory this is synchronous doubling. On the simulator every unfinished
    vertex follows pointers through store lookups for up to the hop budget
    per round and writes back how far it got; lookups of vertices already
    seen on the same machine are free when caching is on.
    """
    parent = np.array(parent, dtype=_I64, copy=True)
    n = len(parent)
    guard = jump_guard(n)
    if runtime is None:
        rounds = 0
        while True:
            nxt = parent[parent]
            if np.array_equal(nxt, parent):
                break
            rounds += 1
            if rounds > guard:
                raise CycleDetected("pointer jumping did not reach a fixpoint")
            parent = nxt
        return ContractionMap(parent, rounds=max(rounds, 1))

    rt = runtime
    active = np.flatnonzero(parent != np.arange(n))
    rounds = 0
    while True:
        rounds += 1
        if rounds > guard:
            raise CycleDetected("pointer jumping did not reach a fixpoint")
        plan = rt.plan(len(active), cost_per_item=math.log2(max(n, 2)),
                       carry_pairs=n - len(active))
        items, mach, starts = plan.arrange(active)
        reached, done, q = kernels.chase_batch(parent, items, starts, rt.hop_budget,
                                               rt.config.caching)
        writes = np.ones(len(items), dtype=_I64)
        rt.bulk_round(name, plan, mach, q, writes, bytes_kv=int(q.sum()) * 16,
                      extra={"active": int(len(items))}, carry_count=n - len(active))
        parent[items] = reached
        active = items[~done]
        if not len(active):
            break
    return ContractionMap(parent, rounds=rounds)
