"""Plain sequential reference algorithms used to check the simulated ones."""
from __future__ import annotations

import numpy as np

from .graph import Graph
from . import ranks as _ranks

_I64 = np.int64


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb
        return True


def union_find_labels(n: int, src, dst) -> np.ndarray:
    """Component label of every vertex: the smallest vertex id in its component."""
    uf = UnionFind(n)
    for a, b in zip(np.asarray(src).tolist(), np.asarray(dst).tolist()):
        uf.union(a, b)
    return np.array([uf.find(v) for v in range(n)], dtype=_I64)


def union_find_cc(g: Graph) -> np.ndarray:
    return union_find_labels(g.n, g.src, g.dst)


def kruskal(g: Graph) -> np.ndarray:
    """Minimum spanning forest as a sorted array of edge ids, ties broken by edge id."""
    order = np.lexsort((g.eid, g.weight))
    uf = UnionFind(g.n)
    src, dst, eid = g.src.tolist(), g.dst.tolist(), g.eid.tolist()
    keep = [eid[i] for i in order.tolist() if uf.union(src[i], dst[i])]
    return np.sort(np.array(keep, dtype=_I64))


def seq_greedy_mis(g: Graph, rank=None, seed: int = 0) -> np.ndarray:
    """Lexicographically first MIS in priority order, as a boolean mask."""
    prio = _ranks.priorities(_ranks.vertex_ranks(g.n, seed) if rank is None else rank)
    off, nbr, _ = g.adjacency()
    in_set = np.zeros(g.n, dtype=bool)
    blocked = np.zeros(g.n, dtype=bool)
    for v in np.argsort(prio, kind="stable").tolist():
        if blocked[v]:
            continue
        in_set[v] = True
        blocked[nbr[off[v]:off[v + 1]]] = True
    return in_set


def seq_greedy_mm(g: Graph, rank=None, seed: int = 0) -> np.ndarray:
    """Lexicographically first maximal matching in edge priority order; sorted edge ids."""
    prio = _ranks.priorities(_ranks.edge_ranks(g.eid, seed) if rank is None else rank)
    used = np.zeros(g.n, dtype=bool)
    out = []
    for i in np.argsort(prio, kind="stable").tolist():
        a, b = int(g.src[i]), int(g.dst[i])
        if a != b and not used[a] and not used[b]:
            used[a] = used[b] = True
            out.append(int(g.eid[i]))
    return np.sort(np.array(out, dtype=_I64))


def is_independent(g: Graph, mask) -> bool:
    mask = np.asarray(mask, dtype=bool)
    return not np.any(mask[g.src] & mask[g.dst] & (g.src != g.dst))


def is_maximal_independent(g: Graph, mask) -> bool:
    mask = np.asarray(mask, dtype=bool)
    if not is_independent(g, mask):
        return False
    covered = mask.copy()
    covered[g.dst[mask[g.src]]] = True
    covered[g.src[mask[g.dst]]] = True
    return bool(covered.all())


def is_maximal_matching(g: Graph, edge_ids) -> bool:
    idx = g.edge_index_of(np.asarray(edge_ids, dtype=_I64))
    ends = np.concatenate([g.src[idx], g.dst[idx]])
    if len(np.unique(ends)) != len(ends):
        return False
    used = np.zeros(g.n, dtype=bool)
    used[ends] = True
    return not np.any(~used[g.src] & ~used[g.dst] & (g.src != g.dst))


def same_partition(a, b) -> bool:
    """True when two label arrays induce the same partition."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    pairs = np.unique(np.stack([a, b]), axis=1)
    return len(np.unique(pairs[0])) == pairs.shape[1] == len(np.unique(pairs[1]))
