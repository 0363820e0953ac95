"""Immutable graphs, generators, edge-list I/O, ternarization and contraction."""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSize, ParseError

log = logging.getLogger(__name__)

_I64 = np.int64


class Graph:
    """Simple undirected graph stored as parallel edge arrays plus a CSR adjacency.

    Edges are identified by ``eid`` (unique, not necessarily dense) and keep
    their id through subgraph and contraction operations, so results can be
    mapped back to the input graph. ``labels`` optionally names each vertex by
    the id it had in the graph this one was derived from.
    """

    __slots__ = ("n", "src", "dst", "weight", "eid", "labels", "_adj", "_deg")

    def __init__(self, n, src, dst, weight=None, eid=None, *, labels=None, check=True):
        self.n = int(n)
        self.src = np.ascontiguousarray(src, dtype=_I64)
        self.dst = np.ascontiguousarray(dst, dtype=_I64)
        m = len(self.src)
        if len(self.dst) != m:
            raise ValueError("src and dst lengths differ")
        self.weight = None if weight is None else np.ascontiguousarray(weight, dtype=_I64)
        if self.weight is not None and len(self.weight) != m:
            raise ValueError("weight length differs from edge count")
        self.eid = np.arange(m, dtype=_I64) if eid is None else np.ascontiguousarray(eid, dtype=_I64)
        self.labels = None if labels is None else np.ascontiguousarray(labels, dtype=_I64)
        self._adj = None
        self._deg = None
        if check:
            self._validate()

    def _validate(self):
        if self.n < 0:
            raise InvalidSize("negative vertex count")
        if len(self.src) == 0:
            return
        lo = np.minimum(self.src, self.dst)
        hi = np.maximum(self.src, self.dst)
        if lo.min() < 0 or hi.max() >= self.n:
            raise ValueError("edge endpoint out of range")
        if np.any(lo == hi):
            raise ValueError("self-loops are not allowed")
        key = lo * self.n + hi
        if len(np.unique(key)) != len(key):
            raise ValueError("duplicate undirected edge")
        if len(np.unique(self.eid)) != len(self.eid):
            raise ValueError("edge ids must be unique")

    # -- basic queries -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.src)

    @property
    def is_weighted(self) -> bool:
        return self.weight is not None

    def degrees(self) -> np.ndarray:
        if self._deg is None:
            self._deg = np.bincount(
                np.concatenate([self.src, self.dst]), minlength=self.n
            ).astype(_I64)
        return self._deg

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def adjacency(self):
        """CSR ``(offsets, neighbor, edge_index)``.

        Rows are sorted by ``(weight, eid)`` for weighted graphs and by neighbor
        id otherwise.
        """
        if self._adj is None:
            m = self.m
            a = np.concatenate([self.src, self.dst])
            b = np.concatenate([self.dst, self.src])
            idx = np.concatenate([np.arange(m, dtype=_I64)] * 2)
            if self.weight is not None:
                order = np.lexsort((self.eid[idx], self.weight[idx], a))
            else:
                order = np.lexsort((b, a))
            offsets = np.zeros(self.n + 1, dtype=_I64)
            np.cumsum(np.bincount(a, minlength=self.n), out=offsets[1:])
            self._adj = (offsets, b[order].copy(), idx[order].copy())
        return self._adj

    def neighbors(self, v: int) -> np.ndarray:
        off, nbr, _ = self.adjacency()
        return nbr[off[v]:off[v + 1]]

    def edge_list(self):
        w = self.weight
        return [
            (int(a), int(b), None if w is None else int(w[i]), int(self.eid[i]))
            for i, (a, b) in enumerate(zip(self.src, self.dst))
        ]

    def order_keys(self) -> np.ndarray:
        """Position of every edge in the strict (weight, eid) total order."""
        w = self.weight if self.weight is not None else np.zeros(self.m, dtype=_I64)
        order = np.lexsort((self.eid, w))
        pos = np.empty(self.m, dtype=_I64)
        pos[order] = np.arange(self.m, dtype=_I64)
        return pos

    def edge_index_of(self, eids) -> np.ndarray:
        """Map edge ids back to positions in the edge arrays."""
        sorter = np.argsort(self.eid, kind="stable")
        return sorter[np.searchsorted(self.eid, np.asarray(eids, dtype=_I64), sorter=sorter)]

    # -- derived graphs ------------------------------------------------
    def edge_subgraph(self, mask) -> "Graph":
        mask = np.asarray(mask)
        if mask.dtype != bool:
            sel = np.zeros(self.m, dtype=bool)
            sel[mask] = True
            mask = sel
        w = None if self.weight is None else self.weight[mask]
        return Graph(self.n, self.src[mask], self.dst[mask], w, self.eid[mask],
                     labels=self.labels, check=False)

    def induced_subgraph(self, keep) -> "Graph":
        """Edges with both endpoints in ``keep``; vertex ids are unchanged."""
        keep = np.asarray(keep, dtype=bool)
        return self.edge_subgraph(keep[self.src] & keep[self.dst])

    def with_weights(self, weight) -> "Graph":
        return Graph(self.n, self.src, self.dst, weight, self.eid, labels=self.labels, check=False)

    def __repr__(self):
        kind = "weighted " if self.is_weighted else ""
        return f"<{kind}Graph n={self.n} m={self.m}>"


def same_edges(a: Graph, b: Graph) -> bool:
    return set(a.eid.tolist()) == set(b.eid.tolist())


# ----------------------------------------------------------------------
# generators


def generate_two_cycles(k: int) -> Graph:
    if k < 3:
        raise InvalidSize(f"cycle length must be >= 3, got {k}")
    return cycle_union([k, k])


def cycle_union(lengths, shuffle_seed=None) -> Graph:
    """Disjoint cycles of the given lengths, optionally with shuffled vertex ids."""
    lengths = [int(x) for x in lengths]
    if any(x < 3 for x in lengths):
        raise InvalidSize("every cycle needs at least 3 vertices")
    n = sum(lengths)
    src, dst = [], []
    start = 0
    for k in lengths:
        ids = np.arange(start, start + k, dtype=_I64)
        src.append(ids)
        dst.append(np.roll(ids, -1))
        start += k
    src = np.concatenate(src) if src else np.zeros(0, _I64)
    dst = np.concatenate(dst) if dst else np.zeros(0, _I64)
    if shuffle_seed is not None:
        perm = np.random.default_rng(shuffle_seed).permutation(n)
        src, dst = perm[src], perm[dst]
    return Graph(n, src, dst, check=False)


def generate_random(n: int, m: int, seed=0) -> Graph:
    """Uniform simple graph with exactly ``m`` distinct edges."""
    total = n * (n - 1) // 2
    if m < 0 or m > total:
        raise InvalidSize(f"cannot place {m} edges on {n} vertices")
    rng = np.random.default_rng(seed)
    if m == 0:
        return Graph(n, [], [], check=False)
    if m * 2 > total:
        iu, ju = np.triu_indices(n, 1)
        pick = np.sort(rng.choice(total, size=m, replace=False))
        return Graph(n, iu[pick], ju[pick], check=False)
    keys = np.zeros(0, dtype=_I64)
    while len(keys) < m:
        need = int((m - len(keys)) * 1.1) + 16
        a = rng.integers(0, n, size=need)
        b = rng.integers(0, n, size=need)
        ok = a != b
        lo, hi = np.minimum(a[ok], b[ok]), np.maximum(a[ok], b[ok])
        fresh = lo * n + hi
        _, first = np.unique(np.concatenate([keys, fresh]), return_index=True)
        # keep arrival order so the result does not depend on the oversampling
        merged = np.concatenate([keys, fresh])
        keys = merged[np.sort(first)]
    keys = keys[:m]
    return Graph(n, keys // n, keys % n, check=False)


def generate_path(n: int) -> Graph:
    ids = np.arange(max(n - 1, 0), dtype=_I64)
    return Graph(n, ids, ids + 1, check=False)


def generate_star(n: int) -> Graph:
    """Center 0 joined to leaves 1..n-1."""
    leaves = np.arange(1, n, dtype=_I64)
    return Graph(n, np.zeros_like(leaves), leaves, check=False)


def generate_tree(n: int, seed=0) -> Graph:
    """Random recursive tree: vertex i attaches to a uniform earlier vertex."""
    if n <= 1:
        return Graph(max(n, 0), [], [], check=False)
    rng = np.random.default_rng(seed)
    child = np.arange(1, n, dtype=_I64)
    parent = (rng.random(n - 1) * child).astype(_I64)
    return Graph(n, parent, child, check=False)


def generate_grid(rows: int, cols: int) -> Graph:
    ids = np.arange(rows * cols, dtype=_I64).reshape(rows, cols)
    right = (ids[:, :-1].ravel(), ids[:, 1:].ravel())
    down = (ids[:-1, :].ravel(), ids[1:, :].ravel())
    return Graph(rows * cols, np.concatenate([right[0], down[0]]),
                 np.concatenate([right[1], down[1]]), check=False)


def generate_matching(pairs: int) -> Graph:
    a = np.arange(0, 2 * pairs, 2, dtype=_I64)
    return Graph(2 * pairs, a, a + 1, check=False)


def degree_weights(g: Graph) -> Graph:
    deg = g.degrees()
    return g.with_weights(deg[g.src] + deg[g.dst])


def random_weights(g: Graph, seed=0, high: int = 2**31) -> Graph:
    rng = np.random.default_rng(seed)
    return g.with_weights(rng.integers(1, high, size=g.m))


def eid_weights(g: Graph) -> Graph:
    return g.with_weights(g.eid.copy())


# ----------------------------------------------------------------------
# ternarization


@dataclass(frozen=True)
class TernarizedGraph:
    """Degree-3 version of a graph.

    ``base`` vertex ids below the input's ``n`` are the original vertices (a
    replaced vertex keeps its id as the first vertex of its cycle); ``origin``
    maps every base vertex to the input vertex it stands for. ``orig_eid`` is
    the input edge id of each base edge, or -1 for a dummy cycle edge.
    """

    base: Graph
    origin: np.ndarray
    is_dummy: np.ndarray
    orig_eid: np.ndarray

    def msf_keys(self) -> np.ndarray:
        """Total order with dummy edges first, then (weight, input eid)."""
        g = self.base
        w = g.weight if g.weight is not None else np.zeros(g.m, dtype=_I64)
        w = np.where(self.is_dummy, 0, w)
        tie = np.where(self.is_dummy, g.eid, self.orig_eid)
        order = np.lexsort((tie, w, ~self.is_dummy))
        pos = np.empty(g.m, dtype=_I64)
        pos[order] = np.arange(g.m, dtype=_I64)
        return pos


def ternarize(g: Graph) -> TernarizedGraph:
    n, m = g.n, g.m
    deg = g.degrees()
    big = deg > 3
    # slot of each incidence within its vertex's neighbor-id ordering
    a = np.concatenate([g.src, g.dst])
    b = np.concatenate([g.dst, g.src])
    idx = np.concatenate([np.arange(m, dtype=_I64)] * 2)
    order = np.lexsort((b, a))
    offsets = np.zeros(n + 1, dtype=_I64)
    np.cumsum(deg, out=offsets[1:])
    slot = np.empty(2 * m, dtype=_I64)
    slot[order] = np.arange(2 * m, dtype=_I64) - offsets[a[order]]

    extra = np.where(big, deg - 1, 0)
    first_new = np.zeros(n, dtype=_I64)
    if n > 1:
        np.cumsum(extra[:-1], out=first_new[1:])
    first_new += n
    new_n = n + int(extra.sum())

    def cycle_vertex(x, s):
        return np.where(big[x] & (s > 0), first_new[x] + s - 1, x)

    endpoint = cycle_vertex(a, slot)
    new_src = endpoint[:m]
    new_dst = endpoint[m:]

    bigs = np.flatnonzero(big)
    if len(bigs):
        d = deg[bigs]
        owner = np.repeat(bigs, d)
        s = np.arange(int(d.sum()), dtype=_I64) - np.repeat(np.cumsum(d) - d, d)
        nxt = (s + 1) % deg[owner]
        dsrc = cycle_vertex(owner, s)
        ddst = cycle_vertex(owner, nxt)
    else:
        owner = dsrc = ddst = np.zeros(0, dtype=_I64)

    src = np.concatenate([new_src, dsrc])
    dst = np.concatenate([new_dst, ddst])
    dummy = np.concatenate([np.zeros(m, bool), np.ones(len(dsrc), bool)])
    w = None
    if g.weight is not None:
        w = np.concatenate([g.weight, np.zeros(len(dsrc), dtype=_I64)])
    orig_eid = np.concatenate([g.eid, np.full(len(dsrc), -1, dtype=_I64)])
    origin = np.arange(new_n, dtype=_I64)
    if len(bigs):
        origin[n:] = np.repeat(bigs, deg[bigs] - 1)
    base = Graph(new_n, src, dst, w, check=False)
    return TernarizedGraph(base, origin, dummy, orig_eid)


# ----------------------------------------------------------------------
# contraction


@dataclass
class ContractionMap:
    """Vertex -> representative vertex."""

    rep: np.ndarray
    rounds: int = 0

    def __len__(self):
        return len(self.rep)

    def canonical(self) -> np.ndarray:
        """Relabel every class by its minimum member (comparison-friendly)."""
        rep = np.asarray(self.rep)
        low = np.full(len(rep), np.iinfo(_I64).max, dtype=_I64)
        np.minimum.at(low, rep, np.arange(len(rep), dtype=_I64))
        return low[rep]

    def num_classes(self) -> int:
        return len(np.unique(self.rep))


def contract_graph(g: Graph, rep, drop_isolated: bool = False) -> Graph:
    """Merge vertices by representative, keeping the lightest parallel edge.

    The result's vertices are the distinct representatives, densely relabelled;
    ``labels`` gives the representative id of each new vertex.
    """
    rep = np.asarray(rep.rep if isinstance(rep, ContractionMap) else rep, dtype=_I64)
    a, b = rep[g.src], rep[g.dst]
    keep = a != b
    a, b = a[keep], b[keep]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    eid = g.eid[keep]
    w = None if g.weight is None else g.weight[keep]
    if len(lo):
        # keep the lightest edge per endpoint pair under (weight, eid)
        wk = w if w is not None else np.zeros(len(lo), dtype=_I64)
        rank = np.empty(len(lo), dtype=_I64)
        rank[np.lexsort((eid, wk))] = np.arange(len(lo), dtype=_I64)
        _, inv = np.unique(lo * np.int64(len(rep)) + hi, return_inverse=True)
        best = np.full(int(inv.max()) + 1, len(lo), dtype=_I64)
        np.minimum.at(best, inv.ravel(), rank)
        pick = np.empty(len(lo), dtype=_I64)
        pick[rank] = np.arange(len(lo), dtype=_I64)
        sel = np.sort(pick[best])
        lo, hi, eid = lo[sel], hi[sel], eid[sel]
        w = None if w is None else w[sel]
    if drop_isolated:
        labels = np.unique(np.concatenate([lo, hi]))
    else:
        labels = np.unique(rep)
    index = np.full(len(rep), -1, dtype=_I64)
    index[labels] = np.arange(len(labels), dtype=_I64)
    src = index[lo]
    dst = index[hi]
    return Graph(len(labels), src, dst, w, eid, labels=labels, check=False)


# ----------------------------------------------------------------------
# edge-list I/O


@dataclass
class LoadStats:
    duplicates: int = 0
    self_loops: int = 0


def load_edge_list(path, stats: LoadStats | None = None) -> Graph:
    """Read ``u v [w]`` lines; '#' starts a comment. Ids are densified in first-seen order."""
    stats = stats if stats is not None else LoadStats()
    ids: dict[str, int] = {}
    src, dst, wts = [], [], []
    seen = set()
    weighted = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'u v [w]', got {raw.strip()!r}", lineno)
            has_w = len(parts) == 3
            if weighted is None:
                weighted = has_w
            elif weighted != has_w:
                raise ParseError("mixed weighted and unweighted lines", lineno)
            try:
                w = int(parts[2]) if has_w else None
            except ValueError:
                raise ParseError(f"bad weight {parts[2]!r}", lineno) from None
            for tok in parts[:2]:
                if not tok.lstrip("-").isdigit():
                    raise ParseError(f"bad vertex id {tok!r}", lineno)
            u = ids.setdefault(parts[0], len(ids))
            v = ids.setdefault(parts[1], len(ids))
            if u == v:
                stats.self_loops += 1
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                stats.duplicates += 1
                continue
            seen.add(key)
            src.append(u)
            dst.append(v)
            wts.append(w)
    if stats.duplicates or stats.self_loops:
        log.warning("%s: dropped %d duplicate edges and %d self-loops",
                    path, stats.duplicates, stats.self_loops)
    weight = np.array(wts, dtype=_I64) if weighted else None
    return Graph(len(ids), np.array(src, dtype=_I64), np.array(dst, dtype=_I64), weight, check=False)


def save_edge_list(g: Graph, path, eids=None):
    sel = np.ones(g.m, dtype=bool) if eids is None else np.isin(g.eid, np.asarray(eids, dtype=_I64))
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        for i in np.flatnonzero(sel):
            if g.weight is None:
                fh.write(f"{g.src[i]} {g.dst[i]}\n")
            else:
                fh.write(f"{g.src[i]} {g.dst[i]} {g.weight[i]}\n")
    os.replace(tmp, path)


def log2ceil(x: float) -> int:
    return max(0, math.ceil(math.log2(x))) if x > 1 else 0
