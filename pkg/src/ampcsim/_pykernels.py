"""Pure-Python kernels; reference semantics for the compiled versions.

Every batch kernel processes work items machine by machine, in the order
given, and models the per-machine cache with a stamp array: an entry is a
cache hit iff it was fetched earlier on the same machine in the same round.
Counts returned per item are the charged queries (cache hits excluded).
"""
from __future__ import annotations

import heapq

import numpy as np

# Prim stop reasons
EXPLORED = 0
COMPONENT_DONE = 1
HIT_LOWER = 2

# query-process answers
TRUNCATED = 0
IN_SET = 1
NOT_IN_SET = 2


def _machine_of(mstart, k):
    mach = np.zeros(k, dtype=np.int64)
    for j in range(len(mstart) - 1):
        mach[mstart[j]:mstart[j + 1]] = j
    return mach


def prim_batch(off, nbr, ekey, prio, items, mstart, limit, by_edges, emit_visits, caching):
    """Truncated Prim search from every item.

    ``limit`` bounds explored vertices, or examined edges when ``by_edges``.
    Returns ``(stop, hit, explored, queries, msf_off, msf_pos, vis_off, vis)``
    where ``msf_pos`` are CSR positions of the tree edges found per item and
    ``vis`` the visited vertices (start and stopping vertex excluded).
    """
    n = len(off) - 1
    k = len(items)
    stop = np.zeros(k, dtype=np.int8)
    hit = np.full(k, -1, dtype=np.int64)
    explored = np.zeros(k, dtype=np.int64)
    queries = np.zeros(k, dtype=np.int64)
    msf_pos, msf_off = [], [0]
    vis, vis_off = [], [0]
    cstamp = [-1] * n
    vstamp = [-1] * n
    mach = _machine_of(mstart, k)
    for i in range(k):
        v = int(items[i])
        mid = int(mach[i])
        vstamp[v] = i
        count = 1
        heap = [(int(ekey[j]), j) for j in range(off[v], off[v + 1])]
        heapq.heapify(heap)
        examined = len(heap)
        q = 0
        reason = COMPONENT_DONE
        while True:
            while heap and vstamp[nbr[heap[0][1]]] == i:
                heapq.heappop(heap)
            if not heap:
                reason = COMPONENT_DONE
                break
            if (examined if by_edges else count) >= limit:
                reason = EXPLORED
                break
            _, j = heapq.heappop(heap)
            u = int(nbr[j])
            vstamp[u] = i
            count += 1
            msf_pos.append(j)
            if prio[u] < prio[v]:
                reason = HIT_LOWER
                hit[i] = u
                break
            if emit_visits:
                vis.append(u)
            if not (caching and cstamp[u] == mid):
                q += 1
                cstamp[u] = mid
            for jj in range(off[u], off[u + 1]):
                if vstamp[nbr[jj]] != i:
                    heapq.heappush(heap, (int(ekey[jj]), jj))
            examined += off[u + 1] - off[u]
        stop[i] = reason
        explored[i] = count
        queries[i] = q
        msf_off.append(len(msf_pos))
        vis_off.append(len(vis))
    return (stop, hit, explored, queries, np.array(msf_off, dtype=np.int64),
            np.array(msf_pos, dtype=np.int64), np.array(vis_off, dtype=np.int64),
            np.array(vis, dtype=np.int64))


def mis_batch(lo_off, lo_nbr, known, items, mstart, budget, caching):
    """Greedy-MIS query process from every item.

    ``lo_nbr`` lists, per vertex, its lower-priority neighbours in ascending
    priority. ``known`` holds states already in the store (0 unknown).
    Returns ``(answer, queries)``.
    """
    n = len(lo_off) - 1
    k = len(items)
    answer = np.zeros(k, dtype=np.int8)
    queries = np.zeros(k, dtype=np.int64)
    rstamp = [-1] * n  # record cached on machine
    sstamp = [-1] * n  # state cached on machine
    sval = [0] * n
    mach = _machine_of(mstart, k)
    for i in range(k):
        v = int(items[i])
        mid = int(mach[i])
        if known[v]:
            answer[i] = known[v]
            continue
        if caching and sstamp[v] == mid:
            answer[i] = sval[v]
            continue
        fetched = 0
        stack = [[v, lo_off[v]]]
        res = TRUNCATED
        while stack:
            frame = stack[-1]
            x, p = frame
            if p == lo_off[x + 1]:
                child = IN_SET
            else:
                u = int(lo_nbr[p])
                if caching and sstamp[u] == mid:
                    s = sval[u]
                else:
                    if not (caching and rstamp[u] == mid):
                        if fetched == budget:
                            break
                        fetched += 1
                        rstamp[u] = mid
                    s = known[u]
                if s == 0:
                    stack.append([u, lo_off[u]])
                    continue
                if s == NOT_IN_SET:
                    frame[1] += 1
                    continue
                child = NOT_IN_SET  # a lower neighbour is in the set
            # x resolved to ``child``; unwind
            while True:
                x = stack.pop()[0]
                if caching:
                    sstamp[x] = mid
                    sval[x] = child
                if not stack:
                    res = child
                    break
                if child == IN_SET:
                    child = NOT_IN_SET
                    continue
                stack[-1][1] += 1
                break
        answer[i] = res
        queries[i] = fetched
    return answer, queries


def mm_batch(inc_off, inc_edge, inc_other, eu, ev, eprio, posu, posv, mate, fin, cutoff,
             items, item_is_edge, mstart, budget, caching):
    """Greedy-matching query processes.

    Vertex items run the vertex process (answer: mate id, -1 free, -2
    truncated); edge items run the edge process (answer 1 in, 2 out, 0
    truncated). ``mate``/``fin`` are the stored per-vertex records: a matched
    partner, and the length of the incidence prefix known to be unmatched.
    Edges whose priority is ``>= cutoff`` are ignored.
    Returns ``(answer, progress, queries)``; ``progress`` is the finished
    prefix length reached by a vertex item. ``posu[e]``/``posv[e]`` give the
    index of edge ``e`` inside the incidence lists of ``eu[e]``/``ev[e]``.
    """
    n = len(inc_off) - 1
    m = len(eu)
    k = len(items)
    answer = np.zeros(k, dtype=np.int64)
    progress = np.zeros(k, dtype=np.int64)
    queries = np.zeros(k, dtype=np.int64)
    rstamp = [-1] * n
    estamp = [-1] * m
    eval_ = [0] * m
    mstamp = [-1] * n
    mval = [0] * n
    mach = _machine_of(mstart, k)

    def stored_state(e):
        a, b = eu[e], ev[e]
        if mate[a] >= 0 or mate[b] >= 0:
            return IN_SET if mate[a] == b else NOT_IN_SET
        if posu[e] < fin[a] or posv[e] < fin[b]:
            return NOT_IN_SET
        return 0

    for i in range(k):
        mid = int(mach[i])
        root = int(items[i])
        held = -1 if item_is_edge[i] else root
        state = {"fetched": 0}

        def fetch(x):
            if x == held or (caching and rstamp[x] == mid):
                return True
            if state["fetched"] == budget:
                return False
            state["fetched"] += 1
            rstamp[x] = mid
            return True

        def edge_status(e):
            """Known state of e, or 0 (needs recursion), or -1 (budget gone)."""
            if caching:
                if estamp[e] == mid:
                    return eval_[e]
                a, b = eu[e], ev[e]
                if mstamp[a] == mid:
                    return IN_SET if mval[a] == b else NOT_IN_SET
                if mstamp[b] == mid:
                    return IN_SET if mval[b] == a else NOT_IN_SET
            for x in (eu[e], ev[e]):
                if not fetch(x):
                    return -1
            return stored_state(e)

        def remember(e, s):
            if caching:
                estamp[e] = mid
                eval_[e] = s
                if s == IN_SET:
                    a, b = eu[e], ev[e]
                    mstamp[a] = mstamp[b] = mid
                    mval[a], mval[b] = b, a

        def lower_edges(e):
            """Edges incident to e with smaller priority, ascending."""
            a, b = eu[e], ev[e]
            pe = eprio[e]
            pa, pb = inc_off[a], inc_off[b]
            ea, eb = inc_off[a + 1], inc_off[b + 1]
            while True:
                fa = inc_edge[pa] if pa < ea else -1
                fb = inc_edge[pb] if pb < eb else -1
                if fa >= 0 and (eprio[fa] >= pe or eprio[fa] >= cutoff):
                    fa = -1
                if fb >= 0 and (eprio[fb] >= pe or eprio[fb] >= cutoff):
                    fb = -1
                if fa < 0 and fb < 0:
                    return
                if fb < 0 or (fa >= 0 and eprio[fa] < eprio[fb]):
                    yield fa
                    pa += 1
                else:
                    yield fb
                    pb += 1

        def resolve(e):
            """Edge process with an explicit stack; returns 1, 2 or 0 (truncated)."""
            stack = [(e, lower_edges(e))]
            child = None
            while stack:
                cur, it = stack[-1]
                if child is not None:
                    if child == IN_SET:
                        remember(cur, NOT_IN_SET)
                        stack.pop()
                        child = NOT_IN_SET
                        continue
                    child = None
                f = next(it, None)
                if f is None:
                    remember(cur, IN_SET)
                    stack.pop()
                    child = IN_SET
                    continue
                s = edge_status(f)
                if s < 0:
                    return TRUNCATED
                if s == 0:
                    stack.append((f, lower_edges(f)))
                elif s == IN_SET:
                    remember(cur, NOT_IN_SET)
                    stack.pop()
                    child = NOT_IN_SET
            return child

        if item_is_edge[i]:
            e = root
            s = edge_status(e)
            if s == 0:
                s = resolve(e)
            elif s < 0:
                s = TRUNCATED
            answer[i] = s
        else:
            v = root
            if mate[v] >= 0:
                answer[i] = mate[v]
                progress[i] = fin[v]
                continue
            p = inc_off[v] + fin[v]
            result = -1
            while p < inc_off[v + 1]:
                e = inc_edge[p]
                if eprio[e] >= cutoff:
                    break
                s = edge_status(e)
                if s == 0:
                    s = resolve(e)
                if s <= 0:
                    result = -2
                    break
                if s == IN_SET:
                    result = int(inc_other[p])
                    break
                p += 1
            answer[i] = result
            progress[i] = p - inc_off[v]
        queries[i] = state["fetched"]
    return answer, progress, queries


def walk_batch(succ, stop, first, mstart, caching, record):
    """Follow ``succ`` from each ``first`` until a node with ``stop`` set.

    One charged query per node read (cache hits excluded). Returns
    ``(end, steps, queries, rec_off, rec)`` where ``rec`` lists the
    non-stopping nodes passed, in walk order.
    """
    k = len(first)
    N = len(succ)
    end = np.zeros(k, dtype=np.int64)
    steps = np.zeros(k, dtype=np.int64)
    queries = np.zeros(k, dtype=np.int64)
    rec, rec_off = [], [0]
    cstamp = [-1] * N
    mach = _machine_of(mstart, k)
    for i in range(k):
        mid = int(mach[i])
        cur = int(first[i])
        s = 1
        q = 0
        while True:
            if not (caching and cstamp[cur] == mid):
                q += 1
                cstamp[cur] = mid
            if stop[cur]:
                break
            if record:
                rec.append(cur)
            cur = int(succ[cur])
            s += 1
            if s > N + 1:
                raise RuntimeError("walk did not reach a stopping node")
        end[i] = cur
        steps[i] = s
        queries[i] = q
        rec_off.append(len(rec))
    return end, steps, queries, np.array(rec_off, dtype=np.int64), np.array(rec, dtype=np.int64)


def chase_batch(parent, items, mstart, hop_budget, caching):
    """Follow parent pointers from each item for at most ``hop_budget`` hops.

    Returns ``(reached, done, queries)``.
    """
    k = len(items)
    n = len(parent)
    reached = np.zeros(k, dtype=np.int64)
    done = np.zeros(k, dtype=bool)
    queries = np.zeros(k, dtype=np.int64)
    cstamp = [-1] * n
    mach = _machine_of(mstart, k)
    for i in range(k):
        mid = int(mach[i])
        cur = int(items[i])
        q = 0
        hops = 0
        nxt = int(parent[cur])
        while nxt != cur and hops < hop_budget:
            if not (caching and cstamp[nxt] == mid):
                q += 1
                cstamp[nxt] = mid
            cur = nxt
            nxt = int(parent[cur])
            hops += 1
        reached[i] = cur
        done[i] = nxt == cur
        queries[i] = q
    return reached, done, queries


def walk_min_batch(succ, prio, val, w, mark, items, mstart, caching):
    """From each item walk forward until a node of smaller priority or back to the start.

    Sums the rows of ``w`` and takes the minimum of ``val`` over the nodes
    passed (start included, end excluded). ``markoff`` is the weight sum up to
    the first node with ``mark`` set (start included in the search), or -1
    rows when none was passed. Returns ``(end, steps, queries, wsum, vmin,
    markoff, hasmark)``.
    """
    k = len(items)
    N = len(succ)
    W = w.shape[1]
    end = np.zeros(k, dtype=np.int64)
    steps = np.zeros(k, dtype=np.int64)
    queries = np.zeros(k, dtype=np.int64)
    wsum = np.zeros((k, W), dtype=np.int64)
    vmin = np.zeros(k, dtype=np.int64)
    markoff = np.full((k, W), -1, dtype=np.int64)
    hasmark = np.zeros(k, dtype=bool)
    cstamp = [-1] * N
    mach = _machine_of(mstart, k)
    for i in range(k):
        mid = int(mach[i])
        start = int(items[i])
        ps = prio[start]
        cur = start
        acc = np.zeros(W, dtype=np.int64)
        best = int(val[start])
        s = 0
        q = 0
        while True:
            if mark[cur] and not hasmark[i]:
                hasmark[i] = True
                markoff[i] = acc
            acc += w[cur]
            if val[cur] < best:
                best = int(val[cur])
            cur = int(succ[cur])
            s += 1
            if not (caching and cstamp[cur] == mid):
                q += 1
                cstamp[cur] = mid
            if cur == start or prio[cur] < ps:
                break
            if s > N:
                raise RuntimeError("walk did not terminate")
        end[i] = cur
        steps[i] = s
        queries[i] = q
        wsum[i] = acc
        vmin[i] = best
    return end, steps, queries, wsum, vmin, markoff, hasmark
