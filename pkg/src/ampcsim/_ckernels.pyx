# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics match ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t i64
ctypedef cnp.int8_t i8

cdef enum:
    EXPLORED = 0
    COMPONENT_DONE = 1
    HIT_LOWER = 2
    TRUNCATED = 0
    IN_SET = 1
    NOT_IN_SET = 2


cdef inline void _heap_push(i64[::1] hk, i64[::1] hv, i64 *size, i64 key, i64 val) noexcept nogil:
    cdef i64 i = size[0]
    cdef i64 parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if hk[parent] <= key:
            break
        hk[i] = hk[parent]
        hv[i] = hv[parent]
        i = parent
    hk[i] = key
    hv[i] = val


cdef inline void _heap_pop(i64[::1] hk, i64[::1] hv, i64 *size) noexcept nogil:
    cdef i64 n = size[0] - 1
    cdef i64 key = hk[n]
    cdef i64 val = hv[n]
    cdef i64 i = 0
    cdef i64 c
    size[0] = n
    if n == 0:
        return
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and hk[c + 1] < hk[c]:
            c += 1
        if hk[c] >= key:
            break
        hk[i] = hk[c]
        hv[i] = hv[c]
        i = c
    hk[i] = key
    hv[i] = val


def _machine_of(i64[::1] mstart, i64 k):
    mach = np.zeros(k, dtype=np.int64)
    cdef i64[::1] mv = mach
    cdef i64 j, i
    for j in range(mstart.shape[0] - 1):
        for i in range(mstart[j], mstart[j + 1]):
            mv[i] = j
    return mach


def prim_batch(i64[::1] off, i64[::1] nbr, i64[::1] ekey, i64[::1] prio, i64[::1] items,
               i64[::1] mstart, i64 limit, bint by_edges, bint emit_visits, bint caching):
    cdef i64 n = off.shape[0] - 1
    cdef i64 k = items.shape[0]
    cdef i64 maxdeg = 0
    cdef i64 x
    for x in range(n):
        if off[x + 1] - off[x] > maxdeg:
            maxdeg = off[x + 1] - off[x]
    cdef i64 cap = nbr.shape[0] + 1
    if by_edges:
        cap = min(cap, limit + 2 * maxdeg + 1)
    else:
        cap = min(cap, (limit + 1) * maxdeg + 1)
    hk_a = np.empty(cap, dtype=np.int64)
    hv_a = np.empty(cap, dtype=np.int64)
    cdef i64[::1] hk = hk_a
    cdef i64[::1] hv = hv_a
    stop_a = np.zeros(k, dtype=np.int8)
    hit_a = np.full(k, -1, dtype=np.int64)
    explored_a = np.zeros(k, dtype=np.int64)
    queries_a = np.zeros(k, dtype=np.int64)
    msf_off_a = np.zeros(k + 1, dtype=np.int64)
    vis_off_a = np.zeros(k + 1, dtype=np.int64)
    cdef i8[::1] stop = stop_a
    cdef i64[::1] hit = hit_a
    cdef i64[::1] explored = explored_a
    cdef i64[::1] queries = queries_a
    cdef i64[::1] msf_off = msf_off_a
    cdef i64[::1] vis_off = vis_off_a
    cdef i64 mcap = max(16, k * 2), vcap = 16 if not emit_visits else max(16, k * 2)
    msf_a = np.empty(mcap, dtype=np.int64)
    vis_a = np.empty(vcap, dtype=np.int64)
    cdef i64[::1] msf = msf_a
    cdef i64[::1] vis = vis_a
    cdef i64 nmsf = 0, nvis = 0
    cstamp_a = np.full(n, -1, dtype=np.int64)
    vstamp_a = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] cstamp = cstamp_a
    cdef i64[::1] vstamp = vstamp_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef i64 i, v, mid, count, examined, q, reason, size, j, u, jj
    for i in range(k):
        v = items[i]
        mid = mach[i]
        vstamp[v] = i
        count = 1
        size = 0
        for j in range(off[v], off[v + 1]):
            _heap_push(hk, hv, &size, ekey[j], j)
        examined = off[v + 1] - off[v]
        q = 0
        while True:
            while size > 0 and vstamp[nbr[hv[0]]] == i:
                _heap_pop(hk, hv, &size)
            if size == 0:
                reason = COMPONENT_DONE
                break
            if (examined if by_edges else count) >= limit:
                reason = EXPLORED
                break
            j = hv[0]
            _heap_pop(hk, hv, &size)
            u = nbr[j]
            vstamp[u] = i
            count += 1
            if nmsf == mcap:
                mcap *= 2
                msf_a = np.resize(msf_a, mcap)
                msf = msf_a
            msf[nmsf] = j
            nmsf += 1
            if prio[u] < prio[v]:
                reason = HIT_LOWER
                hit[i] = u
                break
            if emit_visits:
                if nvis == vcap:
                    vcap *= 2
                    vis_a = np.resize(vis_a, vcap)
                    vis = vis_a
                vis[nvis] = u
                nvis += 1
            if not (caching and cstamp[u] == mid):
                q += 1
                cstamp[u] = mid
            if size + off[u + 1] - off[u] > cap:
                cap = 2 * (size + off[u + 1] - off[u])
                hk_a = np.resize(hk_a, cap)
                hv_a = np.resize(hv_a, cap)
                hk = hk_a
                hv = hv_a
            for jj in range(off[u], off[u + 1]):
                if vstamp[nbr[jj]] != i:
                    _heap_push(hk, hv, &size, ekey[jj], jj)
            examined += off[u + 1] - off[u]
        stop[i] = reason
        explored[i] = count
        queries[i] = q
        msf_off[i + 1] = nmsf
        vis_off[i + 1] = nvis
    return (stop_a, hit_a, explored_a, queries_a, msf_off_a, msf_a[:nmsf].copy(),
            vis_off_a, vis_a[:nvis].copy())


def mis_batch(i64[::1] lo_off, i64[::1] lo_nbr, i8[::1] known, i64[::1] items,
              i64[::1] mstart, i64 budget, bint caching):
    cdef i64 n = lo_off.shape[0] - 1
    cdef i64 k = items.shape[0]
    answer_a = np.zeros(k, dtype=np.int8)
    queries_a = np.zeros(k, dtype=np.int64)
    cdef i8[::1] answer = answer_a
    cdef i64[::1] queries = queries_a
    rstamp_a = np.full(n, -1, dtype=np.int64)
    sstamp_a = np.full(n, -1, dtype=np.int64)
    sval_a = np.zeros(n, dtype=np.int8)
    sx_a = np.zeros(n + 1, dtype=np.int64)
    sp_a = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] rstamp = rstamp_a
    cdef i64[::1] sstamp = sstamp_a
    cdef i8[::1] sval = sval_a
    cdef i64[::1] sx = sx_a
    cdef i64[::1] sp = sp_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef i64 i, v, mid, fetched, depth, x, p, u
    cdef int res, child, s
    cdef bint truncated
    for i in range(k):
        v = items[i]
        mid = mach[i]
        if known[v] != 0:
            answer[i] = known[v]
            continue
        if caching and sstamp[v] == mid:
            answer[i] = sval[v]
            continue
        fetched = 0
        depth = 1
        sx[0] = v
        sp[0] = lo_off[v]
        res = TRUNCATED
        truncated = False
        while depth > 0:
            x = sx[depth - 1]
            p = sp[depth - 1]
            if p == lo_off[x + 1]:
                child = IN_SET
            else:
                u = lo_nbr[p]
                if caching and sstamp[u] == mid:
                    s = sval[u]
                else:
                    if not (caching and rstamp[u] == mid):
                        if fetched == budget:
                            truncated = True
                            break
                        fetched += 1
                        rstamp[u] = mid
                    s = known[u]
                if s == 0:
                    sx[depth] = u
                    sp[depth] = lo_off[u]
                    depth += 1
                    continue
                if s == NOT_IN_SET:
                    sp[depth - 1] += 1
                    continue
                child = NOT_IN_SET
            while True:
                depth -= 1
                x = sx[depth]
                if caching:
                    sstamp[x] = mid
                    sval[x] = child
                if depth == 0:
                    res = child
                    break
                if child == IN_SET:
                    child = NOT_IN_SET
                    continue
                sp[depth - 1] += 1
                break
        answer[i] = res
        queries[i] = fetched
    return answer_a, queries_a


cdef struct MmCtx:
    i64 mid
    i64 held
    i64 fetched
    i64 budget
    bint caching


cdef inline bint _mm_fetch(MmCtx *c, i64 x, i64[::1] rstamp) noexcept nogil:
    if x == c.held or (c.caching and rstamp[x] == c.mid):
        return True
    if c.fetched == c.budget:
        return False
    c.fetched += 1
    rstamp[x] = c.mid
    return True


cdef inline int _mm_status(MmCtx *c, i64 e, i64[::1] eu, i64[::1] ev, i64[::1] posu,
                           i64[::1] posv, i64[::1] mate, i64[::1] fin, i64[::1] rstamp,
                           i64[::1] estamp, i8[::1] evals, i64[::1] mstamp,
                           i64[::1] mval) noexcept nogil:
    cdef i64 a = eu[e], b = ev[e]
    if c.caching:
        if estamp[e] == c.mid:
            return evals[e]
        if mstamp[a] == c.mid:
            return IN_SET if mval[a] == b else NOT_IN_SET
        if mstamp[b] == c.mid:
            return IN_SET if mval[b] == a else NOT_IN_SET
    if not _mm_fetch(c, a, rstamp):
        return -1
    if not _mm_fetch(c, b, rstamp):
        return -1
    if mate[a] >= 0 or mate[b] >= 0:
        return IN_SET if mate[a] == b else NOT_IN_SET
    if posu[e] < fin[a] or posv[e] < fin[b]:
        return NOT_IN_SET
    return 0


cdef inline void _mm_remember(MmCtx *c, i64 e, int s, i64[::1] eu, i64[::1] ev,
                              i64[::1] estamp, i8[::1] evals, i64[::1] mstamp,
                              i64[::1] mval) noexcept nogil:
    if c.caching:
        estamp[e] = c.mid
        evals[e] = s
        if s == IN_SET:
            mstamp[eu[e]] = c.mid
            mstamp[ev[e]] = c.mid
            mval[eu[e]] = ev[e]
            mval[ev[e]] = eu[e]


cdef int _mm_resolve(MmCtx *c, i64 e, i64[::1] inc_off, i64[::1] inc_edge, i64[::1] eu,
                     i64[::1] ev, i64[::1] eprio, i64[::1] posu, i64[::1] posv,
                     i64[::1] mate, i64[::1] fin, i64 cutoff, i64[::1] rstamp,
                     i64[::1] estamp, i8[::1] evals, i64[::1] mstamp, i64[::1] mval,
                     i64[::1] se, i64[::1] spa, i64[::1] spb) noexcept nogil:
    cdef i64 depth = 1
    cdef i64 cur, a, b, pe, fa, fb, f
    cdef int child = -1
    cdef int s
    se[0] = e
    spa[0] = inc_off[eu[e]]
    spb[0] = inc_off[ev[e]]
    while depth > 0:
        cur = se[depth - 1]
        if child != -1:
            if child == IN_SET:
                _mm_remember(c, cur, NOT_IN_SET, eu, ev, estamp, evals, mstamp, mval)
                depth -= 1
                child = NOT_IN_SET
                continue
            child = -1
        a = eu[cur]
        b = ev[cur]
        pe = eprio[cur]
        fa = -1
        fb = -1
        if spa[depth - 1] < inc_off[a + 1]:
            fa = inc_edge[spa[depth - 1]]
            if eprio[fa] >= pe or eprio[fa] >= cutoff:
                fa = -1
        if spb[depth - 1] < inc_off[b + 1]:
            fb = inc_edge[spb[depth - 1]]
            if eprio[fb] >= pe or eprio[fb] >= cutoff:
                fb = -1
        if fa < 0 and fb < 0:
            _mm_remember(c, cur, IN_SET, eu, ev, estamp, evals, mstamp, mval)
            depth -= 1
            child = IN_SET
            continue
        if fb < 0 or (fa >= 0 and eprio[fa] < eprio[fb]):
            f = fa
            spa[depth - 1] += 1
        else:
            f = fb
            spb[depth - 1] += 1
        s = _mm_status(c, f, eu, ev, posu, posv, mate, fin, rstamp, estamp, evals, mstamp,
                       mval)
        if s < 0:
            return TRUNCATED
        if s == 0:
            se[depth] = f
            spa[depth] = inc_off[eu[f]]
            spb[depth] = inc_off[ev[f]]
            depth += 1
        elif s == IN_SET:
            _mm_remember(c, cur, NOT_IN_SET, eu, ev, estamp, evals, mstamp, mval)
            depth -= 1
            child = NOT_IN_SET
    return child


def mm_batch(i64[::1] inc_off, i64[::1] inc_edge, i64[::1] inc_other, i64[::1] eu,
             i64[::1] ev, i64[::1] eprio, i64[::1] posu, i64[::1] posv, i64[::1] mate,
             i64[::1] fin, i64 cutoff, i64[::1] items, i8[::1] item_is_edge,
             i64[::1] mstart, i64 budget, bint caching):
    cdef i64 n = inc_off.shape[0] - 1
    cdef i64 m = eu.shape[0]
    cdef i64 k = items.shape[0]
    answer_a = np.zeros(k, dtype=np.int64)
    progress_a = np.zeros(k, dtype=np.int64)
    queries_a = np.zeros(k, dtype=np.int64)
    cdef i64[::1] answer = answer_a
    cdef i64[::1] progress = progress_a
    cdef i64[::1] queries = queries_a
    rstamp_a = np.full(n, -1, dtype=np.int64)
    estamp_a = np.full(m, -1, dtype=np.int64)
    evals_a = np.zeros(m, dtype=np.int8)
    mstamp_a = np.full(n, -1, dtype=np.int64)
    mval_a = np.zeros(n, dtype=np.int64)
    cdef i64[::1] rstamp = rstamp_a
    cdef i64[::1] estamp = estamp_a
    cdef i8[::1] evals = evals_a
    cdef i64[::1] mstamp = mstamp_a
    cdef i64[::1] mval = mval_a
    # recursion frames: edge, pointer into each endpoint's list
    se_a = np.zeros(m + 1, dtype=np.int64)
    spa_a = np.zeros(m + 1, dtype=np.int64)
    spb_a = np.zeros(m + 1, dtype=np.int64)
    cdef i64[::1] se = se_a
    cdef i64[::1] spa = spa_a
    cdef i64[::1] spb = spb_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef MmCtx c
    c.budget = budget
    c.caching = caching
    cdef i64 i, root, v, p, e, f, fa, fb, a, b, depth, cur, pe, result
    cdef int s, child
    for i in range(k):
        c.mid = mach[i]
        root = items[i]
        c.held = -1 if item_is_edge[i] else root
        c.fetched = 0
        if item_is_edge[i]:
            s = _mm_status(&c, root, eu, ev, posu, posv, mate, fin, rstamp, estamp, evals,
                           mstamp, mval)
            if s < 0:
                s = TRUNCATED
            elif s == 0:
                s = _mm_resolve(&c, root, inc_off, inc_edge, eu, ev, eprio, posu, posv, mate,
                                fin, cutoff, rstamp, estamp, evals, mstamp, mval, se, spa, spb)
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
                s = _mm_status(&c, e, eu, ev, posu, posv, mate, fin, rstamp, estamp, evals,
                               mstamp, mval)
                if s == 0:
                    s = _mm_resolve(&c, e, inc_off, inc_edge, eu, ev, eprio, posu, posv, mate,
                                    fin, cutoff, rstamp, estamp, evals, mstamp, mval, se, spa,
                                    spb)
                if s <= 0:
                    result = -2
                    break
                if s == IN_SET:
                    result = inc_other[p]
                    break
                p += 1
            answer[i] = result
            progress[i] = p - inc_off[v]
        queries[i] = c.fetched
    return answer_a, progress_a, queries_a


def walk_batch(i64[::1] succ, i8[::1] stop, i64[::1] first, i64[::1] mstart, bint caching,
               bint record):
    cdef i64 k = first.shape[0]
    cdef i64 N = succ.shape[0]
    end_a = np.zeros(k, dtype=np.int64)
    steps_a = np.zeros(k, dtype=np.int64)
    queries_a = np.zeros(k, dtype=np.int64)
    rec_off_a = np.zeros(k + 1, dtype=np.int64)
    cdef i64[::1] end = end_a
    cdef i64[::1] steps = steps_a
    cdef i64[::1] queries = queries_a
    cdef i64[::1] rec_off = rec_off_a
    cdef i64 rcap = max(16, 2 * k)
    rec_a = np.empty(rcap if record else 1, dtype=np.int64)
    cdef i64[::1] rec = rec_a
    cdef i64 nrec = 0
    cstamp_a = np.full(N, -1, dtype=np.int64)
    cdef i64[::1] cstamp = cstamp_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef i64 i, mid, cur, s, q
    for i in range(k):
        mid = mach[i]
        cur = first[i]
        s = 1
        q = 0
        while True:
            if not (caching and cstamp[cur] == mid):
                q += 1
                cstamp[cur] = mid
            if stop[cur]:
                break
            if record:
                if nrec == rcap:
                    rcap *= 2
                    rec_a = np.resize(rec_a, rcap)
                    rec = rec_a
                rec[nrec] = cur
                nrec += 1
            cur = succ[cur]
            s += 1
            if s > N + 1:
                raise RuntimeError("walk did not reach a stopping node")
        end[i] = cur
        steps[i] = s
        queries[i] = q
        rec_off[i + 1] = nrec
    return end_a, steps_a, queries_a, rec_off_a, rec_a[:nrec].copy()


def chase_batch(i64[::1] parent, i64[::1] items, i64[::1] mstart, i64 hop_budget,
                bint caching):
    cdef i64 k = items.shape[0]
    cdef i64 n = parent.shape[0]
    reached_a = np.zeros(k, dtype=np.int64)
    done_a = np.zeros(k, dtype=bool)
    queries_a = np.zeros(k, dtype=np.int64)
    cdef i64[::1] reached = reached_a
    cdef cnp.uint8_t[::1] done = done_a.view(np.uint8)
    cdef i64[::1] queries = queries_a
    cstamp_a = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] cstamp = cstamp_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef i64 i, mid, cur, q, hops, nxt
    for i in range(k):
        mid = mach[i]
        cur = items[i]
        q = 0
        hops = 0
        nxt = parent[cur]
        while nxt != cur and hops < hop_budget:
            if not (caching and cstamp[nxt] == mid):
                q += 1
                cstamp[nxt] = mid
            cur = nxt
            nxt = parent[cur]
            hops += 1
        reached[i] = cur
        done[i] = nxt == cur
        queries[i] = q
    return reached_a, done_a, queries_a


def walk_min_batch(i64[::1] succ, i64[::1] prio, i64[::1] val, i64[:, ::1] w, i8[::1] mark,
                   i64[::1] items, i64[::1] mstart, bint caching):
    cdef i64 k = items.shape[0]
    cdef i64 N = succ.shape[0]
    cdef i64 W = w.shape[1]
    end_a = np.zeros(k, dtype=np.int64)
    steps_a = np.zeros(k, dtype=np.int64)
    queries_a = np.zeros(k, dtype=np.int64)
    wsum_a = np.zeros((k, W), dtype=np.int64)
    vmin_a = np.zeros(k, dtype=np.int64)
    markoff_a = np.full((k, W), -1, dtype=np.int64)
    hasmark_a = np.zeros(k, dtype=bool)
    cdef i64[::1] end = end_a
    cdef i64[::1] steps = steps_a
    cdef i64[::1] queries = queries_a
    cdef i64[:, ::1] wsum = wsum_a
    cdef i64[::1] vmin = vmin_a
    cdef i64[:, ::1] markoff = markoff_a
    cdef cnp.uint8_t[::1] hasmark = hasmark_a.view(np.uint8)
    cstamp_a = np.full(N, -1, dtype=np.int64)
    cdef i64[::1] cstamp = cstamp_a
    mach_a = _machine_of(mstart, k)
    cdef i64[::1] mach = mach_a
    cdef i64 i, c, mid, start, ps, cur, best, s, q
    for i in range(k):
        mid = mach[i]
        start = items[i]
        ps = prio[start]
        cur = start
        best = val[start]
        s = 0
        q = 0
        while True:
            if mark[cur] and not hasmark[i]:
                hasmark[i] = 1
                for c in range(W):
                    markoff[i, c] = wsum[i, c]
            for c in range(W):
                wsum[i, c] += w[cur, c]
            if val[cur] < best:
                best = val[cur]
            cur = succ[cur]
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
        vmin[i] = best
    return end_a, steps_a, queries_a, wsum_a, vmin_a, markoff_a, hasmark_a
