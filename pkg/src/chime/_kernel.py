"""Compiled enumeration loop.

Mirrors :class:`chime.engine.ChimeEngine` operation by operation (same scan
order, same table tie-breaking, same floating-point expressions) so both
backends yield identical candidate buckets.  Nodes live in flat arrays:
original node ``k`` of dimension ``d`` has id ``d * M + k``; merged nodes are
appended and found through a registry keyed by (dim, first, last).
"""

from __future__ import annotations

import numpy as np
from numba import njit, types
from numba.typed import Dict, List

# counter slots
C_NODES, C_RECORDS, C_CALLS, C_MATCHES, C_GROUPS, C_BUCKETS, C_INSTS, C_KEYS, C_SLOTS = range(9)

_INT_LIST = types.ListType(types.int64)


@njit(cache=True)
def _grow(arr, need):
    if need <= arr.shape[0]:
        return arr
    out = np.empty(max(need, 2 * arr.shape[0]), arr.dtype)
    out[: arr.shape[0]] = arr
    return out


_MIX = np.int64(-7046029254386353131)


@njit(cache=True)
def _slot_of(keys, key):
    # open addressing, linear probing; empty slots hold -1 and keys are >= 0
    mask = keys.shape[0] - 1
    h = key * _MIX
    i = (h ^ (h >> 29)) & mask
    while keys[i] != key and keys[i] != -1:
        i = (i + 1) & mask
    return i


@njit(cache=True)
def _rehash(keys, vals, cap):
    nk = np.full(cap, -1, np.int64)
    nv = np.empty(cap, np.int64)
    for i in range(keys.shape[0]):
        if keys[i] != -1:
            j = _slot_of(nk, keys[i])
            nk[j] = keys[i]
            nv[j] = vals[i]
    return nk, nv


@njit(cache=True)
def _stats(cx, cxx, ch, d, s, n):
    if ch[s + n, d] - ch[s + 1, d] == 0:
        return False, 0.0, 0.0
    ex = cx[s + n, d] - cx[s, d]
    var = (cxx[s + n, d] - cxx[s, d] - ex * ex / n) / (n - 1)
    if var <= 0.0:
        return False, 0.0, 0.0
    # the mean uses the same reciprocal form as segment means, so w=1 gives exactly 0
    return True, ex * (1.0 / n), 1.0 / np.sqrt(var)


@njit(cache=True)
def _symbol(cuts, v):
    sym = 0
    for c in cuts:
        if c <= v:
            sym += 1
        else:
            break
    return sym


@njit(cache=True)
def _value(cx, d, s, b, e, q, inv_q, inv_q1, mu, isg):
    inv = inv_q if e - b == q else inv_q1
    return ((cx[s + e, d] - cx[s + b, d]) * inv - mu) * isg


@njit(cache=True)
def _word(cx, cxx, ch, cuts, w, a, middle, tbl, d, s, n, cnt):
    # segment i spans [i*n//w, (i+1)*n//w); with n = q*w + r that bound is
    # i*q + (i*r)//w, and tbl[x] holds x // w
    cnt[C_CALLS] += 1
    ok, mu, isg = _stats(cx, cxx, ch, d, s, n)
    if not ok:
        return middle
    q = n // w
    r = n - q * w
    inv_q = 1.0 / q
    inv_q1 = 1.0 / (q + 1)
    code = 0
    b = 0
    for i in range(w):
        e = (i + 1) * q + tbl[(i + 1) * r]
        code = code * a + _symbol(cuts, _value(cx, d, s, b, e, q, inv_q, inv_q1, mu, isg))
        b = e
    return code


@njit(cache=True)
def _shared(cx, cxx, ch, cuts, w, a, middle, tbl, d, s1, n1, s2, n2, cnt):
    cnt[C_CALLS] += 1
    ok1, mu1, is1 = _stats(cx, cxx, ch, d, s1, n1)
    ok2, mu2, is2 = _stats(cx, cxx, ch, d, s2, n2)
    if not ok1 or not ok2:
        if not ok1 and not ok2:
            return middle
        if not ok1:
            other = _word(cx, cxx, ch, cuts, w, a, middle, tbl, d, s2, n2, cnt)
        else:
            other = _word(cx, cxx, ch, cuts, w, a, middle, tbl, d, s1, n1, cnt)
        return middle if other == middle else -1
    q1 = n1 // w
    r1 = n1 - q1 * w
    q2 = n2 // w
    r2 = n2 - q2 * w
    iq1, iq11 = 1.0 / q1, 1.0 / (q1 + 1)
    iq2, iq21 = 1.0 / q2, 1.0 / (q2 + 1)
    code = 0
    b1 = 0
    b2 = 0
    for i in range(w):
        e1 = (i + 1) * q1 + tbl[(i + 1) * r1]
        e2 = (i + 1) * q2 + tbl[(i + 1) * r2]
        sym = _symbol(cuts, _value(cx, d, s1, b1, e1, q1, iq1, iq11, mu1, is1))
        if sym != _symbol(cuts, _value(cx, d, s2, b2, e2, q2, iq2, iq21, mu2, is2)):
            return -1
        code = code * a + sym
        b1 = e1
        b2 = e2
    return code


@njit(cache=True)
def _bisect_left(lst, x):
    lo, hi = 0, len(lst)
    while lo < hi:
        mid = (lo + hi) // 2
        if lst[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _bisect_right(lst, x):
    lo, hi = 0, len(lst)
    while lo < hi:
        mid = (lo + hi) // 2
        if x < lst[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True)
def _find(slots, slot_len, slot_ids, key, start, length, ratio, pos, nfirst):
    # Outward scan in order of increasing length gap.  Among equal gaps the
    # shorter side comes first and, within a run of equal lengths, the
    # earliest inserted record; this equals a full left-to-right scan that
    # keeps the first record with the smallest gap.
    h = _slot_of(slots[0], key)
    if slots[0][h] == -1:
        return -1
    slot = slots[1][h]
    lens = slot_len[slot]
    ids = slot_ids[slot]
    n = len(lens)
    end = start + length
    right = _bisect_left(lens, length)
    left = right - 1
    while True:
        gl = -1
        if left >= 0:
            g = length - lens[left]
            if g <= ratio * length:
                gl = g
        gr = -1
        if right < n:
            g = lens[right] - length
            if g <= ratio * lens[right]:
                gr = g
        if gl < 0 and gr < 0:
            return -1
        if gl >= 0 and (gr < 0 or gl <= gr):
            # block of equal lengths on the left, earliest first
            lo = left
            while lo > 0 and lens[lo - 1] == lens[left]:
                lo -= 1
            for i in range(lo, left + 1):
                cstart = pos[nfirst[ids[i]]]
                if not (cstart < end and start < cstart + lens[i]):
                    return ids[i]
            left = lo - 1
            if gl == gr:
                continue
        else:
            hi = right
            while hi + 1 < n and lens[hi + 1] == lens[right]:
                hi += 1
            for i in range(right, hi + 1):
                cstart = pos[nfirst[ids[i]]]
                if not (cstart < end and start < cstart + lens[i]):
                    return ids[i]
            right = hi + 1


@njit(cache=True)
def _put(slots, slot_len, slot_ids, key, nid, length, intable, cnt):
    if intable[nid]:
        return
    h = _slot_of(slots[0], key)
    if slots[0][h] != -1:
        slot = slots[1][h]
    else:
        slot = len(slot_len)
        slots[0][h] = key
        slots[1][h] = slot
        cnt[C_SLOTS] += 1
        slot_len.append(List.empty_list(types.int64))
        slot_ids.append(List.empty_list(types.int64))
    lens = slot_len[slot]
    i = _bisect_right(lens, length)
    lens.insert(i, length)
    slot_ids[slot].insert(i, nid)
    intable[nid] = True
    cnt[C_RECORDS] += 1


@njit(cache=True)
def _node(registry, ndim, nfirst, nlast, M, d, first, last, cnt):
    key = (d * M + first) * M + last
    h = _slot_of(registry[0], key)
    if registry[0][h] != -1:
        return registry[1][h]
    nid = cnt[C_NODES]
    registry[0][h] = key
    registry[1][h] = nid
    ndim[nid] = d
    nfirst[nid] = first
    nlast[nid] = last
    cnt[C_NODES] += 1
    return nid


@njit(cache=True)
def enumerate_candidates(cx, cxx, ch, pos, window, w, a, cuts, ratio):
    """Full scan.  Returns (groups, buckets, instances, counters) as flat arrays.

    Prefix sums are time-major, shape (N + 1, D), so that the words of all
    dimensions at one span share cache lines.
    """
    D = cx.shape[1]
    M = pos.shape[0]
    middle = 0
    for _ in range(w):
        middle = middle * a + a // 2
    tbl = np.arange(w * w + 1) // w

    cap = 4 * D * M + 64
    ndim = np.empty(cap, np.int64)
    nfirst = np.empty(cap, np.int64)
    nlast = np.empty(cap, np.int64)
    nenum = np.zeros(cap, np.bool_)
    intable = np.zeros(cap, np.bool_)
    visited = np.zeros(D * M, np.bool_)
    for d in range(D):
        for k in range(M):
            nid = d * M + k
            ndim[nid] = d
            nfirst[nid] = k
            nlast[nid] = k
    cnt = np.zeros(9, np.int64)
    cnt[C_NODES] = D * M

    reg_keys = np.full(1 << 16, -1, np.int64)
    reg_vals = np.empty(1 << 16, np.int64)
    slot_keys = np.full(1 << 12, -1, np.int64)
    slot_vals = np.empty(1 << 12, np.int64)
    slot_len = List.empty_list(_INT_LIST)
    slot_ids = List.empty_list(_INT_LIST)

    # candidate buckets: groups share a wordSet, buckets are length bands
    ghash = Dict.empty(types.int64, types.int64)
    g_next = np.empty(1024, np.int64)
    g_koff = np.empty(1024, np.int64)
    g_klen = np.empty(1024, np.int64)
    g_first = np.empty(1024, np.int64)
    g_last = np.empty(1024, np.int64)
    k_dim = np.empty(4096, np.int64)
    k_code = np.empty(4096, np.int64)
    b_group = np.empty(1024, np.int64)
    b_ref = np.empty(1024, np.int64)
    b_lo = np.empty(1024, np.int64)
    b_hi = np.empty(1024, np.int64)
    b_next = np.empty(1024, np.int64)
    b_head = np.empty(1024, np.int64)
    b_tail = np.empty(1024, np.int64)
    i_start = np.empty(4096, np.int64)
    i_len = np.empty(4096, np.int64)
    i_next = np.empty(4096, np.int64)

    stack_n = np.empty(1024, np.int64)
    stack_r = np.empty(1024, np.int64)
    dims = np.empty(D, np.int64)
    codes = np.empty(D, np.int64)

    for d0 in range(D):
        for k0 in range(M):
            root = d0 * M + k0
            if visited[root] or nenum[root]:
                continue
            sp = 0
            stack_n[0] = root
            stack_r[0] = -1
            sp = 1
            while sp > 0:
                sp -= 1
                cur = stack_n[sp]
                rec = stack_r[sp]
                if nenum[cur] or (rec >= 0 and nenum[rec]):
                    continue
                nenum[cur] = True
                if rec >= 0:
                    nenum[rec] = True

                # keep both hash tables at most half full for this step's inserts
                grow_by = 2 * D + 8
                if 2 * (cnt[C_NODES] - D * M + grow_by) > reg_keys.shape[0]:
                    reg_keys, reg_vals = _rehash(reg_keys, reg_vals, 2 * reg_keys.shape[0])
                if 2 * (cnt[C_SLOTS] + grow_by) > slot_keys.shape[0]:
                    slot_keys, slot_vals = _rehash(slot_keys, slot_vals, 2 * slot_keys.shape[0])
                registry = (reg_keys, reg_vals)
                slots = (slot_keys, slot_vals)
                need = cnt[C_NODES] + 2 * D + 8
                if need > ndim.shape[0]:
                    ndim = _grow(ndim, need)
                    nfirst = _grow(nfirst, need)
                    nlast = _grow(nlast, need)
                    old = nenum.shape[0]
                    nenum = _grow(nenum, need)
                    nenum[old:] = False
                    intable = _grow(intable, need)
                    intable[old:] = False

                # SAX word match of the node merged with its successor
                dim = ndim[cur]
                if nlast[cur] + 1 >= M:
                    continue
                obs = _node(registry, ndim, nfirst, nlast, M, dim, nfirst[cur], nlast[cur] + 1, cnt)
                o_start = pos[nfirst[obs]]
                o_len = pos[nlast[obs]] + window - o_start
                code = _word(cx, cxx, ch, cuts, w, a, middle, tbl, dim, o_start, o_len, cnt)
                match = _find(slots, slot_len, slot_ids, code * D + dim, o_start, o_len, ratio, pos, nfirst)
                if match < 0:
                    _put(slots, slot_len, slot_ids, code * D + dim, obs, o_len, intable, cnt)
                    continue
                cnt[C_MATCHES] += 1

                # joint extension while the words agree
                o_first = nfirst[obs]
                o_last = nlast[obs]
                m_first = nfirst[match]
                m_last = nlast[match]
                m_start = pos[m_first]
                while o_last + 1 < M and m_last + 1 < M:
                    o_end = pos[o_last + 1] + window
                    m_end = pos[m_last + 1] + window
                    if o_start < m_end and m_start < o_end:
                        break
                    ol = o_end - o_start
                    ml = m_end - m_start
                    if abs(ol - ml) > ratio * max(ol, ml):
                        break
                    shared = _shared(cx, cxx, ch, cuts, w, a, middle, tbl, dim, o_start, ol, m_start, ml, cnt)
                    if shared < 0:
                        break
                    code = shared
                    o_last += 1
                    m_last += 1
                obs2 = _node(registry, ndim, nfirst, nlast, M, dim, o_first, o_last, cnt)
                mat2 = _node(registry, ndim, nfirst, nlast, M, dim, m_first, m_last, cnt)
                o_len = pos[o_last] + window - o_start
                m_len = pos[m_last] + window - m_start
                key = code * D + dim
                if _find(slots, slot_len, slot_ids, key, o_start, o_len, ratio, pos, nfirst) < 0:
                    _put(slots, slot_len, slot_ids, key, obs2, o_len, intable, cnt)
                if _find(slots, slot_len, slot_ids, key, m_start, m_len, ratio, pos, nfirst) < 0:
                    _put(slots, slot_len, slot_ids, key, mat2, m_len, intable, cnt)

                # dimension matching at the same two spans
                nd = 0
                for d2 in range(D):
                    if d2 == dim:
                        dims[nd] = dim
                        codes[nd] = code
                        nd += 1
                        continue
                    c2 = _shared(cx, cxx, ch, cuts, w, a, middle, tbl, d2, o_start, o_len, m_start, m_len, cnt)
                    if c2 < 0:
                        continue
                    dims[nd] = d2
                    codes[nd] = c2
                    nd += 1
                    on = _node(registry, ndim, nfirst, nlast, M, d2, o_first, o_last, cnt)
                    mn = _node(registry, ndim, nfirst, nlast, M, d2, m_first, m_last, cnt)
                    k2 = c2 * D + d2
                    if _find(slots, slot_len, slot_ids, k2, o_start, o_len, ratio, pos, nfirst) < 0:
                        _put(slots, slot_len, slot_ids, k2, on, o_len, intable, cnt)
                    if _find(slots, slot_len, slot_ids, k2, m_start, m_len, ratio, pos, nfirst) < 0:
                        _put(slots, slot_len, slot_ids, k2, mn, m_len, intable, cnt)
                    visited[d2 * M + o_first] = True

                # candidate bucket update
                h = np.int64(1469598103934665603)
                for j in range(nd):
                    h = (h ^ dims[j]) * np.int64(1099511628211)
                    h = (h ^ codes[j]) * np.int64(1099511628211)
                g = ghash[h] if h in ghash else -1
                prev_g = -1
                while g >= 0:
                    if g_klen[g] == nd:
                        same = True
                        off = g_koff[g]
                        for j in range(nd):
                            if k_dim[off + j] != dims[j] or k_code[off + j] != codes[j]:
                                same = False
                                break
                        if same:
                            break
                    prev_g = g
                    g = g_next[g]
                if g < 0:
                    g = cnt[C_GROUPS]
                    g_next = _grow(g_next, g + 1)
                    g_koff = _grow(g_koff, g + 1)
                    g_klen = _grow(g_klen, g + 1)
                    g_first = _grow(g_first, g + 1)
                    g_last = _grow(g_last, g + 1)
                    off = cnt[C_KEYS]
                    k_dim = _grow(k_dim, off + nd)
                    k_code = _grow(k_code, off + nd)
                    for j in range(nd):
                        k_dim[off + j] = dims[j]
                        k_code[off + j] = codes[j]
                    cnt[C_KEYS] += nd
                    g_koff[g] = off
                    g_klen[g] = nd
                    g_next[g] = -1
                    g_first[g] = -1
                    g_last[g] = -1
                    if prev_g >= 0:
                        g_next[prev_g] = g
                    else:
                        ghash[h] = g
                    cnt[C_GROUPS] += 1
                ref = min(o_len, m_len)
                top = max(o_len, m_len)
                # join the first bucket whose length range stays inside the band
                b = g_first[g]
                while b >= 0:
                    lo = min(b_lo[b], ref)
                    hi = max(b_hi[b], top)
                    if hi - lo <= ratio * hi:
                        b_lo[b] = lo
                        b_hi[b] = hi
                        break
                    b = b_next[b]
                if b < 0:
                    b = cnt[C_BUCKETS]
                    b_group = _grow(b_group, b + 1)
                    b_ref = _grow(b_ref, b + 1)
                    b_lo = _grow(b_lo, b + 1)
                    b_hi = _grow(b_hi, b + 1)
                    b_next = _grow(b_next, b + 1)
                    b_head = _grow(b_head, b + 1)
                    b_tail = _grow(b_tail, b + 1)
                    b_group[b] = g
                    b_ref[b] = ref
                    b_lo[b] = ref
                    b_hi[b] = top
                    b_next[b] = -1
                    b_head[b] = -1
                    b_tail[b] = -1
                    if g_last[g] >= 0:
                        b_next[g_last[g]] = b
                    else:
                        g_first[g] = b
                    g_last[g] = b
                    cnt[C_BUCKETS] += 1
                for side in range(2):
                    s = o_start if side == 0 else m_start
                    n = o_len if side == 0 else m_len
                    ok = True
                    it = b_head[b]
                    while it >= 0:
                        if i_start[it] < s + n and s < i_start[it] + i_len[it]:
                            ok = False
                            break
                        it = i_next[it]
                    if ok:
                        it = cnt[C_INSTS]
                        i_start = _grow(i_start, it + 1)
                        i_len = _grow(i_len, it + 1)
                        i_next = _grow(i_next, it + 1)
                        i_start[it] = s
                        i_len[it] = n
                        i_next[it] = -1
                        if b_tail[b] >= 0:
                            i_next[b_tail[b]] = it
                        else:
                            b_head[b] = it
                        b_tail[b] = it
                        cnt[C_INSTS] += 1

                if sp + 2 > stack_n.shape[0]:
                    stack_n = _grow(stack_n, sp + 2)
                    stack_r = _grow(stack_r, sp + 2)
                stack_n[sp] = mat2
                stack_r[sp] = match
                stack_n[sp + 1] = obs2
                stack_r[sp + 1] = -1
                sp += 2

    ng, nb, ni, nk = cnt[C_GROUPS], cnt[C_BUCKETS], cnt[C_INSTS], cnt[C_KEYS]
    return (
        g_koff[:ng].copy(), g_klen[:ng].copy(), g_first[:ng].copy(),
        k_dim[:nk].copy(), k_code[:nk].copy(),
        b_ref[:nb].copy(), b_lo[:nb].copy(), b_hi[:nb].copy(), b_next[:nb].copy(), b_head[:nb].copy(),
        i_start[:ni].copy(), i_len[:ni].copy(), i_next[:ni].copy(),
        cnt,
    )


@njit(cache=True)
def _znorm_rows(values, ch, d, starts, L, out):
    # two-pass statistics: exact distances should not inherit prefix-sum cancellation
    for r in range(starts.shape[0]):
        s = starts[r]
        if ch[s + L, d] - ch[s + 1, d] == 0:
            out[r, :] = 0.0
            continue
        acc = 0.0
        for t in range(L):
            acc += values[d, s + t]
        mean = acc / L
        acc = 0.0
        for t in range(L):
            dv = values[d, s + t] - mean
            acc += dv * dv
        if acc <= 0.0:
            out[r, :] = 0.0
            continue
        std = np.sqrt(acc / (L - 1))
        for t in range(L):
            out[r, t] = (values[d, s + t] - mean) / std


@njit(cache=True)
def verify_buckets(values, ch, b_off, i_start, i_len, d_off, d_flat, coef):
    """Exact verification of every bucket; see ``postprocess.verify_bucket``.

    Returns per-motif (bucket index, length, seed start, best pair distance,
    member offsets) and flat member (start, distance-to-seed) arrays.
    """
    nb = b_off.shape[0] - 1
    o_bucket = np.empty(nb, np.int64)
    o_len = np.empty(nb, np.int64)
    o_seed = np.empty(nb, np.int64)
    o_best = np.empty(nb, np.float64)
    o_off = np.zeros(nb + 1, np.int64)
    m_start = np.empty(i_start.shape[0], np.int64)
    m_dist = np.empty(i_start.shape[0], np.float64)
    n_out = 0
    n_mem = 0
    for b in range(nb):
        lo, hi = b_off[b], b_off[b + 1]
        dims = d_flat[d_off[b]:d_off[b + 1]]
        L = i_len[lo]
        for it in range(lo, hi):
            if i_len[it] < L:
                L = i_len[it]
        raw = np.sort(i_start[lo:hi])
        keep = np.ones(raw.shape[0], np.bool_)
        for r in range(raw.shape[0]):
            if r > 0 and raw[r] == raw[r - 1]:
                keep[r] = False
                continue
            for d in dims:
                if ch[raw[r] + L, d] - ch[raw[r] + 1, d] == 0:
                    keep[r] = False
                    break
        starts = raw[keep]
        k = starts.shape[0]
        if k < 2:
            continue
        dist = np.zeros((k, k))
        z = np.empty((k, L))
        for d in dims:
            _znorm_rows(values, ch, d, starts, L, z)
            for i in range(k):
                for j in range(i + 1, k):
                    acc = 0.0
                    for t in range(L):
                        diff = z[i, t] - z[j, t]
                        acc += diff * diff
                    v = np.sqrt(acc)
                    dist[i, j] += v
                    dist[j, i] += v
        nd = dims.shape[0]
        for i in range(k):
            for j in range(k):
                dist[i, j] /= nd
        seed = 0
        best_max = np.inf
        for i in range(k):
            mx = dist[i].max()
            if mx < best_max:
                best_max = mx
                seed = i
        radius = coef * L
        # closest first, ties by start (starts are sorted, so a stable sort suffices)
        order = np.argsort(dist[seed], kind="mergesort")
        kept = np.empty(k, np.int64)
        nk = 0
        for j in order:
            if dist[seed, j] >= radius:
                break
            clash = False
            for q in range(nk):
                o = starts[kept[q]]
                if not (starts[j] + L <= o or o + L <= starts[j]):
                    clash = True
                    break
            if not clash:
                kept[nk] = j
                nk += 1
        if nk < 2:
            continue
        kept = np.sort(kept[:nk])
        best = np.inf
        for p in range(nk):
            for q in range(p + 1, nk):
                if dist[kept[p], kept[q]] < best:
                    best = dist[kept[p], kept[q]]
        for q in range(nk):
            m_start[n_mem + q] = starts[kept[q]]
            m_dist[n_mem + q] = dist[seed, kept[q]]
        n_mem += nk
        o_bucket[n_out] = b
        o_len[n_out] = L
        o_seed[n_out] = starts[seed]
        o_best[n_out] = best
        n_out += 1
        o_off[n_out] = n_mem
    return (o_bucket[:n_out], o_len[:n_out], o_seed[:n_out], o_best[:n_out],
            o_off[:n_out + 1], m_start[:n_mem], m_dist[:n_mem])
