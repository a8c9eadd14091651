"""Exhaustive brute-force motif search for tiny inputs.

Used as an independent verifier: distances come from windowed dot products
(diagonal prefix sums of pointwise products) rather than explicit
z-normalized differences, and every length, every dimension subset and every
seed position is examined.
"""

from __future__ import annotations

import itertools
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .postprocess import Instance, Motif, MotifReport
from .series import MultiSeries, SubdimSubseq

MAX_DIMS = 4


class OracleGuardError(RuntimeError):
    """Raised when the requested search exceeds the configured cost guard."""


def oracle_cost(n: int, n_dims: int, min_len: int, max_len: Optional[int] = None) -> int:
    """Rough operation count: lengths x position pairs x dimension subsets."""
    hi = n // 2 if max_len is None else min(max_len, n // 2)
    lengths = max(0, hi - min_len + 1)
    return lengths * (n - min_len + 1) ** 2 * (2 ** n_dims - 1)


@njit(cache=True)
def _diag_prefix(x):
    # P[k, i] = sum_{t < i} x[t] * x[t + k]
    n = x.shape[0]
    out = np.zeros((n, n + 1))
    for k in range(n):
        acc = 0.0
        for t in range(n - k):
            acc += x[t] * x[t + k]
            out[k, t + 1] = acc
    return out


@njit(cache=True)
def _search(values, min_len, max_len, coef, masks):
    D, N = values.shape
    prefix = np.empty((D, N, N + 1))
    sx = np.zeros((D, N + 1))
    sxx = np.zeros((D, N + 1))
    moves = np.zeros((D, N + 1), np.int64)
    for d in range(D):
        prefix[d] = _diag_prefix(values[d])
        for t in range(N):
            sx[d, t + 1] = sx[d, t] + values[d, t]
            sxx[d, t + 1] = sxx[d, t] + values[d, t] * values[d, t]
            moves[d, t + 1] = moves[d, t] + (1 if t > 0 and values[d, t] != values[d, t - 1] else 0)

    cap = 1024
    o_mask = np.empty(cap, np.int64)
    o_len = np.empty(cap, np.int64)
    o_seed = np.empty(cap, np.int64)
    o_best = np.empty(cap, np.float64)
    o_off = np.empty(cap + 1, np.int64)
    m_cap = 4096
    m_start = np.empty(m_cap, np.int64)
    m_dist = np.empty(m_cap, np.float64)
    n_out = 0
    n_mem = 0
    o_off[0] = 0

    for L in range(min_len, max_len + 1):
        M = N - L + 1
        R = coef * L
        mu = np.empty((D, M))
        sd = np.empty((D, M))
        ok = np.ones((D, M), np.bool_)
        for d in range(D):
            for i in range(M):
                ex = sx[d, i + L] - sx[d, i]
                var = (sxx[d, i + L] - sxx[d, i] - ex * ex / L) / (L - 1)
                mu[d, i] = ex / L
                flat = moves[d, i + L] - moves[d, i + 1] == 0
                if flat or var <= 0.0:
                    ok[d, i] = False
                    sd[d, i] = 0.0
                else:
                    sd[d, i] = np.sqrt(var)
        # sparse pass: every non-overlapping pair, every subset
        nmask = masks.shape[0]
        h_key = np.empty(1024, np.int64)
        h_nb = np.empty(1024, np.int64)
        h_d = np.empty(1024, np.float64)
        nh = 0
        dv = np.empty(D)
        # lag-major order keeps the diagonal prefix rows contiguous
        for k in range(L, M):
            for i in range(M - k):
                j = i + k
                for d in range(D):
                    if ok[d, i] and ok[d, j]:
                        qt = prefix[d, k, i + L] - prefix[d, k, i]
                        corr = (qt - L * mu[d, i] * mu[d, j]) / (sd[d, i] * sd[d, j])
                        d2 = 2.0 * ((L - 1) - corr)
                        dv[d] = np.sqrt(d2) if d2 > 0.0 else 0.0
                    else:
                        dv[d] = np.inf
                # an average is never below R when every term is at least R
                lowest = np.inf
                for d in range(D):
                    if dv[d] < lowest:
                        lowest = dv[d]
                if lowest >= R:
                    continue
                for mi in range(nmask):
                    mask = masks[mi]
                    tot = 0.0
                    cnt = 0
                    for d in range(D):
                        if mask & (1 << d):
                            tot += dv[d]
                            cnt += 1
                    v = tot / cnt
                    if v < R:
                        if nh + 2 > h_key.shape[0]:
                            new = 2 * h_key.shape[0]
                            h_key = _resize_i(h_key, new)
                            h_nb = _resize_i(h_nb, new)
                            h_d = _resize_f(h_d, new)
                        h_key[nh] = mi * M + i
                        h_nb[nh] = j
                        h_d[nh] = v
                        h_key[nh + 1] = mi * M + j
                        h_nb[nh + 1] = i
                        h_d[nh + 1] = v
                        nh += 2
        if nh == 0:
            continue
        order = np.argsort(h_key[:nh], kind="mergesort")
        pos_ = 0
        while pos_ < nh:
            key = h_key[order[pos_]]
            stop = pos_
            while stop < nh and h_key[order[stop]] == key:
                stop += 1
            mi = key // M
            i = key % M
            idx = order[pos_:stop]
            # closest first, ties by position: two stable sorts
            cand_nb = h_nb[idx]
            cand_d = h_d[idx]
            srt = np.argsort(cand_nb, kind="mergesort")
            cand_nb = cand_nb[srt]
            cand_d = cand_d[srt]
            srt = np.argsort(cand_d, kind="mergesort")
            cand_nb = cand_nb[srt]
            cand_d = cand_d[srt]
            members = np.empty(cand_nb.size + 1, np.int64)
            mdist = np.empty(cand_nb.size + 1)
            members[0] = i
            mdist[0] = 0.0
            nm = 1
            for c in range(cand_nb.size):
                j = cand_nb[c]
                clash = False
                for q in range(nm):
                    if abs(members[q] - j) < L:
                        clash = True
                        break
                if not clash:
                    members[nm] = j
                    mdist[nm] = cand_d[c]
                    nm += 1
            best = _best_pair(prefix, mu, sd, ok, masks[mi], members, nm, L, D)
            if n_out + 1 >= o_mask.shape[0]:
                new = o_mask.shape[0] * 2
                o_mask = _resize_i(o_mask, new)
                o_len = _resize_i(o_len, new)
                o_seed = _resize_i(o_seed, new)
                o_best = _resize_f(o_best, new)
                o_off = _resize_i(o_off, new + 1)
            if n_mem + nm > m_start.shape[0]:
                new = max(2 * m_start.shape[0], n_mem + nm)
                m_start = _resize_i(m_start, new)
                m_dist = _resize_f(m_dist, new)
            for q in range(nm):
                m_start[n_mem + q] = members[q]
                m_dist[n_mem + q] = mdist[q]
            n_mem += nm
            o_mask[n_out] = masks[mi]
            o_len[n_out] = L
            o_seed[n_out] = i
            o_best[n_out] = best
            n_out += 1
            o_off[n_out] = n_mem
            pos_ = stop
    return o_mask[:n_out], o_len[:n_out], o_seed[:n_out], o_best[:n_out], o_off[: n_out + 1], m_start[:n_mem], m_dist[:n_mem]


@njit(cache=True)
def _pair_distance(prefix, mu, sd, ok, mask, i, j, L, D):
    if i > j:
        i, j = j, i
    tot = 0.0
    cnt = 0
    for d in range(D):
        if mask & (1 << d):
            if not (ok[d, i] and ok[d, j]):
                return np.inf
            k = j - i
            qt = prefix[d, k, i + L] - prefix[d, k, i]
            corr = (qt - L * mu[d, i] * mu[d, j]) / (sd[d, i] * sd[d, j])
            d2 = 2.0 * ((L - 1) - corr)
            tot += np.sqrt(d2) if d2 > 0.0 else 0.0
            cnt += 1
    return tot / cnt


@njit(cache=True)
def _best_pair(prefix, mu, sd, ok, mask, members, nm, L, D):
    out = np.inf
    for p in range(nm):
        for q in range(p + 1, nm):
            v = _pair_distance(prefix, mu, sd, ok, mask, members[p], members[q], L, D)
            if v < out:
                out = v
    return out


@njit(cache=True)
def _resize_i(arr, n):
    out = np.empty(n, np.int64)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _resize_f(arr, n):
    out = np.empty(n, np.float64)
    out[: arr.shape[0]] = arr
    return out


def dim_subsets(n_dims: int) -> List[Tuple[int, ...]]:
    return [c for k in range(1, n_dims + 1) for c in itertools.combinations(range(n_dims), k)]


class OracleReport:
    """Array-backed ranked motif list; :class:`Motif` objects are built on access.

    Ordering and ranks follow :meth:`MotifReport.from_motifs`.
    """

    def __init__(self, subsets, sub_idx, length, seed, best, offsets, m_start, m_dist):
        self.subsets = subsets
        order_key = [sorted(subsets).index(sub) for sub in subsets]
        sizes = np.array([len(sub) for sub in subsets], dtype=np.int64)
        sub_idx = np.asarray(sub_idx, dtype=np.int64)
        n_sub = sizes[sub_idx] if len(sub_idx) else np.zeros(0, np.int64)
        lex = np.asarray(order_key, dtype=np.int64)[sub_idx] if len(sub_idx) else np.zeros(0, np.int64)
        order = np.lexsort((lex, seed, best, length, n_sub))
        self.sub_idx = sub_idx[order]
        self.length = np.asarray(length)[order]
        self.seed = np.asarray(seed)[order]
        self.best = np.asarray(best)[order]
        self._lo = np.asarray(offsets[:-1])[order]
        self._hi = np.asarray(offsets[1:])[order]
        self._m_start = np.asarray(m_start)
        self._m_dist = np.asarray(m_dist)
        group = n_sub[order] * (int(self.length.max()) + 1 if len(order) else 1) + self.length
        rank = np.ones(len(order), dtype=np.int64)
        for k in range(1, len(order)):
            if group[k] == group[k - 1]:
                rank[k] = rank[k - 1] + 1
        self.rank = rank

    def __len__(self) -> int:
        return len(self.seed)

    def __getitem__(self, k: int) -> Motif:
        dims = self.subsets[self.sub_idx[k]]
        L = int(self.length[k])
        lo, hi = int(self._lo[k]), int(self._hi[k])
        members = sorted(zip(self._m_start[lo:hi].tolist(), self._m_dist[lo:hi].tolist()))
        instances = tuple(Instance(SubdimSubseq(dims, s, L), d) for s, d in members)
        return Motif(dims, L, SubdimSubseq(dims, int(self.seed[k]), L), instances,
                     float(self.best[k]), "", int(self.rank[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    @property
    def motifs(self) -> List[Motif]:
        return list(self)

    def near(self, start: int, end: int) -> np.ndarray:
        """Indices of motifs whose seed span intersects ``[start, end)``."""
        hit = (self.seed < end) & (start < self.seed + self.length)
        return np.flatnonzero(hit)


def brute_force_oracle(
    series: MultiSeries,
    min_len: int,
    coefficient: float = 0.02,
    max_cost_guard: int = 12_000_000_000,
    max_len: Optional[int] = None,
) -> OracleReport:
    """Every seed-anchored motif of every length in ``[min_len, N // 2]``.

    For each length, dimension subset and seed position the motif holds the
    seed plus every position whose average distance to it is below
    ``coefficient * L``, overlapping candidates resolved closest-first.
    Windows that are constant in a subset dimension are ignored.
    """
    n, n_dims = series.length, series.n_dims
    if n_dims > MAX_DIMS:
        raise OracleGuardError(f"oracle supports at most {MAX_DIMS} dimensions, got {n_dims}")
    cost = oracle_cost(n, n_dims, min_len, max_len)
    if cost > max_cost_guard:
        raise OracleGuardError(f"oracle cost {cost:.3g} exceeds guard {max_cost_guard:.3g}")
    subsets = dim_subsets(n_dims)
    hi = n // 2 if max_len is None else min(max_len, n // 2)
    if hi < min_len:
        z = np.zeros(0, np.int64)
        return OracleReport(subsets, z, z, z, np.zeros(0), np.zeros(1, np.int64), z, np.zeros(0))
    masks = np.array([sum(1 << d for d in sub) for sub in subsets], dtype=np.int64)
    o_mask, o_len, o_seed, o_best, o_off, m_start, m_dist = _search(
        np.ascontiguousarray(series.values, dtype=np.float64), min_len, hi, float(coefficient), masks
    )
    lookup = np.zeros(int(masks.max()) + 1, np.int64)
    lookup[masks] = np.arange(len(masks))
    return OracleReport(subsets, lookup[o_mask], o_len, o_seed, o_best, o_off, m_start, m_dist)
