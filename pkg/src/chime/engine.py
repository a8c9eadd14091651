"""Collaborative hierarchy-based enumeration of variable-length subdimensional motifs.

The engine scans the reduced node chains dimension by dimension.  For every
unvisited node it merges the node with its successor and looks the merged
span's SAX word up in a table of previously seen spans.  A hit starts a
greedy joint extension of both spans, a check of every other dimension at the
same time spans, registration of the pair as a motif candidate, and then the
same procedure again from the two extended spans.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .reduction import ChainSet, SeqNode, numerosity_reduce
from .sax import SaxEncoder, SaxParams, word_to_str
from .series import MultiSeries, SubdimSubseq
from .threshold import Threshold

log = logging.getLogger(__name__)

Word = Tuple[int, ...]
BACKENDS = ("auto", "python", "numba")


@dataclass(frozen=True)
class EngineConfig:
    min_len: int = 300
    sax: SaxParams = field(default_factory=SaxParams)
    threshold: Threshold = field(default_factory=Threshold)
    length_band_ratio: float = 0.15
    nr_w: int = 32
    backend: str = "auto"

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.min_len < self.sax.w:
            raise ValueError(f"min_len {self.min_len} must be >= word length {self.sax.w}")
        if not 0.0 < self.length_band_ratio < 1.0:
            raise ValueError(f"length_band_ratio must be in (0, 1), got {self.length_band_ratio}")


def similar_length(a: int, b: int, ratio: float) -> bool:
    return abs(a - b) <= ratio * max(a, b)


def _overlaps(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    return a_start < b_end and b_start < a_end


class SaxTable:
    """Map (word, dimension) -> table records ordered by span length."""

    def __init__(self, ratio: float):
        self.ratio = ratio
        self._lengths: Dict[Tuple[Word, int], List[int]] = {}
        self._nodes: Dict[Tuple[Word, int], List[SeqNode]] = {}
        self._members: set = set()
        self.records = 0

    def __len__(self) -> int:
        return self.records

    def __contains__(self, node: SeqNode) -> bool:
        return id(node) in self._members

    def find(self, word: Word, dim: int, start: int, length: int) -> Optional[SeqNode]:
        """Closest-length record of similar length whose span is disjoint from the query.

        Ties go to the earliest inserted record.
        """
        lengths = self._lengths.get((word, dim))
        if not lengths:
            return None
        nodes = self._nodes[(word, dim)]
        lo = bisect_left(lengths, int(length * (1.0 - self.ratio)))
        hi = bisect_right(lengths, int(length / (1.0 - self.ratio)) + 1)
        end = start + length
        best = None
        best_gap = None
        ratio = self.ratio
        for i in range(lo, hi):
            cand = nodes[i]
            gap = abs(cand.length - length)
            if gap > ratio * max(cand.length, length):
                continue
            if cand.start < end and start < cand.start + cand.length:
                continue
            if best is None or gap < best_gap:
                best, best_gap = cand, gap
        return best

    def put(self, word: Word, dim: int, node: SeqNode) -> None:
        if id(node) in self._members:
            return
        key = (word, dim)
        lengths = self._lengths.setdefault(key, [])
        nodes = self._nodes.setdefault(key, [])
        # bisect_right keeps insertion order among equal lengths
        i = bisect_right(lengths, node.length)
        lengths.insert(i, node.length)
        nodes.insert(i, node)
        self._members.add(id(node))
        self.records += 1

    def put_if_unmatched(self, word: Word, dim: int, node: SeqNode) -> bool:
        """Record ``node`` unless some disjoint similar-length record already represents it."""
        if self.find(word, dim, node.start, node.length) is not None:
            return False
        self.put(word, dim, node)
        return True


def wordset_key(words: Dict[int, Word], dims: Tuple[int, ...]) -> str:
    return "-".join(f"{word_to_str(words[d])}{d}" for d in dims)


def stable_hash(key: str) -> int:
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big")


@dataclass
class Bucket:
    key: str
    key_hash: int
    dims: Tuple[int, ...]
    ref_length: int
    instances: List[SubdimSubseq] = field(default_factory=list)
    lo: int = 0
    hi: int = 0

    def admits(self, lo: int, hi: int, ratio: float) -> bool:
        """Whether lengths ``lo..hi`` can join without the bucket leaving the band."""
        lo, hi = min(self.lo, lo), max(self.hi, hi)
        return hi - lo <= ratio * hi

    def add(self, inst: SubdimSubseq) -> bool:
        for other in self.instances:
            if other.start == inst.start and other.length == inst.length:
                return False
            if _overlaps(other.start, other.end, inst.start, inst.end):
                return False
        self.instances.append(inst)
        return True


class MotifCandidateSet:
    """Candidate buckets keyed by (wordSet hash, length band, dims).

    A pair joins the first same-key bucket whose length range, widened by
    the pair, still satisfies the band; otherwise it opens a new band.
    Every two lengths in a bucket are therefore similar.
    """

    def __init__(self, ratio: float = 0.15):
        self.ratio = ratio
        self.buckets: Dict[Tuple[int, int, Tuple[int, ...]], Bucket] = {}
        self._bands: Dict[Tuple[int, Tuple[int, ...]], List[Bucket]] = {}
        self.stats: Optional["EngineStats"] = None

    def __len__(self) -> int:
        return len(self.buckets)

    def __iter__(self):
        return iter(self.buckets.values())

    def put(self, key: str, dims: Tuple[int, ...], first: SubdimSubseq, second: SubdimSubseq) -> Bucket:
        h = stable_hash(key)
        lo = min(first.length, second.length)
        hi = max(first.length, second.length)
        bands = self._bands.setdefault((h, dims), [])
        bucket = None
        for b in bands:
            if b.key == key and b.admits(lo, hi, self.ratio):
                bucket = b
                b.lo, b.hi = min(b.lo, lo), max(b.hi, hi)
                break
        if bucket is None:
            bucket = Bucket(key, h, dims, lo, lo=lo, hi=hi)
            self.buckets[(h, len(bands), dims)] = bucket
            bands.append(bucket)
        bucket.add(first)
        bucket.add(second)
        return bucket

    def to_dict(self) -> dict:
        return {
            "buckets": [
                {
                    "key": b.key,
                    "hash": f"{b.key_hash:016x}",
                    "band": band,
                    "dims": list(b.dims),
                    "instances": [[i.start, i.length] for i in b.instances],
                }
                for (h, band, dims), b in sorted(self.buckets.items())
            ]
        }


@dataclass
class EngineStats:
    series_length: int = 0
    n_dims: int = 0
    min_len: int = 0
    reduced_windows: int = 0
    nodes_created: int = 0
    table_records: int = 0
    sax_words: int = 0
    matches: int = 0
    candidates: int = 0
    t_reduce_ms: float = 0.0
    t_enum_ms: float = 0.0

    @property
    def tracked(self) -> int:
        """Subsequences held in memory: table records plus every node ever created."""
        return self.table_records + self.nodes_created


class MatchKind(enum.Enum):
    REGISTERED = "registered"
    MATCHED = "matched"
    NO_EXTENSION = "no_extension"


@dataclass
class MatchOutcome:
    kind: MatchKind
    observed: Optional[SeqNode] = None
    match: Optional[SeqNode] = None
    word: Optional[Word] = None


class ChimeEngine:
    """Single-run enumerator state: chains, SAX table and candidate buckets."""

    def __init__(self, series: MultiSeries, config: EngineConfig, chains: Optional[ChainSet] = None):
        self.series = series
        self.config = config
        self.ratio = config.length_band_ratio
        t0 = time.perf_counter()
        self.chains = chains if chains is not None else numerosity_reduce(
            series, config.min_len, config.threshold, config.nr_w
        )
        self.t_reduce = time.perf_counter() - t0
        self.encoder = SaxEncoder(series, config.sax)
        self.table = SaxTable(self.ratio)
        self.motifs = MotifCandidateSet(self.ratio)
        self.matches = 0

    def word(self, dim: int, node: SeqNode) -> Word:
        return self.encoder.word(dim, node.start, node.length)

    def sax_word_match(self, node: SeqNode) -> MatchOutcome:
        nxt = node.next
        if nxt is None:
            return MatchOutcome(MatchKind.NO_EXTENSION)
        observed = self.chains.node(node.dim, node.first, nxt.last)
        word = self.word(node.dim, observed)
        match = self.table.find(word, node.dim, observed.start, observed.length)
        if match is None:
            self.table.put(word, node.dim, observed)
            return MatchOutcome(MatchKind.REGISTERED, observed, None, word)
        self.matches += 1
        return MatchOutcome(MatchKind.MATCHED, observed, match, word)

    def local_enumeration(self, observed: SeqNode, matched: SeqNode) -> Tuple[SeqNode, SeqNode]:
        """Grow both spans one reduced window at a time while their words agree.

        Stops on a word difference, at a chain tail, when the spans would
        overlap, or when their lengths stop being similar.
        """
        obs, match, _ = self._extend(observed, matched, None)
        return obs, match

    def _extend(
        self, observed: SeqNode, matched: SeqNode, word: Optional[Word]
    ) -> Tuple[SeqNode, SeqNode, Word]:
        dim = observed.dim
        pos = self.chains.positions
        l = self.chains.window
        count = len(pos)
        enc = self.encoder
        ratio = self.ratio
        o_first, o_last = observed.first, observed.last
        m_first, m_last = matched.first, matched.last
        o_start, m_start = pos[o_first], pos[m_first]
        if word is None:
            word = self.word(dim, observed)
        while o_last + 1 < count and m_last + 1 < count:
            o_end = pos[o_last + 1] + l
            m_end = pos[m_last + 1] + l
            if _overlaps(o_start, o_end, m_start, m_end):
                break
            o_len, m_len = o_end - o_start, m_end - m_start
            if abs(o_len - m_len) > ratio * max(o_len, m_len):
                break
            shared = enc.shared_word(dim, o_start, o_len, m_start, m_len)
            if shared is None:
                break
            word = shared
            o_last += 1
            m_last += 1
        chains = self.chains
        return chains.node(dim, o_first, o_last), chains.node(dim, m_first, m_last), word

    def dimension_match(
        self, observed: SeqNode, matched: SeqNode, seed_word: Word
    ) -> Tuple[Tuple[int, ...], Dict[int, Word], List[SeqNode]]:
        """Dimensions whose words at both spans agree, their words, and the new nodes."""
        seed = observed.dim
        chains = self.chains
        dims = [seed]
        words = {seed: seed_word}
        created: List[SeqNode] = []
        shared = self.encoder.shared_word
        o_start, o_len, m_start, m_len = observed.start, observed.length, matched.start, matched.length
        for d in range(chains.n_dims):
            if d == seed:
                continue
            wo = shared(d, o_start, o_len, m_start, m_len)
            if wo is None:
                continue
            dims.append(d)
            words[d] = wo
            o_node = chains.node(d, observed.first, observed.last)
            m_node = chains.node(d, matched.first, matched.last)
            self.table.put_if_unmatched(wo, d, o_node)
            self.table.put_if_unmatched(wo, d, m_node)
            chains.chains[d][observed.first].visited = True
            created += [o_node, m_node]
        dims.sort()
        return tuple(dims), words, created

    def update_motif_set(
        self, dims: Tuple[int, ...], words: Dict[int, Word], observed: SeqNode, matched: SeqNode
    ) -> Bucket:
        key = wordset_key(words, dims)
        return self.motifs.put(
            key,
            dims,
            SubdimSubseq(dims, observed.start, observed.length),
            SubdimSubseq(dims, matched.start, matched.length),
        )

    def collab_enum(self, node: SeqNode) -> MotifCandidateSet:
        # explicit stack of (node, record it was matched against); LIFO order
        # reproduces the recursive order: observed side first, then matched side
        stack: List[Tuple[SeqNode, Optional[SeqNode]]] = [(node, None)]
        while stack:
            current, record = stack.pop()
            if current.enumerated or (record is not None and record.enumerated):
                continue
            current.enumerated = True
            if record is not None:
                record.enumerated = True
            outcome = self.sax_word_match(current)
            if outcome.kind is not MatchKind.MATCHED:
                continue
            observed, matched, word = self._extend(outcome.observed, outcome.match, outcome.word)
            self.table.put_if_unmatched(word, observed.dim, observed)
            self.table.put_if_unmatched(word, matched.dim, matched)
            dims, words, _ = self.dimension_match(observed, matched, word)
            self.update_motif_set(dims, words, observed, matched)
            stack.append((matched, outcome.match))
            stack.append((observed, None))
        return self.motifs

    def run(self) -> MotifCandidateSet:
        t0 = time.perf_counter()
        if self._use_kernel():
            self._run_kernel()
        else:
            for chain in self.chains.chains:
                for node in chain:
                    if not node.visited and not node.enumerated:
                        self.collab_enum(node)
            self.counts = (self.chains.nodes_created, len(self.table), self.encoder.calls, self.matches)
        t_enum = time.perf_counter() - t0
        nodes, records, calls, matches = self.counts
        self.motifs.stats = EngineStats(
            series_length=self.series.length,
            n_dims=self.series.n_dims,
            min_len=self.config.min_len,
            reduced_windows=len(self.chains),
            nodes_created=nodes,
            table_records=records,
            sax_words=calls,
            matches=matches,
            candidates=len(self.motifs),
            t_reduce_ms=self.t_reduce * 1000.0,
            t_enum_ms=(self.t_reduce + t_enum) * 1000.0,
        )
        log.info(
            "enumeration: %d windows, %d matches, %d buckets, %.0f ms",
            len(self.chains), self.matches, len(self.motifs), self.motifs.stats.t_enum_ms,
        )
        return self.motifs


    def _use_kernel(self) -> bool:
        backend = self.config.backend
        if backend == "python":
            return False
        sax = self.config.sax
        # word codes and table keys must fit in a signed 64-bit integer
        fits = sax.a ** sax.w * max(self.series.n_dims, 1) < 2 ** 62
        if backend == "numba":
            if not fits:
                raise ValueError(f"w={sax.w}, a={sax.a} too large for the compiled backend")
            return True
        return fits

    def _run_kernel(self) -> None:
        from . import _kernel

        sax = self.config.sax
        out = _kernel.enumerate_candidates(
            np.ascontiguousarray(self.series.esum_x.T),
            np.ascontiguousarray(self.series.esum_xx.T),
            np.ascontiguousarray(self.series.changes.T),
            np.asarray(self.chains.positions, dtype=np.int64), self.chains.window,
            sax.w, sax.a, np.asarray(self.encoder.cuts), self.ratio,
        )
        g_koff, g_klen, g_first, k_dim, k_code, b_ref, b_lo, b_hi, b_next, b_head, i_start, i_len, i_next, cnt = out
        w, a = sax.w, sax.a

        def decode(code: int) -> Word:
            syms = []
            for _ in range(w):
                code, r = divmod(code, a)
                syms.append(r)
            return tuple(reversed(syms))

        k_dim, k_code, i_start, i_len, i_next = (x.tolist() for x in (k_dim, k_code, i_start, i_len, i_next))
        b_ref, b_lo, b_hi = b_ref.tolist(), b_lo.tolist(), b_hi.tolist()
        b_next, b_head = b_next.tolist(), b_head.tolist()
        buckets = self.motifs.buckets
        bands = self.motifs._bands
        for off, n, b in zip(g_koff.tolist(), g_klen.tolist(), g_first.tolist()):
            dims = tuple(k_dim[off:off + n])
            words = {d: decode(c) for d, c in zip(dims, k_code[off:off + n])}
            key = wordset_key(words, dims)
            h = stable_hash(key)
            group = bands.setdefault((h, dims), [])
            while b >= 0:
                bucket = Bucket(key, h, dims, b_ref[b], lo=b_lo[b], hi=b_hi[b])
                it = b_head[b]
                while it >= 0:
                    bucket.instances.append(SubdimSubseq(dims, i_start[it], i_len[it]))
                    it = i_next[it]
                buckets[(h, len(group), dims)] = bucket
                group.append(bucket)
                b = b_next[b]
        nodes, records, calls, matches = (int(cnt[i]) for i in (
            _kernel.C_NODES, _kernel.C_RECORDS, _kernel.C_CALLS, _kernel.C_MATCHES))
        self.matches = matches
        self.counts = (nodes, records, calls, matches)


def run_chime(series: MultiSeries, config: EngineConfig = EngineConfig()) -> MotifCandidateSet:
    """Reduce, scan every chain left to right and return the raw candidate buckets."""
    return ChimeEngine(series, config).run()
