"""False-positive removal, motif assembly and ranking of candidate buckets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .series import MultiSeries, SubdimSubseq, is_flat, pairwise_subdim_distances
from .threshold import Threshold, threshold_fn

__all__ = [
    "Instance",
    "Motif",
    "MotifReport",
    "Threshold",
    "enumeration_ranges",
    "remove_false_positives",
    "threshold_fn",
    "verify_bucket",
]


@dataclass(frozen=True)
class Instance:
    subseq: SubdimSubseq
    distance: float

    @property
    def start(self) -> int:
        return self.subseq.start

    @property
    def length(self) -> int:
        return self.subseq.length

    @property
    def end(self) -> int:
        return self.subseq.end


@dataclass(frozen=True)
class Motif:
    dims: Tuple[int, ...]
    length: int
    seed: SubdimSubseq
    instances: Tuple[Instance, ...]
    best_pair_distance: float
    key: str = ""
    rank: int = 0

    def sort_key(self):
        return (len(self.dims), self.length, self.best_pair_distance, self.seed.start, self.dims)


@dataclass
class MotifReport:
    motifs: List[Motif] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.motifs)

    def __iter__(self):
        return iter(self.motifs)

    @classmethod
    def from_motifs(cls, motifs: Iterable[Motif]) -> "MotifReport":
        """Rank ascending by best pair distance within each (|dims|, length) group."""
        ordered = sorted(motifs, key=Motif.sort_key)
        ranked: List[Motif] = []
        group = None
        rank = 0
        for m in ordered:
            g = (len(m.dims), m.length)
            rank = rank + 1 if g == group else 1
            group = g
            ranked.append(Motif(m.dims, m.length, m.seed, m.instances, m.best_pair_distance, m.key, rank))
        return cls(ranked)


def verify_bucket(
    series: MultiSeries,
    dims: Tuple[int, ...],
    instances: List[SubdimSubseq],
    threshold: Threshold,
    key: str = "",
) -> Optional[Motif]:
    """Exact distance check of one candidate bucket.

    Instances are right-truncated to the shortest one; the seed is the
    instance whose largest distance to the others is smallest (ties by
    position).  Windows constant in any motif dimension are discarded.
    Instances within ``threshold(L)`` of the seed survive, and
    among mutually overlapping survivors the one closer to the seed wins.
    """
    if len(instances) < 2:
        return None
    length = min(i.length for i in instances)
    # windows constant in a motif dimension carry no shape and are dropped
    starts = sorted({
        i.start for i in instances
        if not any(is_flat(series, d, i.start, length) for d in dims)
    })
    if len(starts) < 2:
        return None
    dist = pairwise_subdim_distances(series, starts, length, dims)
    seed_idx = int(np.argmin(dist.max(axis=1)))
    radius = threshold(length)
    order = sorted(range(len(starts)), key=lambda j: (dist[seed_idx, j], starts[j]))
    kept: List[int] = []
    for j in order:
        if dist[seed_idx, j] >= radius:
            break
        s = starts[j]
        if all(s + length <= starts[k] or starts[k] + length <= s for k in kept):
            kept.append(j)
    if len(kept) < 2:
        return None
    sub = dist[np.ix_(kept, kept)]
    best = float(sub[np.triu_indices(len(kept), 1)].min())
    seed = SubdimSubseq(dims, starts[seed_idx], length)
    members = tuple(
        Instance(SubdimSubseq(dims, starts[j], length), float(dist[seed_idx, j]))
        for j in sorted(kept, key=lambda j: starts[j])
    )
    return Motif(dims, length, seed, members, best, key)


def remove_false_positives(series: MultiSeries, candidates, config) -> MotifReport:
    """Verify every candidate bucket exactly and return the ranked report.

    ``config`` is an engine configuration or a bare :class:`Threshold`.
    """
    threshold = config.threshold if hasattr(config, "threshold") else config
    backend = getattr(config, "backend", "auto")
    buckets = sorted(candidates, key=lambda b: (b.key, b.dims, b.ref_length))
    if backend == "python":
        motifs = []
        for bucket in buckets:
            motif = verify_bucket(series, bucket.dims, bucket.instances, threshold, bucket.key)
            if motif is not None:
                motifs.append(motif)
    else:
        motifs = _verify_compiled(series, buckets, threshold)
    return MotifReport.from_motifs(motifs)


def _verify_compiled(series: MultiSeries, buckets, threshold: Threshold) -> List[Motif]:
    from ._kernel import verify_buckets

    if not buckets:
        return []
    sizes = [len(b.instances) for b in buckets]
    b_off = np.zeros(len(buckets) + 1, dtype=np.int64)
    b_off[1:] = np.cumsum(sizes)
    i_start = np.fromiter((i.start for b in buckets for i in b.instances), dtype=np.int64, count=int(b_off[-1]))
    i_len = np.fromiter((i.length for b in buckets for i in b.instances), dtype=np.int64, count=int(b_off[-1]))
    d_off = np.zeros(len(buckets) + 1, dtype=np.int64)
    d_off[1:] = np.cumsum([len(b.dims) for b in buckets])
    d_flat = np.fromiter((d for b in buckets for d in b.dims), dtype=np.int64, count=int(d_off[-1]))
    out = verify_buckets(
        series.values,
        np.ascontiguousarray(series.changes.T),
        b_off, i_start, i_len, d_off, d_flat, float(threshold.coefficient),
    )
    o_bucket, o_len, o_seed, o_best, o_off, m_start, m_dist = (a.tolist() for a in out)
    motifs = []
    for k, b in enumerate(o_bucket):
        bucket = buckets[b]
        dims, L = bucket.dims, o_len[k]
        members = tuple(
            Instance(SubdimSubseq(dims, s, L), d)
            for s, d in zip(m_start[o_off[k]:o_off[k + 1]], m_dist[o_off[k]:o_off[k + 1]])
        )
        motifs.append(Motif(dims, L, SubdimSubseq(dims, o_seed[k], L), members, o_best[k], bucket.key))
    return motifs


def enumeration_ranges(report: MotifReport) -> Tuple[int, int]:
    """(number of distinct motif lengths, number of distinct dimension counts)."""
    return len({m.length for m in report}), len({len(m.dims) for m in report})
