"""Random-walk generation, planted motifs and overlap scoring against ground truth."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .series import MultiSeries, build_series


class PlacementError(RuntimeError):
    pass


def gen_random_walk(n_dims: int, length: int, seed: int) -> MultiSeries:
    """Cumulative sums of i.i.d. standard-normal steps, one walk per dimension."""
    if n_dims < 1 or length < 1:
        raise ValueError(f"need D, N >= 1, got D={n_dims}, N={length}")
    rng = np.random.default_rng(seed)
    return build_series(rng.standard_normal((n_dims, length)).cumsum(axis=1))


@dataclass(frozen=True)
class PlantSpec:
    motif_len: int
    relevant_dims: int
    instance_count: int = 10
    noise_pct: float = 0.05
    amp_range: Tuple[float, float] = (0.0, 5.0)
    freq_range: Tuple[float, float] = (-2.0, 2.0)
    phase_range: Tuple[float, float] = (-math.pi, math.pi)
    n_terms: int = 5
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.motif_len < 2:
            raise ValueError(f"motif_len must be >= 2, got {self.motif_len}")
        if self.relevant_dims < 1:
            raise ValueError(f"relevant_dims must be >= 1, got {self.relevant_dims}")
        if self.instance_count < 2:
            raise ValueError(f"instance_count must be >= 2, got {self.instance_count}")
        if self.noise_pct < 0:
            raise ValueError(f"noise_pct must be >= 0, got {self.noise_pct}")


@dataclass
class PlantTruth:
    spans: List[Tuple[int, int]]
    dims: Tuple[int, ...]
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "params": self.params,
            "seed": self.seed,
            "spans": [[s, n] for s, n in self.spans],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlantTruth":
        return cls(
            spans=[(int(s), int(n)) for s, n in data["spans"]],
            dims=tuple(int(d) for d in data["dims"]),
            seed=int(data.get("seed", 0)),
            params=dict(data.get("params", {})),
        )

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "PlantTruth":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def random_shape(rng: np.random.Generator, spec: PlantSpec) -> Tuple[np.ndarray, dict]:
    """Sum of ``n_terms`` random sinusoids sampled at L points over one period of x."""
    amp = rng.uniform(*spec.amp_range, spec.n_terms)
    freq = rng.uniform(*spec.freq_range, spec.n_terms)
    phase = rng.uniform(*spec.phase_range, spec.n_terms)
    x = 2.0 * np.pi * np.arange(spec.motif_len) / spec.motif_len
    shape = (amp[:, None] * np.sin(freq[:, None] * x + phase[:, None])).sum(axis=0)
    return shape, {"amp": amp.tolist(), "freq": freq.tolist(), "phase": phase.tolist()}


def _place(rng, n: int, length: int, count: int, taken: List[Tuple[int, int]], retries: int) -> List[int]:
    for _ in range(retries):
        placed = list(taken)
        starts = []
        for _ in range(count):
            for _ in range(retries):
                s = int(rng.integers(0, n - length + 1))
                if all(s + length <= a or b <= s for a, b in placed):
                    break
            else:
                break
            placed.append((s, s + length))
            starts.append(s)
        if len(starts) == count:
            return sorted(starts)
    raise PlacementError(f"could not place {count} disjoint instances of length {length} in {n} points")


def plant_motifs(
    values: np.ndarray,
    spec: PlantSpec,
    exclude: Sequence[Tuple[int, int]] = (),
    dims: Optional[Sequence[int]] = None,
) -> PlantTruth:
    """Overwrite ``values`` in place with noisy, rescaled copies of random shapes.

    Instance spans avoid each other and the ``(start, end)`` spans in
    ``exclude``.  Every instance reuses the same start across the relevant
    dimensions.
    """
    n_dims, n = values.shape
    if spec.relevant_dims > n_dims:
        raise ValueError(f"{spec.relevant_dims} relevant dims requested but series has {n_dims}")
    if spec.instance_count * spec.motif_len > n:
        raise PlacementError(f"{spec.instance_count} x {spec.motif_len} points exceed series length {n}")
    rng = np.random.default_rng(spec.seed)
    if dims is None:
        dims = sorted(int(d) for d in rng.choice(n_dims, spec.relevant_dims, replace=False))
    starts = _place(rng, n, spec.motif_len, spec.instance_count, list(exclude), spec.max_retries)
    shapes = {}
    for d in dims:
        shape, params = random_shape(rng, spec)
        shapes[d] = (shape, params)
    L = spec.motif_len
    for d in dims:
        shape, _ = shapes[d]
        spread = float(np.ptp(shape)) or 1.0
        for s in starts:
            noisy = shape + rng.uniform(-1.0, 1.0, L) * spec.noise_pct * spread
            sd = noisy.std()
            z = (noisy - noisy.mean()) / sd if sd > 0 else noisy - noisy.mean()
            seg = values[d, s:s + L]
            scale = max(float(seg.std()), 1.0) * rng.uniform(0.5, 2.0)
            offset = float(seg.mean()) + rng.uniform(-1.0, 1.0) * scale
            values[d, s:s + L] = z * scale + offset
    params = {
        "motif_len": L,
        "instance_count": spec.instance_count,
        "noise_pct": spec.noise_pct,
        "shapes": {str(d): shapes[d][1] for d in dims},
    }
    return PlantTruth([(s, L) for s in starts], tuple(int(d) for d in dims), spec.seed, params)


def planted_series(
    n_dims: int, length: int, specs: Iterable[PlantSpec], seed: int
) -> Tuple[MultiSeries, List[PlantTruth]]:
    """Random walk with one planted motif per PlantSpec, spans kept disjoint across motifs."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n_dims, length)).cumsum(axis=1)
    truths: List[PlantTruth] = []
    taken: List[Tuple[int, int]] = []
    for spec in specs:
        truth = plant_motifs(values, spec, exclude=taken)
        taken += [(s, s + n) for s, n in truth.spans]
        truths.append(truth)
    return build_series(values), truths


def jaccard(a: Tuple[int, int], b: Tuple[int, int]) -> float:
    """Intersection over union of two (start, length) spans."""
    a0, a1 = a[0], a[0] + a[1]
    b0, b1 = b[0], b[0] + b[1]
    inter = max(0, min(a1, b1) - max(a0, b0))
    union = (a1 - a0) + (b1 - b0) - inter
    return inter / union if union > 0 else 0.0


def _span_overlap(reported: Sequence[Tuple[int, int]], truth: Sequence[Tuple[int, int]], top: int = 2) -> float:
    # greedy one-to-one pairing by descending Jaccard; average of the best ``top`` pairs
    pairs = sorted(
        ((jaccard(r, t), i, j) for i, r in enumerate(reported) for j, t in enumerate(truth)),
        key=lambda p: (-p[0], p[1], p[2]),
    )
    used_r, used_t, scores = set(), set(), []
    for score, i, j in pairs:
        if i in used_r or j in used_t:
            continue
        used_r.add(i)
        used_t.add(j)
        scores.append(score)
    k = max(2, top)
    scores += [0.0] * max(0, k - len(scores))
    return float(np.mean(scores[:k]))


def motif_scores(truth: PlantTruth, dims: Sequence[int], spans: Sequence[Tuple[int, int]]) -> Tuple[float, float, float]:
    len_ov = _span_overlap(spans, truth.spans)
    t, r = set(truth.dims), set(dims)
    dim_ov = len(t & r) / len(t | r) if t | r else 0.0
    return len_ov, dim_ov, math.sqrt(len_ov * dim_ov)


def overlap_scores(truth: PlantTruth, report) -> Tuple[float, float, float]:
    """(length overlap, dimension overlap, overall) of the best-matching reported motif."""
    best = (0.0, 0.0, 0.0)
    for m in report:
        spans = [(i.start, i.length) for i in m.instances]
        scores = motif_scores(truth, m.dims, spans)
        if scores[2] > best[2]:
            best = scores
    return best


def memory_ratio(stats, enumeration_range: int) -> Optional[float]:
    """Tracked subsequences over (all subsequences x enumeration range).

    ``stats`` needs ``tracked``, ``series_length``, ``n_dims`` and ``min_len``
    attributes (an :class:`~chime.engine.EngineStats`).  The ratio is
    undefined, returned as None, when the enumeration range is 0.
    """
    if enumeration_range <= 0:
        return None
    total = (stats.series_length - stats.min_len + 1) * stats.n_dims
    return stats.tracked / (total * enumeration_range)
