"""PAA / SAX words for arbitrary-length subsequences computed from prefix sums."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import Dict, List, Optional, Sequence, Tuple

from .series import ContractError, MultiSeries, SubseqRef, is_flat

MIN_ALPHABET = 2
MAX_ALPHABET = 20


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SaxParams:
    w: int = 5
    a: int = 6

    def __post_init__(self):
        if self.w < 1:
            raise ParameterError(f"word length w must be >= 1, got {self.w}")
        if not MIN_ALPHABET <= self.a <= MAX_ALPHABET:
            raise ParameterError(f"alphabet size a must be in [2, 20], got {self.a}")


@dataclass(frozen=True)
class SaxWord:
    symbols: Tuple[int, ...]
    paa: Tuple[float, ...]

    @property
    def w(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return word_to_str(self.symbols)


def word_to_str(symbols: Sequence[int]) -> str:
    return "".join(chr(ord("a") + int(s)) for s in symbols)


@lru_cache(maxsize=None)
def breakpoints(a: int) -> Tuple[float, ...]:
    """Standard-normal quantiles at 1/a, 2/a, ..., (a-1)/a."""
    if not MIN_ALPHABET <= a <= MAX_ALPHABET:
        raise ParameterError(f"alphabet size a must be in [2, 20], got {a}")
    nd = NormalDist()
    cuts = [nd.inv_cdf(i / a) for i in range(1, a)]
    # enforce exact symmetry; inv_cdf(0.5) is exactly 0
    half = len(cuts) // 2
    for i in range(half):
        cuts[-1 - i] = -cuts[i]
    return tuple(cuts)


@lru_cache(maxsize=4096)
def segment_bounds(length: int, w: int) -> Tuple[Tuple[int, int], ...]:
    """Segment i covers offsets [floor(i*L/w), floor((i+1)*L/w))."""
    if length < w:
        raise ContractError(f"subsequence length {length} shorter than word length {w}")
    return tuple(((i * length) // w, ((i + 1) * length) // w) for i in range(w))


def symbolize(paa: Sequence[float], a: int) -> Tuple[int, ...]:
    """Map PAA coefficients to symbol indices; a value equal to a cut goes up."""
    cuts = breakpoints(a)
    return tuple(bisect_right(cuts, v) for v in paa)


def fast_sax(series: MultiSeries, ref: SubseqRef, params: SaxParams) -> SaxWord:
    """SAX word of a subsequence in O(w log a) using the series prefix sums.

    Flat subsequences yield all-zero PAA and therefore the middle symbol.
    The mean is formed with the same reciprocal as the segment means, so a
    single-segment word is exactly zero.
    """
    d, s, n = ref.dim, ref.start, ref.length
    if n < max(params.w, 2) or s < 0 or s + n > series.length:
        raise ContractError(f"subsequence {ref} invalid for w={params.w}, N={series.length}")
    cx = series.esum_x[d]
    if is_flat(series, d, s, n):
        paa = (0.0,) * params.w
    else:
        ex = cx[s + n] - cx[s]
        exx = series.esum_xx[d, s + n] - series.esum_xx[d, s]
        mu = ex * (1.0 / n)
        var = (exx - ex * ex / n) / (n - 1)
        if var <= 0.0:
            paa = (0.0,) * params.w
        else:
            inv_sigma = 1.0 / math.sqrt(var)
            paa = tuple(
                float(((cx[s + e] - cx[s + b]) * (1.0 / (e - b)) - mu) * inv_sigma)
                for b, e in segment_bounds(n, params.w)
            )
    return SaxWord(symbolize(paa, params.a), paa)


def paa_distance(x: SaxWord, y: SaxWord, length: int) -> float:
    """Lower-bounding distance between two PAA vectors of ``length``-point subsequences.

    Each squared coefficient difference is weighted by its segment's point
    count, which equals the usual sqrt(L/w) scaling whenever w divides L and
    keeps the bound exact when it does not.
    """
    if x.w != y.w:
        raise ContractError(f"word length mismatch: {x.w} != {y.w}")
    bounds = segment_bounds(length, x.w)
    total = 0.0
    for (b, e), p, q in zip(bounds, x.paa, y.paa):
        total += (e - b) * (p - q) ** 2
    return math.sqrt(total)


class SaxEncoder:
    """Hot-path SAX encoder bound to one series.

    Holds plain-Python copies of the prefix sums so that each word costs a
    handful of float operations instead of numpy scalar round trips.
    """

    def __init__(self, series: MultiSeries, params: SaxParams):
        self.params = params
        self.w = params.w
        self.cuts = breakpoints(params.a)
        self.middle = (params.a // 2,) * params.w
        self._cx = [row.tolist() for row in series.esum_x]
        self._cxx = [row.tolist() for row in series.esum_xx]
        self._ch = [row.tolist() for row in series.changes]
        self._bounds: Dict[int, List[Tuple[int, int, float]]] = {}
        self.calls = 0

    def _segments(self, n: int) -> List[Tuple[int, int, float]]:
        segs = self._bounds.get(n)
        if segs is None:
            segs = [(b, e, 1.0 / (e - b)) for b, e in segment_bounds(n, self.w)]
            self._bounds[n] = segs
        return segs

    def word(self, dim: int, start: int, n: int) -> Tuple[int, ...]:
        self.calls += 1
        ch = self._ch[dim]
        if ch[start + n] - ch[start + 1] == 0:
            return self.middle
        cx = self._cx[dim]
        cxx = self._cxx[dim]
        ex = cx[start + n] - cx[start]
        var = (cxx[start + n] - cxx[start] - ex * ex / n) / (n - 1)
        if var <= 0.0:
            return self.middle
        mu = ex * (1.0 / n)
        inv_sigma = 1.0 / math.sqrt(var)
        cuts = self.cuts
        return tuple(
            bisect_right(cuts, ((cx[start + e] - cx[start + b]) * inv - mu) * inv_sigma)
            for b, e, inv in self._segments(n)
        )

    def _stats(self, dim: int, start: int, n: int):
        if self._ch[dim][start + n] - self._ch[dim][start + 1] == 0:
            return None
        cx = self._cx[dim]
        cxx = self._cxx[dim]
        ex = cx[start + n] - cx[start]
        var = (cxx[start + n] - cxx[start] - ex * ex / n) / (n - 1)
        if var <= 0.0:
            return None
        return ex * (1.0 / n), 1.0 / math.sqrt(var)

    def shared_word(self, dim: int, s1: int, n1: int, s2: int, n2: int) -> Optional[Tuple[int, ...]]:
        """The common word of two spans of ``dim``, or None as soon as a symbol differs.

        Symbols are computed exactly as in :meth:`word`.
        """
        self.calls += 1
        st1 = self._stats(dim, s1, n1)
        st2 = self._stats(dim, s2, n2)
        if st1 is None or st2 is None:
            if st1 is None and st2 is None:
                return self.middle
            flat_first = st1 is None
            other = self.word(dim, s2, n2) if flat_first else self.word(dim, s1, n1)
            return self.middle if other == self.middle else None
        mu1, is1 = st1
        mu2, is2 = st2
        cx = self._cx[dim]
        cuts = self.cuts
        out = []
        for (b1, e1, inv1), (b2, e2, inv2) in zip(self._segments(n1), self._segments(n2)):
            sym = bisect_right(cuts, ((cx[s1 + e1] - cx[s1 + b1]) * inv1 - mu1) * is1)
            if sym != bisect_right(cuts, ((cx[s2 + e2] - cx[s2 + b2]) * inv2 - mu2) * is2):
                return None
            out.append(sym)
        return tuple(out)
