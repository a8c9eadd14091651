"""Multivariate series container, prefix-sum statistics and z-normalized distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


class StructureError(ValueError):
    """Raw input is not a rectangular D x N matrix."""


class IngestionError(ValueError):
    """Raw input contains values that cannot be used (NaN, Inf, missing)."""


class ContractError(ValueError):
    """An operation was called with arguments violating its precondition."""


@dataclass(frozen=True)
class MultiSeries:
    """D-dimensional series with per-dimension prefix sums.

    ``esum_x[d, k]`` is the sum of the first ``k`` samples of dimension ``d``
    (so ``esum_x[d, 0] == 0``) and ``esum_xx`` the same for squared samples.
    ``changes[d, k]`` counts indices ``1 <= i < k`` where the value differs
    from its predecessor; it gives an exact O(1) flatness test.
    """

    values: np.ndarray
    esum_x: np.ndarray
    esum_xx: np.ndarray
    changes: np.ndarray

    @property
    def n_dims(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def window(self, dim: int, start: int, length: int) -> np.ndarray:
        return self.values[dim, start:start + length]


@dataclass(frozen=True)
class SubseqRef:
    """A univariate subsequence: ``length`` points of ``dim`` from ``start``."""

    dim: int
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class SubdimSubseq:
    """The same time span taken in several dimensions."""

    dims: Tuple[int, ...]
    start: int
    length: int

    def __post_init__(self):
        dims = self.dims
        if type(dims) is tuple and len(dims) == 1 and type(dims[0]) is int:
            return
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ContractError("subdimensional subsequence needs at least one dimension")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ContractError(f"dims must be strictly increasing, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def end(self) -> int:
        return self.start + self.length


def build_series(raw) -> MultiSeries:
    """Build a :class:`MultiSeries` from a D x N matrix (a 1-D input is one dimension)."""
    try:
        values = np.array(raw, dtype=float)
    except ValueError as exc:
        raise StructureError(f"input is not a rectangular matrix: {exc}") from None
    if values.ndim == 1:
        values = values[None, :]
    if values.ndim != 2:
        raise StructureError(f"expected a D x N matrix, got shape {values.shape}")
    n_dims, n = values.shape
    if n_dims < 1 or n < 1:
        raise StructureError(f"series must have D >= 1 and N >= 1, got shape {values.shape}")
    bad = ~np.isfinite(values)
    if bad.any():
        d, i = np.argwhere(bad)[0]
        raise IngestionError(f"non-finite value {values[d, i]!r} in dimension {d} at index {i}")

    esum_x = np.zeros((n_dims, n + 1))
    esum_xx = np.zeros((n_dims, n + 1))
    np.cumsum(values, axis=1, out=esum_x[:, 1:])
    np.cumsum(values * values, axis=1, out=esum_xx[:, 1:])
    changes = np.zeros((n_dims, n + 1), dtype=np.int64)
    if n > 1:
        np.cumsum(values[:, 1:] != values[:, :-1], axis=1, out=changes[:, 2:])
    for arr in (values, esum_x, esum_xx, changes):
        arr.flags.writeable = False
    return MultiSeries(values, esum_x, esum_xx, changes)


def _check_ref(series: MultiSeries, ref: SubseqRef) -> None:
    if not 0 <= ref.dim < series.n_dims:
        raise ContractError(f"dimension {ref.dim} out of range for D={series.n_dims}")
    if ref.length < 2 or ref.start < 0 or ref.end > series.length:
        raise ContractError(f"subsequence {ref} does not fit a series of length {series.length}")


def is_flat(series: MultiSeries, dim: int, start: int, length: int) -> bool:
    ch = series.changes[dim]
    return ch[start + length] - ch[start + 1] == 0


def mean_std(series: MultiSeries, ref: SubseqRef) -> Tuple[float, float]:
    """Mean and sample standard deviation of a subsequence in O(1).

    Flat subsequences report ``std == 0``.
    """
    _check_ref(series, ref)
    d, s, n = ref.dim, ref.start, ref.length
    ex = series.esum_x[d, s + n] - series.esum_x[d, s]
    exx = series.esum_xx[d, s + n] - series.esum_xx[d, s]
    mean = float(ex / n)
    if is_flat(series, d, s, n):
        return float(series.values[d, s]), 0.0
    var = (exx - ex * ex / n) / (n - 1)
    return mean, float(np.sqrt(var)) if var > 0 else 0.0


def znormalize(series: MultiSeries, ref: SubseqRef) -> np.ndarray:
    """Z-normalized copy of a subsequence; flat subsequences map to zeros.

    The window is read in full anyway, so its mean and deviation are taken
    in two passes rather than from the prefix sums, which lose precision
    when the offset dwarfs the spread.
    """
    _check_ref(series, ref)
    if is_flat(series, ref.dim, ref.start, ref.length):
        return np.zeros(ref.length)
    x = series.window(ref.dim, ref.start, ref.length)
    centered = x - x.mean()
    std = np.sqrt(np.dot(centered, centered) / (ref.length - 1))
    if std == 0.0:
        return np.zeros(ref.length)
    return centered / std


def znorm_euclidean(series: MultiSeries, a: SubseqRef, b: SubseqRef) -> float:
    """Euclidean distance between two z-normalized subsequences of equal length."""
    if a.length != b.length:
        raise ContractError(f"length mismatch: {a.length} != {b.length}")
    return float(np.linalg.norm(znormalize(series, a) - znormalize(series, b)))


def subdim_avg_distance(series: MultiSeries, x: SubdimSubseq, y: SubdimSubseq) -> float:
    """Average over the shared dimensions of the per-dimension z-normalized distance."""
    if x.dims != y.dims:
        raise ContractError(f"dims mismatch: {x.dims} != {y.dims}")
    if x.length != y.length:
        raise ContractError(f"length mismatch: {x.length} != {y.length}")
    dist = np.array([
        znorm_euclidean(series, SubseqRef(j, x.start, x.length), SubseqRef(j, y.start, y.length))
        for j in x.dims
    ])
    return float(dist.mean())


def pairwise_subdim_distances(
    series: MultiSeries, starts: Sequence[int], length: int, dims: Sequence[int]
) -> np.ndarray:
    """Matrix of average z-normalized distances between same-length instances.

    Entry ``[i, j]`` equals ``subdim_avg_distance`` for the instances starting
    at ``starts[i]`` and ``starts[j]``.  Distances are norms of explicit
    differences, never expanded dot products, so near-zero entries stay exact.
    """
    st = np.asarray(starts, dtype=np.int64)
    dd = np.asarray(dims, dtype=np.int64)
    k, n = len(st), length
    if k == 0:
        return np.zeros((0, 0))
    if st.min() < 0 or st.max() + n > series.length or n < 2:
        raise ContractError(f"instances of length {n} out of range for N={series.length}")
    flat = series.changes[dd[:, None], st + n] - series.changes[dd[:, None], st + 1] == 0
    win = np.lib.stride_tricks.sliding_window_view(series.values, n, axis=1)[dd[:, None], st]
    z = win - win.mean(axis=2, keepdims=True)
    var = np.einsum("dkl,dkl->dk", z, z) / (n - 1)
    zero = flat | (var <= 0)
    z /= np.sqrt(np.where(zero, 1.0, var))[..., None]
    z[zero] = 0.0
    total = np.zeros((k, k))
    if k * k * n * len(dd) <= 4_000_000:
        diff = z[:, :, None, :] - z[:, None, :, :]
        total = np.sqrt(np.einsum("dijl,dijl->dij", diff, diff)).sum(axis=0)
    else:
        for i in range(k - 1):
            diff = z[:, i + 1:] - z[:, i:i + 1]
            row = np.sqrt(np.einsum("djl,djl->dj", diff, diff)).sum(axis=0)
            total[i, i + 1:] = row
            total[i + 1:, i] = row
    return total / len(dd)
