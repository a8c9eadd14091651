"""Multivariate numerosity reduction and the per-dimension node chains built from it.

Every node covers a run of consecutive reduced windows ``first..last`` of one
dimension; its span runs from ``positions[first]`` to ``positions[last] + l``.
Chains share one position list, so a node in dimension ``j`` has an exact
counterpart at the same time span in every other dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .sax import segment_bounds
from .series import ContractError, MultiSeries, SubseqRef


class InputTooShortError(ValueError):
    pass


@dataclass(eq=False, slots=True)
class SeqNode:
    dim: int
    first: int
    last: int
    start: int
    length: int
    prev: Optional["SeqNode"] = None
    next: Optional["SeqNode"] = None
    visited: bool = False
    enumerated: bool = False
    original: bool = False

    @property
    def subseq(self) -> SubseqRef:
        return SubseqRef(self.dim, self.start, self.length)

    @property
    def end(self) -> int:
        return self.start + self.length

    def __repr__(self) -> str:
        return f"SeqNode(dim={self.dim}, [{self.first}..{self.last}], start={self.start}, len={self.length})"


@dataclass(eq=False)
class ChainSet:
    positions: List[int]
    window: int
    chains: List[List[SeqNode]]
    pos_index: List[Dict[int, SeqNode]]
    inserted: Dict[Tuple[int, int, int], SeqNode] = field(default_factory=dict)
    nodes_created: int = 0

    @property
    def n_dims(self) -> int:
        return len(self.chains)

    def __len__(self) -> int:
        return len(self.positions)

    def span(self, first: int, last: int) -> Tuple[int, int]:
        start = self.positions[first]
        return start, self.positions[last] + self.window - start

    def node(self, dim: int, first: int, last: int) -> SeqNode:
        """Node covering windows ``first..last`` of ``dim``, created once.

        A multi-window node's prev edge is the original node before ``first``
        and its next edge the original node after ``last``; original nodes
        keep their own edges.
        """
        key = (dim, first, last)
        found = self.inserted.get(key)
        if found is not None:
            return found
        chain = self.chains[dim]
        start, length = self.span(first, last)
        node = SeqNode(
            dim, first, last, start, length,
            prev=chain[first - 1] if first > 0 else None,
            next=chain[last + 1] if last + 1 < len(chain) else None,
        )
        self.inserted[key] = node
        self.nodes_created += 1
        return node

    def contains(self, node: SeqNode) -> bool:
        if not 0 <= node.dim < self.n_dims:
            return False
        if node.original:
            return 0 <= node.first < len(self.positions) and self.chains[node.dim][node.first] is node
        return self.inserted.get((node.dim, node.first, node.last)) is node


def _chain_from_positions(positions: List[int], window: int, n_dims: int) -> ChainSet:
    chains: List[List[SeqNode]] = []
    pos_index: List[Dict[int, SeqNode]] = []
    for d in range(n_dims):
        chain = [SeqNode(d, k, k, p, window, original=True) for k, p in enumerate(positions)]
        for a, b in zip(chain, chain[1:]):
            a.next = b
            b.prev = a
        chains.append(chain)
        pos_index.append({n.start: n for n in chain})
    return ChainSet(list(positions), window, chains, pos_index, nodes_created=len(positions) * n_dims)


def window_paa(series: MultiSeries, starts: np.ndarray, length: int, w: int) -> np.ndarray:
    """PAA of the z-normalized windows ``[s, s+length)`` in every dimension; shape (D, k, w)."""
    bounds = np.array(segment_bounds(length, w))
    b, e = bounds[:, 0], bounds[:, 1]
    cx, cxx, ch = series.esum_x, series.esum_xx, series.changes
    ex = cx[:, starts + length] - cx[:, starts]
    var = (cxx[:, starts + length] - cxx[:, starts] - ex * ex / length) / (length - 1)
    flat = (ch[:, starts + length] - ch[:, starts + 1] == 0) | (var <= 0.0)
    sigma = np.sqrt(np.where(flat, 1.0, var))
    seg = cx[:, starts[:, None] + e] - cx[:, starts[:, None] + b]
    paa = (seg / (e - b) - (ex / length)[..., None]) / sigma[..., None]
    paa[flat] = 0.0
    return paa


def numerosity_reduce(
    series: MultiSeries,
    l: int,
    threshold_fn: Callable[[int], float],
    nr_w: int = 32,
) -> ChainSet:
    """Left-to-right scan keeping a window whenever it drifts from the last kept one.

    Window ``p`` (length ``l``) is kept iff in at least one dimension its PAA
    distance to the most recently kept window exceeds ``2 * threshold_fn(l)``.
    Position 0 is always kept.
    """
    n = series.length
    if n < l:
        raise InputTooShortError(f"series length {n} shorter than minimum motif length {l}")
    if l < nr_w:
        raise ContractError(f"minimum length {l} must be >= the reduction PAA size {nr_w}")
    bounds = np.array(segment_bounds(l, nr_w))
    weights = (bounds[:, 1] - bounds[:, 0]).astype(float)
    limit = (2.0 * threshold_fn(l)) ** 2
    last_start = n - l

    positions = [0]
    ref = window_paa(series, np.array([0]), l, nr_w)[:, 0, :]
    p = 1
    block = 64
    while p <= last_start:
        starts = np.arange(p, min(p + block, last_start + 1))
        paa = window_paa(series, starts, l, nr_w)
        dist2 = ((paa - ref[:, None, :]) ** 2 @ weights)
        hit = np.flatnonzero((dist2 > limit).any(axis=0))
        if hit.size:
            k = int(hit[0])
            positions.append(int(starts[k]))
            ref = paa[:, k, :]
            p = int(starts[k]) + 1
            block = 64
        else:
            p = int(starts[-1]) + 1
            block = min(block * 2, 4096)
    return _chain_from_positions(positions, l, series.n_dims)


def merge_nodes(chain: ChainSet, dim: int, first: SeqNode, second: SeqNode) -> SubseqRef:
    """Hull of two nodes of one dimension, ``second`` lying at or after ``first``."""
    if first.dim != dim or second.dim != dim:
        raise ContractError(f"cannot merge nodes of dimensions {first.dim} and {second.dim} in {dim}")
    if second.first < first.first or second.last < first.last:
        raise ContractError("second node is not reachable from the first along next edges")
    end = max(first.end, second.end)
    return SubseqRef(dim, first.start, end - first.start)


def insert_node(chain: ChainSet, dim: int, new_ref: SubseqRef, anchor: SeqNode) -> SeqNode:
    """Add a node for ``new_ref``, the merge of consecutive windows starting at ``anchor``.

    The new node's next edge targets the first original node after the
    last covered window; ``pos_index`` keeps pointing at the original nodes.
    """
    if anchor.dim != dim or not chain.contains(anchor):
        raise ContractError(f"anchor {anchor!r} is not in chain {dim}")
    if new_ref.dim != dim or new_ref.start != anchor.start:
        raise ContractError(f"{new_ref} does not start at anchor {anchor!r}")
    tail = chain.pos_index[dim].get(new_ref.end - chain.window)
    if tail is None or tail.first < anchor.first:
        raise ContractError(f"{new_ref} does not end on a reduced window boundary")
    return chain.node(dim, anchor.first, tail.first)
