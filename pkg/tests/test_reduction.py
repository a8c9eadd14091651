import numpy as np
import pytest
from hypothesis import given, strategies as st

from chime.reduction import (
    InputTooShortError, SeqNode, insert_node, merge_nodes, numerosity_reduce, window_paa,
)
from chime.sax import SaxParams, fast_sax, paa_distance
from chime.series import ContractError, SubseqRef, build_series
from chime.threshold import Threshold

import naive

R = Threshold(0.02)


def _blocks(l, reps, rng):
    x = np.linspace(0, 2 * np.pi, l)
    a = np.sin(x)
    b = np.sign(np.sin(3 * x)) + 0.01 * rng.normal(size=l)
    return np.concatenate([a if k % 2 == 0 else b for k in range(reps)])


def test_constant_series_single_position():
    s = build_series(np.full((3, 500), 2.5))
    chains = numerosity_reduce(s, 64, R)
    assert chains.positions == [0]
    assert all(len(c) == 1 for c in chains.chains)


def test_too_short():
    with pytest.raises(InputTooShortError):
        numerosity_reduce(build_series(np.zeros((1, 10))), 64, R)


def test_alternating_blocks_match_naive(rng):
    l = 64
    raw = _blocks(l, 8, rng)[None, :]
    chains = numerosity_reduce(build_series(raw), l, R)
    assert chains.positions == naive.nr_scan(raw, l, R(l))
    # every block boundary region produces a recorded window
    for k in range(1, 7):
        assert any(k * l - l < p <= k * l for p in chains.positions)


def test_only_changing_dimension_drives(rng):
    l = 48
    raw = np.vstack([np.zeros(600), rng.normal(size=600).cumsum()])
    chains = numerosity_reduce(build_series(raw), l, R)
    assert chains.positions == naive.nr_scan(raw[1:], l, R(l))
    assert chains.positions == naive.nr_scan(raw, l, R(l))


def test_window_paa_matches_fast_sax(rng):
    s = build_series(rng.normal(size=(2, 900)).cumsum(axis=1))
    starts = np.array([0, 17, 400, 836])
    paa = window_paa(s, starts, 64, 32)
    for d in range(2):
        for k, p in enumerate(starts):
            want = fast_sax(s, SubseqRef(d, int(p), 64), SaxParams(32, 6)).paa
            assert np.allclose(paa[d, k], want, atol=1e-9)


def test_soundness_of_skips(rng):
    l = 40
    raw = rng.normal(size=(2, 1500)).cumsum(axis=1)
    s = build_series(raw)
    chains = numerosity_reduce(s, l, R)
    kept = set(chains.positions)
    params = SaxParams(32, 6)
    last = 0
    for p in range(1, 1500 - l + 1):
        if p in kept:
            last = p
            continue
        for d in range(2):
            a = fast_sax(s, SubseqRef(d, last, l), params)
            b = fast_sax(s, SubseqRef(d, p, l), params)
            assert paa_distance(a, b, l) <= 2 * R(l) + 1e-9


def _chains(rng, n=2000, l=40, d=2):
    return numerosity_reduce(build_series(rng.normal(size=(d, n)).cumsum(axis=1)), l, R)


def test_chain_alignment_and_edges(rng):
    chains = _chains(rng)
    assert all(a < b for a, b in zip(chains.positions, chains.positions[1:]))
    for d, chain in enumerate(chains.chains):
        assert [n.start for n in chain] == chains.positions
        for x in chain:
            assert not x.visited and not x.enumerated
            if x.next is not None:
                assert x.next.prev is x
            assert chains.pos_index[d][x.start] is x


def test_merge_examples():
    a = SeqNode(0, 0, 0, 0, 300)
    b = SeqNode(0, 1, 1, 120, 300)
    assert merge_nodes(None, 0, a, b) == SubseqRef(0, 0, 420)
    assert merge_nodes(None, 0, a, a) == a.subseq
    with pytest.raises(ContractError):
        merge_nodes(None, 0, a, SeqNode(1, 1, 1, 120, 300))


def test_merge_hull_random(rng):
    chains = _chains(rng)
    chain = chains.chains[1]
    for _ in range(50):
        i = int(rng.integers(0, len(chain) - 1))
        a, b = chain[i], chain[i + 1]
        ref = merge_nodes(chains, 1, a, b)
        assert (ref.start, ref.end) == (min(a.start, b.start), max(a.end, b.end))


def test_insert_over_three_nodes(rng):
    chains = _chains(rng)
    chain = chains.chains[0]
    n2, n4, n5 = chain[2], chain[4], chain[5]
    new = insert_node(chains, 0, merge_nodes(chains, 0, n2, n4), n2)
    assert new.next is n5
    assert new.prev is chain[1]
    assert (new.start, new.end) == (n2.start, n4.end)
    # originals keep their own edges and index entries
    assert n4.next is n5 and chain[1].next is n2
    assert chains.pos_index[0][n2.start] is n2


def test_insert_single_node(rng):
    chains = _chains(rng)
    n3 = chains.chains[1][3]
    new = insert_node(chains, 1, n3.subseq, n3)
    assert new is not n3 and new.next is n3.next
    assert (new.start, new.length) == (n3.start, n3.length)


def test_insert_errors(rng):
    chains = _chains(rng)
    n3 = chains.chains[1][3]
    with pytest.raises(ContractError):
        insert_node(chains, 0, n3.subseq, n3)
    pos = set(chains.positions)
    off = next(k for k in range(1, 1000) if n3.start + k not in pos)
    with pytest.raises(ContractError):
        insert_node(chains, 1, SubseqRef(1, n3.start, n3.length + off), n3)
    stranger = SeqNode(1, 3, 3, n3.start, n3.length, original=True)
    with pytest.raises(ContractError):
        insert_node(chains, 1, n3.subseq, stranger)


_SHARED = _chains(np.random.default_rng(7), n=800)


# inserts are idempotent per span, so one chain set serves every example
@given(st.lists(st.tuples(st.integers(0, 60), st.integers(0, 6)), min_size=1, max_size=40))
def test_traversal_order_after_inserts(ops):
    chains = _SHARED
    chain = chains.chains[0]
    m = len(chain)
    made = []
    for i, span in ops:
        i = i % m
        j = min(m - 1, i + span)
        made.append(insert_node(chains, 0, merge_nodes(chains, 0, chain[i], chain[j]), chain[i]))
    for start in made + [chain[0]]:
        x, seen = start, 0
        while x.next is not None and seen < 5 * m:
            assert x.next.start > x.start
            assert x.next.start >= x.end - chains.window
            x = x.next
            seen += 1
    for x in chain:
        if x.next is not None:
            assert x.next.prev is x
