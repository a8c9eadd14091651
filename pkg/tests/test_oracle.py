import numpy as np
import pytest

from chime.oracle import OracleGuardError, brute_force_oracle, dim_subsets, oracle_cost
from chime.postprocess import MotifReport
from chime.series import build_series
from chime.synth import PlantSpec, planted_series

import naive


def _znorm_windows(x, L):
    idx = np.arange(len(x) - L + 1)[:, None] + np.arange(L)
    win = x[idx]
    flat = np.all(win == win[:, :1], axis=1)
    sd = win.std(axis=1, ddof=1, keepdims=True)
    z = np.where(flat[:, None], 0.0, (win - win.mean(axis=1, keepdims=True)) / np.where(sd == 0, 1, sd))
    return z, flat


def _expected_instances(values, dims, L, seed, coef=0.02):
    """Closest-first non-overlapping selection of every window within R of the seed."""
    total = 0.0
    flat_any = np.zeros(values.shape[1] - L + 1, bool)
    for d in dims:
        z, flat = _znorm_windows(values[d], L)
        total = total + np.sqrt(((z - z[seed]) ** 2).sum(axis=1))
        flat_any |= flat
    total = total / len(dims)
    cand = [p for p in np.flatnonzero((total < coef * L) & ~flat_any)]
    cand.sort(key=lambda p: (total[p], p))
    kept = []
    for p in cand:
        if all(p + L <= k or k + L <= p for k in kept):
            kept.append(int(p))
    return sorted(kept), total


def test_constant_series_empty():
    assert len(brute_force_oracle(build_series(np.full((2, 400), 3.0)), 100)) == 0


def test_guard_refuses():
    s = build_series(np.random.default_rng(0).normal(size=(2, 3000)).cumsum(axis=1))
    assert oracle_cost(3000, 2, 100) > 12_000_000_000
    with pytest.raises(OracleGuardError):
        brute_force_oracle(s, 100)
    with pytest.raises(OracleGuardError):
        brute_force_oracle(build_series(np.zeros((5, 50))), 10)


def test_no_lengths_in_range():
    s = build_series(np.random.default_rng(0).normal(size=(1, 100)).cumsum(axis=1))
    assert len(brute_force_oracle(s, 60)) == 0


def test_planted_pair_exact_span():
    series, (truth,) = planted_series(1, 1200, [PlantSpec(400, 1, instance_count=2, seed=4)], seed=4)
    rep = brute_force_oracle(series, 300)
    want = [s for s, _ in truth.spans]
    hits = [m for m in rep if m.length == 400 and [i.start for i in m.instances] == want]
    assert hits
    for m in hits:
        assert naive.verify_motif(series.values, m) == []


@pytest.fixture(scope="module")
def small():
    series, _ = planted_series(2, 700, [PlantSpec(150, 2, instance_count=3, seed=1)], seed=11)
    return series, brute_force_oracle(series, 100)


def test_every_motif_sound(small):
    series, rep = small
    r = np.random.default_rng(0)
    for k in r.choice(len(rep), min(300, len(rep)), replace=False):
        assert naive.verify_motif(series.values, rep[int(k)]) == []


def test_instance_sets_are_complete(small):
    # perturbation spot-check: nothing the oracle left out could be added back
    series, rep = small
    r = np.random.default_rng(1)
    for k in r.choice(len(rep), min(150, len(rep)), replace=False):
        m = rep[int(k)]
        kept, total = _expected_instances(series.values, m.dims, m.length, m.seed.start)
        got = [i.start for i in m.instances]
        assert got == kept
        for p in r.integers(0, series.length - m.length + 1, 20):
            if int(p) in got:
                continue
            blocked = any(int(p) < g + m.length and g < int(p) + m.length for g in got)
            assert blocked or total[p] >= 0.02 * m.length


def test_all_seeds_and_subsets_searched(small):
    series, rep = small
    subsets = set(dim_subsets(2))
    assert {m.dims for m in rep} <= subsets
    # every seed with at least one admissible partner yields a motif
    L = 150
    for dims in subsets:
        seeds = {m.seed.start for m in rep if m.dims == dims and m.length == L}
        for p in range(0, series.length - L + 1, 37):
            kept, _ = _expected_instances(series.values, dims, L, p)
            assert (len(kept) >= 2 and p in kept) == (p in seeds)


def test_ranking_matches_report_order(small):
    _, rep = small
    ms = rep.motifs
    ranked = MotifReport.from_motifs(ms).motifs
    assert [(m.dims, m.length, m.seed.start, m.rank) for m in ms] == \
        [(m.dims, m.length, m.seed.start, m.rank) for m in ranked]


def test_near_index(small):
    _, rep = small
    idx = rep.near(200, 260)
    for k in idx:
        m = rep[int(k)]
        assert m.seed.start < 260 and 200 < m.seed.end
