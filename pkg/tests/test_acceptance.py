"""Acceptance criteria 1-9; each test prints one ``criterion N: PASS/FAIL`` line."""

import json
import statistics
import time

import numpy as np
import pytest

from chime.cli import main, mine
from chime.engine import EngineConfig, run_chime
from chime.io import RunConfig, write_series_csv
from chime.oracle import brute_force_oracle
from chime.postprocess import remove_false_positives
from chime.sax import SaxParams, fast_sax, paa_distance
from chime.series import SubseqRef, build_series
from chime.synth import PlantSpec, gen_random_walk, motif_scores, overlap_scores, planted_series

import naive
from helpers import worst_oracle_match

pytestmark = pytest.mark.slow


def test_criterion_1_fast_sax_equivalence(verdict):
    rng = np.random.default_rng(2024)
    raw = rng.normal(size=(3, 60_000)).cumsum(axis=1)
    s = build_series(raw)
    mismatches, fast_time = 0, 0.0
    for _ in range(10_000):
        n = int(rng.integers(300, 5001))
        w = int(rng.integers(4, 9))
        a = int(rng.integers(5, 16))
        d = int(rng.integers(3))
        p = int(rng.integers(0, 60_000 - n + 1))
        t0 = time.perf_counter()
        word = fast_sax(s, SubseqRef(d, p, n), SaxParams(w, a)).symbols
        fast_time += time.perf_counter() - t0
        mismatches += word != naive.sax(raw[d, p:p + n], w, a)
    ok = mismatches == 0 and fast_time < 30.0
    verdict("criterion 1", ok, f"{mismatches} mismatches, fast path {fast_time:.2f} s")
    assert ok


def test_criterion_2_paa_lower_bound(verdict):
    rng = np.random.default_rng(77)
    raw = rng.normal(size=(2, 40_000)).cumsum(axis=1)
    raw[1] = rng.normal(size=40_000) * rng.uniform(0.1, 10) + 5.0
    s = build_series(raw)
    worst, violations = -np.inf, 0
    for _ in range(10_000):
        n = int(rng.integers(8, 3001))
        w = int(rng.integers(1, min(n, 32) + 1))
        d = int(rng.integers(2))
        i, j = (int(x) for x in rng.integers(0, 40_000 - n + 1, 2))
        a, b = SubseqRef(d, i, n), SubseqRef(d, j, n)
        params = SaxParams(w, 6)
        lb = paa_distance(fast_sax(s, a, params), fast_sax(s, b, params), n)
        exact = naive.dist(raw[d, i:i + n], raw[d, j:j + n])
        worst = max(worst, lb - exact)
        violations += lb > exact + 1e-9
    verdict("criterion 2", violations == 0, f"{violations} violations, max lb - dist = {worst:.3g}")
    assert violations == 0


RECOVERY_LENGTHS = (1500, 2250, 3000)


@pytest.fixture(scope="module")
def recovery_runs():
    runs = []
    for L in RECOVERY_LENGTHS:
        for seed in range(10):
            series, (truth,) = planted_series(10, 100_000, [PlantSpec(L, 3, instance_count=10, seed=seed)], seed=seed)
            t0 = time.perf_counter()
            report, stats = mine(series, RunConfig())
            elapsed = time.perf_counter() - t0
            scores = overlap_scores(truth, report)
            bad = naive.verify_report_fast(series.values, report)
            runs.append({"L": L, "seed": seed, "scores": scores, "time": elapsed,
                         "ratio": stats["memory_ratio"], "motifs": len(report), "unsound": len(bad)})
            print(f"  L={L} seed={seed} scores={[round(x, 3) for x in scores]} "
                  f"t={elapsed:.1f}s ratio={stats['memory_ratio']} motifs={len(report)}", flush=True)
    return runs


def test_criterion_3_planted_recovery(recovery_runs, verdict):
    overall = statistics.median(r["scores"][2] for r in recovery_runs)
    len_ov = statistics.median(r["scores"][0] for r in recovery_runs)
    dim_ov = statistics.median(r["scores"][1] for r in recovery_runs)
    slowest = max(r["time"] for r in recovery_runs)
    per_length = {
        L: round(statistics.median(r["scores"][2] for r in recovery_runs if r["L"] == L), 3)
        for L in RECOVERY_LENGTHS
    }
    ok = overall >= 0.8 and len_ov >= 0.75 and dim_ov >= 0.75 and slowest < 120.0
    verdict("criterion 3", ok, f"median overall {overall:.3f}, len {len_ov:.3f}, dim {dim_ov:.3f}, "
                               f"per L {per_length}, slowest run {slowest:.1f} s")
    assert ok


def test_criterion_4_memory_ratio(recovery_runs, verdict):
    ratios = [r["ratio"] for r in recovery_runs]
    ok = all(x is not None and x <= 0.01 for x in ratios)
    worst = max((x for x in ratios if x is not None), default=None)
    verdict("criterion 4", ok, f"max ratio {worst}")
    assert ok


TINY = dict(n=1200, min_len=200, motif_len=300, instances=3, dims=3, relevant=2)


@pytest.fixture(scope="module")
def tiny_runs():
    runs = []
    for seed in range(20):
        spec = PlantSpec(TINY["motif_len"], TINY["relevant"], instance_count=TINY["instances"], seed=seed)
        series, (truth,) = planted_series(TINY["dims"], TINY["n"], [spec], seed=500 + seed)
        cfg = EngineConfig(min_len=TINY["min_len"])
        report = remove_false_positives(series, run_chime(series, cfg), cfg)
        oracle = brute_force_oracle(series, TINY["min_len"])
        runs.append({
            "seed": seed,
            "recovered": overlap_scores(truth, report)[2] >= 0.8,
            "worst": worst_oracle_match(report, oracle),
            "motifs": len(report),
            "unsound": len(naive.verify_report_fast(series.values, report)),
        })
    return runs


def test_criterion_6_oracle_agreement(tiny_runs, verdict):
    recovered = sum(r["recovered"] for r in tiny_runs)
    worst = min(r["worst"] for r in tiny_runs)
    ok = worst >= 0.8 and recovered >= 16
    verdict("criterion 6", ok, f"recovered {recovered}/20, worst motif-oracle overlap {worst:.3f}")
    assert ok


def test_criterion_7_scalability(verdict):
    mine(gen_random_walk(10, 20_000, 99), RunConfig())
    times = {}
    for n in (100_000, 200_000):
        series = gen_random_walk(10, n, 1)
        _, stats = mine(series, RunConfig(), timings=True)
        times[n] = (stats["t_enum_ms"] + stats["t_post_ms"]) / 1000.0
    growth = times[200_000] / times[100_000]
    ok = times[200_000] < 600.0 and growth < 4.0
    verdict("criterion 7", ok, f"100k {times[100_000]:.1f} s, 200k {times[200_000]:.1f} s, growth {growth:.2f}x")
    assert ok


@pytest.fixture(scope="module")
def varlen_runs():
    runs = []
    for seed in range(10):
        specs = [PlantSpec(200, 2, instance_count=5, seed=100 + seed),
                 PlantSpec(400, 3, instance_count=5, seed=200 + seed)]
        series, truths = planted_series(4, 8000, specs, seed=seed)
        cfg = EngineConfig(min_len=100)
        report = remove_false_positives(series, run_chime(series, cfg), cfg)
        found = []
        for truth in truths:
            best, best_len = None, 0.0
            for k, m in enumerate(report):
                if m.dims != truth.dims:
                    continue
                lo = motif_scores(truth, m.dims, [(i.start, i.length) for i in m.instances])[0]
                if lo > best_len:
                    best, best_len = k, lo
            found.append((best, best_len))
        ok = all(k is not None and lo >= 0.5 for k, lo in found) and found[0][0] != found[1][0]
        runs.append({"seed": seed, "ok": ok, "found": found, "motifs": len(report),
                     "unsound": len(naive.verify_report_fast(series.values, report))})
    return runs


def test_criterion_8_variable_lengths(varlen_runs, verdict):
    hits = sum(r["ok"] for r in varlen_runs)
    verdict("criterion 8", hits >= 8, f"{hits}/10 seeds report both motifs with exact dims")
    assert hits >= 8


def test_criterion_5_precision(recovery_runs, tiny_runs, varlen_runs, verdict):
    runs = recovery_runs + tiny_runs + varlen_runs
    unsound = sum(r["unsound"] for r in runs)
    checked = sum(r.get("motifs", 0) for r in runs)
    verdict("criterion 5", unsound == 0, f"{unsound} unsound motifs over {len(runs)} reports ({checked}+ motifs)")
    assert unsound == 0


def test_criterion_9_determinism(tmp_path, capsys, verdict):
    series, _ = planted_series(4, 30_000, [PlantSpec(900, 2, instance_count=5, seed=8)], seed=8)
    path = tmp_path / "in.csv"
    write_series_csv(path, series)
    outs = []
    out = tmp_path / "report.json"
    for _ in range(3):
        assert main(["mine", str(path), "--seed", "3", "-o", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] == outs[2] and len(json.loads(outs[0])["motifs"]) > 0
    verdict("criterion 9", ok, f"{len(outs)} runs, {len(outs[0])} bytes each")
    assert ok
