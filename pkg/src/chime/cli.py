"""Command-line front end: ``chime mine | plant | eval | oracle | bench``.

Exit codes: 0 success, 1 unexpected failure, 2 usage error, 3 bad input or
parameters, 4 oracle refused by its cost guard.  Diagnostics go to stderr;
set ``CHIME_LOG_LEVEL`` (DEBUG, INFO, WARNING, ...) for more of them.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import fields
from typing import List, Optional, Sequence

import numpy as np

from .engine import BACKENDS, run_chime
from .io import (
    FORMATS, RunConfig, dumps, ingest_csv, load_report, report_to_csv, report_to_dict,
    write_series_csv,
)
from .oracle import OracleGuardError, brute_force_oracle
from .postprocess import enumeration_ranges, remove_false_positives
from .reduction import InputTooShortError
from .sax import ParameterError
from .series import ContractError, IngestionError, StructureError, build_series
from .synth import PlacementError, PlantSpec, PlantTruth, gen_random_walk, overlap_scores, memory_ratio, plant_motifs

log = logging.getLogger("chime")

EXIT_OK = 0
EXIT_CRASH = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_GUARD = 4

INPUT_ERRORS = (
    IngestionError, StructureError, ContractError, ParameterError, InputTooShortError,
    PlacementError, ValueError, OSError, KeyError,
)


def _setup_logging() -> None:
    level = os.environ.get("CHIME_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_config(args) -> RunConfig:
    base = RunConfig.load(args.config).to_dict() if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            base[f.name] = v
    return RunConfig.from_dict(base)


def mine(series, cfg: RunConfig, timings: bool = False):
    """Mine ``series`` and return (report, stats dict)."""
    ec = cfg.engine_config()
    t0 = time.perf_counter()
    candidates = run_chime(series, ec)
    t1 = time.perf_counter()
    report = remove_false_positives(series, candidates, ec)
    t2 = time.perf_counter()
    length_range, dim_range = enumeration_ranges(report)
    st = candidates.stats
    stats = {
        "length_range": length_range,
        "dim_range": dim_range,
        "memory_ratio": memory_ratio(st, length_range),
        "tracked": st.tracked,
        "reduced_windows": st.reduced_windows,
        "candidates": st.candidates,
        "matches": st.matches,
        "t_enum_ms": round((t1 - t0) * 1000.0, 3) if timings else None,
        "t_post_ms": round((t2 - t1) * 1000.0, 3) if timings else None,
    }
    log.info("mined %d motifs from %d candidates in %.1f s", len(report), len(candidates), t2 - t0)
    return report, stats


def cmd_mine(args) -> int:
    cfg = _run_config(args)
    if cfg.input is None:
        raise ValueError("no input file given (positional argument or 'input' in --config)")
    if args.save_config:
        cfg.dump(args.save_config)
    series = ingest_csv(cfg.input, cfg.delimiter, cfg.header)
    report, stats = mine(series, cfg, args.timings)
    if cfg.format == "json":
        text = dumps(report_to_dict(report, cfg.to_dict(), stats))
    else:
        text = report_to_csv(report, stats)
    _write(text, cfg.output)
    return EXIT_OK


def _pairs(values: Sequence[int], n: int, name: str) -> List[int]:
    if len(values) == 1:
        return list(values) * n
    if len(values) != n:
        raise ValueError(f"--{name} needs 1 or {n} values, got {len(values)}")
    return list(values)


def cmd_plant(args) -> int:
    rng_walk = gen_random_walk(args.dims, args.length, args.seed)
    values = np.array(rng_walk.values)
    n = len(args.motif_len)
    rel = _pairs(args.relevant_dims, n, "relevant-dims")
    truths, taken = [], []
    for k, (L, r) in enumerate(zip(args.motif_len, rel)):
        spec = PlantSpec(L, r, instance_count=args.instances, noise_pct=args.noise, seed=args.seed * 1009 + k)
        truth = plant_motifs(values, spec, exclude=taken)
        taken += [(s, s + m) for s, m in truth.spans]
        truths.append(truth)
    write_series_csv(args.output, build_series(values), args.delimiter, args.header)
    data = truths[0].to_dict() if n == 1 else [t.to_dict() for t in truths]
    with open(args.truth, "w") as fh:
        fh.write(dumps(data))
    log.info("planted %d motif(s) into %s", n, args.output)
    return EXIT_OK


def _load_truths(path) -> List[PlantTruth]:
    with open(path) as fh:
        data = json.load(fh)
    items = data if isinstance(data, list) else [data]
    return [PlantTruth.from_dict(d) for d in items]


def cmd_eval(args) -> int:
    truths = _load_truths(args.truth)
    report = load_report(args.report)
    out = []
    for t in truths:
        len_ov, dim_ov, overall = overlap_scores(t, report)
        out.append({"len_overlap": len_ov, "dim_overlap": dim_ov, "overall": overall})
    _write(dumps(out[0] if len(out) == 1 else out), args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    series = ingest_csv(args.input, args.delimiter, args.header)
    t0 = time.perf_counter()
    report = brute_force_oracle(series, args.min_len, args.coefficient, args.max_cost, args.max_len)
    t1 = time.perf_counter()
    length_range = len(set(report.length.tolist()))
    dim_range = len({len(report.subsets[i]) for i in set(report.sub_idx.tolist())})
    stats = {
        "length_range": length_range,
        "dim_range": dim_range,
        "t_oracle_ms": round((t1 - t0) * 1000.0, 3) if args.timings else None,
    }
    config = {"input": args.input, "min_len": args.min_len, "coefficient": args.coefficient,
              "max_len": args.max_len}
    if args.format == "json":
        text = dumps(report_to_dict(report, config, stats))
    else:
        text = report_to_csv(report, stats)
    _write(text, args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .synth import planted_series

    cfg = RunConfig(min_len=args.min_len, backend=args.backend)
    rows = []
    for n in args.length:
        if args.motif_len:
            spec = PlantSpec(args.motif_len, args.relevant_dims, instance_count=args.instances, seed=args.seed)
            series, truths = planted_series(args.dims, n, [spec], seed=args.seed)
        else:
            series, truths = gen_random_walk(args.dims, n, args.seed), []
        report, stats = mine(series, cfg, timings=True)
        row = {"n": n, "dims": args.dims, "motifs": len(report), **stats}
        if truths:
            row["scores"] = list(overlap_scores(truths[0], report))
        rows.append(row)
        log.info("bench N=%d: %.0f ms", n, stats["t_enum_ms"] + stats["t_post_ms"])
    _write(dumps(rows), args.output)
    return EXIT_OK


def _ingest_opts(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    p.add_argument("--delimiter", default="," if defaults else None, help="field delimiter (default ',')")
    p.add_argument("--header", action="store_true", default=False if defaults else None,
                   help="first row is a header")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chime", description="Variable-length subdimensional motif discovery.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="discover motifs in a CSV series")
    p.add_argument("input", nargs="?", default=None, help="CSV file, rows are time points")
    p.add_argument("--config", help="JSON run configuration; flags override it")
    p.add_argument("--save-config", help="write the resolved configuration here")
    p.add_argument("--min-len", dest="min_len", type=int)
    p.add_argument("--coefficient", type=float, help="threshold R(L) = coefficient * L")
    p.add_argument("-w", dest="w", type=int, help="SAX word length")
    p.add_argument("-a", dest="a", type=int, help="SAX alphabet size")
    p.add_argument("--nr-w", dest="nr_w", type=int, help="PAA size used for numerosity reduction")
    p.add_argument("--band", dest="length_band_ratio", type=float, help="relative length band")
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the stats")
    _ingest_opts(p, defaults=False)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("plant", help="generate a random walk with planted motifs")
    p.add_argument("--dims", type=int, default=10)
    p.add_argument("--length", type=int, default=100_000)
    p.add_argument("--motif-len", type=int, nargs="+", default=[1500])
    p.add_argument("--relevant-dims", type=int, nargs="+", default=[3])
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="series CSV to write")
    p.add_argument("--truth", required=True, help="truth JSON to write")
    _ingest_opts(p)
    p.set_defaults(func=cmd_plant)

    p = sub.add_parser("eval", help="score a report against planted truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="exhaustive motif search for small inputs")
    p.add_argument("input")
    p.add_argument("--min-len", type=int, default=300)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--coefficient", type=float, default=0.02)
    p.add_argument("--max-cost", type=float, default=12e9, help="refuse runs above this many pair evaluations")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--timings", action="store_true")
    _ingest_opts(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time mining on generated random walks")
    p.add_argument("--dims", type=int, default=10)
    p.add_argument("--length", type=int, nargs="+", default=[100_000, 200_000])
    p.add_argument("--min-len", type=int, default=300)
    p.add_argument("--motif-len", type=int, default=0, help="plant one motif of this length (0: none)")
    p.add_argument("--relevant-dims", type=int, default=3)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=BACKENDS, default="auto")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except OracleGuardError as exc:
        log.error("oracle refused: %s", exc)
        return EXIT_GUARD
    except INPUT_ERRORS as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except Exception:
        log.exception("unexpected failure")
        return EXIT_CRASH


if __name__ == "__main__":
    sys.exit(main())
