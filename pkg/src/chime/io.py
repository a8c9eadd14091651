"""CSV ingestion, run configuration and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .engine import BACKENDS, EngineConfig
from .postprocess import Instance, Motif, MotifReport
from .sax import SaxParams
from .series import IngestionError, MultiSeries, SubdimSubseq, build_series
from .threshold import Threshold

FORMATS = ("json", "csv")
CSV_FIELDS = ("motif", "rank", "dims", "len", "seed", "best_pair_distance", "start", "inst_len", "dist")


def ingest_csv(path, delimiter: str = ",", header: bool = False) -> MultiSeries:
    """Read a CSV/TSV file with one row per time point and one column per dimension.

    Raises :class:`IngestionError` naming the 1-based row and column of the
    first bad cell, for ragged rows and on an empty file.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    first_row = 1
    if header and rows:
        rows = rows[1:]
        first_row = 2
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise IngestionError(
                f"{path}: row {i + first_row} has {len(row)} columns, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise IngestionError(
                    f"{path}: row {i + first_row}, column {j + 1}: bad value {cell.strip()!r}"
                )
            data[i, j] = v
    return build_series(data.T)


def write_series_csv(path, series: MultiSeries, delimiter: str = ",", header: bool = False) -> None:
    """Write a series in the layout :func:`ingest_csv` reads; floats round-trip exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if header:
            w.writerow([f"d{d}" for d in range(series.n_dims)])
        for row in series.values.T:
            w.writerow([repr(float(v)) for v in row])


@dataclass
class RunConfig:
    input: Optional[str] = None
    min_len: int = 300
    coefficient: float = 0.02
    w: int = 5
    a: int = 6
    nr_w: int = 32
    length_band_ratio: float = 0.15
    seed: int = 0
    output: Optional[str] = None
    format: str = "json"
    delimiter: str = ","
    header: bool = False
    backend: str = "auto"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.min_len < 2:
            raise ValueError(f"min_len must be >= 2, got {self.min_len}")
        # range checks on the rest
        self.engine_config()

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            min_len=self.min_len,
            sax=SaxParams(self.w, self.a),
            threshold=Threshold(self.coefficient),
            length_band_ratio=self.length_band_ratio,
            nr_w=self.nr_w,
            backend=self.backend,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def motif_to_dict(m: Motif) -> dict:
    return {
        "dims": list(m.dims),
        "len": m.length,
        "seed": m.seed.start,
        "instances": [{"start": i.start, "len": i.length, "dist": i.distance} for i in m.instances],
        "best_pair_distance": m.best_pair_distance,
        "rank": m.rank,
    }


def report_to_dict(report, config: Optional[dict] = None, stats: Optional[dict] = None) -> dict:
    return {
        "config": config or {},
        "stats": stats or {},
        "motifs": [motif_to_dict(m) for m in report],
    }


def report_to_csv(report, stats: Optional[dict] = None) -> str:
    """One row per motif instance; the stats block is carried on ``#`` comment lines."""
    buf = io.StringIO()
    for k, v in sorted((stats or {}).items()):
        buf.write(f"# {k}={json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for k, m in enumerate(report):
        dims = ";".join(str(d) for d in m.dims)
        for inst in m.instances:
            w.writerow([k, m.rank, dims, m.length, m.seed.start, repr(m.best_pair_distance),
                        inst.start, inst.length, repr(inst.distance)])
    return buf.getvalue()


def _motif_from_dict(d: dict) -> Motif:
    dims = tuple(int(x) for x in d["dims"])
    L = int(d["len"])
    instances = tuple(
        Instance(SubdimSubseq(dims, int(i["start"]), int(i["len"])), float(i["dist"]))
        for i in d["instances"]
    )
    seed = int(d.get("seed", instances[0].start if instances else 0))
    return Motif(dims, L, SubdimSubseq(dims, seed, L), instances,
                 float(d["best_pair_distance"]), "", int(d.get("rank", 0)))


def report_from_dict(data: dict) -> MotifReport:
    return MotifReport([_motif_from_dict(m) for m in data.get("motifs", [])])


def report_from_csv(text: str) -> MotifReport:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    grouped: dict = {}
    for row in csv.DictReader(lines):
        k = int(row["motif"])
        g = grouped.setdefault(k, {
            "dims": [int(x) for x in row["dims"].split(";")],
            "len": int(row["len"]),
            "best_pair_distance": float(row["best_pair_distance"]),
            "rank": int(row["rank"]),
            "seed": int(row["seed"]),
            "instances": [],
        })
        g["instances"].append({"start": int(row["start"]), "len": int(row["inst_len"]),
                               "dist": float(row["dist"])})
    return MotifReport([_motif_from_dict(grouped[k]) for k in sorted(grouped)])


def load_report(path) -> MotifReport:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return report_from_dict(json.loads(text))
    return report_from_csv(text)

