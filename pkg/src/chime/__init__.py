"""Approximate discovery of variable-length subdimensional motifs in multivariate time series."""

from .engine import ChimeEngine, EngineConfig, MotifCandidateSet, SaxTable, run_chime
from .io import RunConfig, ingest_csv, write_series_csv
from .oracle import OracleGuardError, brute_force_oracle
from .postprocess import Motif, MotifReport, enumeration_ranges, remove_false_positives
from .reduction import ChainSet, SeqNode, numerosity_reduce
from .sax import SaxParams, SaxWord, breakpoints, fast_sax, paa_distance
from .series import MultiSeries, SubdimSubseq, SubseqRef, build_series, mean_std, subdim_avg_distance, znorm_euclidean
from .synth import PlantSpec, PlantTruth, gen_random_walk, memory_ratio, overlap_scores, plant_motifs, planted_series
from .threshold import Threshold, threshold_fn

__all__ = [
    "ChainSet", "ChimeEngine", "EngineConfig", "Motif", "MotifCandidateSet", "MotifReport",
    "MultiSeries", "OracleGuardError", "PlantSpec", "PlantTruth", "RunConfig", "SaxParams",
    "SaxTable", "SaxWord", "SeqNode", "SubdimSubseq", "SubseqRef", "Threshold", "breakpoints",
    "brute_force_oracle", "build_series", "enumeration_ranges", "fast_sax", "gen_random_walk",
    "ingest_csv", "mean_std", "memory_ratio", "numerosity_reduce", "overlap_scores",
    "paa_distance", "plant_motifs", "planted_series", "remove_false_positives", "run_chime",
    "subdim_avg_distance", "threshold_fn", "write_series_csv", "znorm_euclidean",
]
