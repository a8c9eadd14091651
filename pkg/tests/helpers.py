"""Shared comparators for the CLI and acceptance tests."""

import numpy as np

from chime.synth import PlantTruth, motif_scores


def oracle_match(motif, oracle, slack=0.3):
    """Best overall overlap between ``motif`` and any oracle motif on the same dims near its instances."""
    spans = [(i.start, i.length) for i in motif.instances]
    if motif.dims not in oracle.subsets:
        return 0.0
    sub = oracle.subsets.index(motif.dims)
    cands = np.unique(np.concatenate([oracle.near(a, a + n) for a, n in spans]))
    keep = (oracle.sub_idx[cands] == sub) & (np.abs(oracle.length[cands] - motif.length) <= slack * motif.length)
    cands = cands[keep]
    # likely matches first so the early exit usually fires quickly
    starts = np.array([a for a, _ in spans])
    off = np.abs(oracle.seed[cands][:, None] - starts[None, :]).min(axis=1)
    cands = cands[np.lexsort((off, np.abs(oracle.length[cands] - motif.length)))]
    best = 0.0
    for k in cands.tolist():
        lk = int(oracle.length[k])
        # same dims, so overall = sqrt(len overlap) <= sqrt(shorter / longer)
        if (min(lk, motif.length) / max(lk, motif.length)) ** 0.5 <= best:
            continue
        om = oracle[k]
        ref = PlantTruth([(i.start, i.length) for i in om.instances], om.dims, 0)
        best = max(best, motif_scores(ref, motif.dims, spans)[2])
        if best >= 0.999:
            break
    return best


def worst_oracle_match(report, oracle):
    return min((oracle_match(m, oracle) for m in report), default=1.0)
