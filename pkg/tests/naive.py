"""Direct, slow reference implementations used as test oracles.

Nothing here touches prefix sums or the package's distance code.
"""

import math
from statistics import NormalDist

import numpy as np


def znorm(x):
    x = np.asarray(x, dtype=float)
    if np.all(x == x[0]):
        return np.zeros(len(x))
    mu = x.mean()
    sd = x.std(ddof=1)
    if sd == 0:
        return np.zeros(len(x))
    return (x - mu) / sd


def dist(x, y):
    return float(np.sqrt(np.sum((znorm(x) - znorm(y)) ** 2)))


def subdim_dist(values, dims, s1, s2, length):
    return float(np.mean([dist(values[d, s1:s1 + length], values[d, s2:s2 + length]) for d in dims]))


def cuts(a):
    nd = NormalDist()
    return [nd.inv_cdf(i / a) for i in range(1, a)]


def paa(x, w):
    z = znorm(x)
    n = len(z)
    return [float(np.mean(z[(i * n) // w:((i + 1) * n) // w])) for i in range(w)]


def sax(x, w, a):
    c = cuts(a)
    return tuple(sum(1 for b in c if v >= b) for v in paa(x, w))


def paa_lb(x, y, w):
    """sqrt(L/w)-scaled PAA distance with segment widths as weights."""
    n = len(x)
    px, py = paa(x, w), paa(y, w)
    widths = [((i + 1) * n) // w - (i * n) // w for i in range(w)]
    return math.sqrt(sum(wd * (p - q) ** 2 for wd, p, q in zip(widths, px, py)))


def nr_scan(values, l, radius, nr_w=32):
    """Recorded window starts by a plain left-to-right rescan."""
    n_dims, n = values.shape
    positions = [0]
    ref = [paa(values[d, 0:l], nr_w) for d in range(n_dims)]
    limit = 2.0 * radius
    widths = [((i + 1) * l) // nr_w - (i * l) // nr_w for i in range(nr_w)]
    for p in range(1, n - l + 1):
        cur = [paa(values[d, p:p + l], nr_w) for d in range(n_dims)]
        far = False
        for d in range(n_dims):
            dd = math.sqrt(sum(wd * (u - v) ** 2 for wd, u, v in zip(widths, cur[d], ref[d])))
            if dd > limit:
                far = True
        if far:
            positions.append(p)
            ref = cur
    return positions


def verify_motif(values, motif, coefficient=0.02, tol=1e-6):
    """Re-check one reported motif; returns a list of violated properties (empty when sound)."""
    problems = []
    dims, L = tuple(motif.dims), motif.length
    n = values.shape[1]
    radius = coefficient * L
    starts = [i.start for i in motif.instances]
    if len(starts) < 2:
        problems.append("fewer than two instances")
    if motif.seed.start not in starts:
        problems.append("seed is not an instance")
    for inst in motif.instances:
        if inst.length != L or inst.start < 0 or inst.start + L > n:
            problems.append(f"instance {inst.start} has bad extent")
            continue
        d = subdim_dist(values, dims, motif.seed.start, inst.start, L)
        if not d < radius:
            problems.append(f"instance {inst.start} at {d} >= R={radius}")
        if abs(d - inst.distance) > tol * max(1.0, d):
            problems.append(f"instance {inst.start} reported {inst.distance}, naive {d}")
    ordered = sorted(starts)
    for a, b in zip(ordered, ordered[1:]):
        if a + L > b:
            problems.append(f"instances {a} and {b} overlap")
    best = min(
        subdim_dist(values, dims, ordered[i], ordered[j], L)
        for i in range(len(ordered)) for j in range(i + 1, len(ordered))
    ) if len(ordered) >= 2 else math.inf
    if abs(best - motif.best_pair_distance) > tol * max(1.0, best):
        problems.append(f"best pair reported {motif.best_pair_distance}, naive {best}")
    return problems


def verify_report_fast(values, report, coefficient=0.02, tol=1e-6):
    """Vectorized form of :func:`verify_motif` for large reports; still independent of the package."""
    bad = []
    for m in report:
        dims, L = list(m.dims), m.length
        starts = np.array([i.start for i in m.instances])
        if len(starts) < 2 or m.seed.start not in starts.tolist():
            bad.append((m, "seed or size"))
            continue
        if np.any(starts < 0) or starts.max() + L > values.shape[1]:
            bad.append((m, "extent"))
            continue
        if any(i.length != L for i in m.instances):
            bad.append((m, "length"))
            continue
        srt = np.sort(starts)
        if np.any(srt[1:] < srt[:-1] + L):
            bad.append((m, "overlap"))
            continue
        idx = starts[:, None] + np.arange(L)
        total = np.zeros((len(starts), len(starts)))
        for d in dims:
            win = values[d][idx]
            flat = np.all(win == win[:, :1], axis=1)
            mu = win.mean(axis=1, keepdims=True)
            sd = win.std(axis=1, ddof=1, keepdims=True)
            z = np.where(flat[:, None], 0.0, (win - mu) / np.where(sd == 0, 1.0, sd))
            diff = z[:, None, :] - z[None, :, :]
            total += np.sqrt((diff * diff).sum(axis=2))
        total /= len(dims)
        k = int(np.flatnonzero(starts == m.seed.start)[0])
        to_seed = total[k]
        if not np.all(to_seed < coefficient * L):
            bad.append((m, f"distance {to_seed.max()} >= R={coefficient * L}"))
            continue
        rep = np.array([i.distance for i in m.instances])
        if np.any(np.abs(rep - to_seed) > tol * np.maximum(1.0, to_seed)):
            bad.append((m, "reported distance mismatch"))
            continue
        best = total[np.triu_indices(len(starts), 1)].min()
        if abs(best - m.best_pair_distance) > tol * max(1.0, best):
            bad.append((m, "best pair mismatch"))
    return bad
