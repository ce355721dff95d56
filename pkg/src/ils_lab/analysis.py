"""Spatial-structure diagnostics for ring trajectories.

Covers the time-averaged local incoherence of the x profile, detection
of cluster boundaries (jumps in an instantaneous profile), extraction of
the low-sensitivity / high-sensitivity regions used by the noise
experiments, and the decay-time measurement for localized perturbations.

Oscillator indices are 0-based everywhere in this module; serialization
to files converts to 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lyapunov import IlsProfile


@dataclass
class IncoherenceProfile:
    """Time-averaged squared discrete curvature of the x profile.

    delta_i[i] = < (2 x_i - x_{i+1} - x_{i-1})^2 >  over the sampled
    window, with circular neighbors.  Zero exactly on spatially constant
    profiles and invariant under adding a constant offset per sample.
    """

    delta_i: np.ndarray
    t_window: tuple
    sample_stride: float

    def __post_init__(self):
        if np.any(self.delta_i < 0):
            raise ValueError("delta_i must be nonnegative")


def curvature_sq(x_rows: np.ndarray) -> np.ndarray:
    """(2 x_i - x_{i+1} - x_{i-1})^2 per sample row, circular neighbors."""
    d = 2.0 * x_rows - np.roll(x_rows, -1, axis=-1) - np.roll(x_rows, 1, axis=-1)
    return d * d


def incoherence_profile(times, x_rows, window=None,
                        sample_stride: float = 0.0) -> IncoherenceProfile:
    """Average the squared curvature of stored x-profile rows over a window.

    times is (M,), x_rows is (M, N); window=(lo, hi) selects the samples
    with lo <= t <= hi (all samples when None).  Raises on an empty
    window.
    """
    times = np.asarray(times, dtype=float)
    x_rows = np.asarray(x_rows, dtype=float)
    if window is not None:
        lo, hi = window
        keep = (times >= lo) & (times <= hi)
        times, x_rows = times[keep], x_rows[keep]
    else:
        window = (float(times[0]), float(times[-1])) if times.size else (0.0, 0.0)
    if x_rows.shape[0] == 0:
        raise ValueError("no samples in the averaging window")
    delta = curvature_sq(x_rows).mean(axis=0)
    return IncoherenceProfile(delta, (float(window[0]), float(window[1])),
                              sample_stride)


def incoherence_from_sums(delta_sum, count, window, sample_stride) -> IncoherenceProfile:
    """Build the profile from a streaming accumulation (sum and count)."""
    if count <= 0:
        raise ValueError("no samples in the averaging window")
    return IncoherenceProfile(np.asarray(delta_sum) / count, window, sample_stride)


def detect_boundaries(x, jump_threshold: float | None = None) -> np.ndarray:
    """Indices i (0-based) where |x_{i+1} - x_i| exceeds the threshold, circular.

    A returned index i marks a jump between oscillators i and i+1.  The
    default threshold is 5 times the median absolute increment of the
    profile, so a smooth profile yields no boundaries and a perfectly
    constant one (median 0) yields none either because the comparison is
    strict.
    """
    x = np.asarray(getattr(x, "x", x), dtype=float)
    jumps = np.abs(np.roll(x, -1) - x)
    if jump_threshold is None:
        jump_threshold = 5.0 * np.median(jumps)
    return np.flatnonzero(jumps > jump_threshold)


def boundary_zones(x, jump_threshold=None, gap: int = 5) -> np.ndarray:
    """Boundary positions after merging adjacent detections into zones.

    A cluster boundary usually trips the jump threshold at several
    neighboring links at once, so raw detections come in short bursts.
    Detections closer than `gap` (circularly) are merged and each zone
    is represented by its largest-jump link.  Returns 0-based positions,
    sorted.
    """
    x = np.asarray(getattr(x, "x", x), dtype=float)
    n = x.shape[0]
    det = detect_boundaries(x, jump_threshold)
    if det.size == 0:
        return det
    jumps = np.abs(np.roll(x, -1) - x)
    groups = [[int(det[0])]]
    for i in det[1:]:
        if i - groups[-1][-1] <= gap:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    if len(groups) > 1 and det[0] + n - groups[-1][-1] <= gap:
        groups[0] = groups.pop() + groups[0]
    peaks = sorted(max(g, key=lambda i: jumps[i]) for g in groups)
    return np.asarray(peaks, dtype=int)


def stable_boundaries(snapshots, n_boundaries: int = 2, jump_threshold=None,
                      match_radius: int = 5, min_agree: int = 7):
    """Consensus boundary positions over consecutive snapshots, or None.

    The instantaneous jump at a cluster boundary periodically shrinks
    when the two clusters cross in x, so single-snapshot detection
    flickers.  A run qualifies when at least min_agree snapshots see
    exactly n_boundaries zones and the positions agree within
    match_radius (circularly) with some reference snapshot.  Returns the
    reference positions (0-based) or None.
    """
    n = np.asarray(getattr(snapshots[0], "x", snapshots[0])).shape[0]
    sets = [boundary_zones(s, jump_threshold) for s in snapshots]
    hits = [b for b in sets if b.size == n_boundaries]
    for ref in hits:
        agree = 0
        for b in hits:
            d = np.abs(b[:, None] - ref[None, :])
            d = np.minimum(d, n - d)
            if d.min(axis=1).max() <= match_radius:
                agree += 1
        if agree >= min_agree:
            return ref
    return None


@dataclass(frozen=True)
class RegionSpec:
    """Contiguous circular index interval [lo, hi], 0-based inclusive.

    hi < lo means the interval wraps around the ring end.  label is "I"
    (low sensitivity) or "II" (high sensitivity).
    """

    label: str
    lo: int
    hi: int
    n: int

    @property
    def indices(self):
        if self.lo <= self.hi:
            return np.arange(self.lo, self.hi + 1)
        return np.concatenate([np.arange(self.lo, self.n), np.arange(0, self.hi + 1)])

    @property
    def size(self):
        return (self.hi - self.lo) % self.n + 1

    @property
    def center(self):
        return (self.lo + (self.size - 1) // 2) % self.n

    def contains(self, i):
        if self.lo <= self.hi:
            return self.lo <= i <= self.hi
        return i >= self.lo or i <= self.hi


def _circular_runs(mask):
    """Maximal runs of True in a circular boolean array as (start, stop) pairs."""
    n = mask.size
    if mask.all():
        return [(0, n - 1)]
    if not mask.any():
        return []
    # rotate so position 0 is False, find runs, rotate back
    off = int(np.flatnonzero(~mask)[0])
    rot = np.roll(mask, -off)
    d = np.diff(rot.astype(int))
    starts = list(np.flatnonzero(d == 1) + 1)
    stops = list(np.flatnonzero(d == -1))
    if len(stops) < len(starts):  # final run reaches the array end
        stops.append(n - 1)
    return [(int((s + off) % n), int((e + off) % n))
            for s, e in zip(starts, stops)]


def extract_regions(ils: IlsProfile, boundaries, lambda_max: float):
    """Low / high sensitivity regions of the profile.

    Region I is the longest contiguous circular run of indices with
    lambda_i strictly below the full-vector rate that contains a
    detected boundary; region II is the longest run with lambda_i
    strictly above lambda_max.  Either may be absent (None): ties at
    equality never qualify, and a profile without the corresponding
    excursion simply lacks that region.
    """
    lam = ils.lambda_i
    n = lam.shape[0]
    boundaries = np.asarray(boundaries, dtype=int)

    low_runs = _circular_runs(lam < ils.lambda_full)
    region1 = None
    best = -1
    for lo, hi in low_runs:
        spec = RegionSpec("I", lo, hi, n)
        if any(spec.contains(b) for b in boundaries) and spec.size > best:
            best = spec.size
            region1 = spec

    high_runs = _circular_runs(lam > lambda_max)
    region2 = None
    best = -1
    for lo, hi in high_runs:
        spec = RegionSpec("II", lo, hi, n)
        if spec.size > best:
            best = spec.size
            region2 = spec

    return region1, region2


@dataclass
class TrajectorySamples:
    """Trajectory sampled at a fixed stride: times (M,) and xyz (M, 3, N)."""

    times: np.ndarray
    xyz: np.ndarray

    @property
    def x(self):
        return self.xyz[:, 0, :]


@dataclass
class PersistenceResult:
    decay_time: float
    no_decay: bool
    horizon: float


def region_distance(reference: TrajectorySamples, perturbed: TrajectorySamples,
                    region: RegionSpec) -> np.ndarray:
    """Per-sample max over the region of the per-oscillator state distance."""
    if reference.xyz.shape != perturbed.xyz.shape:
        raise ValueError("runs must share sampling")
    idx = region.indices
    d = reference.xyz[:, :, idx] - perturbed.xyz[:, :, idx]
    return np.sqrt((d * d).sum(axis=1)).max(axis=1)


def perturbation_persistence(reference: TrajectorySamples,
                             perturbed: TrajectorySamples,
                             region: RegionSpec, threshold: float,
                             quiet_window: float = 60.0) -> PersistenceResult:
    """First time after which the runs agree on the region for a full quiet window.

    decay_time is the earliest sample time tau such that the region
    distance stays at or below `threshold` for every sample in
    [tau, tau + quiet_window] (the window must fit inside the run).  If
    no such time exists the result carries the run horizon and the
    no_decay flag.  Symmetric in the two runs.
    """
    dist = region_distance(reference, perturbed, region)
    times = reference.times
    horizon = float(times[-1])
    below = dist <= threshold
    m = times.size
    # first index >= k whose distance is above threshold (m when none)
    next_above = np.full(m + 1, m)
    for k in range(m - 1, -1, -1):
        next_above[k] = k if not below[k] else next_above[k + 1]
    for k in range(m):
        if not below[k]:
            continue
        t_end = times[k] + quiet_window
        if t_end > horizon + 1e-9:
            break
        j = np.searchsorted(times, t_end, side="right") - 1
        if next_above[k] > j:
            return PersistenceResult(float(times[k]), False, horizon)
    return PersistenceResult(horizon, True, horizon)


def incoherent_arc(delta: np.ndarray, rel_threshold: float = 0.25,
                   smooth_radius: int = 2):
    """Contiguous arc of elevated incoherence, or None.

    Smooths delta with a short circular moving average, thresholds at
    rel_threshold times the smoothed maximum, and returns the longest
    contiguous run as a RegionSpec (label "II" is not implied; the arc
    is just where the profile is rough).  Used by the regime search to
    locate the incoherent cluster of a chimera-like state.
    """
    delta = np.asarray(delta, dtype=float)
    n = delta.size
    w = 2 * smooth_radius + 1
    kernel = np.ones(w) / w
    padded = np.concatenate([delta[-smooth_radius:], delta, delta[:smooth_radius]])
    sm = np.convolve(padded, kernel, mode="valid")
    mask = sm > rel_threshold * sm.max()
    runs = _circular_runs(mask)
    if not runs:
        return None
    best = max(runs, key=lambda r: (r[1] - r[0]) % n + 1)
    return RegionSpec("arc", best[0], best[1], n)
