"""Tailored annealing schedules from gap-position statistics.

Minimum gaps cluster at characteristic progress values; a schedule that
slows down where small gaps are likely (and hurries elsewhere) reduces
excitation.  Each bin of the anneal gets a weight combining the density of
observed gap positions with the inverse (damped) gap magnitude; time is
then allocated to bins proportionally, giving a piecewise-linear schedule.
The same machinery drives a probe that estimates an instance's gap
position by re-running short anneals with a local slowdown at each bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewSamples
from .hamiltonian import AnnealSpec, Schedule
from .dynamics import run_anneal

NUM_BINS = 20
BIN_WIDTH = 0.05
KDE_BANDWIDTH = 0.01
WEIGHT_FNS = {
    "linear": lambda x: x,
    "sqrt": np.sqrt,
    "cbrt": np.cbrt,
}
BIN_FLOOR = 0.01
MIN_SAMPLES = 10
PROBE_TIME = 10.0
PROBE_SLOWDOWN = 3.0


@dataclass
class GapStats:
    """Observed (gap position, gap magnitude) pairs."""

    samples: tuple  # of (s_star, delta)

    def __post_init__(self):
        samples = tuple((float(s), float(d)) for s, d in self.samples)
        for s, d in samples:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"gap position {s} outside [0, 1]")
            if d <= 0.0:
                raise ValueError(f"gap magnitude {d} must be positive")
        self.samples = samples


@dataclass
class RScoreProfile:
    """Per-bin schedule weights, normalized to sum 1."""

    r: np.ndarray
    weight_fn: str

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if r.shape != (NUM_BINS,) or np.any(r < 0):
            raise ValueError(f"profile must be {NUM_BINS} non-negative bins")
        total = r.sum()
        if not np.isclose(total, 1.0):
            raise ValueError("profile must be normalized")
        self.r = r


def epanechnikov_density(points: np.ndarray, at: np.ndarray,
                         bandwidth: float = KDE_BANDWIDTH) -> np.ndarray:
    """Kernel density estimate with the Epanechnikov kernel."""
    u = (at[:, None] - points[None, :]) / bandwidth
    k = np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u**2), 0.0)
    return k.sum(axis=1) / (len(points) * bandwidth)


def bin_index(s: float) -> int:
    return min(int(s / BIN_WIDTH), NUM_BINS - 1)


def rscore(stats: GapStats, weight_fn: str = "cbrt") -> RScoreProfile:
    """Per-bin sum of (density at each sample) / f(gap magnitude)."""
    if weight_fn not in WEIGHT_FNS:
        raise ValueError(f"weight_fn must be one of {sorted(WEIGHT_FNS)}")
    if len(stats.samples) < MIN_SAMPLES:
        raise TooFewSamples(
            f"need >= {MIN_SAMPLES} gap samples, got {len(stats.samples)}"
        )
    f = WEIGHT_FNS[weight_fn]
    pos = np.array([s for s, _ in stats.samples])
    gaps = np.array([d for _, d in stats.samples])
    dens = epanechnikov_density(pos, pos)
    r = np.zeros(NUM_BINS)
    for s, d, p in zip(pos, gaps, dens):
        r[bin_index(s)] += p / f(d)
    return RScoreProfile(r / r.sum(), weight_fn)


def profiles_by_length(samples_with_length, weight_fn: str = "cbrt") -> dict:
    """One profile per chain length from (length, s_star, delta) triples."""
    grouped: dict[int, list] = {}
    for length, s, d in samples_with_length:
        grouped.setdefault(int(length), []).append((s, d))
    return {
        length: rscore(GapStats(tuple(pairs)), weight_fn)
        for length, pairs in sorted(grouped.items())
    }


def _piecewise_from_weights(weights: np.ndarray) -> Schedule:
    w = np.asarray(weights, dtype=float)
    u = np.concatenate([[0.0], np.cumsum(w) / w.sum()])
    u[-1] = 1.0
    s = np.linspace(0.0, 1.0, NUM_BINS + 1)
    return Schedule("piecewise", tuple(zip(u.tolist(), s.tolist())))


def tailored_schedule(profile: RScoreProfile) -> Schedule:
    """Piecewise-linear schedule spending time proportional to the profile.

    A floor on the bin weights keeps empty bins traversable and caps the
    worst-case slowdown.
    """
    return _piecewise_from_weights(profile.r + BIN_FLOOR)


def probe_schedule(bin_k: int, slowdown: float = PROBE_SLOWDOWN) -> Schedule:
    """Uniform schedule except one bin traversed `slowdown` times slower."""
    w = np.ones(NUM_BINS)
    w[bin_k] = slowdown
    return _piecewise_from_weights(w)


def probe_gap_position(encoding, t_probe: float = PROBE_TIME,
                       slowdown: float = PROBE_SLOWDOWN) -> float:
    """Estimate the gap position from short slow-down probe anneals.

    Returns the center of the bin whose probe run had the best success
    probability (ties resolved toward smaller s).
    """
    best_p = -1.0
    best_bin = 0
    for k in range(NUM_BINS):
        spec = AnnealSpec(encoding, probe_schedule(k, slowdown), total_time=t_probe)
        p = run_anneal(spec).p_success
        if p > best_p + 1e-15:
            best_p = p
            best_bin = k
    return (best_bin + 0.5) * BIN_WIDTH
