import numpy as np
import pytest

from foldanneal.errors import TooFewSamples
from foldanneal.hamiltonian import Schedule, schedule_eval
from foldanneal.schedules import (
    BIN_FLOOR,
    NUM_BINS,
    GapStats,
    RScoreProfile,
    epanechnikov_density,
    probe_gap_position,
    probe_schedule,
    profiles_by_length,
    rscore,
    tailored_schedule,
)


def test_degenerate_cluster_concentrates_profile():
    stats = GapStats(tuple((0.52, 0.3) for _ in range(30)))
    prof = rscore(stats, "cbrt")
    assert prof.r[10] == pytest.approx(1.0)
    assert prof.r.sum() == pytest.approx(1.0)


def test_cbrt_weighting_closed_form_ratio():
    # equal-density clusters; gap magnitudes differ by a factor 8
    samples = [(0.22, 0.8)] * 12 + [(0.72, 0.1)] * 12
    prof = rscore(GapStats(tuple(samples)), "cbrt")
    r_a = prof.r[4]   # bin of s = 0.22, the larger gap
    r_b = prof.r[14]  # bin of s = 0.72, the gap smaller by 8x
    assert r_b / r_a == pytest.approx(2.0, rel=1e-9)


def test_profile_reproducible_and_normalized():
    rng = np.random.default_rng(1)
    samples = tuple(
        (float(rng.uniform(0, 1)), float(10 ** rng.uniform(-3, 0))) for _ in range(80)
    )
    a = rscore(GapStats(samples), "sqrt")
    b = rscore(GapStats(samples), "sqrt")
    assert np.array_equal(a.r, b.r)
    assert a.r.sum() == pytest.approx(1.0)
    assert np.all(a.r >= 0)


@pytest.mark.parametrize("weight_fn", ["linear", "sqrt", "cbrt"])
def test_profile_invariant_under_gap_rescaling(weight_fn):
    rng = np.random.default_rng(5)
    samples = [(float(rng.uniform(0, 1)), float(10 ** rng.uniform(-2, 0))) for _ in range(40)]
    scaled = [(s, 3.7 * d) for s, d in samples]
    a = rscore(GapStats(tuple(samples)), weight_fn)
    b = rscore(GapStats(tuple(scaled)), weight_fn)
    assert np.allclose(a.r, b.r, atol=1e-12)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        rscore(GapStats(tuple((0.5, 0.1) for _ in range(9))))


def test_epanechnikov_density_normalizes():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.3, 0.7, size=50)
    grid = np.linspace(-0.1, 1.1, 4001)
    dens = epanechnikov_density(pts, grid)
    integral = np.trapezoid(dens, grid)
    assert integral == pytest.approx(1.0, rel=1e-3)


def test_uniform_profile_gives_linear_schedule():
    prof = RScoreProfile(np.full(NUM_BINS, 1.0 / NUM_BINS), "cbrt")
    sch = tailored_schedule(prof)
    for u in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert schedule_eval(sch, u) == pytest.approx(u, abs=1e-12)


def test_concentrated_profile_slows_its_bin():
    r = np.zeros(NUM_BINS)
    r[10] = 1.0
    sch = tailored_schedule(RScoreProfile(r, "cbrt"))
    # time share of bin 10 is (1 + eps) / (1 + 20 eps); the floor keeps the
    # other bins traversable
    expected = (1.0 + BIN_FLOOR) / (1.0 + NUM_BINS * BIN_FLOOR)
    us = np.array([p[0] for p in sch.breakpoints])
    share = us[11] - us[10]
    assert share == pytest.approx(expected, rel=1e-9)
    assert share > 0.8


def test_tailored_schedule_satisfies_invariants():
    rng = np.random.default_rng(2)
    r = rng.random(NUM_BINS)
    prof = RScoreProfile(r / r.sum(), "linear")
    sch = tailored_schedule(prof)
    assert isinstance(sch, Schedule)
    assert sch.breakpoints[0] == (0.0, 0.0)
    assert sch.breakpoints[-1] == (1.0, 1.0)
    u = np.linspace(0, 1, 201)
    s = schedule_eval(sch, u)
    assert np.all(np.diff(s) >= 0)


def test_per_length_profiles_match_single_length_pool():
    rng = np.random.default_rng(3)
    triples = [(6, float(rng.uniform(0, 1)), float(rng.uniform(0.01, 1))) for _ in range(25)]
    by_len = profiles_by_length(triples, "cbrt")
    single = rscore(GapStats(tuple((s, d) for _, s, d in triples)), "cbrt")
    assert set(by_len) == {6}
    assert np.allclose(by_len[6].r, single.r)


def test_probe_schedule_shape():
    sch = probe_schedule(7, slowdown=3.0)
    us = np.array([p[0] for p in sch.breakpoints])
    widths = np.diff(us)
    assert widths[7] == pytest.approx(3.0 * widths[0], rel=1e-9)


def test_probe_finds_late_gap(fake_encoding):
    # small splitting between the two lowest levels makes the avoided
    # crossing sit late in the anneal; the probe should point there
    diag = np.array([0.0, 0.35] + [6.0] * 6)
    enc = fake_encoding(diag, ground_indices=[0])
    est = probe_gap_position(enc, t_probe=8.0, slowdown=3.0)
    # estimates live on the probe grid
    assert est in [round((k + 0.5) * 0.05, 4) for k in range(NUM_BINS)]
    assert est > 0.5
