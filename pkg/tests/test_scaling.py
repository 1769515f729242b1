import math

import numpy as np
import pytest

from foldanneal.errors import (
    DegenerateDesign,
    NonPositiveValue,
    TooFewSamples,
)
from foldanneal.scaling import (
    MODELS,
    correlations,
    fit_all,
    fit_model,
    fit_table,
    quantile_bands,
    select_model,
    welch_test,
)


def synth(model, alpha, xs, rng=None, noise=0.0, beta=0.3):
    h = {"poly": np.log, "exp": lambda x: x, "exp2": lambda x: x**2,
         "exp3": lambda x: x**3}[model]
    out = []
    for x in xs:
        z = alpha * h(x) * math.log10(math.e) + beta
        if rng is not None and noise > 0:
            z += rng.normal(0, noise)
        out.append((x, 10**z))
    return out


def test_poly_generative_recovery_exact():
    pts = synth("poly", -0.75, [4, 5, 6, 7, 8, 9] * 3)
    fit = fit_model(pts, "poly")
    assert fit.alpha == pytest.approx(-0.75, abs=1e-10)
    assert fit.rss == pytest.approx(0.0, abs=1e-16)


def test_exp_generative_recovery_and_aic_preference():
    rng = np.random.default_rng(0)
    pts = synth("exp", 0.45, list(range(4, 15, 2)) * 25, rng, noise=0.04)
    fits = fit_all(pts)
    assert fits["exp"].alpha == pytest.approx(0.45, abs=0.02)
    assert fits["exp"].aic < fits["poly"].aic
    assert select_model(fits)["aic"] == "exp"


def test_exp2_selected_by_all_criteria():
    rng = np.random.default_rng(1)
    pts = synth("exp2", 0.1, list(range(4, 15, 2)) * 25, rng, noise=0.04)
    sel = select_model(fit_all(pts))
    assert sel == {"aic": "exp2", "bic": "exp2", "mse": "exp2"}


def test_tie_breaks_toward_simpler_model():
    from foldanneal.scaling import ScalingFit

    fits = [
        ScalingFit(m, 0.1, 0.01, 0.0, aic=-5.0, bic=-4.0, mse_means=0.25,
                   rss=1.0, n=12)
        for m in MODELS
    ]
    sel = select_model(fits)
    assert sel == {"aic": "poly", "bic": "poly", "mse": "poly"}


def test_aic_bic_formulas():
    pts = synth("exp", 0.2, [4, 6, 8, 10] * 3)
    rng = np.random.default_rng(2)
    pts = [(x, y * 10 ** rng.normal(0, 0.02)) for x, y in pts]
    fit = fit_model(pts, "exp")
    n = fit.n
    assert fit.aic == pytest.approx(n * math.log(fit.rss / n) + 4)
    assert fit.bic == pytest.approx(n * math.log(fit.rss / n) + 2 * math.log(n))
    assert fit.bic >= fit.aic  # ln n > 2 for n >= 8


def test_fit_errors():
    with pytest.raises(NonPositiveValue):
        fit_model([(4, 1.0), (5, -2.0), (6, 3.0)], "poly")
    with pytest.raises(DegenerateDesign):
        fit_model([(4, 1.0), (4, 2.0), (4, 3.0)], "poly")
    with pytest.raises(TooFewSamples):
        fit_model([(4, 1.0), (5, 2.0)], "poly")


def test_fit_reorder_invariance():
    rng = np.random.default_rng(3)
    pts = synth("exp", 0.3, [4, 5, 6, 7, 8] * 6, rng, noise=0.05)
    fit1 = fit_model(pts, "exp")
    rng.shuffle(pts)
    fit2 = fit_model(pts, "exp")
    assert fit1.alpha == pytest.approx(fit2.alpha, abs=1e-12)
    assert fit1.aic == pytest.approx(fit2.aic, abs=1e-9)


def test_mse_means_uses_per_length_means():
    pts = [(4, 10.0), (4, 1000.0), (8, 100.0)]
    fit = fit_model(pts, "poly")
    means = {4: np.mean([1.0, 3.0]), 8: 2.0}
    expected = np.mean(
        [(means[x] - fit.predict_log10(x)) ** 2 for x in (4, 8)]
    )
    assert fit.mse_means == pytest.approx(expected)


def test_quantile_bands_partition():
    rng = np.random.default_rng(4)
    records = [(L, float(rng.uniform(1, 100))) for L in (6, 7, 8) for _ in range(10)]
    bands = quantile_bands(records)
    assert sorted(b for band in bands.values() for b in band) == sorted(records)
    assert all(len(v) == 3 for k, v in bands.items() if k == (0, 10))
    # 0-10% holds exactly one record per length with 10 records per length
    first = bands[(0, 10)]
    per_len = {}
    for length, _ in first:
        per_len[length] = per_len.get(length, 0) + 1
    assert per_len == {6: 1, 7: 1, 8: 1}


def test_quantile_bands_too_few():
    records = [(6, float(v)) for v in range(9)]
    with pytest.raises(TooFewSamples):
        quantile_bands(records)


def test_correlations_monotone_and_independent():
    xs = np.linspace(0.1, 1.0, 30)
    mono = correlations([(x, 100.0 / x) for x in xs])
    assert mono.spearman_rho == pytest.approx(-1.0)
    rng = np.random.default_rng(5)
    indep = correlations(
        [(float(rng.uniform(0.1, 1)), float(rng.uniform(1, 100))) for _ in range(100)]
    )
    assert abs(indep.spearman_rho) < 0.3
    with pytest.raises(TooFewSamples):
        correlations([(0.1, 1.0)])


def test_welch_identical_and_disjoint():
    a = [1.0, 1.1, 0.9, 1.05, 0.95]
    t, dof, p = welch_test(a, list(a))
    assert t == pytest.approx(0.0, abs=1e-12)
    assert p == pytest.approx(1.0)
    t, dof, p = welch_test([1, 1.1, 0.9, 1.2], [10, 10.3, 9.8, 10.1])
    assert p < 0.01
    with pytest.raises(TooFewSamples):
        welch_test([1.0], [1.0, 2.0])


def test_welch_against_scipy():
    from scipy import stats

    rng = np.random.default_rng(6)
    a = rng.normal(0, 1, 20)
    b = rng.normal(0.4, 2, 35)
    t, dof, p = welch_test(a, b)
    ref = stats.ttest_ind(a, b, equal_var=False)
    assert t == pytest.approx(ref.statistic, rel=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-9)


def test_generative_recovery_rate_quick():
    rng = np.random.default_rng(7)
    xs = list(range(4, 15, 2)) * 20
    alphas = {"poly": -2.0, "exp": 0.5, "exp2": 0.1, "exp3": 0.02}
    for model, alpha in alphas.items():
        hits = 0
        for _ in range(20):
            pts = synth(model, alpha, xs, rng, noise=0.0434)  # ~10% lognormal
            hits += select_model(fit_all(pts))["aic"] == model
        assert hits >= 19


def test_fit_table_layout():
    rng = np.random.default_rng(8)
    pts = synth("exp", 0.3, [6, 7, 8] * 12, rng, noise=0.05)
    bands = {(0, 50): fit_all(pts[:18]), (50, 100): fit_all(pts[18:])}
    table = fit_table(bands, fit_all(pts))
    lines = table.strip().split("\n")
    assert lines[0].split("\t") == ["parameter", "model", "0-50%", "50-100%", "full"]
    assert len(lines) == 1 + 4 * len(MODELS)
