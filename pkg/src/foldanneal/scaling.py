"""Scaling-law fits, model selection, quantile bands, and hypothesis tests.

Four candidate laws are fit to (length, value) data in decimal-log space:

    value = 10^beta * x^alpha            (poly)
    value = 10^beta * e^(alpha * x)      (exp)
    value = 10^beta * e^(alpha * x^2)    (exp2)
    value = 10^beta * e^(alpha * x^3)    (exp3)

i.e. log10 y = alpha * h(x) * log10(e) + beta with h in {ln x, x, x^2, x^3},
which is linear in (alpha, beta).  Model choice uses AIC, BIC, and the mean
squared error of the per-length means; ties break toward the simpler law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .errors import DegenerateDesign, NonPositiveValue, TooFewSamples

MODELS = ("poly", "exp", "exp2", "exp3")
_LOG10E = math.log10(math.e)

DEFAULT_BANDS = ((0, 10), (10, 25), (25, 50), (50, 75), (75, 90), (90, 100))
NUM_FIT_PARAMS = 2  # alpha and beta


def _h(model: str, x: np.ndarray) -> np.ndarray:
    if model == "poly":
        return np.log(x)
    if model == "exp":
        return x
    if model == "exp2":
        return x**2
    if model == "exp3":
        return x**3
    raise ValueError(f"unknown model {model!r}")


@dataclass
class ScalingFit:
    model: str
    alpha: float
    alpha_stderr: float
    beta: float
    aic: float
    bic: float
    mse_means: float
    rss: float
    n: int

    def predict_log10(self, x) -> np.ndarray:
        return self.alpha * _h(self.model, np.asarray(x, dtype=float)) * _LOG10E + self.beta


def fit_model(points, model: str) -> ScalingFit:
    """Least-squares fit of one scaling law to (length, value) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise TooFewSamples(f"need >= 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(y <= 0):
        raise NonPositiveValue("fits run on log values; data must be positive")
    if len(np.unique(x)) < 2:
        raise DegenerateDesign("need at least two distinct lengths")
    z = np.log10(y)
    design = np.column_stack([_h(model, x) * _LOG10E, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, z, rcond=None)
    alpha, beta = float(coef[0]), float(coef[1])
    resid = z - design @ coef
    n = len(z)
    rss = float(resid @ resid)
    dof = max(n - NUM_FIT_PARAMS, 1)
    cov00 = np.linalg.inv(design.T @ design)[0, 0]
    stderr = math.sqrt(max(rss / dof * cov00, 0.0))
    aic = n * math.log(max(rss, 1e-300) / n) + 2 * NUM_FIT_PARAMS
    bic = n * math.log(max(rss, 1e-300) / n) + NUM_FIT_PARAMS * math.log(n)
    fit = ScalingFit(model, alpha, stderr, beta, aic, bic, math.nan, rss, n)
    means = {}
    for xi, zi in zip(x, z):
        means.setdefault(xi, []).append(zi)
    mse = float(
        np.mean(
            [(np.mean(v) - fit.predict_log10(xi)) ** 2 for xi, v in sorted(means.items())]
        )
    )
    fit.mse_means = mse
    return fit


def fit_all(points) -> dict:
    return {model: fit_model(points, model) for model in MODELS}


def select_model(fits) -> dict:
    """Per-criterion argmin; exact ties break toward the simpler law."""
    if isinstance(fits, dict):
        fits = list(fits.values())
    if len(fits) < 2:
        raise ValueError("need at least two fits to select between")
    order = {m: i for i, m in enumerate(MODELS)}
    fits = sorted(fits, key=lambda f: order[f.model])
    chosen = {}
    for criterion in ("aic", "bic", "mse"):
        key = {"aic": lambda f: f.aic, "bic": lambda f: f.bic,
               "mse": lambda f: f.mse_means}[criterion]
        best = min(fits, key=lambda f: (key(f), order[f.model]))
        chosen[criterion] = best.model
    return chosen


def quantile_bands(records, bands=DEFAULT_BANDS) -> dict:
    """Partition (length, value) records into per-length quantile bands.

    Within each length, a record at ascending rank r of m records sits at
    the empirical quantile 100 * (r + 0.5) / m and lands in the band whose
    half-open interval (lo, hi] contains it; bands are then pooled across
    lengths.  With 10 records per length the 0-10% band holds exactly one
    record per length.
    """
    grouped: dict[float, list] = {}
    for length, value in records:
        grouped.setdefault(float(length), []).append(float(value))
    out = {band: [] for band in bands}
    for length, values in sorted(grouped.items()):
        if len(values) < 10:
            raise TooFewSamples(
                f"length {length:g}: need >= 10 records per length, got {len(values)}"
            )
        values = sorted(values)
        m = len(values)
        for r, v in enumerate(values):
            q = 100.0 * (r + 0.5) / m
            for lo, hi in bands:
                if lo < q <= hi:
                    out[(lo, hi)].append((length, v))
                    break
    return out


@dataclass
class CorrelationResult:
    spearman_rho: float
    spearman_p: float
    pearson_r: float
    pearson_p: float


def correlations(pairs) -> CorrelationResult:
    """Spearman rho of (gap, time) and Pearson R of (log10 gap^-2, log10 time)."""
    pts = [(float(d), float(t)) for d, t in pairs]
    if len(pts) < 3:
        raise TooFewSamples(f"need >= 3 pairs, got {len(pts)}")
    delta = np.array([p[0] for p in pts])
    times = np.array([p[1] for p in pts])
    rho, rho_p = sstats.spearmanr(delta, times)
    r, r_p = sstats.pearsonr(np.log10(1.0 / delta**2), np.log10(times))
    return CorrelationResult(float(rho), float(rho_p), float(r), float(r_p))


def welch_test(a, b):
    """Welch's t statistic with Satterthwaite dof and two-tailed p."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise TooFewSamples("each sample needs at least two values")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    se2 = va + vb
    if se2 == 0.0:
        dof = float(len(a) + len(b) - 2)
        if a.mean() == b.mean():
            return 0.0, dof, 1.0
        return math.inf, dof, 0.0
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    dof = float(
        se2**2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    )
    p = float(2.0 * sstats.t.sf(abs(t), dof))
    return t, dof, p


def fit_table(band_fits: dict, full_fits: dict) -> str:
    """Delimited table: alpha and each criterion, per model, per band.

    `band_fits` maps band tuples to {model: ScalingFit}; `full_fits` is the
    all-data {model: ScalingFit}.
    """
    bands = sorted(band_fits)
    header = ["parameter", "model"] + [f"{lo}-{hi}%" for lo, hi in bands] + ["full"]
    rows = [header]
    for label, getter in (
        ("alpha", lambda f: f"{f.alpha:.4f}+-{f.alpha_stderr:.4f}"),
        ("aic", lambda f: f"{f.aic:.2f}"),
        ("bic", lambda f: f"{f.bic:.2f}"),
        ("mse", lambda f: f"{f.mse_means:.6f}"),
    ):
        for model in MODELS:
            row = [label, model]
            for band in bands:
                fit = band_fits[band].get(model)
                row.append(getter(fit) if fit else "-")
            row.append(getter(full_fits[model]) if model in full_fits else "-")
            rows.append(row)
    return "\n".join("\t".join(r) for r in rows) + "\n"
