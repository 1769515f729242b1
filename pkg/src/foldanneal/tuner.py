"""Seeded Bayesian optimization of annealing and solver parameters.

Gaussian-process surrogate (squared-exponential kernel with per-dimension
length scales, refit by marginal-likelihood ascent) plus expected-
improvement proposals over the unit cube.  Evaluations that fail return an
infinite sentinel; they stay in the trace but never enter the surrogate.
Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import RBF, ConstantKernel

from .hamiltonian import AnnealSpec, Schedule
from .dynamics import run_anneal

INITIAL_DESIGN = 5
EI_JITTER = 0.01
CANDIDATES = 512
GP_NOISE = 1e-10
# Hyperparameters are refit on this cadence once the data set is large;
# between refits the previous kernel is reused (exact GP, stale scales).
REFIT_UNTIL = 30
REFIT_EVERY = 10

T_BOUNDS = (0.1, 1000.0)
LAMBDA_BOUNDS = (-2.0, 2.0)
BUDGET_SINGLE = 50
BUDGET_CATALYST = 500
BASELINE_TIME = 1000.0


@dataclass(frozen=True)
class Param:
    """One search dimension. low == high pins the parameter (not searched)."""

    name: str
    low: float
    high: float
    scale: str = "linear"  # or "log"
    integer: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise ValueError(f"{self.name}: bounds must be finite")
        if self.low > self.high:
            raise ValueError(f"{self.name}: low > high")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: scale must be linear or log")
        if self.scale == "log" and self.low <= 0:
            raise ValueError(f"{self.name}: log scale needs positive bounds")

    @property
    def pinned(self) -> bool:
        return self.low == self.high

    def to_unit(self, x: float) -> float:
        if self.pinned:
            return 0.0
        if self.scale == "log":
            return (math.log10(x) - math.log10(self.low)) / (
                math.log10(self.high) - math.log10(self.low)
            )
        return (x - self.low) / (self.high - self.low)

    def from_unit(self, u: float) -> float:
        u = min(max(u, 0.0), 1.0)
        if self.pinned:
            x = self.low
        elif self.scale == "log":
            x = 10 ** (math.log10(self.low) + u * (math.log10(self.high) - math.log10(self.low)))
        else:
            x = self.low + u * (self.high - self.low)
        return float(round(x)) if self.integer else float(x)


@dataclass
class OptDomain:
    params: tuple
    budget: int
    seed: int = 0

    def __post_init__(self):
        if self.budget < INITIAL_DESIGN:
            raise ValueError(f"budget must be >= {INITIAL_DESIGN}")
        self.params = tuple(self.params)

    @property
    def free_params(self) -> tuple:
        return tuple(p for p in self.params if not p.pinned)


@dataclass
class OptResult:
    best_params: dict
    best_objective: float
    trace: list = field(default_factory=list)  # (params dict, objective), eval order


def _decode(domain: OptDomain, unit: np.ndarray) -> dict:
    out = {}
    i = 0
    for p in domain.params:
        if p.pinned:
            out[p.name] = p.from_unit(0.0)
        else:
            out[p.name] = p.from_unit(float(unit[i]))
            i += 1
    return out


def _encode(domain: OptDomain, params: dict) -> np.ndarray:
    return np.array([p.to_unit(params[p.name]) for p in domain.free_params])


def _expected_improvement(mu, sigma, best):
    imp = best - mu - EI_JITTER
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, imp / sigma, 0.0)
        ei = np.where(sigma > 0, imp * norm.cdf(z) + sigma * norm.pdf(z),
                      np.maximum(imp, 0.0))
    return ei


def optimize(objective, domain: OptDomain, initial_points=None,
             log_objective: bool = False) -> OptResult:
    """Minimize a black-box objective over the domain.

    `initial_points` (param dicts) are evaluated first, counting against
    the budget; they anchor incumbents such as a fixed-baseline setting.
    `log_objective` fits the surrogate to log10 of the objective, the
    right geometry for quantities spanning orders of magnitude.
    """
    d = len(domain.free_params)
    rng_master = np.random.default_rng(domain.seed)

    queue = [ _encode(domain, pt) for pt in (initial_points or []) ]
    n_lhs = max(0, min(INITIAL_DESIGN, domain.budget - len(queue)))
    if d > 0 and n_lhs > 0:
        sampler = qmc.LatinHypercube(d=d, seed=rng_master)
        queue.extend(sampler.random(n=n_lhs))
    elif d == 0:
        queue.append(np.zeros(0))

    xs: list[np.ndarray] = []
    ys: list[float] = []
    trace: list = []
    best_y = math.inf
    best_params: dict | None = None
    kernel_prev = None

    def evaluate(unit: np.ndarray):
        nonlocal best_y, best_params
        params = _decode(domain, unit)
        y = float(objective(params))
        trace.append((params, y))
        if math.isfinite(y):
            xs.append(np.clip(unit, 0.0, 1.0))
            ys.append(y)
            if y < best_y:
                best_y = y
                best_params = params
        return y

    for unit in queue[: domain.budget]:
        evaluate(np.asarray(unit, dtype=float))

    it = len(trace)
    while it < domain.budget:
        rng = np.random.default_rng([domain.seed, it])
        if d == 0 or len(ys) < 2:
            proposal = rng.random(d)
        else:
            x_arr = np.array(xs)
            y_arr = np.array(ys)
            z_arr = np.log10(y_arr) if log_objective and np.all(y_arr > 0) else y_arr
            n = len(z_arr)
            if kernel_prev is None or n <= REFIT_UNTIL or n % REFIT_EVERY == 0:
                kernel = ConstantKernel(1.0, (1e-3, 1e3)) * RBF(
                    length_scale=np.full(d, 0.3), length_scale_bounds=(1e-2, 1e2)
                )
                gp = GaussianProcessRegressor(
                    kernel=kernel, alpha=GP_NOISE, normalize_y=True,
                    n_restarts_optimizer=1, random_state=int(domain.seed) % (2**31),
                )
            else:
                gp = GaussianProcessRegressor(
                    kernel=kernel_prev, alpha=GP_NOISE, normalize_y=True,
                    optimizer=None,
                )
            gp.fit(x_arr, z_arr)
            if gp.kernel_.theta.size:
                kernel_prev = gp.kernel_
            z_best = float(np.min(z_arr))

            cands = rng.random((CANDIDATES, d))
            cands = np.vstack([cands, x_arr[np.argmin(z_arr)] + 0.05 * rng.standard_normal((8, d))])
            cands = np.clip(cands, 0.0, 1.0)
            mu, sigma = gp.predict(cands, return_std=True)
            ei = _expected_improvement(mu, sigma, z_best)
            x0 = cands[int(np.argmax(ei))]

            def neg_ei(x):
                m, s = gp.predict(x.reshape(1, -1), return_std=True)
                return -float(_expected_improvement(m, s, z_best)[0])

            res = minimize(neg_ei, x0, bounds=[(0.0, 1.0)] * d, method="L-BFGS-B")
            proposal = res.x if res.success and -res.fun >= np.max(ei) else x0
        evaluate(np.asarray(proposal, dtype=float))
        it = len(trace)

    if best_params is None:
        best_params = trace[0][0]
        best_y = trace[0][1]
    return OptResult(best_params, best_y, trace)


def tune_annealing(encoding, schedule: Schedule | None = None, catalyst: str = "none",
                   seed: int = 0, budget: int | None = None,
                   t_bounds=T_BOUNDS, lam_bounds=LAMBDA_BOUNDS,
                   baseline_time: float | None = BASELINE_TIME) -> OptResult:
    """Optimize the anneal time (and catalyst strength, when present).

    The fixed baseline time is evaluated first, so the incumbent can never
    be worse than the fixed-time protocol for the same schedule; pass
    baseline_time=None to skip that anchor run (long anneals are costly
    and callers comparing protocols at optimized times do not need it).
    """
    schedule = schedule or Schedule("linear")
    params = [Param("total_time", *t_bounds, scale="log")]
    if catalyst != "none":
        params.append(Param("lam", lam_bounds[0], lam_bounds[1]))
        budget = BUDGET_CATALYST if budget is None else budget
    else:
        budget = BUDGET_SINGLE if budget is None else budget
    domain = OptDomain(tuple(params), budget=budget, seed=seed)

    def objective(p):
        lam = p.get("lam", 0.0)
        spec = AnnealSpec(encoding, schedule, total_time=p["total_time"],
                          catalyst=catalyst if lam != 0.0 or catalyst != "none" else "none",
                          lam=lam)
        try:
            return run_anneal(spec).tts
        except Exception:
            return math.inf

    anchors = []
    if baseline_time is not None:
        anchor = {"total_time": baseline_time}
        if catalyst != "none":
            anchor["lam"] = 0.0
        anchors.append(anchor)
    return optimize(objective, domain, initial_points=anchors, log_objective=True)
