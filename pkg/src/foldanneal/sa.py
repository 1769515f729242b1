"""Classical simulated-annealing baseline over turn sequences.

Boltzmann acceptance (k = 1), geometric cooling, single-turn resampling
moves (step size 1), and exact move accounting: every energy evaluation is
one Monte Carlo move, which is the cost unit used for comparisons.

The move energy is the same objective the quantum encoding realizes:
contact energies over windows free of invalid codes, plus the dominance
penalty per coincident pair (and per invalid 3D code).  `sa_energy` is the
readable reference; the compiled kernel mirrors it operation for
operation, so both agree bitwise with each other and with the polynomial
encoding to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .dataset import InstanceRecord
from .encoder import penalty_weight_for
from .lattice import AMINO_ACIDS, STEPS, Peptide, TurnString
from .tuner import OptDomain, OptResult, Param, optimize

BOLTZMANN_K = 1.0
STEP_SIZE = 1  # one turn resampled per move
GROUND_TOL = 1e-9
MAX_MOVES_DEFAULT = 200_000
RUNS_PER_ESTIMATE = 25

SA_TRIES_BOUNDS = (1, 50)
SA_ITERS_BOUNDS = (1, 200)
SA_TINIT_BOUNDS = (0.5, 50.0)
SA_DAMPING_BOUNDS = (1.001, 2.0)
SA_BUDGET = 500


@dataclass(frozen=True)
class SAParams:
    """Cooling schedule and sweep sizes; the final temperature is frozen
    so the tuned space stays four-dimensional."""

    tries_per_step: int
    iters_per_temperature: int
    t_initial: float
    damping: float
    t_final: float = 0.01

    def __post_init__(self):
        if self.tries_per_step < 1 or self.iters_per_temperature < 1:
            raise ValueError("tries and iterations must be >= 1")
        if not self.t_initial > self.t_final > 0:
            raise ValueError("need t_initial > t_final > 0")
        if self.damping <= 1.0:
            raise ValueError("damping must exceed 1")


DEFAULT_SA_PARAMS = SAParams(
    tries_per_step=10, iters_per_temperature=100, t_initial=5.0, damping=1.1
)


@dataclass
class SARunResult:
    found_ground: bool
    moves_used: int


@dataclass
class SAOutcome:
    """Aggregate over independently seeded runs of one parameter setting."""

    found_ground: bool          # any run reached a ground conformation
    moves_used: int             # total energy evaluations across runs
    p_success: float
    expected_moves_50: float
    moves_per_run: float
    n_runs: int


def sa_energy(p: Peptide, t: TurnString, mj, penalty_weight: float) -> float:
    """Reference objective: contacts plus dominance penalties.

    Windows crossing an invalid 3D code contribute nothing; each invalid
    code itself costs one penalty, as does each coincident pair.
    """
    steps = STEPS[p.dim]
    length = len(p)
    pref = [(0,) * p.dim]
    invc = [0]
    ninv = 0
    for c in t.codes:
        inv = 1 if (p.dim == 3 and c >= len(steps)) else 0
        ninv += inv
        step = steps[c] if not inv else (0,) * p.dim
        pref.append(tuple(a + b for a, b in zip(pref[-1], step)))
        invc.append(invc[-1] + inv)
    e = 0.0
    for i in range(length):
        for j in range(i + 2, length):
            if invc[j] != invc[i]:
                continue
            dist = sum(abs(a - b) for a, b in zip(pref[i], pref[j]))
            if dist == 0:
                e += penalty_weight
            elif j - i >= 3 and dist == 1:
                e += mj.lookup(p.sequence[i], p.sequence[j])
    return e + penalty_weight * ninv


@numba.njit(cache=True)
def _energy_kernel(codes, seq_idx, mjmat, w, dim3, steps, pref, invc):
    length = seq_idx.shape[0]
    ninv = 0
    pref[0, 0] = 0
    pref[0, 1] = 0
    pref[0, 2] = 0
    invc[0] = 0
    for t in range(length - 1):
        c = codes[t]
        inv = 1 if (dim3 and c >= 6) else 0
        ninv += inv
        for d in range(3):
            pref[t + 1, d] = pref[t, d] + (0 if inv else steps[c, d])
        invc[t + 1] = invc[t] + inv
    e = 0.0
    for i in range(length):
        for j in range(i + 2, length):
            if invc[j] != invc[i]:
                continue
            dist = 0
            for d in range(3):
                dd = pref[j, d] - pref[i, d]
                dist += dd if dd >= 0 else -dd
            if dist == 0:
                e += w
            elif j - i >= 3 and dist == 1:
                e += mjmat[seq_idx[i], seq_idx[j]]
    return e + w * ninv


@numba.njit(cache=True)
def _run_kernel(seq_idx, mjmat, w, dim3, steps, ncodes, tries, iters,
                t_initial, t_final, damping, ground_energy, max_moves, seed):
    np.random.seed(seed)
    length = seq_idx.shape[0]
    nturns = length - 1
    codes = np.empty(nturns, dtype=np.int64)
    for t in range(nturns):
        codes[t] = np.random.randint(0, ncodes)
    pref = np.zeros((length, 3), dtype=np.int64)
    invc = np.zeros(length, dtype=np.int64)

    e = _energy_kernel(codes, seq_idx, mjmat, w, dim3, steps, pref, invc)
    moves = 1
    if e <= ground_energy + GROUND_TOL:
        return True, moves
    temp = t_initial
    while temp >= t_final:
        for _ in range(iters):
            for _ in range(tries):
                if moves >= max_moves:
                    return False, moves
                t = np.random.randint(0, nturns)
                old = codes[t]
                codes[t] = (old + 1 + np.random.randint(0, ncodes - 1)) % ncodes
                e2 = _energy_kernel(codes, seq_idx, mjmat, w, dim3, steps, pref, invc)
                moves += 1
                accept = e2 <= e
                if not accept:
                    accept = np.random.random() < math.exp(-(e2 - e) / (BOLTZMANN_K * temp))
                if accept:
                    e = e2
                    if e <= ground_energy + GROUND_TOL:
                        return True, moves
                else:
                    codes[t] = old
        temp /= damping
    return False, moves


def _kernel_inputs(p: Peptide, mj):
    seq_idx = np.array([AMINO_ACIDS.index(a) for a in p.sequence], dtype=np.int64)
    table = STEPS[p.dim]
    ncodes = len(table)
    steps = np.zeros((8, 3), dtype=np.int64)
    for c, step in enumerate(table):
        for d, v in enumerate(step):
            steps[c, d] = v
    return seq_idx, np.asarray(mj.entries), steps, ncodes


def _run_seed(seed: int, run_index: int) -> int:
    return int(np.random.SeedSequence([seed, run_index]).generate_state(1)[0] % (2**31))


def sa_run(record: InstanceRecord, mj, params: SAParams, seed: int = 0,
           penalty_weight: float | None = None,
           max_moves: int = MAX_MOVES_DEFAULT) -> SARunResult:
    """One seeded annealing run; stops at the final temperature, the exact
    ground energy, or the move cap (counted as a failure)."""
    p = record.peptide
    w = penalty_weight if penalty_weight is not None else penalty_weight_for(p, mj)
    seq_idx, mjmat, steps, ncodes = _kernel_inputs(p, mj)
    found, moves = _run_kernel(
        seq_idx, mjmat, float(w), p.dim == 3, steps, ncodes,
        int(params.tries_per_step), int(params.iters_per_temperature),
        float(params.t_initial), float(params.t_final), float(params.damping),
        float(record.ground_energy), int(max_moves), _run_seed(seed, 0),
    )
    return SARunResult(bool(found), int(moves))


def expected_moves_50(p_success: float, moves_per_run: float) -> float:
    """Repetition-adjusted cost to reach a minimizer with probability 1/2."""
    if p_success <= 0.0:
        return math.inf
    if p_success >= 0.5:
        return float(moves_per_run)
    return float(moves_per_run * math.log(0.5) / math.log1p(-p_success))


def estimate_sa(record: InstanceRecord, mj, params: SAParams,
                n_runs: int = RUNS_PER_ESTIMATE, seed: int = 0,
                penalty_weight: float | None = None,
                max_moves: int = MAX_MOVES_DEFAULT) -> SAOutcome:
    """Success statistics over independently seeded runs."""
    p = record.peptide
    w = penalty_weight if penalty_weight is not None else penalty_weight_for(p, mj)
    seq_idx, mjmat, steps, ncodes = _kernel_inputs(p, mj)
    found_n = 0
    total_moves = 0
    for r in range(n_runs):
        found, moves = _run_kernel(
            seq_idx, mjmat, float(w), p.dim == 3, steps, ncodes,
            int(params.tries_per_step), int(params.iters_per_temperature),
            float(params.t_initial), float(params.t_final), float(params.damping),
            float(record.ground_energy), int(max_moves), _run_seed(seed, r),
        )
        found_n += int(found)
        total_moves += int(moves)
    p_success = found_n / n_runs
    per_run = total_moves / n_runs
    return SAOutcome(
        found_ground=found_n > 0,
        moves_used=total_moves,
        p_success=p_success,
        expected_moves_50=expected_moves_50(p_success, per_run),
        moves_per_run=per_run,
        n_runs=n_runs,
    )


def tune_sa(record: InstanceRecord, mj, seed: int = 0, budget: int = SA_BUDGET,
            n_runs: int = RUNS_PER_ESTIMATE,
            max_moves: int = MAX_MOVES_DEFAULT) -> OptResult:
    """Optimize the four cooling parameters against expected moves.

    The library defaults are evaluated first, so the tuned setting is
    never worse than the untuned one on the tuning objective.
    """
    domain = OptDomain(
        (
            Param("tries_per_step", *SA_TRIES_BOUNDS, integer=True),
            Param("iters_per_temperature", *SA_ITERS_BOUNDS, integer=True),
            Param("t_initial", *SA_TINIT_BOUNDS, scale="log"),
            Param("damping", *SA_DAMPING_BOUNDS, scale="log"),
        ),
        budget=budget,
        seed=seed,
    )

    def objective(ps):
        params = SAParams(
            tries_per_step=int(ps["tries_per_step"]),
            iters_per_temperature=int(ps["iters_per_temperature"]),
            t_initial=ps["t_initial"],
            damping=ps["damping"],
        )
        return estimate_sa(record, mj, params, n_runs=n_runs, seed=seed,
                           max_moves=max_moves).expected_moves_50

    anchor = {
        "tries_per_step": DEFAULT_SA_PARAMS.tries_per_step,
        "iters_per_temperature": DEFAULT_SA_PARAMS.iters_per_temperature,
        "t_initial": DEFAULT_SA_PARAMS.t_initial,
        "damping": DEFAULT_SA_PARAMS.damping,
    }
    return optimize(objective, domain, initial_points=[anchor], log_objective=True)
