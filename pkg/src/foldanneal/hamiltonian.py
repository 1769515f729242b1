"""Time-dependent annealing Hamiltonian: driver, diagonal problem term,
optional catalysts, interpolation schedules, and a fused matrix-free apply.

    H(s) = (1 - s) H_start + s H_problem + lam * s(1-s) * H_catalyst

with H_start = (1/2) sum_i (I - sigma^x_i), the stoquastic catalyst
sum_i sigma^x_i, and the non-stoquastic catalyst the literal double sum
sum_{i,j} sigma^x_i sigma^x_j (equal to (sum_i sigma^x_i)^2, so the i = j
terms contribute N*I; constants shift the spectrum uniformly and cannot
affect gaps or measured probabilities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from .errors import DimensionMismatch, TooLarge
from .encoder import ProblemEncoding

OPERATOR_GUARD_QUBITS = 26
SIGMOID_STEEPNESS = 10.0

CATALYSTS = ("none", "stoquastic", "nonstoquastic")
SCHEDULE_KINDS = ("linear", "quadratic", "cubic", "sigmoid", "piecewise")


def _check_size(n: int) -> None:
    if not 1 <= n <= OPERATOR_GUARD_QUBITS:
        raise TooLarge(f"qubit count {n} outside [1, {OPERATOR_GUARD_QUBITS}]")


def _sigma_x_sum(n: int) -> sps.csr_matrix:
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    rows = np.repeat(idx, n)
    cols = (idx[:, None] ^ (1 << np.arange(n, dtype=np.int64))[None, :]).ravel()
    data = np.ones(dim * n)
    return sps.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def build_start(n: int) -> sps.csr_matrix:
    """(1/2) sum_i (I - sigma^x_i): diagonal n/2, -1/2 on single bit flips.

    Its ground state is the uniform superposition, with eigenvalue 0.
    """
    _check_size(n)
    dim = 1 << n
    return (0.5 * n) * sps.identity(dim, format="csr") - 0.5 * _sigma_x_sum(n)


def build_catalyst(n: int, kind: str) -> sps.csr_matrix:
    """Explicit sparse catalyst; the fused apply never materializes this."""
    _check_size(n)
    if kind == "stoquastic":
        return _sigma_x_sum(n)
    if kind == "nonstoquastic":
        s = _sigma_x_sum(n)
        return (s @ s).tocsr()
    raise ValueError(f"unknown catalyst kind {kind!r}")


# -- interpolation schedules --------------------------------------------------


def _sigmoid_raw(u):
    return 1.0 / (1.0 + np.exp(-SIGMOID_STEEPNESS * (2.0 * np.asarray(u, dtype=float) - 1.0)))


_SIG0 = float(_sigmoid_raw(0.0))
_SIG1 = float(_sigmoid_raw(1.0))


@dataclass(frozen=True)
class Schedule:
    """Monotone interpolation s = f(t / T) with f(0) = 0, f(1) = 1."""

    kind: str = "linear"
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "piecewise":
            pts = tuple((float(u), float(s)) for u, s in self.breakpoints)
            if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
                raise ValueError("piecewise breakpoints must run from (0,0) to (1,1)")
            us = [u for u, _ in pts]
            ss = [s for _, s in pts]
            if any(b <= a for a, b in zip(us, us[1:])) or any(
                b <= a for a, b in zip(ss, ss[1:])
            ):
                raise ValueError("breakpoints must be strictly increasing in u and s")
            object.__setattr__(self, "breakpoints", pts)
        elif self.breakpoints:
            raise ValueError("breakpoints are only meaningful for piecewise schedules")

    def __call__(self, u):
        return schedule_eval(self, u)


def schedule_eval(sch: Schedule, u):
    """Evaluate the schedule at u = t / T in [0, 1]."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    if sch.kind == "linear":
        s = u
    elif sch.kind == "quadratic":
        s = u**2
    elif sch.kind == "cubic":
        s = u**3
    elif sch.kind == "sigmoid":
        s = (_sigmoid_raw(u) - _SIG0) / (_SIG1 - _SIG0)
    else:
        us = np.array([p[0] for p in sch.breakpoints])
        ss = np.array([p[1] for p in sch.breakpoints])
        s = np.interp(u, us, ss)
    return float(s) if np.isscalar(u) or np.ndim(u) == 0 else s


def schedule_arrays(sch: Schedule):
    """(kind code, u knots, s knots) for compiled integration kernels."""
    code = SCHEDULE_KINDS.index(sch.kind)
    if sch.kind == "piecewise":
        us = np.array([p[0] for p in sch.breakpoints])
        ss = np.array([p[1] for p in sch.breakpoints])
    else:
        us = np.zeros(0)
        ss = np.zeros(0)
    return code, us, ss


# -- one annealing experiment --------------------------------------------------


@dataclass(frozen=True)
class AnnealSpec:
    """Problem encoding + schedule + total time + optional catalyst.

    `start_weight` and `problem_weight` scale the driver and problem terms;
    they exist as test hooks (set one to 0 to isolate the other term) and
    default to the physical value 1.
    """

    encoding: ProblemEncoding
    schedule: Schedule = field(default_factory=Schedule)
    total_time: float = 1.0
    catalyst: str = "none"
    lam: float = 0.0
    start_weight: float = 1.0
    problem_weight: float = 1.0

    def __post_init__(self):
        if self.catalyst not in CATALYSTS:
            raise ValueError(f"unknown catalyst {self.catalyst!r}")
        if not (self.total_time > 0 and math.isfinite(self.total_time)):
            raise ValueError("total_time must be positive and finite")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")
        if self.catalyst == "none" and self.lam != 0.0:
            raise ValueError("lam must be 0 without a catalyst")

    @property
    def num_qubits(self) -> int:
        return self.encoding.num_qubits

    @property
    def dimension(self) -> int:
        return self.encoding.hilbert_dim


def sum_bit_flips(v: np.ndarray, n: int) -> np.ndarray:
    """(sum_i sigma^x_i) v without any index tables: N strided adds."""
    out = np.zeros_like(v)
    for b in range(n):
        w = v.reshape(-1, 2, 1 << b)
        o = out.reshape(-1, 2, 1 << b)
        o[:, 0, :] += w[:, 1, :]
        o[:, 1, :] += w[:, 0, :]
    return out


def apply_H(spec: AnnealSpec, s: float, v: np.ndarray) -> np.ndarray:
    """H(s) v with diagonal and off-diagonal parts fused in one pass.

    The three terms are never materialized as a matrix sum; the catalyst
    branch reuses the single-flip pass (and applies it twice for the
    non-stoquastic square).
    """
    n = spec.num_qubits
    if v.shape != (1 << n,):
        raise DimensionMismatch(f"state has shape {v.shape}, expected ({1 << n},)")
    s = float(s)
    a = (1.0 - s) * spec.start_weight
    out = (s * spec.problem_weight) * spec.encoding.diagonal() * v
    cat = spec.lam * s * (1.0 - s) if spec.catalyst != "none" and spec.lam != 0.0 else 0.0
    if a != 0.0 or cat != 0.0:
        sv = sum_bit_flips(v, n)
        if a != 0.0:
            out += a * (0.5 * n) * v
            out -= a * 0.5 * sv
        if cat != 0.0:
            if spec.catalyst == "stoquastic":
                out += cat * sv
            else:
                out += cat * sum_bit_flips(sv, n)
    return out


def dense_H(spec: AnnealSpec, s: float) -> np.ndarray:
    """Explicit dense H(s); test oracle for the fused apply (small N)."""
    n = spec.num_qubits
    if n > 14:
        raise TooLarge("dense oracle limited to 14 qubits")
    s = float(s)
    h = (1.0 - s) * spec.start_weight * build_start(n).toarray()
    h += np.diag(s * spec.problem_weight * spec.encoding.diagonal())
    if spec.catalyst != "none" and spec.lam != 0.0:
        h += spec.lam * s * (1.0 - s) * build_catalyst(n, spec.catalyst).toarray()
    return h
