"""Low-lying spectrum of H(s) along the anneal and the minimum gap.

Levels are computed on a coarse grid with a restarted Krylov eigensolver
on the fused matrix-free apply and interpolated with cubic splines.  With
g symmetry-equivalent minimizers, sorted levels 0..g-1 all run into the
ground energy; the relevant gap is between the curve the anneal follows
(level 0) and the lowest curve that does not end in the ground multiplet
(level g).  Differences among adjacent sorted levels are useless here:
at s = 0 the driver's first excited multiplet is N-fold degenerate, so
level g and level g-1 coincide there and their difference is identically
zero for every instance.  Sorted-order tracking stands in for eigenvector
continuation (curves of a real symmetric pencil generically avoid
crossing); a fine-grid dense oracle guards the whole construction.  A
final exact solve at the spline argmin replaces the interpolated minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import NoConvergence
from .hamiltonian import AnnealSpec, apply_H

GRID_STEP = 0.1
EXTRA_LEVELS = 3
EIG_TOL = 1e-9


@dataclass
class GapResult:
    """Minimum relevant gap along the anneal."""

    delta: float
    s_star: float
    grid_s: np.ndarray
    grid_levels: np.ndarray  # shape (len(grid_s), k), rows ascending
    degeneracy: int


def _require_catalyst_free(spec: AnnealSpec) -> None:
    if spec.catalyst != "none":
        raise ValueError("gap evaluation is defined for catalyst-free anneals only")


def low_eigs(spec: AnnealSpec, s: float, k: int, return_vectors: bool = False):
    """k algebraically smallest eigenvalues of H(s), ascending, counted
    with multiplicity.

    One restarted Krylov (ARPACK) solve per eigenpair, with converged
    eigenvectors deflated upward by a spectral-range shift: a single-vector
    Krylov space cannot see a degenerate copy, and the symmetry multiplets
    here are exactly degenerate, so the one-at-a-time deflation is what
    certifies multiplicities.  Start vectors are seeded for reproducibility.
    """
    _require_catalyst_free(spec)
    dim = spec.dimension
    if not 0 < k < dim:
        raise ValueError(f"need 0 < k < {dim}, got {k}")
    diag = spec.encoding.diagonal()
    spread = float(diag.max() - diag.min()) + spec.num_qubits + 10.0
    tie_tol = 1e-10 * spread

    vals: list[float] = []
    vecs: list[np.ndarray] = []

    def matvec(v):
        w = apply_H(spec, s, v)
        for q in vecs:
            w += spread * (q @ v) * q
        return w

    probe = np.random.default_rng(1).standard_normal(dim)
    if np.linalg.norm(apply_H(spec, s, probe)) <= 1e-13 * np.linalg.norm(probe):
        # identically zero operator (reachable through the scale hooks)
        if return_vectors:
            basis = np.eye(dim)[:, :k]
            return np.zeros(k), basis
        return np.zeros(k)

    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)

    def solve(kk, tag):
        v0 = np.random.default_rng([0, tag]).standard_normal(dim)
        try:
            return eigsh(op, k=kk, which="SA", tol=EIG_TOL, v0=v0,
                         ncv=min(dim, max(2 * kk + 1, 20)), maxiter=dim * 300)
        except ArpackNoConvergence as exc:
            raise NoConvergence(
                f"eigensolver did not converge at s={s}: {exc}"
            ) from None

    def absorb(new_vals, new_vecs):
        for col in range(len(new_vals)):
            q = new_vecs[:, col].copy()
            for prev in vecs:
                q -= (prev @ q) * prev
            nrm = np.linalg.norm(q)
            if nrm < 1e-8:
                continue
            vals.append(float(new_vals[col]))
            vecs.append(q / nrm)

    # bulk solve, then certify: a Krylov space built from one vector can
    # miss exactly degenerate copies, so deflate everything found and keep
    # asking for the smallest remaining level until it clears the top of
    # the current candidate set (any missed copy would surface below it).
    absorb(*solve(k, 0))
    for attempt in range(1, 4 * k + 2):
        if len(vals) >= k:
            order = np.argsort(vals)
            top_of_k = np.array(vals)[order[k - 1]]
        else:
            top_of_k = np.inf
        nxt_vals, nxt_vecs = solve(1, attempt)
        if nxt_vals[0] >= top_of_k - tie_tol:
            break
        absorb(nxt_vals, nxt_vecs)
    else:
        raise NoConvergence(f"could not certify {k} lowest levels at s={s}")

    order = np.argsort(vals)[:k]
    out_vals = np.array(vals)[order]
    if return_vectors:
        return out_vals, np.column_stack(vecs)[:, order]
    return out_vals


def min_gap(spec: AnnealSpec, grid_step: float = GRID_STEP,
            extra_levels: int = EXTRA_LEVELS) -> GapResult:
    """Minimum gap between the followed ground curve and the first curve
    that does not end in the ground multiplet.

    Evaluates g + extra_levels lowest levels at s = 0, grid_step, ..., 1,
    splines the sorted levels, minimizes spline_g - spline_0, then refines
    with one exact solve at the argmin.
    """
    _require_catalyst_free(spec)
    g = spec.encoding.degeneracy
    k = g + extra_levels
    grid_s = np.round(np.arange(0.0, 1.0 + 0.5 * grid_step, grid_step), 12)
    levels = np.vstack([low_eigs(spec, s, k) for s in grid_s])

    lower = CubicSpline(grid_s, levels[:, 0])
    upper = CubicSpline(grid_s, levels[:, g])

    def gap_fn(s):
        return float(upper(s) - lower(s))

    dense = np.linspace(0.0, 1.0, 2001)
    vals = upper(dense) - lower(dense)
    i = int(np.argmin(vals))
    lo = dense[max(i - 1, 0)]
    hi = dense[min(i + 1, len(dense) - 1)]
    if hi > lo:
        res = minimize_scalar(gap_fn, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6})
        s_star = float(np.clip(res.x, 0.0, 1.0))
        if gap_fn(s_star) > vals[i]:
            s_star = float(dense[i])
    else:
        s_star = float(dense[i])

    exact = low_eigs(spec, s_star, k)
    delta = float(exact[g] - exact[0])
    return GapResult(delta, s_star, grid_s, levels, g)
