"""Compile a peptide into its turn-encoding binary-polynomial objective.

The objective over the turn bits is

    sum over pairs (i, j), j-i >= 3  of  E(a_i, a_j) * adjacency_ij
  + w * ( sum over pairs of overlap_ij  +  sum over turns of invalid_t )

where adjacency_ij / overlap_ij indicate |pos_j - pos_i| = 1 / pos_j = pos_i,
invalid_t flags the two unused 3D codes, and the penalty weight w exceeds
any achievable stabilization, so one violation always costs more than every
contact together (w = 1 + sum |E| over scoring pairs, margin >= 1).

Pair indicators are built by a transfer product over the window's turns:
the running state maps each reachable displacement to the polynomial (over
the window's bits) indicating that displacement.  Windows that contain an
invalid 3D code contribute nothing, because no direction indicator fires.
The construction is cross-checked exhaustively against decode-and-score.
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np

from .binpoly import BinPoly, dense_values
from .dataset import MAX_LENGTH, enumerate_minima
from .errors import TooLarge
from .lattice import BITS_PER_TURN, STEPS, Peptide, TurnString

DIAGONAL_GUARD_QUBITS = 26


def penalty_weight_for(p: Peptide, mj) -> float:
    """1 + sum of |contact energy| over all pairs with j - i >= 3."""
    w = 1.0
    seq = p.sequence
    for i in range(len(seq)):
        for j in range(i + 3, len(seq)):
            w += abs(mj.lookup(seq[i], seq[j]))
    return w


@lru_cache(maxsize=None)
def _direction_terms(dim: int):
    """Per valid code: (step, local bit masks, coefficients).

    The indicator of code c over a turn's bits is the product of literals
    (bit or 1-bit); expanding it gives +-1 coefficients on subsets of the
    turn's bits.
    """
    b = BITS_PER_TURN[dim]
    out = []
    for code, step in enumerate(STEPS[dim]):
        masks = [0]
        coefs = [1.0]
        for k in range(b):
            if (code >> k) & 1:
                masks = [m | (1 << k) for m in masks]
            else:
                masks = masks + [m | (1 << k) for m in masks]
                coefs = coefs + [-c for c in coefs]
        out.append((step, np.array(masks, dtype=np.int64), np.array(coefs)))
    return tuple(out)


def _merge(masks: np.ndarray, coefs: np.ndarray):
    """Combine like monomials and drop exact zeros."""
    um, inv = np.unique(masks, return_inverse=True)
    uc = np.bincount(inv, weights=coefs, minlength=len(um))
    keep = uc != 0.0
    return um[keep], uc[keep]


@lru_cache(maxsize=None)
def _window_states(dim: int, num_turns: int):
    """Transfer product over a window of `num_turns` turns at bit offset 0.

    Returns a dict mapping displacement -> (masks, coefs): the multilinear
    indicator polynomial of "the window walks exactly this displacement".
    """
    b = BITS_PER_TURN[dim]
    state = {(0,) * dim: (np.zeros(1, dtype=np.int64), np.ones(1))}
    for t in range(num_turns):
        shift = b * t
        nxt: dict[tuple, list] = {}
        for delta, (masks, coefs) in state.items():
            for step, dmasks, dcoefs in _direction_terms(dim):
                key = tuple(x + d for x, d in zip(delta, step))
                m = (masks[:, None] | (dmasks << shift)[None, :]).ravel()
                c = (coefs[:, None] * dcoefs[None, :]).ravel()
                slot = nxt.setdefault(key, [[], []])
                slot[0].append(m)
                slot[1].append(c)
        state = {
            k: _merge(np.concatenate(ms), np.concatenate(cs))
            for k, (ms, cs) in nxt.items()
        }
    return state


def _pair_indicator(dim: int, separation: int, kind: str):
    """Adjacency or overlap indicator for a window, masks at bit offset 0."""
    states = _window_states(dim, separation)
    if kind == "overlap":
        wanted = [(0,) * dim]
    elif kind == "adjacency":
        wanted = [step for step in STEPS[dim]]
    else:
        raise ValueError(f"unknown indicator kind {kind!r}")
    parts = [states[d] for d in wanted if d in states]
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    masks = np.concatenate([m for m, _ in parts])
    coefs = np.concatenate([c for _, c in parts])
    return _merge(masks, coefs)


# Pure-BinPoly twin of the transfer construction.  Slower, used to pin the
# vectorized route and as the large-multiplication benchmark subject.


def window_states_binpoly(dim: int, num_turns: int, bit_offset: int = 0):
    one = BinPoly.const(1.0)
    state = {(0,) * dim: one}
    for t in range(num_turns):
        shift = bit_offset + BITS_PER_TURN[dim] * t
        nxt: dict[tuple, BinPoly] = {}
        for delta, poly in state.items():
            for step, dmasks, dcoefs in _direction_terms(dim):
                key = tuple(x + d for x, d in zip(delta, step))
                dpoly = BinPoly.from_arrays(dmasks << shift, dcoefs)
                nxt[key] = nxt.get(key, BinPoly.zero()) + poly * dpoly
        state = {k: v for k, v in nxt.items() if len(v)}
    return state


class ProblemEncoding:
    """A peptide's objective over its turn bits, with exact ground data.

    The polynomial and the exhaustive ground enumeration are materialized
    lazily: qubit counts and penalty weights are available immediately even
    for sizes where expansion takes a while (a 21-qubit 3D chain expands to
    millions of monomials).
    """

    def __init__(self, peptide: Peptide, mj, penalty_weight: float | None = None,
                 ground=None):
        if len(peptide) > MAX_LENGTH[peptide.dim]:
            raise TooLarge(
                f"length {len(peptide)} exceeds guard {MAX_LENGTH[peptide.dim]} "
                f"in {peptide.dim}D"
            )
        self.peptide = peptide
        self.mj = mj
        self.penalty_weight = (
            float(penalty_weight) if penalty_weight is not None
            else penalty_weight_for(peptide, mj)
        )
        if ground is not None:
            self.__dict__["_ground"] = ground

    @property
    def peptide_id(self) -> str:
        return self.peptide.id

    @property
    def dim(self) -> int:
        return self.peptide.dim

    @property
    def num_qubits(self) -> int:
        return self.peptide.num_qubits

    @property
    def hilbert_dim(self) -> int:
        return 1 << self.num_qubits

    # -- exhaustive ground truth (lazy) ---------------------------------

    @cached_property
    def _ground(self):
        e0, walks, strings, count = enumerate_minima(self.peptide, self.mj)
        return e0, walks, strings, count

    @property
    def ground_energy(self) -> float:
        return self._ground[0]

    @property
    def ground_walks(self):
        return self._ground[1]

    @property
    def ground_turnstrings(self) -> tuple[TurnString, ...]:
        return self._ground[2]

    @property
    def ground_bitstrings(self) -> tuple[str, ...]:
        return tuple(ts.to_bitstring() for ts in self.ground_turnstrings)

    @cached_property
    def ground_indices(self) -> np.ndarray:
        """Computational-basis indices of all minimizers, ascending."""
        return np.array(sorted(ts.to_index() for ts in self.ground_turnstrings),
                        dtype=np.int64)

    @property
    def degeneracy(self) -> int:
        return len(self.ground_indices)

    @property
    def penalty_margin(self) -> float:
        """penalty_weight minus the worst achievable stabilization (>= 1)."""
        return self.penalty_weight - (penalty_weight_for(self.peptide, self.mj) - 1.0)

    # -- polynomial ------------------------------------------------------

    @cached_property
    def pubo_arrays(self):
        """(masks, coefficients) of the objective polynomial."""
        p = self.peptide
        b = BITS_PER_TURN[p.dim]
        length = len(p)
        w = self.penalty_weight
        all_masks = []
        all_coefs = []
        for i in range(length):
            for j in range(i + 2, length):
                sep = j - i
                if sep % 2 == 1:
                    if sep < 3:
                        continue
                    masks, coefs = _pair_indicator(p.dim, sep, "adjacency")
                    scale = self.mj.lookup(p.sequence[i], p.sequence[j])
                else:
                    masks, coefs = _pair_indicator(p.dim, sep, "overlap")
                    scale = w
                if len(masks):
                    all_masks.append(masks << (b * i))
                    all_coefs.append(coefs * scale)
        if p.dim == 3:
            # codes 6/7 <=> both high bits of the turn set
            inv = np.array([(1 << (3 * t + 1)) | (1 << (3 * t + 2))
                            for t in range(length - 1)], dtype=np.int64)
            all_masks.append(inv)
            all_coefs.append(np.full(len(inv), w))
        if not all_masks:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        return _merge(np.concatenate(all_masks), np.concatenate(all_coefs))

    @cached_property
    def pubo(self) -> BinPoly:
        return BinPoly.from_arrays(*self.pubo_arrays)

    @cached_property
    def _diagonal(self) -> np.ndarray:
        if self.num_qubits > DIAGONAL_GUARD_QUBITS:
            raise TooLarge(
                f"{self.num_qubits} qubits exceed the {DIAGONAL_GUARD_QUBITS}-qubit "
                "dense-diagonal guard"
            )
        masks, coefs = self.pubo_arrays
        return dense_values(masks, coefs, self.num_qubits)

    def diagonal(self) -> np.ndarray:
        """Objective value at every basis index (bit-order convention)."""
        return self._diagonal


def encode(p: Peptide, mj, penalty_weight: float | None = None) -> ProblemEncoding:
    return ProblemEncoding(p, mj, penalty_weight)


def encode_instance(record, mj) -> ProblemEncoding:
    """Encoding seeded with an InstanceRecord's ground enumeration."""
    ground = (record.ground_energy, record.ground_walks,
              record.ground_bitstrings, record.enumeration_count)
    return ProblemEncoding(record.peptide, mj, ground=ground)


def diagonal(enc: ProblemEncoding) -> np.ndarray:
    return enc.diagonal()
