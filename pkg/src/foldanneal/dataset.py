"""Benchmark instance generation: exhaustive enumeration of conformations,
rejection of sequences with degenerate minima, and persistence.

An instance is kept only if its minimum-energy conformation is unique up
to lattice symmetry (one canonical ground walk); such sequences behave
like real folders while remaining hard optimization targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .lattice import (
    AMINO_ACIDS,
    STEPS,
    Peptide,
    TurnString,
    Walk,
    canonical_turns,
    decode_walk,
    encode_walk,
)

# Depth-first enumeration is exhaustive; these bounds keep the walk count
# within a desk-scale memory/time budget.
MAX_LENGTH = {2: 12, 3: 10}

# Energies are floats; two walks within this tolerance of the minimum are
# treated as co-minimal, so near-degenerate sequences are rejected rather
# than accepted on rounding luck.
DEGENERACY_TOL = 1e-9


@dataclass
class InstanceRecord:
    """One benchmark instance with its exhaustive ground-truth data."""

    peptide: Peptide
    ground_energy: float
    ground_walks: tuple[Walk, ...]          # canonical, deduplicated
    ground_bitstrings: tuple[TurnString, ...]  # all minimizers, raw
    enumeration_count: int                  # self-avoiding walks examined

    @property
    def is_ugem(self) -> bool:
        return len(self.ground_walks) == 1

    @property
    def id(self) -> str:
        return self.peptide.id


def _contact_pairs(length: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(length) for j in range(i + 3, length)]


def enumerate_minima(p: Peptide, mj):
    """Exact global minimum over all self-avoiding conformations.

    Returns (ground_energy, canonical_ground_walks, ground_turnstrings,
    enumeration_count).  Ground walks are deduplicated by canonical form;
    ground turn strings keep every raw minimizer.
    """
    length = len(p)
    if length > MAX_LENGTH[p.dim]:
        raise TooLarge(
            f"length {length} exceeds enumeration guard {MAX_LENGTH[p.dim]} in {p.dim}D"
        )
    steps = STEPS[p.dim]
    nsteps = len(steps)
    mjrows = [mj.row(a) for a in p.sequence]
    seq_idx = [AMINO_ACIDS.index(a) for a in p.sequence]
    pairs = _contact_pairs(length)

    origin = (0,) * p.dim
    positions = [origin]
    occupied = {origin}
    codes: list[int] = []
    best = np.inf
    best_codes: list[tuple[int, ...]] = []
    count = 0

    def score() -> float:
        e = 0.0
        for i, j in pairs:
            d = 0
            pi, pj = positions[i], positions[j]
            for a, b in zip(pi, pj):
                d += abs(a - b)
            if d == 1:
                e += mjrows[i][seq_idx[j]]
        return e

    def recurse():
        nonlocal best, count
        if len(codes) == length - 1:
            count += 1
            e = score()
            if e < best - DEGENERACY_TOL:
                best = e
                best_codes.clear()
                best_codes.append(tuple(codes))
            elif abs(e - best) <= DEGENERACY_TOL:
                best_codes.append(tuple(codes))
            return
        last = positions[-1]
        for c in range(nsteps):
            nxt = tuple(x + d for x, d in zip(last, steps[c]))
            if nxt in occupied:
                continue
            positions.append(nxt)
            occupied.add(nxt)
            codes.append(c)
            recurse()
            codes.pop()
            occupied.remove(nxt)
            positions.pop()

    recurse()

    ground_strings = tuple(TurnString(p.dim, c) for c in best_codes)
    canon = {}
    for ts in ground_strings:
        canon.setdefault(canonical_turns(decode_walk(ts)), None)
    ground_walks = tuple(decode_walk(TurnString(p.dim, c)) for c in sorted(canon))
    return float(best), ground_walks, ground_strings, count


def make_record(p: Peptide, mj) -> InstanceRecord:
    e0, walks, strings, count = enumerate_minima(p, mj)
    return InstanceRecord(p, e0, walks, strings, count)


def filter_ugem(records) -> list[InstanceRecord]:
    """Keep only instances whose canonical ground walk is unique."""
    return [r for r in records if r.is_ugem]


def random_sequence(rng, length: int) -> str:
    """Uniform sampling with replacement from the 20 standard residues."""
    return "".join(AMINO_ACIDS[k] for k in rng.integers(0, 20, size=length))


def generate_dataset(dim: int, length: int, count: int, seed: int, mj,
                     max_candidates: int | None = None) -> list[InstanceRecord]:
    """Rejection-sample `count` unique-ground-minimum instances.

    Deterministic for a fixed seed and independent of any parallel split:
    candidate k always draws from the stream (seed, dim, length, k).

    Some cells are empty: on the square lattice at length 5 every
    achievable contact set has more than one canonical realization, so no
    sequence has a unique minimum.  The candidate cap turns that into an
    error instead of a spin.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if max_candidates is None:
        max_candidates = 1000 + 500 * count
    out = []
    candidate = 0
    while len(out) < count:
        if candidate >= max_candidates:
            raise RuntimeError(
                f"{dim}D length {length}: {len(out)}/{count} unique-minimum "
                f"instances after {candidate} candidates; this cell may admit none"
            )
        rng = np.random.default_rng([seed, dim, length, candidate])
        seq = random_sequence(rng, length)
        pid = f"{dim}d{length:02d}-s{seed}-c{candidate:06d}"
        rec = make_record(Peptide(pid, seq, dim), mj)
        if rec.is_ugem:
            out.append(rec)
        candidate += 1
    return out


# -- persistence -------------------------------------------------------------
#
# Line-delimited records; one JSON object per line.  Energies are printed
# with 12 significant digits.


def record_to_json_dict(r: InstanceRecord) -> dict:
    return {
        "id": r.peptide.id,
        "dim": r.peptide.dim,
        "sequence": r.peptide.sequence,
        "ground_energy": float(f"{r.ground_energy:.12g}"),
        "ground_walk_turns": [list(encode_walk(w).codes) for w in r.ground_walks],
        "ground_bitstrings": [ts.to_bitstring() for ts in r.ground_bitstrings],
        "enumeration_count": r.enumeration_count,
    }


def record_from_json_dict(obj: dict) -> InstanceRecord:
    dim = obj["dim"]
    pep = Peptide(obj["id"], obj["sequence"], dim)
    walks = tuple(
        decode_walk(TurnString(dim, tuple(codes))) for codes in obj["ground_walk_turns"]
    )
    strings = tuple(TurnString.from_bitstring(dim, s) for s in obj["ground_bitstrings"])
    return InstanceRecord(pep, obj["ground_energy"], walks, strings, obj["enumeration_count"])


def record_to_json(r: InstanceRecord) -> str:
    return json.dumps(record_to_json_dict(r), separators=(",", ":"))


def record_from_json(line: str) -> InstanceRecord:
    return record_from_json_dict(json.loads(line))


def write_instances(records, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for r in records:
            fh.write(record_to_json(r) + "\n")


def read_instances(path) -> list[InstanceRecord]:
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.strip():
                out.append(record_from_json(line))
    return out
