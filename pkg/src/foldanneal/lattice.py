"""Square/cubic lattice geometry: turn codes, walks, contacts, energies.

Conventions frozen here and relied on everywhere else:

* Turn ``t`` of an ``L``-residue chain moves residue ``t`` to residue
  ``t + 1``; a conformation has ``L - 1`` turns.
* Each turn is a little-endian bit group (2 bits in 2D, 3 bits in 3D);
  the group's integer value is its *code*.
* Code -> step tables: 2D ``{0: +x, 1: +y, 2: -x, 3: -y}``;
  3D ``{0: +x, 1: -x, 2: +y, 3: -y, 4: +z, 5: -z}`` with codes 6 and 7
  invalid (they map to no direction).
* In a computational-basis index, qubit 0 is the lowest-order bit and
  turn ``t`` occupies qubits ``[B*t, B*(t+1))`` with ``B`` bits per turn.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidTurnCode, NotSelfAvoiding, UnknownAminoAcid

AMINO_ACIDS = "ARNDCQEGHILKMFPSTWYV"

BITS_PER_TURN = {2: 2, 3: 3}

STEPS = {
    2: ((1, 0), (0, 1), (-1, 0), (0, -1)),
    3: ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)),
}
INVALID_CODES_3D = (6, 7)

_STEP_TO_CODE = {dim: {step: c for c, step in enumerate(steps)} for dim, steps in STEPS.items()}


@dataclass(frozen=True)
class Peptide:
    """A problem instance: residue sequence plus lattice dimension."""

    id: str
    sequence: str
    dim: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if not 4 <= len(self.sequence) <= 64:
            raise ValueError(f"sequence length {len(self.sequence)} outside [4, 64]")
        bad = set(self.sequence) - set(AMINO_ACIDS)
        if bad:
            raise UnknownAminoAcid(f"not standard amino acids: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.sequence)

    @property
    def num_turns(self) -> int:
        return len(self.sequence) - 1

    @property
    def num_qubits(self) -> int:
        return BITS_PER_TURN[self.dim] * self.num_turns


@dataclass(frozen=True)
class TurnString:
    """A conformation encoded as one direction code per turn."""

    dim: int
    codes: tuple[int, ...]

    def __post_init__(self):
        ncodes = 1 << BITS_PER_TURN[self.dim]
        if any(not 0 <= c < ncodes for c in self.codes):
            raise ValueError(f"turn codes must lie in [0, {ncodes})")

    @property
    def bits_per_turn(self) -> int:
        return BITS_PER_TURN[self.dim]

    @property
    def num_qubits(self) -> int:
        return self.bits_per_turn * len(self.codes)

    @property
    def has_invalid_codes(self) -> bool:
        return self.dim == 3 and any(c in INVALID_CODES_3D for c in self.codes)

    def to_index(self) -> int:
        """Computational-basis index (qubit 0 = lowest-order bit)."""
        b = self.bits_per_turn
        return sum(c << (b * t) for t, c in enumerate(self.codes))

    @classmethod
    def from_index(cls, dim: int, num_turns: int, index: int) -> "TurnString":
        b = BITS_PER_TURN[dim]
        mask = (1 << b) - 1
        return cls(dim, tuple((index >> (b * t)) & mask for t in range(num_turns)))

    def to_bits(self) -> tuple[int, ...]:
        """Bit list with qubit 0 first."""
        b = self.bits_per_turn
        return tuple((c >> k) & 1 for c in self.codes for k in range(b))

    @classmethod
    def from_bits(cls, dim: int, bits) -> "TurnString":
        b = BITS_PER_TURN[dim]
        if len(bits) % b:
            raise ValueError(f"bit count {len(bits)} not a multiple of {b}")
        codes = tuple(
            sum(bits[t * b + k] << k for k in range(b)) for t in range(len(bits) // b)
        )
        return cls(dim, codes)

    def to_bitstring(self) -> str:
        """'0'/'1' string with qubit 0 leftmost."""
        return "".join(str(b) for b in self.to_bits())

    @classmethod
    def from_bitstring(cls, dim: int, s: str) -> "TurnString":
        return cls.from_bits(dim, tuple(int(ch) for ch in s))


@dataclass(frozen=True)
class Walk:
    """Lattice positions of a chain, starting at the origin."""

    positions: tuple[tuple[int, ...], ...]
    self_avoiding: bool

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def dim(self) -> int:
        return len(self.positions[0])


@dataclass(frozen=True)
class ContactMap:
    """Non-bonded unit-distance residue pairs (i, j) with j - i >= 3."""

    pairs: frozenset

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)


def decode_walk(t: TurnString) -> Walk:
    """Follow a turn string from the origin.

    Raises InvalidTurnCode for 3D codes 6/7 (non-physical bitstrings).
    """
    steps = STEPS[t.dim]
    pos = (0,) * t.dim
    positions = [pos]
    for c in t.codes:
        if c >= len(steps):
            raise InvalidTurnCode(f"3D turn code {c:03b} has no direction")
        step = steps[c]
        pos = tuple(p + d for p, d in zip(pos, step))
        positions.append(pos)
    return Walk(tuple(positions), self_avoiding=len(set(positions)) == len(positions))


def encode_walk(w: Walk) -> TurnString:
    """Inverse of decode_walk: recover the code sequence from positions."""
    table = _STEP_TO_CODE[w.dim]
    codes = []
    for a, b in zip(w.positions, w.positions[1:]):
        step = tuple(y - x for x, y in zip(a, b))
        if step not in table:
            raise ValueError(f"positions {a} -> {b} are not one unit step apart")
        codes.append(table[step])
    return TurnString(w.dim, tuple(codes))


def contacts(w: Walk) -> ContactMap:
    """All pairs (i, j), j - i >= 3, at unit lattice distance."""
    if not w.self_avoiding:
        raise NotSelfAvoiding("contact map requires a self-avoiding walk")
    pos = w.positions
    pairs = set()
    for i in range(len(pos)):
        for j in range(i + 3, len(pos)):
            if sum(abs(a - b) for a, b in zip(pos[i], pos[j])) == 1:
                pairs.add((i, j))
    return ContactMap(frozenset(pairs))


def energy(p: Peptide, w: Walk, mj) -> float:
    """Sum of contact energies of w under the given contact-energy table.

    Contact pairs are summed in ascending (i, j) order so that repeated
    scoring of the same conformation is bitwise reproducible.
    """
    if len(p) != len(w):
        raise ValueError(f"peptide length {len(p)} != walk length {len(w)}")
    e = 0.0
    for i, j in contacts(w):
        e += mj.lookup(p.sequence[i], p.sequence[j])
    return e


@lru_cache(maxsize=None)
def point_group(dim: int):
    """Signed-permutation matrices of the lattice (8 in 2D, 48 in 3D).

    Each element is a tuple of (source_axis, sign) pairs; applying it to a
    vector v yields w with w[i] = sign_i * v[source_axis_i].
    """
    group = []
    for perm in itertools.permutations(range(dim)):
        for signs in itertools.product((1, -1), repeat=dim):
            group.append(tuple(zip(perm, signs)))
    return tuple(group)


def _apply_group_element(g, v):
    return tuple(s * v[a] for a, s in g)


def canonical_turns(w: Walk) -> tuple[int, ...]:
    """Lexicographically smallest code sequence over the point-group orbit."""
    if not w.self_avoiding:
        raise NotSelfAvoiding("canonical form requires a self-avoiding walk")
    table = _STEP_TO_CODE[w.dim]
    dirs = [
        tuple(b - a for a, b in zip(p, q)) for p, q in zip(w.positions, w.positions[1:])
    ]
    best = None
    for g in point_group(w.dim):
        codes = tuple(table[_apply_group_element(g, d)] for d in dirs)
        if best is None or codes < best:
            best = codes
    return best


def canonicalize(w: Walk) -> Walk:
    """Canonical representative of w's symmetry orbit (idempotent)."""
    return decode_walk(TurnString(w.dim, canonical_turns(w)))
