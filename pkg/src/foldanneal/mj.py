"""Miyazawa-Jernigan contact-energy table: loading, validation, lookup.

The bundled asset is a transcription of the Miyazawa-Jernigan inter-residue
contact energies (e_ij, RT units); every entry is stabilizing (negative).
The loader accepts any 20x20 symmetric all-negative table in the same
format, so alternative potentials can be swapped in.

File format (hand-auditable): optional nothing, one header row with the 20
one-letter codes in the fixed order ARNDCQEGHILKMFPSTWYV, then 20 rows of
20 whitespace-separated energies.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    AsymmetricMatrix,
    MissingAminoAcid,
    ParseError,
    PositiveEntry,
    UnknownAminoAcid,
)
from .lattice import AMINO_ACIDS

BUNDLED_RESOURCE = "mj_contact_energies.txt"
# sha256 of the bundled table, recorded when the asset was ingested; the
# test suite re-hashes the file against this constant.
BUNDLED_SHA256 = "552a01b5819499ba534b58c1748d2c81d22f0567e7aabc93643c587019c05754"

_INDEX = {a: i for i, a in enumerate(AMINO_ACIDS)}


@dataclass(frozen=True)
class MJMatrix:
    """Validated 20x20 contact-energy table in ARNDCQEGHILKMFPSTWYV order."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (20, 20):
            raise ParseError(f"expected a 20x20 table, got shape {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ParseError("table contains non-finite entries")
        if not np.array_equal(e, e.T):
            raise AsymmetricMatrix("table is not exactly symmetric")
        if np.any(e >= 0):
            raise PositiveEntry("contact energies must all be negative")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    def lookup(self, a: str, b: str) -> float:
        try:
            return float(self.entries[_INDEX[a], _INDEX[b]])
        except KeyError as exc:
            raise UnknownAminoAcid(f"unknown amino-acid code {exc.args[0]!r}") from None

    def row(self, a: str) -> np.ndarray:
        if a not in _INDEX:
            raise UnknownAminoAcid(f"unknown amino-acid code {a!r}")
        return self.entries[_INDEX[a]]


def parse_mj(text: str) -> MJMatrix:
    """Parse the documented text format; no silent symmetrization."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty contact-energy file")
    header = lines[0].split()
    missing = set(AMINO_ACIDS) - set(header)
    if missing:
        raise MissingAminoAcid(f"header missing residues: {sorted(missing)}")
    if header != list(AMINO_ACIDS):
        raise ParseError("header must list the residues in the order " + AMINO_ACIDS)
    if len(lines) != 21:
        raise ParseError(f"expected 20 data rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split()
        if len(cells) != 20:
            raise ParseError(f"row has {len(cells)} columns, expected 20")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"non-numeric entry: {exc}") from None
    return MJMatrix(np.array(rows))


def load_mj(path) -> MJMatrix:
    with open(path, "r", encoding="ascii") as fh:
        return parse_mj(fh.read())


def dumps_mj(m: MJMatrix) -> str:
    """Canonical formatting; save(load(f)) is byte-identical for it."""
    out = [" ".join(AMINO_ACIDS)]
    for row in m.entries:
        out.append(" ".join(f"{v:.6g}" for v in row))
    return "\n".join(out) + "\n"


def save_mj(m: MJMatrix, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_mj(m))


def bundled_text() -> str:
    return resources.files("foldanneal.data").joinpath(BUNDLED_RESOURCE).read_text("ascii")


def load_default() -> MJMatrix:
    """The table shipped with the package."""
    return parse_mj(bundled_text())


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("ascii")).hexdigest()
