import itertools

import numpy as np
import pytest

from foldanneal import mj as mjmod
from foldanneal.errors import (
    AsymmetricMatrix,
    MissingAminoAcid,
    ParseError,
    PositiveEntry,
    UnknownAminoAcid,
)
from foldanneal.lattice import AMINO_ACIDS


def test_bundled_table_checksum():
    text = mjmod.bundled_text()
    assert mjmod.sha256_of_text(text) == mjmod.BUNDLED_SHA256


def test_bundled_table_loads_and_validates(mj):
    assert mj.entries.shape == (20, 20)
    assert np.array_equal(mj.entries, mj.entries.T)
    assert np.all(mj.entries < 0)


def test_lookup_symmetry_all_pairs(mj):
    for a, b in itertools.product(AMINO_ACIDS, repeat=2):
        assert mj.lookup(a, b) == mj.lookup(b, a)


def test_lookup_diagonal(mj):
    assert mj.lookup("G", "G") == mj.entries[AMINO_ACIDS.index("G")][AMINO_ACIDS.index("G")]


def test_lookup_unknown_code(mj):
    with pytest.raises(UnknownAminoAcid):
        mj.lookup("B", "G")


def test_global_minimum_matches_scan(mj):
    by_lookup = min(
        mj.lookup(a, b) for a, b in itertools.product(AMINO_ACIDS, repeat=2)
    )
    assert by_lookup == mj.entries.min()


def test_round_trip_is_byte_identical(tmp_path, mj):
    path = tmp_path / "table.txt"
    mjmod.save_mj(mj, path)
    first = path.read_bytes()
    mjmod.save_mj(mjmod.load_mj(path), path)
    assert path.read_bytes() == first
    # the bundled asset itself is in canonical form
    assert mjmod.dumps_mj(mjmod.load_default()) == mjmod.bundled_text()


def _table_lines():
    return mjmod.bundled_text().splitlines()


def test_asymmetric_entry_rejected():
    lines = _table_lines()
    row = lines[1].split()
    row[3] = str(float(row[3]) - 0.5)  # break e(A, D) only
    lines[1] = " ".join(row)
    with pytest.raises(AsymmetricMatrix):
        mjmod.parse_mj("\n".join(lines))


def test_positive_entry_rejected():
    lines = _table_lines()
    row = lines[1].split()
    row[0] = "0.25"
    lines[1] = " ".join(row)
    # keep symmetry so the positivity check is what fires
    with pytest.raises((PositiveEntry, AsymmetricMatrix)):
        mjmod.parse_mj("\n".join(lines))


def test_missing_amino_acid_rejected():
    lines = _table_lines()
    lines[0] = lines[0].replace("W", "X")
    with pytest.raises(MissingAminoAcid):
        mjmod.parse_mj("\n".join(lines))


def test_wrong_column_count_rejected():
    lines = _table_lines()
    lines[2] = lines[2] + " -1.0"
    with pytest.raises(ParseError):
        mjmod.parse_mj("\n".join(lines))


def test_wrong_row_count_rejected():
    lines = _table_lines()
    with pytest.raises(ParseError):
        mjmod.parse_mj("\n".join(lines[:-1]))


def test_non_numeric_rejected():
    lines = _table_lines()
    lines[5] = lines[5].replace(lines[5].split()[0], "abc", 1)
    with pytest.raises(ParseError):
        mjmod.parse_mj("\n".join(lines))


def test_reordered_header_rejected():
    lines = _table_lines()
    cells = lines[0].split()
    cells[0], cells[1] = cells[1], cells[0]
    lines[0] = " ".join(cells)
    with pytest.raises(ParseError):
        mjmod.parse_mj("\n".join(lines))
