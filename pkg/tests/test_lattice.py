import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldanneal.errors import InvalidTurnCode, NotSelfAvoiding, UnknownAminoAcid
from foldanneal.lattice import (
    STEPS,
    ContactMap,
    Peptide,
    TurnString,
    Walk,
    canonical_turns,
    canonicalize,
    contacts,
    decode_walk,
    encode_walk,
    energy,
    point_group,
)


def test_straight_walk_decodes_to_line():
    w = decode_walk(TurnString(2, (0,) * 5))
    assert w.positions == tuple((i, 0) for i in range(6))
    assert w.self_avoiding


def test_u_shape_forced_geometry():
    w = decode_walk(TurnString(2, (0, 1, 2)))
    assert w.positions == ((0, 0), (1, 0), (1, 1), (0, 1))
    assert w.self_avoiding


def test_immediate_backtrack_overlaps():
    w = decode_walk(TurnString(2, (0, 2)))
    assert w.positions == ((0, 0), (1, 0), (0, 0))
    assert not w.self_avoiding


def test_3d_invalid_codes_rejected():
    for bad in (6, 7):
        with pytest.raises(InvalidTurnCode):
            decode_walk(TurnString(3, (0, 2, bad)))


def test_code_tables_match_frozen_convention():
    assert STEPS[2] == ((1, 0), (0, 1), (-1, 0), (0, -1))
    assert STEPS[3] == (
        (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
    )


def test_bit_order_round_trip():
    ts = TurnString(2, (1, 2, 3))
    # turn t occupies bits [2t, 2t+2), qubit 0 is the lowest-order bit
    assert ts.to_index() == 1 + (2 << 2) + (3 << 4)
    assert TurnString.from_index(2, 3, ts.to_index()) == ts
    assert TurnString.from_bits(2, ts.to_bits()) == ts
    assert TurnString.from_bitstring(2, ts.to_bitstring()) == ts


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.data())
def test_decode_encode_round_trip(dim, data):
    ncodes = len(STEPS[dim])
    codes = tuple(
        data.draw(st.integers(0, ncodes - 1)) for _ in range(data.draw(st.integers(3, 8)))
    )
    ts = TurnString(dim, codes)
    assert encode_walk(decode_walk(ts)) == ts


def test_peptide_validation():
    with pytest.raises(UnknownAminoAcid):
        Peptide("x", "ABCD", 2)  # B is not a residue code
    with pytest.raises(ValueError):
        Peptide("x", "GGG", 2)  # too short
    with pytest.raises(ValueError):
        Peptide("x", "GGGG", 4)  # no such lattice


def test_contacts_straight_and_square():
    straight = decode_walk(TurnString(2, (0,) * 7))
    assert len(contacts(straight)) == 0
    square = decode_walk(TurnString(2, (0, 1, 2)))
    assert set(contacts(square).pairs) == {(0, 3)}


def test_contacts_requires_self_avoiding():
    with pytest.raises(NotSelfAvoiding):
        contacts(decode_walk(TurnString(2, (0, 2))))


def _coordinate_walks(dim, nsteps):
    """Independent walk generator: raw direction products, no turn codes."""
    for dirs in itertools.product(STEPS[dim], repeat=nsteps):
        pos = [(0,) * dim]
        for d in dirs:
            pos.append(tuple(a + b for a, b in zip(pos[-1], d)))
        if len(set(pos)) == len(pos):
            yield pos


def test_contacts_against_pairwise_oracle():
    # exhaustive at length 6: every self-avoiding walk, O(L^2) distance scan
    for pos in _coordinate_walks(2, 5):
        w = Walk(tuple(pos), True)
        expected = {
            (i, j)
            for i in range(6)
            for j in range(i + 3, 6)
            if abs(pos[i][0] - pos[j][0]) + abs(pos[i][1] - pos[j][1]) == 1
        }
        assert set(contacts(w).pairs) == expected


def test_contact_parity():
    for pos in _coordinate_walks(2, 6):
        for i, j in contacts(Walk(tuple(pos), True)):
            assert (j - i) % 2 == 1


def test_energy_straight_zero_and_square_single_contact(mj):
    p = Peptide("t", "CGGC", 2)
    straight = decode_walk(TurnString(2, (0, 0, 0)))
    assert energy(p, straight, mj) == 0.0
    square = decode_walk(TurnString(2, (0, 1, 2)))
    assert energy(p, square, mj) == mj.lookup("C", "C")


def test_energy_nonpositive_for_negative_table(mj):
    p = Peptide("t", "KWHYEC", 2)
    for pos in itertools.islice(_coordinate_walks(2, 5), 200):
        w = Walk(tuple(pos), True)
        assert energy(p, w, mj) <= 0.0


def test_energy_minimum_matches_full_enumeration_oracle(mj):
    # independent oracle: iterate coordinate walks directly
    p = Peptide("t", "CKWHEC", 2)
    oracle = min(
        energy(p, Walk(tuple(pos), True), mj) for pos in _coordinate_walks(2, 5)
    )
    from foldanneal.dataset import enumerate_minima

    e0, _, _, _ = enumerate_minima(p, mj)
    assert e0 == pytest.approx(oracle, abs=1e-12)


def test_point_group_sizes():
    assert len(point_group(2)) == 8
    assert len(point_group(3)) == 48


def test_canonicalize_straight_line_and_idempotence():
    down = decode_walk(TurnString(2, (3, 3, 3)))
    canon = canonicalize(down)
    assert canon.positions == tuple((i, 0) for i in range(4))
    assert canonicalize(canon) == canon


def test_canonicalize_mirror_images_coincide():
    w = decode_walk(TurnString(2, (0, 1, 0, 3, 0)))
    mirrored = Walk(tuple((x, -y) for x, y in w.positions), True)
    assert canonicalize(w) == canonicalize(mirrored)


def test_canonicalize_constant_on_orbits():
    rng = np.random.default_rng(3)
    group = point_group(2)
    for _ in range(25):
        while True:
            codes = tuple(rng.integers(0, 4, size=5))
            w = decode_walk(TurnString(2, codes))
            if w.self_avoiding:
                break
        base = canonical_turns(w)
        g = group[rng.integers(0, len(group))]
        image = Walk(
            tuple(tuple(s * p[a] for a, s in g) for p in w.positions), True
        )
        assert canonical_turns(image) == base


def test_orbit_sizes_divide_group_order():
    seen = {}
    for pos in _coordinate_walks(2, 4):
        key = canonical_turns(Walk(tuple(pos), True))
        seen[key] = seen.get(key, 0) + 1
    assert all(8 % size == 0 for size in seen.values())


def test_contact_map_iterates_sorted():
    cm = ContactMap(frozenset({(2, 5), (0, 3)}))
    assert list(cm) == [(0, 3), (2, 5)]
