import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldanneal.binpoly import (
    BinPoly,
    dense_values,
    dumps_pubo,
    loads_pubo,
    read_pubo,
    write_pubo,
)
from foldanneal.errors import MissingVariable


def x(i):
    return BinPoly.var(i)


def all_assignments(n):
    return list(itertools.product((0, 1), repeat=n))


@st.composite
def polys(draw, max_vars=6, max_terms=6):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = tuple(sorted(draw(st.sets(st.integers(0, max_vars - 1), max_size=3))))
        terms[mono] = draw(
            st.floats(-4, 4, allow_nan=False, allow_infinity=False).filter(
                lambda v: abs(v) > 1e-9
            )
        )
    return BinPoly(terms)


def test_idempotency():
    assert x(1) * x(1) == x(1)
    one_minus = BinPoly.const(1) - x(1)
    assert one_minus * one_minus == one_minus


def test_canonical_form_no_zero_terms_and_sorted_keys():
    p = x(3) * x(1) + BinPoly({(2, 2, 1): 2.0})
    assert all(mono == tuple(sorted(set(mono))) for mono in p.terms)
    q = p - p
    assert q == BinPoly.zero() and len(q) == 0


def test_construction_order_gives_identical_terms():
    a = (x(0) + x(1)) * (x(1) + x(2))
    b = x(0) * x(1) + x(0) * x(2) + x(1) + x(1) * x(2)
    assert a.terms == b.terms


@settings(max_examples=50, deadline=None)
@given(polys(), polys())
def test_mul_matches_pointwise_product(p, q):
    nvars = 6
    prod = p * q
    for sigma in all_assignments(nvars):
        assert prod.eval(sigma) == pytest.approx(p.eval(sigma) * q.eval(sigma), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(polys(), polys(), polys())
def test_ring_laws_under_exhaustive_evaluation(p, q, r):
    nvars = 6
    lhs = (p * q) * r
    rhs = p * (q * r)
    dist_l = p * (q + r)
    dist_r = p * q + p * r
    for sigma in all_assignments(nvars):
        assert lhs.eval(sigma) == pytest.approx(rhs.eval(sigma), abs=1e-8)
        assert (p * q).eval(sigma) == pytest.approx((q * p).eval(sigma), abs=1e-9)
        assert dist_l.eval(sigma) == pytest.approx(dist_r.eval(sigma), abs=1e-8)


def test_eval_basics():
    assert BinPoly.const(2.5).eval(()) == 2.5
    p = x(1) * x(3)
    assert p.eval((1, 0, 1, 0)) == 0.0
    assert p.eval((0, 1, 0, 1)) == 1.0


def test_eval_term_by_term_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        terms = {}
        for _ in range(5):
            mono = tuple(sorted(set(rng.integers(0, 5, size=rng.integers(0, 3)))))
            terms[mono] = float(rng.normal())
        p = BinPoly(terms)
        sigma = tuple(int(b) for b in rng.integers(0, 2, size=5))
        expected = sum(
            c * int(all(sigma[i] for i in mono)) for mono, c in terms.items()
        )
        assert p.eval(sigma) == pytest.approx(expected, abs=1e-12)


def test_eval_missing_variable():
    with pytest.raises(MissingVariable):
        (x(0) * x(4)).eval((1, 1))


def test_substitute_constants():
    p = x(1) * x(2)
    assert p.substitute(1, 1) == x(2)
    assert p.substitute(1, 0) == BinPoly.zero()


def test_substitute_polynomial_then_eval_matches_extension():
    p = x(0) * x(1) + 2.0 * x(2)
    value = BinPoly.const(1) - x(3)
    q = p.substitute(1, value)
    for sigma in all_assignments(5):
        extended = dict(enumerate(sigma))
        extended[1] = value.eval(sigma)
        assert q.eval(sigma) == pytest.approx(p.eval(extended), abs=1e-12)


def test_substitution_commutes_with_eval_exhaustively():
    rng = np.random.default_rng(9)
    for _ in range(10):
        terms = {
            tuple(sorted(set(rng.integers(0, 5, size=2)))): float(rng.normal())
            for _ in range(4)
        }
        p = BinPoly(terms)
        for var in range(5):
            for bit in (0, 1):
                q = p.substitute(var, bit)
                for sigma in all_assignments(5):
                    if sigma[var] == bit:
                        assert q.eval(sigma) == pytest.approx(p.eval(sigma), abs=1e-12)


def test_dense_values_matches_eval():
    rng = np.random.default_rng(2)
    terms = {
        tuple(sorted(set(rng.integers(0, 8, size=rng.integers(0, 4))))): float(rng.normal())
        for _ in range(12)
    }
    p = BinPoly(terms)
    masks, coefs = p.to_arrays()
    dense = dense_values(masks, coefs, 8)
    for k in (0, 1, 17, 100, 255):
        sigma = tuple((k >> i) & 1 for i in range(8))
        assert dense[k] == pytest.approx(p.eval(sigma), abs=1e-9)


def test_array_round_trip():
    p = 1.5 * x(0) * x(3) - 2.0 * x(2) + BinPoly.const(0.25)
    assert BinPoly.from_arrays(*p.to_arrays()) == p


def test_pubo_text_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(13)
    terms = {
        tuple(sorted(set(rng.integers(0, 10, size=3)))): float(rng.normal()) * 10**k
        for k in range(-8, 4)
    }
    p = BinPoly(terms)
    assert loads_pubo(dumps_pubo(p)).terms == p.terms
    path = tmp_path / "poly.pubo"
    write_pubo(p, path)
    assert read_pubo(path).terms == p.terms


def test_scalar_arithmetic():
    p = 2 * x(0) + 1
    assert p.eval((0,)) == 1.0
    assert p.eval((1,)) == 3.0
    assert (p - 1).eval((1,)) == 2.0
    assert (-p).eval((1,)) == -3.0
