import numpy as np
import pytest

from foldanneal.hamiltonian import AnnealSpec, Schedule, dense_H
from foldanneal.spectra import GapResult, low_eigs, min_gap


def _spec(enc, **kw):
    return AnnealSpec(enc, Schedule("linear"), total_time=1.0, **kw)


def test_low_eigs_at_start_matches_driver_spectrum(enc_2d6):
    vals = low_eigs(_spec(enc_2d6), 0.0, k=5)
    assert np.allclose(vals, [0, 1, 1, 1, 1], atol=1e-7)


def test_low_eigs_at_end_matches_diagonal(enc_2d6):
    vals = low_eigs(_spec(enc_2d6), 1.0, k=6)
    expected = np.sort(enc_2d6.diagonal())[:6]
    assert np.allclose(vals, expected, atol=1e-7)


def test_low_eigs_mid_anneal_matches_dense(enc_2d6):
    vals = low_eigs(_spec(enc_2d6), 0.5, k=8)
    dense = np.linalg.eigvalsh(dense_H(_spec(enc_2d6), 0.5))[:8]
    assert np.allclose(vals, dense, atol=1e-6)


def test_low_eigs_rejects_catalyst(enc_2d6):
    spec = AnnealSpec(enc_2d6, Schedule("linear"), 1.0, catalyst="stoquastic", lam=0.4)
    with pytest.raises(ValueError):
        low_eigs(spec, 0.5, k=3)


def test_grid_levels_scale_linearly_without_driver(enc_2d6):
    # driver turned off: H(s) = s * diag, so every level is s * d_k
    spec = _spec(enc_2d6, start_weight=0.0)
    g = enc_2d6.degeneracy
    res = min_gap(spec)
    d = np.sort(enc_2d6.diagonal())[: g + 3]
    for row, s in zip(res.grid_levels, res.grid_s):
        assert np.allclose(row, s * d, atol=1e-6 * max(1.0, abs(s * d[-1])))


def test_min_gap_matches_fine_grid_dense_scan(instances_2d6, mj):
    from foldanneal.encoder import encode_instance

    for rec in instances_2d6[:3]:
        enc = encode_instance(rec, mj)
        spec = _spec(enc)
        res = min_gap(spec)
        assert isinstance(res, GapResult)
        g = enc.degeneracy
        fine = np.inf
        for s in np.arange(0.0, 1.0001, 0.005):
            vals = np.linalg.eigvalsh(dense_H(spec, s))
            fine = min(fine, vals[g] - vals[0])
        assert res.delta == pytest.approx(fine, rel=0.05)
        assert 0.0 <= res.s_star <= 1.0
        assert res.degeneracy == g


def test_min_gap_invariant_under_diagonal_shift(enc_2d6, fake_encoding):
    base = min_gap(_spec(enc_2d6))
    shifted_diag = enc_2d6.diagonal() + 7.5
    shifted = fake_encoding(shifted_diag, ground_indices=enc_2d6.ground_indices)
    res = min_gap(_spec(shifted))
    assert res.delta == pytest.approx(base.delta, rel=1e-3)


def test_grid_levels_sorted_rows(enc_2d6):
    res = min_gap(_spec(enc_2d6))
    assert np.all(np.diff(res.grid_levels, axis=1) >= -1e-9)
    assert res.grid_levels.shape == (11, enc_2d6.degeneracy + 3)
    assert res.delta > 0
