import numpy as np
import pytest

from foldanneal import generate_dataset, encode_instance
from foldanneal import mj as mjmod


@pytest.fixture(scope="session")
def mj():
    return mjmod.load_default()


@pytest.fixture(scope="session")
def instances_2d4(mj):
    """Pool of 2D length-4 instances (every sequence has the unique square
    ground state, so these are cheap exhaustive-check subjects)."""
    return generate_dataset(2, 4, 12, seed=11, mj=mj)


@pytest.fixture(scope="session")
def instances_2d6(mj):
    return generate_dataset(2, 6, 10, seed=7, mj=mj)


@pytest.fixture(scope="session")
def enc_2d6(instances_2d6, mj):
    return encode_instance(instances_2d6[0], mj)


class FakeEncoding:
    """Duck-typed stand-in for ProblemEncoding with a hand-set diagonal.

    Lets dynamics/spectra tests construct exactly the operator they need
    (tiny dimensions, prescribed gaps) without a peptide behind it.
    """

    def __init__(self, diag, ground_indices=None, peptide_id="fake"):
        self._diag = np.asarray(diag, dtype=float)
        n = int(np.log2(len(self._diag)))
        assert 1 << n == len(self._diag)
        self.num_qubits = n
        self.hilbert_dim = len(self._diag)
        if ground_indices is None:
            ground_indices = np.flatnonzero(self._diag == self._diag.min())
        self.ground_indices = np.asarray(ground_indices, dtype=np.int64)
        self.degeneracy = len(self.ground_indices)
        self.ground_energy = float(self._diag.min())
        self.peptide_id = peptide_id

    def diagonal(self):
        return self._diag


@pytest.fixture
def fake_encoding():
    return FakeEncoding
