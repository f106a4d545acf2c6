import numpy as np
import pytest

from heatleak import DensityOperator, UnitaryOperator


def haar_unitary(dim, rng):
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return UnitaryOperator(q)


def random_density(num_qubits, rng, rank=None):
    """Random mixed state: mixture of Haar-random pure states."""
    dim = 2**num_qubits
    rank = rank or dim
    weights = rng.dirichlet(np.ones(rank))
    m = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v = v / np.linalg.norm(v)
        m += w * np.outer(v, v.conj())
    return DensityOperator(m)


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)
