import numpy as np
import pytest

from pertdecomp.model import ChainSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.fixture
def chain6():
    return ChainSpec.uniform(6, J=1.0, g=0.2, h=0.3)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
