import numpy as np
import pytest

from pertdecomp.calculus import conjugation_series, inner_derivation, iterated_derivation
from pertdecomp.densela import SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, expm_hermitian, kron
from pertdecomp.errors import DimensionMismatch
from pertdecomp.schemes import two_qubit_blocks

from conftest import random_hermitian

YZ = kron(SIGMA_Y, SIGMA_Z)
ZY = kron(SIGMA_Z, SIGMA_Y)


def test_pauli_commutators():
    assert np.array_equal(inner_derivation(SIGMA_Z, SIGMA_Z), np.zeros((2, 2)))
    assert np.allclose(inner_derivation(SIGMA_Z, SIGMA_X), 2j * SIGMA_Y)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        inner_derivation(SIGMA_Z, np.eye(4))


def test_order_zero_is_identity_map(rng):
    b = random_hermitian(rng, 4)
    assert np.array_equal(iterated_derivation(random_hermitian(rng, 4), b, 0), b)


def test_order_guard():
    with pytest.raises(ValueError):
        iterated_derivation(SIGMA_Z, SIGMA_X, 9)


@pytest.mark.parametrize("seed", range(5))
def test_two_site_identities(seed):
    J, g1, g2, h1, h2 = np.random.default_rng(seed).uniform(-1.5, 1.5, 5)
    A, B, C = two_qubit_blocks(J, g1, g2, h1, h2)
    first = 2j * J * (h1 * YZ + h2 * ZY)
    assert np.max(np.abs(iterated_derivation(A, B + C, 1) - first)) <= 1e-12
    assert np.max(np.abs(iterated_derivation(A, B + C, 2) - 4 * J**2 * C)) <= 1e-12
    third = iterated_derivation(A, B + C, 3)
    assert np.max(np.abs(third - 8j * J**3 * (h1 * YZ + h2 * ZY))) <= 1e-12
    assert np.max(np.abs(third - 4 * J**2 * first)) <= 1e-12


def test_linearity(rng):
    A, B, C = (random_hermitian(rng, 4) for _ in range(3))
    a, b = 0.7, -1.3
    lhs = inner_derivation(a * A + b * B, C)
    rhs = a * inner_derivation(A, C) + b * inner_derivation(B, C)
    assert np.max(np.abs(lhs - rhs)) <= 1e-13


def test_conjugation_series(rng):
    H = random_hermitian(rng, 4)
    A = -1j * H / np.linalg.norm(H, 2)  # anti-Hermitian, ||A|| = 1
    B = random_hermitian(rng, 4)
    # [A, .] has norm up to 2||A||, so the K=12 tail is ~ (2x)^13 / 13!
    for x in (0.3, 0.5):
        # e^{xA} = e^{-i x H'} with H' = H / ||H||
        U = expm_hermitian(H / np.linalg.norm(H, 2), x)
        exact = U @ B @ U.conj().T
        assert np.max(np.abs(conjugation_series(A, B, x, terms=12) - exact)) <= 1e-8
