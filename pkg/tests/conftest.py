import numpy as np
import pytest

from spinlace import SpinLaceSpec, build

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLE = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


def kron_word(word: str) -> np.ndarray:
    """Independent dense oracle: site 0 is the leftmost (most significant) factor."""
    out = np.array([[1.0 + 0j]])
    for ch in word:
        out = np.kron(out, SINGLE[ch])
    return out


def dense_sum(pauli_sum) -> np.ndarray:
    """Dense matrix of a PauliSum built purely from kron products."""
    dim = 1 << pauli_sum.nsites
    out = np.zeros((dim, dim), dtype=complex)
    for string, coeff in pauli_sum.terms():
        out += coeff * kron_word(string.word())
    return out


@pytest.fixture(scope="session")
def ordered_r2():
    spec = SpinLaceSpec.ordered(2)
    return spec, *build(spec)


@pytest.fixture(scope="session")
def ordered_r3():
    spec = SpinLaceSpec.ordered(3)
    return spec, *build(spec)


@pytest.fixture(scope="session")
def ordered_r4():
    spec = SpinLaceSpec.ordered(4)
    return spec, *build(spec)
