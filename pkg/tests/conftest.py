import numpy as np
import pytest

from steanebench.pauli import enumerate_two_qubit_cliffords

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j])


def phase(theta):
    return np.diag([1, np.exp(1j * theta)])


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for o in ops:
        out = np.kron(out, o)
    return out


def cnot(n, c, t):
    """Dense CNOT on ``n`` qubits, qubit 0 most significant."""
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        j = i ^ (1 << (n - 1 - t)) if (i >> (n - 1 - c)) & 1 else i
        m[j, i] = 1
    return m


def on(n, q, u):
    ops = [I2] * n
    ops[q] = u
    return kron(*ops)


def equal_up_to_phase(a, b, tol=1e-9):
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(a[idx]) < tol:
        return False
    return np.allclose(a * (b[idx] / a[idx]), b, atol=tol)


@pytest.fixture(scope="session")
def clifford_table():
    return enumerate_two_qubit_cliffords()
