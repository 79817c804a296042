"""Dense (2^n-dimensional) helpers for small systems.

These back the state oracles at desk scale and serve as independent ground
truth in tests. Nothing here is meant to scale past the dense cap.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString, WeightedPauliSum

__all__ = [
    "DENSE_CAP",
    "PAULI_1Q",
    "BASIS_ROTATIONS",
    "pauli_matrix",
    "pauli_sum_matrix",
    "apply_pauli_string",
    "ghz_vector",
    "partial_trace",
    "purity",
    "fidelity_with_pure",
    "haar_unitary_2x2",
    "rotate_product",
    "born_sample",
]

DENSE_CAP = 14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)

PAULI_1Q = {"I": I2, "X": X, "Y": Y, "Z": Z}

# V_W rotates basis W into the computational basis: V_W W V_W^dag = Z.
BASIS_ROTATIONS = {"X": H, "Y": H @ S.conj().T, "Z": I2}


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    letters = p.letters if isinstance(p, PauliString) else p
    out = np.array([[1.0 + 0j]])
    for c in letters:
        out = np.kron(out, PAULI_1Q[c])
    return out


def pauli_sum_matrix(o: WeightedPauliSum) -> np.ndarray:
    out = np.zeros((2**o.n, 2**o.n), dtype=complex)
    for w, p in o.terms:
        out += w * pauli_matrix(p)
    return out


def apply_pauli_string(vec: np.ndarray, p: PauliString | str, sign: int = 1) -> np.ndarray:
    """Apply a (signed) Pauli string to a state vector in O(n 2^n)."""
    letters = p.letters if isinstance(p, PauliString) else p
    n = len(letters)
    t = vec.reshape((2,) * n)
    for q, c in enumerate(letters):
        if c == "I":
            continue
        t = np.moveaxis(np.tensordot(PAULI_1Q[c], t, axes=([1], [q])), 0, q)
    return sign * t.reshape(-1)


def ghz_vector(n: int, sign: int = +1) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1 / np.sqrt(2)
    v[-1] = sign / np.sqrt(2)
    return v


def partial_trace(rho: np.ndarray, keep: list[int], n: int) -> np.ndarray:
    """Reduced density matrix on ``keep`` (ascending qubit indices)."""
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    for q in reversed(drop):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    k = len(keep)
    return t.reshape(2**k, 2**k)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def fidelity_with_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    return float(np.real(psi.conj() @ rho @ psi))


def haar_unitary_2x2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR of a complex Gaussian matrix."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rotate_product(vec: np.ndarray, unitaries: list[np.ndarray]) -> np.ndarray:
    """Apply a tensor product of single-qubit unitaries to a state vector."""
    n = len(unitaries)
    t = vec.reshape((2,) * n)
    for q, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def born_sample(vec: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a computational-basis outcome; returns n bits (qubit 0 first)."""
    probs = np.abs(vec) ** 2
    probs = probs / probs.sum()
    idx = rng.choice(probs.size, p=probs)
    return np.array([(idx >> (n - 1 - q)) & 1 for q in range(n)], dtype=np.uint8)
