"""Shared test helpers: independent dense oracles used as ground truth."""

import numpy as np
import pytest

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def same_up_to_phase(u: np.ndarray, v: np.ndarray) -> bool:
    d = u.shape[0]
    return abs(abs(np.trace(u.conj().T @ v)) - d) < 1e-7


def _pauli_basis_stack(n: int) -> np.ndarray:
    words = ["".join(w) for w in __import__("itertools").product("IXYZ", repeat=n)]
    return np.stack([kron_all([PAULIS[c] for c in w]) for w in words])


def _action_key(u: np.ndarray, basis: np.ndarray, gens: np.ndarray) -> tuple:
    """Exact signature of a Clifford mod phase: where each X_i/Z_i goes."""
    d = u.shape[0]
    conj = np.einsum("ab,gbc,dc->gad", u, gens, u.conj())
    coefs = np.real(np.einsum("wab,gba->gw", basis, conj)) / d
    idx = np.argmax(np.abs(coefs), axis=1)
    signs = np.sign(coefs[np.arange(len(gens)), idx]).astype(int)
    return tuple(zip(idx.tolist(), signs.tolist()))


def clifford_group_dense(generators: list[np.ndarray]) -> list[np.ndarray]:
    """BFS closure of the given gates under multiplication, modulo phase."""
    d = generators[0].shape[0]
    n = int(np.log2(d))
    basis = _pauli_basis_stack(n)
    gen_words = []
    for i in range(n):
        for letter in ("X", "Z"):
            word = ["I"] * n
            word[i] = letter
            gen_words.append(kron_all([PAULIS[c] for c in word]))
    gens = np.stack(gen_words)
    seen: dict[tuple, np.ndarray] = {}

    def add(u: np.ndarray) -> bool:
        key = _action_key(u, basis, gens)
        if key in seen:
            return False
        seen[key] = u
        return True

    frontier = [np.eye(d, dtype=complex)]
    add(frontier[0])
    while frontier:
        nxt = []
        for u in frontier:
            for g in generators:
                v = g @ u
                if add(v):
                    nxt.append(v)
        frontier = nxt
    return list(seen.values())


@pytest.fixture(scope="session")
def single_qubit_cliffords():
    """All 24 single-qubit Cliffords (mod phase), built independently from H, S."""
    group = clifford_group_dense([H, S])
    assert len(group) == 24
    return group


@pytest.fixture(scope="session")
def two_qubit_cliffords():
    """All 11520 two-qubit Cliffords (mod phase), for exhaustive norm checks."""
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    group = clifford_group_dense(
        [np.kron(H, I2), np.kron(I2, H), np.kron(S, I2), np.kron(I2, S), cnot]
    )
    assert len(group) == 11520
    return group


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_dense(word: str) -> np.ndarray:
    return kron_all([PAULIS[c] for c in word])


def rotation_for_basis(letter: str) -> np.ndarray:
    """V with V W V^dag = Z for W in {X, Y, Z} (independent convention check)."""
    if letter == "X":
        return H
    if letter == "Y":
        return H @ S.conj().T
    return I2


def born_probs_product_basis(rho: np.ndarray, bases: str) -> np.ndarray:
    v = kron_all([rotation_for_basis(c) for c in bases])
    rotated = v @ rho @ v.conj().T
    return np.real(np.diag(rotated))


def dense_ghz(n: int, sign: int = +1) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1 / np.sqrt(2)
    v[-1] = sign / np.sqrt(2)
    return v


def bits_to_index(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out
