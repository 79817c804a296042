"""Unknown-state stand-ins for the data-acquisition simulator.

Oracles hide how a state is represented (stabilizer tableau, dense vector,
classical mixture, or a product of two-qubit singlets) behind one sampling
interface. All sampling is batched: a block of shots shares one random
stream, and the per-shot randomness is consumed in a fixed order so runs are
reproducible for any block partitioning.
"""

from __future__ import annotations

import numpy as np

from . import dense
from .tableau import (
    CliffordTableau,
    PauliRows,
    StabilizerState,
    StateBatch,
    basis_state,
    from_stabilizers,
    ghz_state,
    toric_code_state,
)

__all__ = [
    "StateOracle",
    "StabilizerOracle",
    "DenseOracle",
    "MixtureOracle",
    "SingletChainOracle",
    "WitnessSpec",
    "noisy_ghz",
    "singlet_chain",
    "measure_in_bases",
    "measure_after_clifford",
    "rotated_ghz_witness",
    "parse_state_descriptor",
]

BASIS_CODES = {"X": 1, "Y": 2, "Z": 3}


def _codes(bases) -> np.ndarray:
    if isinstance(bases, str):
        return np.array([BASIS_CODES[c] for c in bases], dtype=np.uint8)
    arr = np.asarray(bases, dtype=np.uint8)
    return arr


class StateOracle:
    """Base interface: batched product-basis and Clifford measurements."""

    kind = "abstract"
    n: int
    descriptor: str = ""

    def sample_bases_batch(self, bases: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Outcome bits (B, n) for product-basis measurements ``bases`` (B, n)."""
        raise NotImplementedError

    def sample_clifford_batch(self, tabs: PauliRows, rng: np.random.Generator) -> np.ndarray:
        """Outcome bits (B, n) after applying per-shot Clifford tableaux."""
        raise NotImplementedError(f"{self.kind} oracle does not support Clifford measurements")

    def dense_rho(self) -> np.ndarray:
        """Dense density matrix (small n only; used by tests and planners)."""
        raise NotImplementedError


class StabilizerOracle(StateOracle):
    kind = "stabilizer"

    def __init__(self, state: StabilizerState, descriptor: str = ""):
        self.state = state
        self.n = state.n
        self.descriptor = descriptor

    def sample_bases_batch(self, bases, rng):
        bases = _codes(bases)
        b = bases.shape[0]
        batch = StateBatch.from_state(self.state, b)
        batch.rotate_bases(bases)
        table = rng.integers(0, 2, size=(b, self.n), dtype=np.uint8)
        return batch.measure_all(table)

    def sample_clifford_batch(self, tabs, rng):
        b = tabs.phase.shape[0]
        batch = StateBatch.from_state(self.state, b)
        batch.apply_tableaux(tabs.x, tabs.z, tabs.phase, for_measurement=True)
        table = rng.integers(0, 2, size=(b, self.n), dtype=np.uint8)
        return batch.measure_all(table)

    def dense_rho(self):
        psi = self.state.state_vector()
        return np.outer(psi, psi.conj())


class DenseOracle(StateOracle):
    kind = "dense"

    def __init__(self, amplitudes: np.ndarray, descriptor: str = "", cap: int = dense.DENSE_CAP):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(np.log2(amplitudes.size))
        if 2**n != amplitudes.size:
            raise ValueError("amplitude vector length must be a power of two")
        if n > cap:
            raise ValueError(f"dense oracle n={n} exceeds cap {cap}")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"amplitudes not normalized (|psi| = {norm})")
        self.psi = amplitudes
        self.n = n
        self.descriptor = descriptor

    def sample_bases_batch(self, bases, rng):
        bases = _codes(bases)
        b, n = bases.shape
        # rotate per qubit: V_W psi, batched over shots via per-qubit gather
        rots = np.stack([np.eye(2), dense.BASIS_ROTATIONS["X"], dense.BASIS_ROTATIONS["Y"], np.eye(2)])
        t = np.broadcast_to(self.psi, (b,) + self.psi.shape).reshape((b,) + (2,) * n)
        for q in range(n):
            u = rots[bases[:, q]]  # (B, 2, 2)
            t = np.moveaxis(t, 1 + q, 1)
            t = np.einsum("bij,bj...->bi...", u, t)
            t = np.moveaxis(t, 1, 1 + q)
        probs = np.abs(t.reshape(b, -1)) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        r = rng.random(b)
        idx = (probs.cumsum(axis=1) < r[:, None]).sum(axis=1)
        shifts = n - 1 - np.arange(n)
        return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)

    def sample_clifford_batch(self, tabs, rng):
        b = tabs.phase.shape[0]
        n = self.n
        # Z_q after U equals the inverse image of Z_q, a Pauli string: project
        # the dense vector through (I +- P)/2 one qubit at a time.
        inv_rows = []
        for i in range(b):
            tab = CliffordTableau(n, PauliRows(n, tabs.x[i], tabs.z[i], tabs.phase[i]))
            inv = tab.inverse()
            inv_rows.append(PauliRows(n, inv.rows.x[n:], inv.rows.z[n:], inv.rows.phase[n:]))
        uni = rng.random((b, n))
        out = np.zeros((b, n), dtype=np.uint8)
        for i in range(b):
            psi = self.psi
            letters = inv_rows[i].letters()
            signs = inv_rows[i].signs()
            for q in range(n):
                pp = dense.apply_pauli_string(psi, letters[q], int(signs[q]))
                p0 = float(np.real(psi.conj() @ (psi + pp))) / 2
                p0 = min(max(p0, 0.0), 1.0)
                bit = 1 if uni[i, q] >= p0 else 0
                proj = (psi + pp) / 2 if bit == 0 else (psi - pp) / 2
                nrm = np.linalg.norm(proj)
                if nrm < 1e-9:  # numerically impossible branch hit by a boundary draw
                    bit ^= 1
                    proj = (psi + pp) / 2 if bit == 0 else (psi - pp) / 2
                    nrm = np.linalg.norm(proj)
                out[i, q] = bit
                psi = proj / nrm
        return out

    def dense_rho(self):
        return np.outer(self.psi, self.psi.conj())


class MixtureOracle(StateOracle):
    kind = "mixture"

    def __init__(self, components: list[tuple[float, StateOracle]], descriptor: str = ""):
        if not components:
            raise ValueError("mixture needs at least one component")
        probs = np.array([p for p, _ in components], dtype=float)
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError("mixture probabilities must be nonnegative and sum to 1")
        keep = [(p, o) for p, o in components if p > 0.0]
        self.components = keep
        self.n = keep[0][1].n
        if any(o.n != self.n for _, o in keep):
            raise ValueError("mixture components disagree on n")
        self.descriptor = descriptor

    def _pick(self, b: int, rng: np.random.Generator) -> np.ndarray:
        probs = np.array([p for p, _ in self.components])
        edges = np.cumsum(probs)
        r = rng.random(b)
        return (r[:, None] >= edges[None, :]).sum(axis=1)

    def _dispatch(self, pick, call):
        first = call(self.components[0][1], np.nonzero(pick == 0)[0])
        out = np.zeros((len(pick),) + first.shape[1:], dtype=first.dtype)
        out[pick == 0] = first
        for ci in range(1, len(self.components)):
            sel = np.nonzero(pick == ci)[0]
            if sel.size:
                out[sel] = call(self.components[ci][1], sel)
        return out

    def sample_bases_batch(self, bases, rng):
        bases = _codes(bases)
        pick = self._pick(bases.shape[0], rng)
        return self._dispatch(pick, lambda o, sel: o.sample_bases_batch(bases[sel], rng))

    def sample_clifford_batch(self, tabs, rng):
        pick = self._pick(tabs.phase.shape[0], rng)
        return self._dispatch(
            pick,
            lambda o, sel: o.sample_clifford_batch(
                PauliRows(self.n, tabs.x[sel], tabs.z[sel], tabs.phase[sel]), rng
            ),
        )

    def dense_rho(self):
        return sum(p * o.dense_rho() for p, o in self.components)


class SingletChainOracle(StateOracle):
    """Product of two-qubit singlets (|01> - |10>)/sqrt(2) on given pairs."""

    kind = "singlet-chain"

    def __init__(self, n: int, pairing: list[tuple[int, int]], descriptor: str = ""):
        if n % 2 != 0:
            raise ValueError("singlet chain needs even n")
        seen = sorted(q for pair in pairing for q in pair)
        if seen != list(range(n)):
            raise ValueError("pairing must be a perfect matching on 0..n-1")
        self.n = n
        self.pairing = [tuple(p) for p in pairing]
        self.descriptor = descriptor

    def sample_bases_batch(self, bases, rng):
        bases = _codes(bases)
        b = bases.shape[0]
        out = np.zeros((b, self.n), dtype=np.uint8)
        singlet = np.zeros(4, dtype=complex)
        singlet[1] = 1 / np.sqrt(2)
        singlet[2] = -1 / np.sqrt(2)
        rots = np.stack([np.eye(2), dense.BASIS_ROTATIONS["X"], dense.BASIS_ROTATIONS["Y"], np.eye(2)])
        uni = rng.random((b, len(self.pairing)))
        for k, (qa, qb) in enumerate(self.pairing):
            ua = rots[bases[:, qa]]  # (B,2,2)
            ub = rots[bases[:, qb]]
            u = np.einsum("bij,bkl->bikjl", ua, ub).reshape(b, 4, 4)
            amps = u @ singlet
            probs = np.abs(amps) ** 2
            probs /= probs.sum(axis=1, keepdims=True)
            idx = (probs.cumsum(axis=1) < uni[:, k][:, None]).sum(axis=1)
            out[:, qa] = (idx >> 1) & 1
            out[:, qb] = idx & 1
        return out

    def as_stabilizer(self) -> StabilizerState:
        """The same state as a tableau: each pair is stabilized by -XX, -ZZ."""
        strings, signs = [], []
        for qa, qb in self.pairing:
            for letter in ("X", "Z"):
                word = ["I"] * self.n
                word[qa] = word[qb] = letter
                strings.append("".join(word))
                signs.append(-1)
        return from_stabilizers(strings, signs)

    def sample_clifford_batch(self, tabs, rng):
        return StabilizerOracle(self.as_stabilizer()).sample_clifford_batch(tabs, rng)

    def dense_rho(self):
        return StabilizerOracle(self.as_stabilizer()).dense_rho()


class WitnessSpec:
    """Three local rotations defining a GHZ-type entanglement witness."""

    def __init__(self, v_a: np.ndarray, v_b: np.ndarray, v_c: np.ndarray):
        for v in (v_a, v_b, v_c):
            if not np.allclose(v.conj().T @ v, np.eye(2), atol=1e-10):
                raise ValueError("witness rotations must be unitary")
        self.rotations = (v_a, v_b, v_c)

    def matrix(self) -> np.ndarray:
        """Dense witness observable: rotated GHZ projector on 3 qubits."""
        ghz = dense.ghz_vector(3)
        v = np.kron(np.kron(self.rotations[0], self.rotations[1]), self.rotations[2])
        psi = v @ ghz
        return np.outer(psi, psi.conj())

    def value(self, rho: np.ndarray) -> float:
        return float(np.real(np.trace(self.matrix() @ rho)))


GENUINE_TRIPARTITE_THRESHOLD = 0.5
GHZ_CLASS_THRESHOLD = 0.75


def noisy_ghz(n: int, p: float) -> StateOracle:
    """GHZ source with phase-flip error probability p: (1-p) GHZ+ + p GHZ-."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"error probability {p} outside [0, 1]")
    descriptor = f"ghz-noisy:{n}:{p:g}"
    plus = StabilizerOracle(ghz_state(n, +1), descriptor)
    if p == 0.0:
        return plus
    minus = StabilizerOracle(ghz_state(n, -1), descriptor)
    if p == 1.0:
        return minus
    return MixtureOracle([(1.0 - p, plus), (p, minus)], descriptor)


def singlet_chain(n: int, pairing: list[tuple[int, int]] | None = None) -> SingletChainOracle:
    """Singlet product state; default pairing is adjacent (0,1)(2,3)..."""
    if pairing is None:
        pairing = [(i, i + 1) for i in range(0, n, 2)]
    return SingletChainOracle(n, pairing, f"singlets:{n}")


def measure_in_bases(state: StateOracle, bases, rng: np.random.Generator) -> np.ndarray:
    """One shot: outcome bits of the product-basis measurement ``bases``."""
    codes = _codes(bases)
    if codes.ndim != 1 or codes.shape[0] != state.n:
        raise ValueError(f"need {state.n} basis letters")
    return state.sample_bases_batch(codes[None, :], rng)[0]


def measure_after_clifford(state: StateOracle, u: CliffordTableau, rng: np.random.Generator) -> np.ndarray:
    """One shot: Z-basis outcome after applying the Clifford ``u``."""
    if u.n != state.n:
        raise ValueError(f"size mismatch: state n={state.n}, tableau n={u.n}")
    rows = PauliRows(u.n, u.rows.x[None], u.rows.z[None], u.rows.phase[None])
    return state.sample_clifford_batch(rows, rng)[0]


def rotated_ghz_state(rng: np.random.Generator) -> tuple[DenseOracle, tuple[np.ndarray, ...]]:
    """Haar-locally-rotated 3-qubit GHZ state (dense) plus its rotations."""
    us = tuple(dense.haar_unitary_2x2(rng) for _ in range(3))
    psi = np.kron(np.kron(us[0], us[1]), us[2]) @ dense.ghz_vector(3)
    return DenseOracle(psi, "rotated-ghz:3"), us


def random_witness(rng: np.random.Generator) -> WitnessSpec:
    return WitnessSpec(*(dense.haar_unitary_2x2(rng) for _ in range(3)))


def rotated_ghz_witness(rng: np.random.Generator) -> tuple[DenseOracle, WitnessSpec]:
    """An unknown rotated-GHZ state and an independently drawn witness."""
    oracle, _ = rotated_ghz_state(rng)
    return oracle, random_witness(rng)


def parse_state_descriptor(text: str, cap: int = dense.DENSE_CAP) -> StateOracle:
    """Build an oracle from a descriptor like ``ghz:4`` or ``toric:2x2``.

    Supported: ghz:<n>, ghz-noisy:<n>:<p>, toric:<Lx>x<Ly>, singlets:<n>,
    zero:<n>, dense:<path> (text file, see the state file format).
    """
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "ghz" and len(parts) == 2:
            return StabilizerOracle(ghz_state(int(parts[1])), text)
        if kind == "ghz-noisy" and len(parts) == 3:
            return noisy_ghz(int(parts[1]), float(parts[2]))
        if kind == "toric" and len(parts) == 2:
            lx, ly = parts[1].lower().split("x")
            return StabilizerOracle(toric_code_state(int(lx), int(ly)), text)
        if kind == "singlets" and len(parts) == 2:
            return singlet_chain(int(parts[1]))
        if kind == "zero" and len(parts) == 2:
            n = int(parts[1])
            return StabilizerOracle(basis_state(np.zeros(n, dtype=np.uint8)), text)
        if kind == "dense" and len(parts) >= 2:
            from .io import read_state_file

            psi = read_state_file(":".join(parts[1:]))
            return DenseOracle(psi, text, cap=cap)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"bad state descriptor {text!r}: {exc}") from None
    raise ValueError(f"unknown state descriptor {text!r}")
