"""Linear-property estimation: invert the measurement channel per snapshot
and aggregate with median-of-means.

Per-snapshot estimates are whole numpy vectors over the dataset, chunked into
K batches afterwards, so targets built from weighted Pauli sums are combined
per snapshot before chunking (one scalar stream per target).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import ShadowDataset, Snapshot
from .pauli import PauliString, WeightedPauliSum, pauli_index_array
from .tableau import (
    CliffordTableau,
    PauliRows,
    StabilizerState,
    _conjugate,
    stab_outcome_probability_batch,
)

__all__ = [
    "EstimationReport",
    "TargetRecord",
    "median_of_means",
    "snapshot_pauli_estimate",
    "snapshot_clifford_estimate",
    "predict_linear",
    "reduced_density_matrix",
    "pauli_term_estimates",
    "dense_to_pauli_sum",
    "snapshot_vectors",
]


@dataclass
class TargetRecord:
    target_id: str
    estimate: float
    kind: str


@dataclass
class EstimationReport:
    records: list[TargetRecord]
    k: int
    n_per_batch: int
    shots_used: int
    dataset_kind: str
    n: int
    seed: int
    state_descriptor: str

    def estimates(self) -> list[float]:
        return [r.estimate for r in self.records]


def median_of_means(values, k: int) -> float:
    """Split into K consecutive chunks of floor(N/K), mean each, take the median.

    Trailing remainder shots are discarded; an even K yields the average of
    the two middle chunk means.
    """
    values = np.asarray(values, dtype=float)
    if k < 1:
        raise ValueError("K must be >= 1")
    if values.size < k:
        raise ValueError(f"need at least K={k} values, got {values.size}")
    per = values.size // k
    chunks = values[: k * per].reshape(k, per)
    return float(np.median(chunks.mean(axis=1)))


def snapshot_pauli_estimate(snapshot: Snapshot, p: PauliString | str) -> float:
    """Single-snapshot estimate of a Pauli-string expectation.

    Zero unless every non-identity site of the string was measured in the
    matching basis; otherwise +-3^support with the sign set by the outcome
    bits on the support.
    """
    letters = p.letters if isinstance(p, PauliString) else p
    if len(letters) != len(snapshot.bases):
        raise ValueError("length mismatch")
    value = 1.0
    for q, c in enumerate(letters):
        if c == "I":
            continue
        if snapshot.bases[q] != c:
            return 0.0
        value *= 3.0 * (1.0 - 2.0 * int(snapshot.bits[q]))
    return value


def pauli_term_estimates(ds: ShadowDataset, p: PauliString | str) -> np.ndarray:
    """Vector of per-snapshot estimates of one Pauli string over a dataset."""
    codes = pauli_index_array(p)
    support = np.nonzero(codes)[0]
    if support.size == 0:
        return np.ones(len(ds))
    sub_bases = ds.bases[:, support]
    sub_bits = ds.bits[:, support]
    match = (sub_bases == codes[support][None, :]).all(axis=1)
    signs = 1 - 2 * (sub_bits.sum(axis=1, dtype=np.int64) & 1)
    return match * (3.0 ** len(support)) * signs


def _pauli_sum_estimates(ds: ShadowDataset, o: WeightedPauliSum) -> np.ndarray:
    total = np.zeros(len(ds))
    for w, p in o.terms:
        total += w * pauli_term_estimates(ds, p)
    return total


def snapshot_clifford_estimate(snapshot: Snapshot, target) -> float:
    """Single-snapshot estimate of tr(O rho) from a Clifford snapshot.

    ``target`` is a StabilizerState (projector onto that state) or a dense
    Hermitian matrix.
    """
    u = snapshot.tableau
    n = u.n
    if isinstance(target, StabilizerState):
        rotated = u.conjugate(target.stabilizers())
        rows = PauliRows(n, rotated.x[None], rotated.z[None], rotated.phase[None])
        prob = float(stab_outcome_probability_batch(rows, snapshot.bits[None, :])[0])
        return float((2.0**n + 1.0) * prob - 1.0)
    target = np.asarray(target, dtype=complex)
    phi = _snapshot_state_vector(u, snapshot.bits)
    quad = float(np.real(phi.conj() @ target @ phi))
    return float((2.0**n + 1.0) * quad - np.real(np.trace(target)))


def _snapshot_state_vector(u: CliffordTableau, bits: np.ndarray) -> np.ndarray:
    """Dense vector of U^dag |b>, for dense targets at small n."""
    from .tableau import apply_clifford, basis_state

    return apply_clifford(basis_state(bits), u.inverse()).state_vector()


def _clifford_fidelity_estimates(ds: ShadowDataset, target: StabilizerState) -> np.ndarray:
    """Vectorized per-snapshot estimates for a stabilizer-state projector."""
    n = ds.n
    t = ds.tableaux
    out = np.empty(len(ds))
    step = 512  # bound the working set of the batched conjugation
    for lo in range(0, len(ds), step):
        hi = min(lo + step, len(ds))
        evolved = _conjugate(
            t.x[lo:hi], t.z[lo:hi], t.phase[lo:hi], target.stabilizers(), n
        )
        out[lo:hi] = stab_outcome_probability_batch(evolved, ds.bits[lo:hi])
    return (2.0**n + 1.0) * out - 1.0


def snapshot_vectors(ds: ShadowDataset) -> np.ndarray:
    """Stacked dense vectors U_i^dag |b_i> for a clifford dataset (memoized)."""
    cached = getattr(ds, "_phi_cache", None)
    if cached is not None:
        return cached
    phis = np.empty((len(ds), 2**ds.n), dtype=complex)
    for i in range(len(ds)):
        phis[i] = _snapshot_state_vector(ds.tableau_at(i), ds.bits[i])
    ds._phi_cache = phis
    return phis


def _clifford_dense_estimates(ds: ShadowDataset, target: np.ndarray) -> np.ndarray:
    n = ds.n
    tr = float(np.real(np.trace(target)))
    phis = snapshot_vectors(ds)
    quad = np.real(np.einsum("ni,ij,nj->n", phis.conj(), target, phis))
    return (2.0**n + 1.0) * quad - tr


def dense_to_pauli_sum(matrix: np.ndarray, qubits: list[int], n: int) -> WeightedPauliSum:
    """Expand a Hermitian operator on the given qubits in the Pauli basis."""
    from .dense import pauli_matrix

    k = len(qubits)
    if matrix.shape != (2**k, 2**k):
        raise ValueError("matrix shape does not match qubit count")
    terms = []
    for idx in range(4**k):
        word = []
        rem = idx
        for _ in range(k):
            word.append("IXYZ"[rem % 4])
            rem //= 4
        local = "".join(word)
        coeff = np.trace(pauli_matrix(local) @ matrix) / 2**k
        if abs(coeff.imag) > 1e-9:
            raise ValueError("matrix is not Hermitian")
        if abs(coeff.real) > 1e-12:
            terms.append((float(coeff.real), PauliString.from_sites(n, zip(qubits, local)).letters))
    return WeightedPauliSum(n, terms)


def _per_snapshot_estimates(ds: ShadowDataset, target) -> tuple[np.ndarray, str]:
    if isinstance(target, (PauliString, str)):
        target = WeightedPauliSum.single(target)
    if isinstance(target, WeightedPauliSum):
        if target.n != ds.n:
            raise ValueError(f"target has n={target.n}, dataset n={ds.n}")
        if ds.kind != "pauli":
            raise ValueError("Pauli-sum targets need a pauli dataset")
        return _pauli_sum_estimates(ds, target), "pauli-sum"
    if isinstance(target, StabilizerState):
        if ds.kind != "clifford":
            raise ValueError("stabilizer-state targets need a clifford dataset")
        if target.n != ds.n:
            raise ValueError(f"target has n={target.n}, dataset n={ds.n}")
        return _clifford_fidelity_estimates(ds, target), "stabilizer-fidelity"
    if isinstance(target, tuple) and len(target) == 2:
        matrix, qubits = target
        if ds.kind != "pauli":
            raise ValueError("local dense targets need a pauli dataset")
        return (
            _pauli_sum_estimates(ds, dense_to_pauli_sum(np.asarray(matrix), list(qubits), ds.n)),
            "local-dense",
        )
    matrix = np.asarray(target)
    if matrix.ndim == 2:
        if ds.kind != "clifford":
            raise ValueError("global dense targets need a clifford dataset")
        if matrix.shape != (2**ds.n, 2**ds.n):
            raise ValueError("dense target has wrong dimension")
        return _clifford_dense_estimates(ds, matrix), "dense"
    raise TypeError(f"unsupported target type {type(target)!r}")


def predict_linear(ds: ShadowDataset, targets: list, k: int, labels=None) -> EstimationReport:
    """Median-of-means prediction of linear target functions from a dataset."""
    n_total = len(ds)
    if n_total < k:
        raise ValueError(f"dataset has {n_total} shots, fewer than K={k}")
    records = []
    labels = labels or [f"target-{i}" for i in range(len(targets))]
    for label, target in zip(labels, targets):
        values, kind = _per_snapshot_estimates(ds, target)
        records.append(TargetRecord(label, median_of_means(values, k), kind))
    return EstimationReport(
        records=records,
        k=k,
        n_per_batch=n_total // k,
        shots_used=k * (n_total // k),
        dataset_kind=ds.kind,
        n=ds.n,
        seed=ds.seed,
        state_descriptor=ds.state_descriptor,
    )


# Inverted single-qubit snapshot 3 V^dag |b><b| V - I, indexed [basis, bit].
_INV_1Q = np.zeros((4, 2, 2, 2), dtype=complex)


def _build_inv_table():
    from .dense import BASIS_ROTATIONS

    for code, letter in ((1, "X"), (2, "Y"), (3, "Z")):
        v = BASIS_ROTATIONS[letter]
        for bit in (0, 1):
            e = np.zeros(2, dtype=complex)
            e[bit] = 1.0
            vec = v.conj().T @ e
            _INV_1Q[code, bit] = 3.0 * np.outer(vec, vec.conj()) - np.eye(2)


_build_inv_table()


def snapshot_rdm_factors(ds: ShadowDataset, qubits: list[int]) -> np.ndarray:
    """Per-snapshot inverted local snapshots on ``qubits``: (N, 2^k, 2^k)."""
    out = None
    for q in qubits:
        m = _INV_1Q[ds.bases[:, q], ds.bits[:, q]]  # (N, 2, 2)
        if out is None:
            out = m
        else:
            out = np.einsum("nab,ncd->nacbd", out, m).reshape(
                out.shape[0], out.shape[1] * 2, out.shape[2] * 2
            )
    return out


def reduced_density_matrix(ds: ShadowDataset, subsystem: list[int], k: int) -> np.ndarray:
    """Entrywise median-of-means estimate of the reduced density matrix.

    Medians are taken independently for real and imaginary parts, then the
    result is re-Hermitized and trace-normalized.
    """
    if ds.kind != "pauli":
        raise ValueError("reduced density matrices need a pauli dataset")
    subsystem = sorted(subsystem)
    if any(q < 0 or q >= ds.n for q in subsystem):
        raise ValueError("subsystem index out of range")
    mats = snapshot_rdm_factors(ds, subsystem)
    n_total = len(ds)
    per = n_total // k
    chunks = mats[: k * per].reshape(k, per, mats.shape[1], mats.shape[2]).mean(axis=1)
    est = np.median(chunks.real, axis=0) + 1j * np.median(chunks.imag, axis=0)
    est = (est + est.conj().T) / 2
    return est / np.real(np.trace(est))
