"""Quadratic-feature estimation: U-statistics over snapshot pairs.

Subsystem purity under the Pauli primitive is the workhorse. The pairwise
kernel factorizes per qubit, so each inverted single-qubit snapshot becomes a
real 4-vector of Pauli coefficients and the all-pairs sum collapses to one
accumulator: sum_{i != j} k(i,j) = 2^|A| (|sum_i v_i|^2 - sum_i |v_i|^2),
linear in the batch size instead of quadratic.
"""

from __future__ import annotations

import numpy as np

from .acquisition import ShadowDataset, Snapshot

__all__ = [
    "SubsystemSpec",
    "pair_purity_factor",
    "u_statistic_mean",
    "purity_u_statistic",
    "estimate_purity",
    "renyi2_entropy",
    "estimate_renyi2",
    "estimate_quadratic_clifford",
    "brydges_purity",
    "brydges_grid",
]

BRYDGES_HISTOGRAM_CAP = 12


def normalize_subsystem(subsystem, n: int) -> list[int]:
    qubits = sorted(int(q) for q in subsystem)
    if len(set(qubits)) != len(qubits):
        raise ValueError("subsystem indices must be distinct")
    if qubits and (qubits[0] < 0 or qubits[-1] >= n):
        raise ValueError(f"subsystem indices out of range for n={n}")
    return qubits


SubsystemSpec = normalize_subsystem  # spec-facing alias: validated sorted index list


def pair_purity_factor(s1: Snapshot, s2: Snapshot, subsystem) -> float:
    """tr of the product of two inverted snapshots restricted to a subsystem.

    Per qubit: 5 when bases and bits agree, -4 when bases agree but bits
    differ, and 1/2 when the bases differ.
    """
    if len(s1.bases) != len(s2.bases):
        raise ValueError("snapshots have different n")
    value = 1.0
    for q in normalize_subsystem(subsystem, len(s1.bases)):
        if s1.bases[q] == s2.bases[q]:
            value *= 5.0 if s1.bits[q] == s2.bits[q] else -4.0
        else:
            value *= 0.5
    return value


def u_statistic_mean(pair_values: np.ndarray) -> float:
    """Mean of a pairwise kernel over all ordered pairs i != j."""
    pair_values = np.asarray(pair_values, dtype=float)
    m = pair_values.shape[0]
    if pair_values.shape != (m, m) or m < 2:
        raise ValueError("need a square pair matrix with at least two snapshots")
    off = pair_values[~np.eye(m, dtype=bool)]
    return float(off.mean())


# Pauli coefficients (I, X, Y, Z)/sqrt-free of 3 V^dag|b><b|V - I, by [basis, bit].
_COEF_1Q = np.zeros((4, 2, 4))
for _code, _axis in ((1, 1), (2, 2), (3, 3)):
    for _bit in (0, 1):
        _COEF_1Q[_code, _bit, 0] = 0.5
        _COEF_1Q[_code, _bit, _axis] = 1.5 * (1 - 2 * _bit)


def _coef_vectors(ds: ShadowDataset, qubits: list[int]) -> np.ndarray:
    """Tensor-product coefficient vectors, shape (N, 4^|A|)."""
    out = None
    for q in qubits:
        c = _COEF_1Q[ds.bases[:, q], ds.bits[:, q]]  # (N, 4)
        out = c if out is None else (out[:, :, None] * c[:, None, :]).reshape(len(ds), -1)
    return out


def purity_u_statistic(vectors: np.ndarray, size: int) -> float:
    """All-ordered-pairs mean of the purity kernel from coefficient vectors."""
    m = vectors.shape[0]
    if m < 2:
        raise ValueError("need at least two snapshots per batch")
    total = vectors.sum(axis=0)
    pair_sum = 2.0**size * (total @ total - m * 2.5**size)
    return float(pair_sum / (m * (m - 1)))


def estimate_purity(ds: ShadowDataset, subsystem, k: int) -> float:
    """Median over K batches of the within-batch purity U-statistic."""
    if ds.kind != "pauli":
        raise ValueError("subsystem purity needs a pauli dataset")
    qubits = normalize_subsystem(subsystem, ds.n)
    per = len(ds) // k
    if k < 1 or per < 2:
        raise ValueError(f"{len(ds)} shots cannot form K={k} batches of >= 2")
    vectors = _coef_vectors(ds, qubits)[: k * per].reshape(k, per, -1)
    batch_values = [purity_u_statistic(vectors[i], len(qubits)) for i in range(k)]
    return float(np.median(batch_values))


def renyi2_entropy(purity: float, subsystem_size: int) -> float:
    """Second-order Renyi entropy in bits; purity is clamped to its physical
    range [2^-|A|, 1] so fluctuations cannot produce infinities."""
    clamped = min(max(purity, 2.0 ** (-subsystem_size)), 1.0)
    return float(-np.log2(clamped))


def estimate_renyi2(ds: ShadowDataset, subsystem, k: int) -> tuple[float, float]:
    """(purity, entropy-in-bits) for one subsystem."""
    qubits = normalize_subsystem(subsystem, ds.n)
    purity = estimate_purity(ds, qubits, k)
    return purity, renyi2_entropy(purity, len(qubits))


def estimate_quadratic_clifford(ds: ShadowDataset, observable: np.ndarray, k: int) -> float:
    """Median of within-batch U-statistics of tr(O rho_i x rho_j), dense path."""
    if ds.kind != "clifford":
        raise ValueError("needs a clifford dataset")
    d = 2**ds.n
    observable = np.asarray(observable, dtype=complex)
    if observable.shape != (d * d, d * d):
        raise ValueError("two-copy observable must be (4^n, 4^n)")
    per = len(ds) // k
    if per < 2:
        raise ValueError("need batches of at least two snapshots")
    from .linear import snapshot_vectors

    phis = snapshot_vectors(ds)[: k * per]
    rhos = (d + 1.0) * np.einsum("na,nb->nab", phis, phis.conj()) - np.eye(d)
    # o4[a, b, c, d] = O[(a, c), (b, d)]: row/col indices split per state copy
    o4 = observable.reshape(d, d, d, d).transpose(0, 2, 1, 3)
    values = []
    for b in range(k):
        batch = rhos[b * per : (b + 1) * per]
        y = np.einsum("abcd,nba->ncd", o4, batch)  # contract the first copy
        pair = np.real(np.einsum("ncd,mdc->nm", y, batch))
        values.append(u_statistic_mean(pair))
    return float(np.median(values))


def brydges_purity(ds: ShadowDataset, subsystem) -> float:
    """Grouped-repetition purity estimator from fixed-basis repeated shots.

    Within each group the sub-bitstring histogram c feeds the pair formula
    2^|A| sum_{s,s'} (-2)^(-H(s,s')) P(s) P(s'), with same-shot pairs removed
    (counts enter as c_s c_s' and c_s (c_s - 1) over N_M (N_M - 1)); group
    values are averaged.
    """
    if ds.kind != "pauli" or ds.groups is None:
        raise ValueError("needs a group-tagged pauli dataset")
    qubits = normalize_subsystem(subsystem, ds.n)
    size = len(qubits)
    if size > BRYDGES_HISTOGRAM_CAP:
        raise ValueError(f"subsystem too large for a 2^|A| histogram (|A| <= {BRYDGES_HISTOGRAM_CAP})")
    sub_bits = ds.bits[:, qubits]
    weights = 1 << np.arange(size - 1, -1, -1)
    idx = sub_bits @ weights
    values = []
    for g in np.unique(ds.groups):
        sel = ds.groups == g
        n_m = int(sel.sum())
        if n_m < 2:
            raise ValueError(f"group {g} has fewer than two repetitions")
        counts = np.bincount(idx[sel], minlength=2**size).astype(float)
        mc = counts.reshape((2,) * size)
        ham = np.array([[1.0, -0.5], [-0.5, 1.0]])
        for axis in range(size):
            mc = np.moveaxis(np.tensordot(ham, mc, axes=([1], [axis])), 0, axis)
        quad = float(counts @ mc.reshape(-1))
        values.append(2.0**size * (quad - n_m) / (n_m * (n_m - 1)))
    return float(np.mean(values))


def brydges_grid(budget: int, min_reps: int = 2) -> list[tuple[int, int]]:
    """Candidate (N_U, N_M) splittings with N_U * N_M <= budget."""
    out = []
    nu = 1
    while nu * min_reps <= budget:
        nm = budget // nu
        if nm >= min_reps:
            out.append((nu, nm))
        nu *= 2
    return out
