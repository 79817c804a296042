"""Data acquisition: generate snapshot datasets under the measurement primitives.

Shots are produced in fixed-size blocks of ``BLOCK_SIZE``; every block draws
from its own random stream keyed by (seed, primitive label, block index), and
randomness inside a block is consumed in a fixed documented order. Workers
therefore produce byte-identical datasets for any degree of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .oracles import StateOracle
from .rng import stream
from .tableau import CliffordTableau, PauliRows, random_cliffords_batch

__all__ = [
    "BLOCK_SIZE",
    "Snapshot",
    "ShadowDataset",
    "MeasurementScheme",
    "acquire_pauli",
    "acquire_clifford",
    "acquire_scheme",
]

BLOCK_SIZE = 1024

LETTER_OF_CODE = {1: "X", 2: "Y", 3: "Z"}
CODE_OF_LETTER = {"X": 1, "Y": 2, "Z": 3}


@dataclass
class Snapshot:
    """One measurement record, stored pre-inversion."""

    kind: str
    bits: np.ndarray
    bases: str | None = None
    tableau: CliffordTableau | None = None
    group: int | None = None


class ShadowDataset:
    """Ordered collection of snapshots plus acquisition metadata.

    Pauli snapshots are held columnar (basis codes and outcome bits as
    (N, n) arrays) so estimators can vectorize; Clifford snapshots keep the
    stacked tableau rows. ``snapshots()`` yields spec-shaped records.
    """

    def __init__(
        self,
        kind: str,
        n: int,
        seed: int,
        state_descriptor: str,
        *,
        bases: np.ndarray | None = None,
        bits: np.ndarray | None = None,
        tableaux: PauliRows | None = None,
        groups: np.ndarray | None = None,
    ):
        if kind not in ("pauli", "clifford"):
            raise ValueError(f"unknown dataset kind {kind!r}")
        self.kind = kind
        self.n = n
        self.seed = seed
        self.state_descriptor = state_descriptor
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.bases = None if bases is None else np.asarray(bases, dtype=np.uint8)
        self.tableaux = tableaux
        self.groups = None if groups is None else np.asarray(groups, dtype=np.int64)
        if self.bits.ndim != 2 or self.bits.shape[1] != n:
            raise ValueError("outcome bits must have shape (N, n)")
        if kind == "pauli" and (self.bases is None or self.bases.shape != self.bits.shape):
            raise ValueError("pauli dataset needs basis codes of shape (N, n)")
        if kind == "clifford" and (tableaux is None or tableaux.phase.shape[0] != len(self)):
            raise ValueError("clifford dataset needs one tableau per snapshot")

    def __len__(self) -> int:
        return self.bits.shape[0]

    def tableau_at(self, i: int) -> CliffordTableau:
        t = self.tableaux
        return CliffordTableau(self.n, PauliRows(self.n, t.x[i], t.z[i], t.phase[i]))

    def __getitem__(self, i: int) -> Snapshot:
        group = None if self.groups is None else int(self.groups[i])
        if self.kind == "pauli":
            letters = "".join(LETTER_OF_CODE[int(c)] for c in self.bases[i])
            return Snapshot("pauli", self.bits[i], bases=letters, group=group)
        return Snapshot("clifford", self.bits[i], tableau=self.tableau_at(i), group=group)

    def snapshots(self):
        return (self[i] for i in range(len(self)))


@dataclass
class MeasurementScheme:
    """Fixed ordered list of Pauli basis assignments, each repeated R times."""

    rows: np.ndarray  # (m, n) basis codes
    repetitions: int = 1

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.uint8)
        if self.rows.ndim != 2 or self.rows.shape[0] == 0:
            raise ValueError("scheme needs at least one row")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @classmethod
    def from_strings(cls, rows: list[str], repetitions: int = 1) -> "MeasurementScheme":
        codes = np.array([[CODE_OF_LETTER[c] for c in row] for row in rows], dtype=np.uint8)
        return cls(codes, repetitions)

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def row_strings(self) -> list[str]:
        return ["".join(LETTER_OF_CODE[int(c)] for c in row) for row in self.rows]


def _blocks(total: int):
    for start in range(0, total, BLOCK_SIZE):
        yield start // BLOCK_SIZE, start, min(BLOCK_SIZE, total - start)


def _run_blocks(total: int, workers: int, job):
    results = [None] * ((total + BLOCK_SIZE - 1) // BLOCK_SIZE)
    if workers <= 1:
        for idx, start, size in _blocks(total):
            results[idx] = job(idx, start, size)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(job, idx, start, size): idx for idx, start, size in _blocks(total)}
            for fut, idx in futures.items():
                results[idx] = fut.result()
    return results


def acquire_pauli(state: StateOracle, shots: int, seed: int, workers: int = 1) -> ShadowDataset:
    """Random-Pauli-basis snapshots: i.i.d. uniform X/Y/Z per qubit per shot."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = state.n

    def job(idx, start, size):
        rng = stream(seed, "pauli", idx)
        bases = rng.integers(1, 4, size=(size, n), dtype=np.uint8)
        bits = state.sample_bases_batch(bases, rng)
        return bases, bits

    parts = _run_blocks(shots, workers, job)
    bases = np.concatenate([p[0] for p in parts])
    bits = np.concatenate([p[1] for p in parts])
    return ShadowDataset("pauli", n, seed, state.descriptor, bases=bases, bits=bits)


def acquire_clifford(
    state: StateOracle, shots: int, seed: int, workers: int = 1, sampler=None
) -> ShadowDataset:
    """Uniform-random-Clifford snapshots: (tableau, outcome bits) records.

    ``sampler(n, b, rng) -> PauliRows`` overrides the tableau source (test hook).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = state.n
    draw = sampler or random_cliffords_batch

    def job(idx, start, size):
        rng = stream(seed, "clifford", idx)
        tabs = draw(n, size, rng)
        bits = state.sample_clifford_batch(tabs, rng)
        return tabs, bits

    parts = _run_blocks(shots, workers, job)
    tabs = PauliRows(
        n,
        np.concatenate([p[0].x for p in parts]),
        np.concatenate([p[0].z for p in parts]),
        np.concatenate([p[0].phase for p in parts]),
    )
    bits = np.concatenate([p[1] for p in parts])
    return ShadowDataset(
        "clifford", n, seed, state.descriptor, bits=bits, tableaux=tabs
    )


def acquire_scheme(
    state: StateOracle, scheme: MeasurementScheme, seed: int, workers: int = 1
) -> ShadowDataset:
    """Measure along fixed scheme rows, ``repetitions`` shots per row.

    Snapshots carry their row index as a group tag (used by grouped
    estimators); shot order is row-major.
    """
    if scheme.n != state.n:
        raise ValueError(f"scheme row length {scheme.n} != state n {state.n}")
    total = scheme.rows.shape[0] * scheme.repetitions

    def job(idx, start, size):
        rng = stream(seed, "scheme", idx)
        rows = (start + np.arange(size)) // scheme.repetitions
        bases = scheme.rows[rows]
        bits = state.sample_bases_batch(bases, rng)
        return rows, bases, bits

    parts = _run_blocks(total, workers, job)
    groups = np.concatenate([p[0] for p in parts])
    bases = np.concatenate([p[1] for p in parts])
    bits = np.concatenate([p[2] for p in parts])
    return ShadowDataset(
        "pauli", state.n, seed, state.descriptor, bases=bases, bits=bits, groups=groups
    )
