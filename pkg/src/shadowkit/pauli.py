"""Pauli strings and real-weighted Pauli-sum observables.

Strings are phase-free: every observable handled by the toolkit is a real
linear combination of Hermitian tensor products of I, X, Y, Z, so signs live
in the weights. Symplectic/group structure lives in :mod:`shadowkit.tableau`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "PauliString",
    "WeightedPauliSum",
    "support",
    "match_factor",
    "pauli_sum_avg_variance",
]

LETTERS = "IXYZ"


@dataclass(frozen=True)
class PauliString:
    """An n-site word over {I, X, Y, Z}, e.g. ``PauliString("XIZ")``."""

    letters: str

    def __post_init__(self) -> None:
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)!r} in {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> int:
        return sum(1 for c in self.letters if c != "I")

    def sites(self) -> list[int]:
        """Indices of the non-identity letters."""
        return [i for i, c in enumerate(self.letters) if c != "I"]

    @classmethod
    def from_sites(cls, n: int, placed: Mapping[int, str] | Iterable[tuple[int, str]]) -> "PauliString":
        """Build a string of length n with letters at the given qubit indices."""
        items = placed.items() if isinstance(placed, Mapping) else placed
        letters = ["I"] * n
        for q, letter in items:
            if not 0 <= q < n:
                raise ValueError(f"qubit index {q} out of range for n={n}")
            letters[q] = letter
        return cls("".join(letters))

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)


def support(p: PauliString | str) -> int:
    """Number of sites on which the string acts nontrivially."""
    letters = p.letters if isinstance(p, PauliString) else p
    return sum(1 for c in letters if c != "I")


def match_factor(p: PauliString | str, q: PauliString | str) -> int:
    """Per-site overlap factor of two strings.

    Returns 0 if any site carries two distinct non-identity letters, and
    otherwise 3**s where s counts the sites with equal non-identity letters.
    """
    a = p.letters if isinstance(p, PauliString) else p
    b = q.letters if isinstance(q, PauliString) else q
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    s = 0
    for ca, cb in zip(a, b):
        if ca == "I" or cb == "I":
            continue
        if ca != cb:
            return 0
        s += 1
    return 3**s


class WeightedPauliSum:
    """Real-weighted sum of Pauli strings on a fixed number of qubits.

    Duplicate strings are merged at construction (weights summed) and exact
    zero weights are dropped, which keeps the Hilbert-Schmidt norm exact.
    """

    def __init__(self, n: int, terms: Iterable[tuple[float, PauliString | str]]):
        self.n = int(n)
        merged: dict[str, float] = {}
        for w, p in terms:
            letters = p.letters if isinstance(p, PauliString) else p
            if len(letters) != self.n:
                raise ValueError(f"term {letters!r} has length {len(letters)}, expected {self.n}")
            PauliString(letters)  # validate alphabet
            merged[letters] = merged.get(letters, 0.0) + float(w)
        self.terms: list[tuple[float, PauliString]] = [
            (w, PauliString(s)) for s, w in merged.items() if w != 0.0
        ]

    @classmethod
    def single(cls, p: PauliString | str, weight: float = 1.0) -> "WeightedPauliSum":
        letters = p.letters if isinstance(p, PauliString) else p
        return cls(len(letters), [(weight, letters)])

    @property
    def locality(self) -> int:
        """Largest support over the terms (0 for the empty or identity sum)."""
        return max((p.support for _, p in self.terms), default=0)

    def hs_norm_sq(self) -> float:
        """tr(O^2) = 2^n * sum of squared weights (Pauli strings are orthogonal)."""
        return float(2**self.n) * sum(w * w for w, _ in self.terms)

    def traceless_hs_norm_sq(self) -> float:
        """tr(O0^2) for the traceless part O0: the identity term drops out."""
        return float(2**self.n) * sum(w * w for w, p in self.terms if p.support > 0)

    def weight_l1(self) -> float:
        """Sum of absolute weights; a cheap upper bound on the operator norm."""
        return sum(abs(w) for w, _ in self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{w:g}*{p}" for w, p in self.terms[:4])
        more = " + ..." if len(self.terms) > 4 else ""
        return f"WeightedPauliSum(n={self.n}, {body}{more})"


def pauli_sum_avg_variance(o: WeightedPauliSum) -> float:
    """Diagnostic single-shot second moment at the maximally mixed state.

    Sum over terms of w^2 * 3^support: the per-term variance of the
    random-Pauli-basis estimator when the state carries no signal.
    """
    return float(sum(w * w * 3 ** p.support for w, p in o.terms))


def pauli_index_array(p: PauliString | str, dtype=np.uint8) -> np.ndarray:
    """Letters encoded as integers I=0, X=1, Y=2, Z=3."""
    letters = p.letters if isinstance(p, PauliString) else p
    return np.frombuffer(letters.translate(_CODE_TABLE).encode("latin-1"), dtype=np.uint8).astype(dtype)


_CODE_TABLE = str.maketrans({"I": "\x00", "X": "\x01", "Y": "\x02", "Z": "\x03"})
