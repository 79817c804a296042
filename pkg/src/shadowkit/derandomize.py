"""Greedy derandomization of random-Pauli measurements for a fixed target set.

A measurement scheme is built row by row; each qubit's basis letter is chosen
to minimize a pessimistic failure estimate
COST = sum_j (1 - nu)^(h_j) * g_j, where h_j counts completed rows that hit
observable j, nu = 1 - exp(-eps^2 / 2), and within the current row
g_j = 1 when the observable is already broken by a mismatched letter, else
1 - nu * 3^(-u_j) with u_j its number of still-unassigned non-identity sites.
Greedy choices never exceed the expected cost of a random letter, so the
derandomized scheme can only improve on random Pauli sampling.
"""

from __future__ import annotations

import math

import numpy as np

from .acquisition import MeasurementScheme
from .pauli import PauliString

__all__ = [
    "DerandState",
    "derandomize",
    "schwinger_observables",
    "DEFAULT_NU",
]

LETTERS = ("X", "Y", "Z")
DEFAULT_NU = 0.1


class DerandState:
    """Hit counts plus the partial assignment of the measurement row in progress."""

    def __init__(self, observables: list[PauliString], nu: float):
        if not observables:
            raise ValueError("need at least one observable")
        self.observables = [PauliString(o) if isinstance(o, str) else o for o in observables]
        self.n = self.observables[0].n
        if any(o.n != self.n for o in self.observables):
            raise ValueError("observables must share the qubit count")
        if not 0.0 < nu <= 1.0:
            raise ValueError(f"nu {nu} outside (0, 1]")
        self.nu = nu
        self.hits = np.zeros(len(self.observables), dtype=np.int64)
        self.at_qubit: list[list[tuple[int, str]]] = [[] for _ in range(self.n)]
        for j, obs in enumerate(self.observables):
            for q in obs.sites():
                self.at_qubit[q].append((j, obs.letters[q]))
        self._begin_row()

    def _begin_row(self) -> None:
        self.row: list[str] = []
        self.broken = np.zeros(len(self.observables), dtype=bool)
        self.unassigned = np.array([o.support for o in self.observables], dtype=np.int64)

    def _weight(self) -> np.ndarray:
        return (1.0 - self.nu) ** self.hits

    def _g(self) -> np.ndarray:
        g = 1.0 - self.nu * 3.0 ** (-self.unassigned.astype(float))
        g[self.broken] = 1.0
        return g

    def cost(self) -> float:
        """Pessimistic failure estimate of the current (partially assigned) state."""
        return float(self._weight() @ self._g())

    def candidate_cost(self, letter: str) -> float:
        """Cost after assigning ``letter`` at the next qubit (no mutation)."""
        q = len(self.row)
        weight = self._weight()
        total = self.cost()
        for j, want in self.at_qubit[q]:
            if self.broken[j]:
                continue
            old = 1.0 - self.nu * 3.0 ** (-float(self.unassigned[j]))
            if want == letter:
                new = 1.0 - self.nu * 3.0 ** (-float(self.unassigned[j] - 1))
            else:
                new = 1.0
            total += weight[j] * (new - old)
        return total

    def assign(self, letter: str) -> None:
        q = len(self.row)
        if q >= self.n:
            raise RuntimeError("row already complete")
        for j, want in self.at_qubit[q]:
            if self.broken[j]:
                continue
            if want == letter:
                self.unassigned[j] -= 1
            else:
                self.broken[j] = True
        self.row.append(letter)

    def finish_row(self) -> str:
        """Record hits for the completed row and start a fresh one."""
        if len(self.row) != self.n:
            raise RuntimeError("row not fully assigned")
        done = "".join(self.row)
        self.hits += ~self.broken
        self._begin_row()
        return done

    def greedy_letter(self) -> str:
        """Cost-minimizing letter for the next qubit; ties break X < Y < Z."""
        costs = [self.candidate_cost(letter) for letter in LETTERS]
        return LETTERS[int(np.argmin(costs))]


def derandomize(
    observables,
    epsilon: float | None = None,
    *,
    measurements: int | None = None,
    hit_target: int | None = None,
    max_rows: int = 200_000,
) -> MeasurementScheme:
    """Compile a fixed measurement scheme for the given Pauli observables.

    Exactly one of ``measurements`` (row budget) or ``hit_target`` (stop once
    every observable has been hit that many times) must be given. ``epsilon``
    sets nu = 1 - exp(-eps^2/2); when omitted, nu defaults to 0.1.
    """
    if (measurements is None) == (hit_target is None):
        raise ValueError("specify exactly one of measurements or hit_target")
    nu = DEFAULT_NU if epsilon is None else 1.0 - math.exp(-(epsilon**2) / 2.0)
    state = DerandState(list(observables), nu)
    rows: list[str] = []
    while True:
        if measurements is not None and len(rows) >= measurements:
            break
        if hit_target is not None and len(rows) and state.hits.min() >= hit_target:
            break
        if len(rows) >= max_rows:
            raise RuntimeError(f"derandomization exceeded {max_rows} rows")
        for _ in range(state.n):
            state.assign(state.greedy_letter())
        rows.append(state.finish_row())
    return MeasurementScheme.from_strings(rows)


def count_hits(rows: list[str], observables) -> np.ndarray:
    """Per-observable counts of scheme rows covering every non-identity site."""
    obs = [PauliString(o) if isinstance(o, str) else o for o in observables]
    hits = np.zeros(len(obs), dtype=np.int64)
    site_letters = [[(q, o.letters[q]) for q in o.sites()] for o in obs]
    for row in rows:
        for j, sites in enumerate(site_letters):
            if all(row[q] == letter for q, letter in sites):
                hits[j] += 1
    return hits


def rows_to_reach(rows: list[str], observables, target: int) -> int | None:
    """Length of the shortest row prefix with min hits >= target (None if never)."""
    obs = [PauliString(o) if isinstance(o, str) else o for o in observables]
    hits = np.zeros(len(obs), dtype=np.int64)
    site_letters = [[(q, o.letters[q]) for q in o.sites()] for o in obs]
    for i, row in enumerate(rows):
        for j, sites in enumerate(site_letters):
            if all(row[q] == letter for q, letter in sites):
                hits[j] += 1
        if hits.min() >= target:
            return i + 1
    return None


def schwinger_observables(n_sites: int) -> list[PauliString]:
    """Local observable set for energy-variance estimation on a staggered
    fermion chain after the spin encoding (all windows zero-based).

    Families: nearest-neighbor XX and YY, single Z, ZZ pairs (last site
    excluded), plus the anticommutator terms XXYY / XXZ / XXZZ / YYZ / YYZZ
    with non-overlapping index windows. Everything is at most 4-local.
    """
    if n_sites < 4 or n_sites % 2 != 0:
        raise ValueError("need an even number of sites, at least 4")
    n = n_sites
    seen: dict[str, PauliString] = {}

    def add(placed: dict[int, str]) -> None:
        p = PauliString.from_sites(n, placed)
        seen.setdefault(p.letters, p)

    windows = range(n - 1)  # j: sites (j, j+1)
    for j in windows:
        add({j: "X", j + 1: "X"})
        add({j: "Y", j + 1: "Y"})
    for j in range(n):
        add({j: "Z"})
    for j in range(n - 2):
        for jp in range(j + 1, n - 1):
            add({j: "Z", jp: "Z"})
    for w in ("X", "Y"):
        for j in windows:
            for jp in windows:  # w_j w_{j+1} paired with Y_j' Y_{j'+1} or Z terms
                disjoint = jp not in (j, j + 1) and jp + 1 != j
                if w == "X" and disjoint:
                    add({j: "X", j + 1: "X", jp: "Y", jp + 1: "Y"})
            for jp in windows:
                if jp not in (j, j + 1):
                    add({j: w, j + 1: w, jp: "Z"})
            for jp in windows:
                for jpp in windows:
                    if jp < jpp and jp not in (j, j + 1) and jpp not in (j, j + 1):
                        add({j: w, j + 1: w, jp: "Z", jpp: "Z"})
    return list(seen.values())
