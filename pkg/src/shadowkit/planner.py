"""Sample-complexity planning: shadow-norm bounds and (N, K) prescriptions.

``plan_linear`` applies K = ceil(2 ln(2M/delta)) and
N = ceil(34/eps^2 * max_i bound_i); ``plan_quadratic`` multiplies the bound
by 8 per the quadratic guarantee. Logs are natural; ceilings are applied
because shots are integral. The constants are known to be conservative, so
reports carry both the prescription and whatever N the user actually chose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense import DENSE_CAP
from .pauli import PauliString, WeightedPauliSum
from .tableau import StabilizerState

__all__ = [
    "SamplePlan",
    "shadow_norm_bound",
    "plan_linear",
    "plan_quadratic",
    "exact_clifford_shadow_norm",
]


@dataclass
class SamplePlan:
    k: int
    n_per_batch: int
    bounds: list[tuple[str, float]]  # (bound kind, value) per target
    epsilon: float
    delta: float
    primitive: str

    @property
    def n_total(self) -> int:
        return self.k * self.n_per_batch

    @property
    def max_bound(self) -> float:
        return max(v for _, v in self.bounds)


def _traceless_hs_sq(matrix: np.ndarray) -> float:
    d = matrix.shape[0]
    o0 = matrix - np.trace(matrix) / d * np.eye(d)
    return float(np.real(np.trace(o0 @ o0)))


def shadow_norm_bound(target, primitive: str, cap: int = DENSE_CAP) -> tuple[float, str]:
    """Upper bound on the squared shadow norm of one target.

    Pauli primitive: exact 3^k for a single Pauli string, otherwise the
    4^k * |O|_inf^2 locality bound (operator norm evaluated densely when the
    support is small enough, else bounded by the weight l1-norm).
    Clifford primitive: 3 tr(O_0^2) with the traceless part computed exactly.
    """
    if primitive == "pauli":
        if isinstance(target, (PauliString, str)):
            k = PauliString(target if isinstance(target, str) else target.letters).support
            return float(3**k), "pauli-exact-3k"
        if isinstance(target, WeightedPauliSum):
            if len(target.terms) == 1:  # w * P: the norm is exactly |w|^2 3^k
                w, p = target.terms[0]
                return w * w * 3.0**p.support, "pauli-exact-3k"
            k = target.locality
            if k <= cap:
                from .dense import pauli_matrix

                support = sorted({q for _, p in target.terms for q in p.sites()})
                if len(support) <= cap:
                    local = np.zeros((2 ** len(support), 2 ** len(support)), dtype=complex)
                    pos = {q: i for i, q in enumerate(support)}
                    for w, p in target.terms:
                        word = ["I"] * len(support)
                        for q in p.sites():
                            word[pos[q]] = p.letters[q]
                        local += w * pauli_matrix("".join(word))
                    opnorm = float(np.abs(np.linalg.eigvalsh(local)).max())
                    return float(4**k) * opnorm**2, "pauli-4k-opnorm"
            return float(4**k) * target.weight_l1() ** 2, "pauli-4k-weight-bound"
        raise TypeError(f"unsupported pauli-primitive target {type(target)!r}")
    if primitive == "clifford":
        if isinstance(target, StabilizerState):
            return 3.0 * (1.0 - 2.0 ** (-target.n)), "clifford-hs"
        if isinstance(target, WeightedPauliSum):
            return 3.0 * target.traceless_hs_norm_sq(), "clifford-hs"
        matrix = np.asarray(target, dtype=complex)
        if matrix.ndim == 2:
            return 3.0 * _traceless_hs_sq(matrix), "clifford-hs"
        raise TypeError(f"unsupported clifford-primitive target {type(target)!r}")
    raise ValueError(f"unknown primitive {primitive!r}")


def _batch_count(m: int, delta: float) -> int:
    return math.ceil(2.0 * math.log(2.0 * m / delta))


def _check_params(epsilon: float, delta: float, m: int) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside (0, 1]")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta {delta} outside (0, 1)")
    if m < 1:
        raise ValueError("need at least one target")


def plan_linear(targets: list, epsilon: float, delta: float, primitive: str) -> SamplePlan:
    """Shot prescription for linear targets at accuracy epsilon, confidence 1-delta."""
    _check_params(epsilon, delta, len(targets))
    bounds = [shadow_norm_bound(t, primitive) for t in targets]
    n_per = math.ceil(34.0 / epsilon**2 * max(v for v, _ in bounds))
    return SamplePlan(
        k=_batch_count(len(targets), delta),
        n_per_batch=n_per,
        bounds=[(kind, v) for v, kind in bounds],
        epsilon=epsilon,
        delta=delta,
        primitive=primitive,
    )


def quadratic_variance_bound(target, primitive: str) -> tuple[float, str]:
    """Bound on the dominant variance term for quadratic targets.

    Pauli: 4^k |O|_inf^2 with k the per-copy locality -- pass (k, op_norm).
    Clifford: sqrt(9 + 6/2^n) tr(O^2) for a dense two-copy observable.
    """
    if primitive == "pauli":
        k, opnorm = target
        return float(4**k) * float(opnorm) ** 2, "pauli-quadratic-4k"
    if primitive == "clifford":
        matrix = np.asarray(target, dtype=complex)
        dsq = matrix.shape[0]
        n = int(round(np.log2(dsq))) // 2
        hs = float(np.real(np.trace(matrix @ matrix)))
        return math.sqrt(9.0 + 6.0 / 2**n) * hs, "clifford-quadratic-hs"
    raise ValueError(f"unknown primitive {primitive!r}")


def plan_quadratic(targets: list, epsilon: float, delta: float, primitive: str) -> SamplePlan:
    """Shot prescription for quadratic targets (two-copy observables)."""
    _check_params(epsilon, delta, len(targets))
    bounds = [quadratic_variance_bound(t, primitive) for t in targets]
    n_per = math.ceil(34.0 / epsilon**2 * 8.0 * max(v for v, _ in bounds))
    return SamplePlan(
        k=_batch_count(len(targets), delta),
        n_per_batch=n_per,
        bounds=[(kind, v) for v, kind in bounds],
        epsilon=epsilon,
        delta=delta,
        primitive=primitive,
    )


def exact_clifford_shadow_norm(observable: np.ndarray, cap: int = DENSE_CAP) -> float:
    """Exact squared shadow norm of a dense observable under random Cliffords:

    ((2^n + 1)/(2^n + 2)) * (tr(O_0^2) + 2 |O_0|_inf^2).
    """
    matrix = np.asarray(observable, dtype=complex)
    d = matrix.shape[0]
    n = int(round(np.log2(d)))
    if n > cap:
        raise ValueError(f"n={n} exceeds dense cap {cap}")
    o0 = matrix - np.trace(matrix) / d * np.eye(d)
    hs = float(np.real(np.trace(o0 @ o0)))
    opnorm = float(np.abs(np.linalg.eigvalsh(o0)).max())
    return (d + 1.0) / (d + 2.0) * (hs + 2.0 * opnorm**2)
