"""Stabilizer-formalism engine: tableaux, Clifford action, Z measurements.

Pauli rows are stored bit-packed (x-part and z-part as uint64 words, plus a
phase exponent of i modulo 4, which is 0 or 2 for valid +/- rows). All row
operations are word-parallel and batch over arbitrary leading axes, so shot
loops vectorize across a whole batch of independent state copies.

Layout conventions
------------------
* ``CliffordTableau``: 2n rows; row j < n is the image of X_j under
  conjugation, row n+j the image of Z_j.
* ``StabilizerState`` (CHP form): 2n rows; rows 0..n-1 are destabilizers,
  rows n..2n-1 stabilizers.
* A row with bits (x_j, z_j) at site j carries letter I/X/Z/Y for
  (0,0)/(1,0)/(0,1)/(1,1); the stored operator is i^phase times the tensor
  product of those Hermitian letters.
"""

from __future__ import annotations

import numpy as np

from . import bits as gf2
from .pauli import PauliString

__all__ = [
    "PauliRows",
    "CliffordTableau",
    "StabilizerState",
    "StateBatch",
    "random_clifford",
    "apply_clifford",
    "measure_all_z",
    "stabilizer_overlap_sq",
    "outcome_probability",
    "ghz_state",
    "basis_state",
    "toric_code_state",
    "from_stabilizers",
    "basis_rotation_tableau",
]


class PauliRows:
    """A (batch of) signed Pauli strings in packed binary form.

    ``x`` and ``z`` have shape ``lead + (W,)`` with W words per row; ``phase``
    has shape ``lead`` and holds the exponent of i modulo 4.
    """

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, phase: np.ndarray):
        self.n = n
        self.x = x
        self.z = z
        self.phase = phase

    @classmethod
    def identity(cls, n: int, shape: tuple[int, ...]) -> "PauliRows":
        w = gf2.words_for(n)
        return cls(
            n,
            np.zeros(shape + (w,), dtype=np.uint64),
            np.zeros(shape + (w,), dtype=np.uint64),
            np.zeros(shape, dtype=np.uint8),
        )

    @classmethod
    def from_strings(cls, strings, signs=None) -> "PauliRows":
        """Rows from letter strings; ``signs`` holds +1/-1 per row."""
        strings = [s.letters if isinstance(s, PauliString) else s for s in strings]
        n = len(strings[0])
        xb = np.array([[c in "XY" for c in s] for s in strings], dtype=np.uint8)
        zb = np.array([[c in "ZY" for c in s] for s in strings], dtype=np.uint8)
        phase = np.zeros(len(strings), dtype=np.uint8)
        if signs is not None:
            phase = np.where(np.asarray(signs) < 0, 2, 0).astype(np.uint8)
        return cls(n, gf2.pack(xb), gf2.pack(zb), phase)

    def copy(self) -> "PauliRows":
        return PauliRows(self.n, self.x.copy(), self.z.copy(), self.phase.copy())

    def signs(self) -> np.ndarray:
        """+1/-1 per row; rows must hold Hermitian (even-phase) operators."""
        if np.any(self.phase & 1):
            raise ValueError("row carries an imaginary phase")
        return np.where(self.phase == 0, 1, -1)

    def letters(self) -> list[str]:
        xb = gf2.unpack(self.x, self.n)
        zb = gf2.unpack(self.z, self.n)
        table = np.array(list("IXZY"))
        flat = table[(xb + 2 * zb).reshape(-1, self.n)]
        return ["".join(row) for row in flat]

    def mul_where(self, gx, gz, gphase, where=None) -> None:
        """Right-multiply rows by g elementwise: self <- self * g.

        ``gx``/``gz`` broadcast against the row arrays; ``where`` is a boolean
        mask over the leading shape selecting which rows to update. Masked-out
        rows see an effective g = identity, so everything stays vectorized.

        The phase update uses the X^a Z^b normal form: multiplying two rows
        costs i^(y1 + y2 - y_out) * (-1)^(z1 . x2), with y = #Y sites.
        """
        if where is not None:
            full = np.where(np.asarray(where, dtype=bool), ~np.uint64(0), np.uint64(0))[..., None]
            gx = gx & full
            gz = gz & full
            gphase = np.asarray(gphase) * np.asarray(where, dtype=np.uint8)
        new_x = self.x ^ gx
        new_z = self.z ^ gz
        eps = (
            gf2.popcount(self.x & self.z)
            + gf2.popcount(gx & gz)
            - gf2.popcount(new_x & new_z)
            + 2 * gf2.popcount(self.z & gx)
        )
        self.phase = ((self.phase + np.asarray(gphase, dtype=np.int64) + eps) & 3).astype(np.uint8)
        self.x = new_x
        self.z = new_z

    def anticommutes(self, gx, gz) -> np.ndarray:
        """Symplectic-product parity against a row g (broadcast)."""
        return (gf2.parity(self.x & gz) ^ gf2.parity(self.z & gx)).astype(np.uint8)


def _conjugate_sweep(tab_x, tab_z, tab_phase, rows: PauliRows, n: int) -> PauliRows:
    """Reference conjugation: multiply generator images one site at a time.

    Kept as an independent cross-check for the matmul-based fast path.
    """
    lead = np.broadcast_shapes(tab_x.shape[:-2], rows.x.shape[:-2])
    m = rows.x.shape[-2]
    out = PauliRows.identity(n, lead + (m,))
    out.phase = np.broadcast_to(rows.phase, lead + (m,)).copy()
    for j in range(n):
        xbit = gf2.get_bit(rows.x, j)
        zbit = gf2.get_bit(rows.z, j)
        out.mul_where(
            tab_x[..., j, None, :], tab_z[..., j, None, :], tab_phase[..., j, None],
            where=xbit.astype(bool),
        )
        out.mul_where(
            tab_x[..., n + j, None, :], tab_z[..., n + j, None, :], tab_phase[..., n + j, None],
            where=zbit.astype(bool),
        )
        out.phase = (out.phase + (xbit & zbit)) & 3
    return out


def _conjugate(tab_x, tab_z, tab_phase, rows: PauliRows, n: int, bits_only_rows: int = 0) -> PauliRows:
    """Conjugate ``rows`` through tableau rows (batched matmul fast path).

    ``tab_*`` are shaped ``lead + (2n, W)`` / ``lead + (2n,)``; ``rows`` is
    shaped ``lead + (m,)`` in its leading dims. Leading dims must broadcast.
    The first ``bits_only_rows`` rows skip the sign computation (their output
    phases are zeroed) -- used for destabilizers ahead of a measurement.

    The image of a row is the ordered product of selected generator images;
    written in X^a Z^b normal form, the sign of such a product is a GF(2)
    quadratic form in the selection vector, so the whole batch reduces to a
    few float32 matrix products (exact: all sums stay far below 2^24).
    """
    lead = np.broadcast_shapes(tab_x.shape[:-2], rows.x.shape[:-2])
    m = rows.x.shape[-2]
    tab_bits = np.concatenate(
        [gf2.unpack(tab_x, n), gf2.unpack(tab_z, n)], axis=-1
    ).astype(np.float32)  # lead + (2n, 2n)
    sel = np.concatenate(
        [gf2.unpack(rows.x, n), gf2.unpack(rows.z, n)], axis=-1
    ).astype(np.float32)  # lead + (m, 2n)
    tab_bits = np.broadcast_to(tab_bits, lead + tab_bits.shape[-2:])
    sel = np.broadcast_to(sel, lead + (m, 2 * n))

    out_bits = (sel @ tab_bits) % 2  # lead + (m, 2n)
    new_x = gf2.pack(out_bits[..., :n].astype(np.uint8))
    new_z = gf2.pack(out_bits[..., n:].astype(np.uint8))

    signed = slice(bits_only_rows, m)
    sel_s = sel[..., signed, :]

    # Normal-form phase of each generator image: i^(tab_phase + #Y sites).
    t = (tab_phase + gf2.popcount(tab_x & tab_z)).astype(np.float32)  # lead + (2n,)
    t = np.broadcast_to(t, lead + (2 * n,))
    lin = sel_s @ t[..., None]  # lead + (m', 1)

    # Reordering sign: moving Z^b of generator k past X^a of generator l > k.
    az = tab_bits[..., :, n:]  # z-part rows (2n, n)
    ax = tab_bits[..., :, :n]  # x-part rows
    cross = (az @ np.swapaxes(ax, -1, -2)) % 2  # lead + (2n, 2n): C[k, l]
    upper = np.triu(np.ones((2 * n, 2 * n), dtype=np.float32), k=1)
    quad = ((sel_s @ (cross * upper)) * sel_s).sum(axis=-1)

    y_in = gf2.popcount(rows.x[..., signed, :] & rows.z[..., signed, :])
    y_out = gf2.popcount(new_x[..., signed, :] & new_z[..., signed, :])
    phase = np.zeros(lead + (m,), dtype=np.uint8)
    phase[..., signed] = (
        (
            np.broadcast_to(rows.phase, lead + (m,))[..., signed].astype(np.int64)
            + y_in
            + np.rint(lin[..., 0]).astype(np.int64)
            + 2 * np.rint(quad).astype(np.int64)
            - y_out
        )
        & 3
    ).astype(np.uint8)
    return PauliRows(n, new_x, new_z, phase)


class CliffordTableau:
    """Symplectic binary representation of a Clifford unitary (mod phase)."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: PauliRows):
        if rows.x.shape != (2 * n, gf2.words_for(n)):
            raise ValueError("tableau rows must have shape (2n, W)")
        self.n = n
        self.rows = rows

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        rows = PauliRows.identity(n, (2 * n,))
        for j in range(n):
            gf2.set_bit(rows.x[j : j + 1], j, np.uint8(1))
            gf2.set_bit(rows.z[n + j : n + j + 1], j, np.uint8(1))
        return cls(n, rows)

    @classmethod
    def from_bit_matrix(cls, n: int, m: np.ndarray, phases: np.ndarray) -> "CliffordTableau":
        """Rows from a dense (2n, 2n) 0/1 matrix laid out as [x-part | z-part]."""
        rows = PauliRows(
            n, gf2.pack(m[:, :n]), gf2.pack(m[:, n:]), np.asarray(phases, dtype=np.uint8)
        )
        return cls(n, rows)

    def bit_matrix(self) -> np.ndarray:
        return np.concatenate(
            [gf2.unpack(self.rows.x, self.n), gf2.unpack(self.rows.z, self.n)], axis=1
        )

    @property
    def x_bits(self) -> np.ndarray:
        return gf2.unpack(self.rows.x, self.n)

    @property
    def z_bits(self) -> np.ndarray:
        return gf2.unpack(self.rows.z, self.n)

    @property
    def signs(self) -> np.ndarray:
        return (self.rows.phase >> 1).astype(np.uint8)

    def conjugate(self, rows: PauliRows) -> PauliRows:
        """Image of the given Pauli rows under this Clifford."""
        return _conjugate(self.rows.x, self.rows.z, self.rows.phase, rows, self.n)

    def symplectic_ok(self) -> bool:
        """Do the image rows preserve the generator commutation relations?"""
        m = self.bit_matrix()
        n = self.n
        form = (m[:, n:] @ m[:, :n].T + m[:, :n] @ m[:, n:].T) % 2
        expected = np.zeros((2 * n, 2 * n), dtype=int)
        expected[:n, n:] = np.eye(n, dtype=int)
        expected[n:, :n] = np.eye(n, dtype=int)
        if not np.array_equal(form, expected):
            return False
        return not np.any(self.rows.phase & 1)

    def inverse(self) -> "CliffordTableau":
        """Tableau of the inverse Clifford (bits via the symplectic transpose)."""
        n = self.n
        m = self.bit_matrix()
        # v -> v @ m is the bare action; the inverse matrix is J m^T J.
        jmt = np.concatenate([m[:, n:], m[:, :n]], axis=1).T  # J m^T
        minv = np.concatenate([jmt[:, n:], jmt[:, :n]], axis=1)  # J m^T J
        cand = CliffordTableau.from_bit_matrix(n, minv, np.zeros(2 * n, dtype=np.uint8))
        roundtrip = self.conjugate(cand.rows)
        ident = CliffordTableau.identity(n)
        if not (
            np.array_equal(roundtrip.x, ident.rows.x) and np.array_equal(roundtrip.z, ident.rows.z)
        ):
            raise ValueError("tableau is not symplectic; cannot invert")
        cand.rows.phase = roundtrip.phase.copy()  # phases are 0/2, self-inverse signs
        return cand

    def key(self) -> bytes:
        return self.rows.x.tobytes() + self.rows.z.tobytes() + self.rows.phase.tobytes()

    def unitary(self, cap: int = 12) -> np.ndarray:
        """Dense 2^n x 2^n matrix of this Clifford (global phase arbitrary)."""
        if self.n > cap:
            raise ValueError(f"n={self.n} exceeds dense cap {cap}")
        from .dense import apply_pauli_string

        n = self.n
        phi0 = StabilizerState(n, self.rows.copy()).state_vector(cap=cap)
        ximg = PauliRows(n, self.rows.x[:n], self.rows.z[:n], self.rows.phase[:n])
        letters = ximg.letters()
        signs = ximg.signs()
        cols = np.empty((2**n, 2**n), dtype=complex)
        for b in range(2**n):
            col = phi0
            for q in range(n):
                if (b >> (n - 1 - q)) & 1:
                    col = apply_pauli_string(col, letters[q], int(signs[q]))
            cols[:, b] = col
        return cols

    def to_lines(self) -> list[str]:
        m = self.bit_matrix()
        s = self.signs
        return [" ".join(str(int(v)) for v in np.append(m[i], s[i])) for i in range(2 * self.n)]

    @classmethod
    def from_lines(cls, n: int, lines: list[str]) -> "CliffordTableau":
        if len(lines) != 2 * n:
            raise ValueError(f"expected {2*n} tableau lines, got {len(lines)}")
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        phases = np.zeros(2 * n, dtype=np.uint8)
        for i, line in enumerate(lines):
            vals = line.split()
            if len(vals) != 2 * n + 1 or any(v not in ("0", "1") for v in vals):
                raise ValueError(f"tableau line {i+1} malformed")
            m[i] = [int(v) for v in vals[:-1]]
            phases[i] = 2 * int(vals[-1])
        return cls.from_bit_matrix(n, m, phases)


class StabilizerState:
    """CHP tableau: n destabilizer rows followed by n stabilizer rows."""

    __slots__ = ("n", "rows", "_consumed")

    def __init__(self, n: int, rows: PauliRows):
        self.n = n
        self.rows = rows
        self._consumed = False

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(n, CliffordTableau.identity(n).rows.copy())

    def copy(self) -> "StabilizerState":
        return StabilizerState(self.n, self.rows.copy())

    def stabilizers(self) -> PauliRows:
        return PauliRows(
            self.n, self.rows.x[self.n :], self.rows.z[self.n :], self.rows.phase[self.n :]
        )

    def destabilizers(self) -> PauliRows:
        return PauliRows(
            self.n, self.rows.x[: self.n], self.rows.z[: self.n], self.rows.phase[: self.n]
        )

    def as_clifford(self) -> CliffordTableau:
        """The Clifford mapping |0..0> to this state (X_j -> destab_j, Z_j -> stab_j)."""
        return CliffordTableau(self.n, self.rows.copy())

    def chp_ok(self) -> bool:
        """Stabilizers commute; destabilizer i anticommutes exactly with stabilizer i."""
        return self.as_clifford().symplectic_ok()

    def state_vector(self, cap: int = 16) -> np.ndarray:
        """Dense state vector (global phase arbitrary); small n only."""
        if self.n > cap:
            raise ValueError(f"n={self.n} exceeds dense cap {cap}")
        from .dense import apply_pauli_string

        letters = self.stabilizers().letters()
        signs = self.stabilizers().signs()
        rng = np.random.default_rng(0x5EED)
        for _ in range(8):
            psi = rng.normal(size=2**self.n) + 1j * rng.normal(size=2**self.n)
            for s, word in zip(signs, letters):
                psi = (psi + int(s) * apply_pauli_string(psi, word)) / 2
            norm = np.linalg.norm(psi)
            if norm > 1e-8:
                return psi / norm
        raise RuntimeError("failed to project onto the stabilizer subspace")

    def measure_all_z(self, rng: np.random.Generator) -> np.ndarray:
        """Sample Z-basis outcomes for all qubits; consumes the state."""
        if self._consumed:
            raise RuntimeError("state already consumed by a measurement")
        self._consumed = True
        table = rng.integers(0, 2, size=(1, self.n), dtype=np.uint8)
        batch = StateBatch.from_states([self])
        out = batch.measure_all(table)
        self.rows = PauliRows(self.n, batch.x[0], batch.z[0], batch.phase[0])
        return out[0]


class StateBatch:
    """B independent evolving copies of stabilizer states (vectorized shots)."""

    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x, z, phase):
        self.n = n
        self.x = x
        self.z = z
        self.phase = phase

    @classmethod
    def from_state(cls, state: StabilizerState, b: int) -> "StateBatch":
        tile = lambda a: np.repeat(a[None, ...], b, axis=0)
        return cls(state.n, tile(state.rows.x), tile(state.rows.z), tile(state.rows.phase))

    @classmethod
    def from_states(cls, states: list[StabilizerState]) -> "StateBatch":
        n = states[0].n
        return cls(
            n,
            np.stack([s.rows.x for s in states]),
            np.stack([s.rows.z for s in states]),
            np.stack([s.rows.phase for s in states]),
        )

    @property
    def b(self) -> int:
        return self.x.shape[0]

    def rotate_bases(self, bases: np.ndarray) -> None:
        """Conjugate rows by per-qubit basis rotations V_W (codes X=1, Y=2, Z=3).

        V_X = H swaps X and Z (Y picks up a sign); V_Y cycles X->Y->Z->X.
        After rotation, a Z measurement realizes the requested basis.
        """
        bases = np.asarray(bases, dtype=np.uint8)
        for q in range(self.n):
            w, off = q >> 6, np.uint64(q & 63)
            one = np.uint64(1) << off
            code = bases[:, q][:, None]  # (B, 1) against rows
            xb = (self.x[:, :, w] >> off) & np.uint64(1)
            zb = (self.z[:, :, w] >> off) & np.uint64(1)
            # X basis (H): swap bits, phase += 2 on Y sites.
            hx, hz = zb, xb
            hphase = ((xb & zb) << np.uint64(1)).astype(np.uint8)
            # Y basis: (x, z) -> (x ^ z, x), no phase.
            vx, vz = xb ^ zb, xb
            take_h = code == 1
            take_v = code == 2
            newx = np.where(take_h, hx, np.where(take_v, vx, xb))
            newz = np.where(take_h, hz, np.where(take_v, vz, zb))
            dphase = np.where(take_h, hphase, 0).astype(np.uint8)
            self.x[:, :, w] = np.where(newx.astype(bool), self.x[:, :, w] | one, self.x[:, :, w] & ~one)
            self.z[:, :, w] = np.where(newz.astype(bool), self.z[:, :, w] | one, self.z[:, :, w] & ~one)
            self.phase = (self.phase + dphase) & 3

    def apply_tableaux(self, tab_x, tab_z, tab_phase, for_measurement: bool = False) -> None:
        """Conjugate every copy through its own tableau (arrays shaped (B, 2n, W)).

        With ``for_measurement`` the destabilizer phases are not propagated
        (measurement outcomes never read them), which skips a large part of
        the sign arithmetic.
        """
        n = self.n
        rows = PauliRows(n, self.x, self.z, self.phase)
        out = _conjugate(tab_x, tab_z, tab_phase, rows, n, bits_only_rows=n if for_measurement else 0)
        self.x, self.z, self.phase = out.x, out.z, out.phase

    def apply_tableau(self, tab: CliffordTableau) -> None:
        rows = PauliRows(self.n, self.x, self.z, self.phase)
        out = tab.conjugate(rows)
        self.x, self.z, self.phase = out.x, out.z, out.phase

    def measure_all(self, bit_table: np.ndarray) -> np.ndarray:
        """Measure every qubit in the Z basis across the batch.

        ``bit_table`` (B, n) supplies the candidate random outcome for each
        (shot, qubit); it is consumed positionally, so results are
        reproducible regardless of batch splitting.
        """
        n, b = self.n, self.b
        out = np.zeros((b, n), dtype=np.uint8)
        rows_idx = np.arange(2 * n)
        shot_idx = np.arange(b)
        for a in range(n):
            w, off = a >> 6, np.uint64(a & 63)
            one = np.uint64(1) << off
            xcol = ((self.x[:, :, w] >> off) & np.uint64(1)).astype(np.uint8)  # (B, 2n)
            stab_x = xcol[:, n:]
            is_random = stab_x.any(axis=1)
            if is_random.any():
                p = n + np.argmax(stab_x, axis=1)  # first stabilizer with X at a
                gx = self.x[shot_idx, p]  # (B, W)
                gz = self.z[shot_idx, p]
                gp = self.phase[shot_idx, p]
                update = xcol.astype(bool) & (rows_idx[None, :] != p[:, None])
                update &= is_random[:, None]
                rows = PauliRows(n, self.x, self.z, self.phase)
                rows.mul_where(gx[:, None, :], gz[:, None, :], gp[:, None], where=update)
                self.x, self.z, self.phase = rows.x, rows.z, rows.phase
                sel = np.nonzero(is_random)[0]
                psel = p[sel]
                # destabilizer[p - n] <- old stabilizer row p, then row p := +/- Z_a
                self.x[sel, psel - n] = self.x[sel, psel]
                self.z[sel, psel - n] = self.z[sel, psel]
                self.phase[sel, psel - n] = self.phase[sel, psel]
                outcome = bit_table[sel, a].astype(np.uint8)
                self.x[sel, psel] = 0
                self.z[sel, psel] = 0
                self.z[sel, psel, w] |= one
                self.phase[sel, psel] = (2 * outcome).astype(np.uint8)
                out[sel, a] = outcome
            det = ~is_random
            if det.any():
                scratch = PauliRows.identity(n, (b,))
                for i in range(n):
                    mask = xcol[:, i].astype(bool) & det
                    if not mask.any():
                        continue
                    scratch.mul_where(
                        self.x[:, n + i], self.z[:, n + i], self.phase[:, n + i], where=mask
                    )
                out[det, a] = (scratch.phase[det] >> 1).astype(np.uint8)
        return out

    def states(self) -> list[StabilizerState]:
        return [
            StabilizerState(self.n, PauliRows(self.n, self.x[i], self.z[i], self.phase[i]))
            for i in range(self.b)
        ]


def apply_clifford(state: StabilizerState, u: CliffordTableau) -> StabilizerState:
    """Return the state with ``u`` applied (rows conjugated through ``u``)."""
    if state.n != u.n:
        raise ValueError(f"size mismatch: state n={state.n}, tableau n={u.n}")
    return StabilizerState(state.n, u.conjugate(state.rows))


def measure_all_z(state: StabilizerState, rng: np.random.Generator) -> np.ndarray:
    return state.measure_all_z(rng)


def _reduce_x_support_batch(rows: PauliRows) -> tuple[PauliRows, np.ndarray]:
    """Clear the X part of stabilizer row stacks by in-group row operations.

    ``rows`` is batched with shape (B, m) in its leading dims. Returns the
    reduced rows plus a boolean (B, m) mask marking the X-pivot rows; the
    unmarked rows generate each Z-only subgroup with exact signs.
    """
    n = rows.n
    out = rows.copy()
    b, m = out.phase.shape
    used = np.zeros((b, m), dtype=bool)
    row_idx = np.arange(m)
    shot_idx = np.arange(b)
    for a in range(n):
        xcol = gf2.get_bit(out.x, a).astype(bool)  # (B, m)
        cand = xcol & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        p = np.argmax(cand, axis=1)
        others = xcol & (row_idx[None, :] != p[:, None]) & has[:, None]
        if others.any():
            px = out.x[shot_idx, p][:, None, :]
            pz = out.z[shot_idx, p][:, None, :]
            pph = out.phase[shot_idx, p][:, None]
            out.mul_where(px, pz, pph, where=others)
        used[has, p[has]] = True
    return out, used


def stab_outcome_probability_batch(rows: PauliRows, outcome_bits: np.ndarray) -> np.ndarray:
    """Born probabilities of specific Z outcomes for a (B, n)-stack of
    stabilizer-row sets; each is 0 or 2^-rank."""
    reduced, used = _reduce_x_support_batch(rows)
    b_packed = gf2.pack(np.asarray(outcome_bits, dtype=np.uint8))  # (B, W)
    vals = ((reduced.phase >> 1) ^ gf2.parity(reduced.z & b_packed[:, None, :])) & 1
    bad = (vals.astype(bool) & ~used).any(axis=1)
    rank = used.sum(axis=1)
    return np.where(bad, 0.0, 2.0 ** (-rank.astype(float)))


def outcome_probability(state: StabilizerState, outcome_bits: np.ndarray) -> float:
    """Born probability of a specific Z-basis outcome; either 0 or 2^-r."""
    stab = state.stabilizers()
    rows = PauliRows(state.n, stab.x[None], stab.z[None], stab.phase[None])
    return float(stab_outcome_probability_batch(rows, np.asarray(outcome_bits)[None, :])[0])


def stabilizer_overlap_sq(a: StabilizerState, b: StabilizerState) -> float:
    """|<a|b>|^2, computed by rotating ``a`` onto |0..0> and reading the
    Born probability of the all-zeros outcome on the rotated ``b``."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    v = a.as_clifford().inverse()
    rotated = apply_clifford(b, v)
    return outcome_probability(rotated, np.zeros(a.n, dtype=np.uint8))


# ---------------------------------------------------------------------------
# state constructors


def basis_state(bits: np.ndarray) -> StabilizerState:
    bits = np.asarray(bits, dtype=np.uint8)
    state = StabilizerState.zero(len(bits))
    state.rows.phase[len(bits) :] = (2 * bits).astype(np.uint8)
    return state


def ghz_state(n: int, sign: int = +1) -> StabilizerState:
    """GHZ state stabilized by {±X..X, Z_i Z_{i+1}}; sign selects the |0..0> ± |1..1> branch."""
    if n < 2:
        raise ValueError("GHZ state needs n >= 2")
    w = gf2.words_for(n)
    x = np.zeros((2 * n, w), dtype=np.uint64)
    z = np.zeros((2 * n, w), dtype=np.uint64)
    phase = np.zeros(2 * n, dtype=np.uint8)
    full = np.ones(n, dtype=np.uint8)
    x[n] = gf2.pack(full[None, :])[0]
    phase[n] = 0 if sign > 0 else 2
    for i in range(1, n):
        zz = np.zeros(n, dtype=np.uint8)
        zz[i - 1] = zz[i] = 1
        z[n + i] = gf2.pack(zz[None, :])[0]
    # destabilizers: D_0 = Z_{n-1}; D_i = X_0 .. X_{i-1}
    dz = np.zeros(n, dtype=np.uint8)
    dz[n - 1] = 1
    z[0] = gf2.pack(dz[None, :])[0]
    for i in range(1, n):
        dx = np.zeros(n, dtype=np.uint8)
        dx[:i] = 1
        x[i] = gf2.pack(dx[None, :])[0]
    return StabilizerState(n, PauliRows(n, x, z, phase))


def from_stabilizers(strings, signs=None) -> StabilizerState:
    """Stabilizer state from n independent commuting generators.

    Destabilizers are completed by solving the symplectic pairing
    constraints over GF(2), one row at a time.
    """
    stab = PauliRows.from_strings(strings, signs)
    n = stab.n
    if stab.x.shape[0] != n:
        raise ValueError(f"need exactly n={n} generators, got {stab.x.shape[0]}")
    w = gf2.words_for(n)
    full = np.concatenate([stab.x, stab.z], axis=1)  # (n, 2W) packed [x | z]
    swapped = np.concatenate([stab.z, stab.x], axis=1)  # symplectic-form rows
    _, pivots = gf2.row_reduce(full, 2 * w * 64)
    if len(pivots) != n:
        raise ValueError("stabilizer generators are linearly dependent")
    xb, zb = gf2.unpack(stab.x, n), gf2.unpack(stab.z, n)
    if ((xb @ zb.T + zb @ xb.T) % 2).any():
        raise ValueError("stabilizer generators do not commute")
    destab_x = np.zeros((n, w), dtype=np.uint64)
    destab_z = np.zeros((n, w), dtype=np.uint64)
    constraint_rows = list(swapped)
    for i in range(n):
        rhs = np.zeros(len(constraint_rows), dtype=np.uint8)
        rhs[i] = 1
        sol = gf2.solve(np.array(constraint_rows), 2 * w * 64, rhs)
        if sol is None:
            raise ValueError("failed to complete destabilizers")
        destab_x[i] = sol[:w]
        destab_z[i] = sol[w:]
        constraint_rows.append(np.concatenate([destab_z[i], destab_x[i]]))
    x = np.concatenate([destab_x, stab.x], axis=0)
    z = np.concatenate([destab_z, stab.z], axis=0)
    phase = np.concatenate([np.zeros(n, dtype=np.uint8), stab.phase])
    state = StabilizerState(n, PauliRows(n, x, z, phase))
    if not state.chp_ok():
        raise ValueError("destabilizer completion failed the CHP invariant")
    return state


def toric_code_state(lx: int, ly: int) -> StabilizerState:
    """Toric-code ground state on an lx-by-ly torus (qubits on edges).

    Stabilizers: X stars at each vertex and Z plaquettes at each face (one of
    each dropped as dependent), plus two non-contractible Z loops fixing the
    logical sector.
    """
    if lx < 2 or ly < 2:
        raise ValueError("torus needs lx, ly >= 2")
    n = 2 * lx * ly

    def h_edge(i, j):  # horizontal edge leaving vertex (i, j) in +x
        return (j % ly) * lx + (i % lx)

    def v_edge(i, j):  # vertical edge leaving vertex (i, j) in +y
        return lx * ly + (j % ly) * lx + (i % lx)

    gens: list[tuple[str, list[int]]] = []
    for j in range(ly):
        for i in range(lx):
            if (i, j) == (lx - 1, ly - 1):
                continue  # product of all stars is identity
            star = [h_edge(i, j), h_edge(i - 1, j), v_edge(i, j), v_edge(i, j - 1)]
            gens.append(("X", star))
    for j in range(ly):
        for i in range(lx):
            if (i, j) == (lx - 1, ly - 1):
                continue  # product of all plaquettes is identity
            plaq = [h_edge(i, j), h_edge(i, j + 1), v_edge(i, j), v_edge(i + 1, j)]
            gens.append(("Z", plaq))
    gens.append(("Z", [v_edge(0, j) for j in range(ly)]))  # vertical Z loop
    gens.append(("Z", [h_edge(i, 0) for i in range(lx)]))  # horizontal Z loop

    strings = []
    for letter, sites in gens:
        word = ["I"] * n
        for q in sites:
            word[q] = letter
        strings.append("".join(word))
    return from_stabilizers(strings)


def basis_rotation_tableau(bases: np.ndarray | str) -> CliffordTableau:
    """Tensor-product tableau rotating each qubit's basis onto Z.

    Accepts letter codes (X=1, Y=2, Z=3) or a letter string.
    """
    if isinstance(bases, str):
        codes = np.array([{"X": 1, "Y": 2, "Z": 3}[c] for c in bases], dtype=np.uint8)
    else:
        codes = np.asarray(bases, dtype=np.uint8)
    n = len(codes)
    tab = CliffordTableau.identity(n)
    batch = StateBatch(
        n, tab.rows.x[None, ...].copy(), tab.rows.z[None, ...].copy(), tab.rows.phase[None, ...].copy()
    )
    batch.rotate_bases(codes[None, :])
    return CliffordTableau(n, PauliRows(n, batch.x[0], batch.z[0], batch.phase[0]))


# ---------------------------------------------------------------------------
# uniform Clifford sampling (Koenig-Smolin canonical sweep)
#
# The symplectic factor is built level by level in the alternating
# (x1 z1 x2 z2 ...) coordinate layout, with rows kept bit-packed. Each level
# draws a uniformly random nonzero image for the first basis vector plus
# 2*level - 1 free bits, exactly the mixed-radix decomposition of the
# canonical Koenig-Smolin index, so the result is uniform over Sp(2n, F2).
# Whole batches of samples advance through the levels together.

_EVEN_MASK = np.uint64(0x5555555555555555)


def _pair_swap(rows: np.ndarray) -> np.ndarray:
    """Swap the (x, z) bits of every coordinate pair in packed rows."""
    return ((rows & _EVEN_MASK) << np.uint64(1)) | ((rows & ~_EVEN_MASK) >> np.uint64(1))


def _transvect_batch(block: np.ndarray, k: np.ndarray) -> None:
    """In-place transvections Z_k per batch element: block (B, m, w), k (B, w)."""
    ip = gf2.parity(block & _pair_swap(k)[:, None, :])
    block ^= np.where(ip[..., None].astype(bool), k[:, None, :], np.uint64(0))


def _vec_inner(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Alternating-form inner product of unpacked vectors, batched over rows."""
    tp = t.reshape(t.shape[0], -1, 2)
    vp = v.reshape(v.shape[0], -1, 2)
    return ((tp[:, :, 0] * vp[:, :, 1] + tp[:, :, 1] * vp[:, :, 0]).sum(axis=1) % 2).astype(np.uint8)


def _transvection_from_e1(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched transvection pair mapping e1 = (1,0,..,0) to each row of y.

    Follows the case analysis of Koenig-Smolin Lemma 2, specialized to
    x = e1 (the only input the sweep needs). Rows of y must be nonzero.
    """
    b, nn = y.shape
    t0 = np.zeros_like(y)
    t1 = np.zeros_like(y)
    is_eq = (y[:, 0] == 1) & (y[:, 1:].sum(axis=1) == 0)
    is_ip = (y[:, 1] == 1) & ~is_eq
    is_c = (y[:, 0] == 1) & (y[:, 1] == 0) & ~is_eq
    is_d = (y[:, 0] == 0) & (y[:, 1] == 0)
    # <e1, y> = 1: a single transvection by e1 + y does it
    t0[is_ip] = y[is_ip]
    t0[is_ip, 0] ^= 1
    # shared or separate nonzero pairs: build the helper vector z
    z = np.zeros_like(y)
    z[is_c, 0] = 1
    z[is_c | is_d, 1] = 1
    if is_d.any():
        pairs = y[is_d].reshape(-1, nn // 2, 2)
        first = np.argmax(pairs.any(axis=2), axis=1)
        rows = np.arange(pairs.shape[0])
        a = pairs[rows, first, 0]
        c = pairs[rows, first, 1]
        sub = z[is_d]
        sub[rows, 2 * first + 1] = np.where(a == c, 1, a)
        sub[rows, 2 * first] = np.where(a == c, 0, c)
        z[is_d] = sub
    both = is_c | is_d
    t0[both] = z[both]
    t0[both, 0] ^= 1
    t1[both] = y[both] ^ z[both]
    return t0, t1


def random_symplectic_batch(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """B uniform elements of Sp(2n, F2), packed rows, alternating layout."""
    w = gf2.words_for(2 * n)
    g = np.zeros((b, 2 * n, w), dtype=np.uint64)
    g[:, 0, 0] = 1  # identity on the first coordinate pair
    g[:, 1, 0] = 2
    for level in range(1, n + 1):
        nn = 2 * level
        wl = gf2.words_for(nn)
        if level > 1:
            # embed as directsum(I2, g): shift the previous block by one pair
            rows = g[:, : nn - 2, :wl]
            carry = np.zeros_like(rows)
            carry[:, :, 1:] = rows[:, :, :-1] >> np.uint64(62)
            shifted = (rows << np.uint64(2)) | carry
            g[:, 2:nn, :wl] = shifted
            g[:, 0, :] = 0
            g[:, 1, :] = 0
            g[:, 0, 0] = 1
            g[:, 1, 0] = 2
        f1 = rng.integers(0, 2, size=(b, nn), dtype=np.uint8)
        while True:
            dead = ~f1.any(axis=1)
            if not dead.any():
                break
            f1[dead] = rng.integers(0, 2, size=(int(dead.sum()), nn), dtype=np.uint8)
        bbits = rng.integers(0, 2, size=(b, nn - 1), dtype=np.uint8)
        t0, t1 = _transvection_from_e1(f1)
        eprime = np.zeros((b, nn), dtype=np.uint8)
        eprime[:, 0] = 1
        eprime[:, 2:] = bbits[:, 1:]
        h0 = eprime ^ (_vec_inner(t0, eprime)[:, None] * t0)
        h0 ^= _vec_inner(t1, h0)[:, None] * t1
        f1 = f1 * (bbits[:, 0] == 0)[:, None].astype(np.uint8)
        block = g[:, :nn, :wl]
        packed = gf2.pack(np.stack([t0, t1, h0, f1]))
        for k in packed:
            _transvect_batch(block, k)
    return g


def random_cliffords_batch(n: int, b: int, rng: np.random.Generator) -> PauliRows:
    """B independent uniformly random tableaux, stacked as rows (b, 2n)."""
    g = gf2.unpack(random_symplectic_batch(n, b, rng), 2 * n)
    perm = np.concatenate([2 * np.arange(n), 2 * np.arange(n) + 1])
    m = g[:, perm][:, :, perm]
    phases = (2 * rng.integers(0, 2, size=(b, 2 * n))).astype(np.uint8)
    return PauliRows(n, gf2.pack(m[:, :, :n]), gf2.pack(m[:, :, n:]), phases)


def random_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Tableau distributed uniformly over the n-qubit Clifford group mod phase."""
    if n < 1:
        raise ValueError("n must be >= 1")
    stack = random_cliffords_batch(n, 1, rng)
    return CliffordTableau(n, PauliRows(n, stack.x[0], stack.z[0], stack.phase[0]))
