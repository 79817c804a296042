"""Text file formats: shadows, observables, schemes, subsystems, states, reports.

Every format opens with a versioned header line; an optional ``# config``
comment (the exact CLI invocation) follows it, so artifacts record how to
reproduce themselves. Parsers reject malformed or trailing content with
1-based line numbers. Writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .acquisition import MeasurementScheme, ShadowDataset
from .pauli import WeightedPauliSum
from .tableau import CliffordTableau, PauliRows

__all__ = [
    "DataFormatError",
    "write_text",
    "write_shadow_file",
    "read_shadow_file",
    "write_observables_file",
    "read_observables_file",
    "write_scheme_file",
    "read_scheme_file",
    "write_subsystems_file",
    "read_subsystems_file",
    "write_state_file",
    "read_state_file",
]

LETTER_OF_CODE = {1: "X", 2: "Y", 3: "Z"}
CODE_OF_LETTER = {"X": 1, "Y": 2, "Z": 3}


class DataFormatError(Exception):
    """Malformed data file; carries the 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def write_text(path: str, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, path: str):
        self.path = path
        with open(path) as fh:
            self.lines = fh.read().splitlines()
        self.pos = 0

    def fail(self, message: str, line: int | None = None):
        raise DataFormatError(self.path, self.pos if line is None else line, message)

    def header(self, expected_kind: str) -> dict[str, str]:
        if not self.lines:
            self.pos = 1
            self.fail("empty file")
        self.pos = 1
        parts = self.lines[0].split()
        if len(parts) < 3 or parts[0] != "#" or parts[1] != expected_kind or parts[2] != "v1":
            self.fail(f"expected header '# {expected_kind} v1 ...'")
        fields = {}
        for tok in parts[3:]:
            if "=" not in tok:
                self.fail(f"bad header field {tok!r}")
            key, val = tok.split("=", 1)
            fields[key] = val
        self.pos = 1
        return fields

    def body(self):
        """Remaining non-comment lines as (1-based line number, text)."""
        for i in range(1, len(self.lines)):
            self.pos = i + 1
            text = self.lines[i]
            if text.startswith("#"):
                continue
            yield i + 1, text

    def int_field(self, fields: dict, key: str) -> int:
        if key not in fields:
            self.fail(f"header missing {key}=")
        try:
            return int(fields[key])
        except ValueError:
            self.fail(f"header field {key}={fields[key]!r} is not an integer")


def _config_comment(config_line: str | None) -> str:
    return f"# config {config_line}\n" if config_line else ""


# ---------------------------------------------------------------------------
# shadow datasets


def write_shadow_file(path: str, ds: ShadowDataset, config_line: str | None = None) -> None:
    head = (
        f"# shadow v1 kind={ds.kind} n={ds.n} seed={ds.seed} state={ds.state_descriptor}\n"
        + _config_comment(config_line)
    )
    chunks = [head]
    if ds.kind == "pauli":
        letters = np.array(["?", "X", "Y", "Z"])
        rows = letters[ds.bases] + ds.bits.astype(str)
        for i in range(len(ds)):
            prefix = f"g={ds.groups[i]} " if ds.groups is not None else ""
            chunks.append(prefix + " ".join(rows[i]) + "\n")
    else:
        for i in range(len(ds)):
            chunks.append("b " + "".join(str(int(v)) for v in ds.bits[i]) + "\n")
            chunks.extend(line + "\n" for line in ds.tableau_at(i).to_lines())
    write_text(path, "".join(chunks))


def read_shadow_file(path: str) -> ShadowDataset:
    r = _Reader(path)
    fields = r.header("shadow")
    kind = fields.get("kind")
    if kind not in ("pauli", "clifford"):
        r.fail(f"unknown kind={kind!r}")
    n = r.int_field(fields, "n")
    seed = r.int_field(fields, "seed")
    state = fields.get("state", "")
    if kind == "pauli":
        bases, bits, groups = [], [], []
        tagged = None
        for lineno, text in r.body():
            toks = text.split()
            group = None
            if toks and toks[0].startswith("g="):
                try:
                    group = int(toks[0][2:])
                except ValueError:
                    r.fail("bad group tag", lineno)
                toks = toks[1:]
            if tagged is None:
                tagged = group is not None
            elif tagged != (group is not None):
                r.fail("mixed tagged and untagged snapshot lines", lineno)
            if len(toks) != n:
                r.fail(f"expected {n} tokens, got {len(toks)}", lineno)
            brow, orow = [], []
            for tok in toks:
                if len(tok) != 2 or tok[0] not in CODE_OF_LETTER or tok[1] not in "01":
                    r.fail(f"bad snapshot token {tok!r}", lineno)
                brow.append(CODE_OF_LETTER[tok[0]])
                orow.append(int(tok[1]))
            bases.append(brow)
            bits.append(orow)
            groups.append(group)
        if not bases:
            r.fail("no snapshots")
        return ShadowDataset(
            "pauli",
            n,
            seed,
            state,
            bases=np.array(bases, dtype=np.uint8),
            bits=np.array(bits, dtype=np.uint8),
            groups=np.array(groups, dtype=np.int64) if tagged else None,
        )
    bits_rows, tabs = [], []
    lines = list(r.body())
    i = 0
    while i < len(lines):
        lineno, text = lines[i]
        toks = text.split()
        if len(toks) != 2 or toks[0] != "b" or len(toks[1]) != n or set(toks[1]) - {"0", "1"}:
            r.fail("expected 'b <bitstring>' snapshot line", lineno)
        if i + 2 * n >= len(lines):
            r.fail("truncated tableau block", lineno)
        block = [lines[i + 1 + j][1] for j in range(2 * n)]
        try:
            tab = CliffordTableau.from_lines(n, block)
        except ValueError as exc:
            r.fail(str(exc), lines[i + 1][0])
        bits_rows.append([int(c) for c in toks[1]])
        tabs.append(tab)
        i += 1 + 2 * n
    if not tabs:
        r.fail("no snapshots")
    stack = PauliRows(
        n,
        np.stack([t.rows.x for t in tabs]),
        np.stack([t.rows.z for t in tabs]),
        np.stack([t.rows.phase for t in tabs]),
    )
    return ShadowDataset(
        "clifford", n, seed, state, bits=np.array(bits_rows, dtype=np.uint8), tableaux=stack
    )


# ---------------------------------------------------------------------------
# observables (one weighted Pauli sum per file)


def write_observables_file(path: str, obs: WeightedPauliSum, config_line: str | None = None) -> None:
    out = [f"# observables v1 n={obs.n}\n", _config_comment(config_line)]
    for w, p in obs.terms:
        sites = p.sites()
        toks = [f"{w:.17g}", str(len(sites))]
        for q in sites:
            toks.extend([p.letters[q], str(q)])
        out.append(" ".join(toks) + "\n")
    write_text(path, "".join(out))


def read_observables_file(path: str) -> WeightedPauliSum:
    r = _Reader(path)
    fields = r.header("observables")
    n = r.int_field(fields, "n")
    terms = []
    for lineno, text in r.body():
        toks = text.split()
        if len(toks) < 2:
            r.fail("term line needs '<weight> <k> ...'", lineno)
        try:
            weight = float(toks[0])
            k = int(toks[1])
        except ValueError:
            r.fail(f"bad weight/count in {text!r}", lineno)
        if len(toks) != 2 + 2 * k:
            r.fail(f"expected {2 + 2*k} tokens for k={k}, got {len(toks)}", lineno)
        placed = {}
        for site in range(k):
            letter, qtext = toks[2 + 2 * site], toks[3 + 2 * site]
            if letter not in ("X", "Y", "Z"):
                r.fail(f"bad Pauli letter {letter!r}", lineno)
            try:
                q = int(qtext)
            except ValueError:
                r.fail(f"bad qubit index {qtext!r}", lineno)
            if not 0 <= q < n:
                r.fail(f"qubit index {q} out of range for n={n}", lineno)
            if q in placed:
                r.fail(f"duplicate qubit index {q}", lineno)
            placed[q] = letter
        word = ["I"] * n
        for q, letter in placed.items():
            word[q] = letter
        terms.append((weight, "".join(word)))
    if not terms:
        r.fail("no terms")
    return WeightedPauliSum(n, terms)


# ---------------------------------------------------------------------------
# measurement schemes


def write_scheme_file(path: str, scheme: MeasurementScheme, config_line: str | None = None) -> None:
    out = [f"# scheme v1 n={scheme.n}\n", _config_comment(config_line)]
    for row in scheme.row_strings():
        out.append(" ".join(row) + "\n")
    write_text(path, "".join(out))


def read_scheme_file(path: str, repetitions: int = 1) -> MeasurementScheme:
    r = _Reader(path)
    fields = r.header("scheme")
    n = r.int_field(fields, "n")
    rows = []
    for lineno, text in r.body():
        toks = text.split()
        if len(toks) != n or any(t not in CODE_OF_LETTER for t in toks):
            r.fail(f"expected {n} letters from X/Y/Z", lineno)
        rows.append([CODE_OF_LETTER[t] for t in toks])
    if not rows:
        r.fail("no scheme rows")
    return MeasurementScheme(np.array(rows, dtype=np.uint8), repetitions)


# ---------------------------------------------------------------------------
# subsystem lists


def write_subsystems_file(path: str, n: int, subsystems: list[list[int]], config_line=None) -> None:
    out = [f"# subsystems v1 n={n}\n", _config_comment(config_line)]
    for sub in subsystems:
        out.append(" ".join(str(q) for q in sub) + "\n")
    write_text(path, "".join(out))


def read_subsystems_file(path: str) -> tuple[int, list[list[int]]]:
    r = _Reader(path)
    fields = r.header("subsystems")
    n = r.int_field(fields, "n")
    subs = []
    for lineno, text in r.body():
        try:
            qubits = [int(t) for t in text.split()]
        except ValueError:
            r.fail(f"bad subsystem line {text!r}", lineno)
        if not qubits:
            r.fail("empty subsystem line", lineno)
        if len(set(qubits)) != len(qubits) or min(qubits) < 0 or max(qubits) >= n:
            r.fail(f"invalid subsystem {qubits}", lineno)
        subs.append(sorted(qubits))
    if not subs:
        r.fail("no subsystems")
    return n, subs


# ---------------------------------------------------------------------------
# dense state vectors


def write_state_file(path: str, psi: np.ndarray, config_line: str | None = None) -> None:
    n = int(np.log2(psi.size))
    out = [f"# state v1 n={n}\n", _config_comment(config_line)]
    for amp in psi:
        out.append(f"{amp.real:.17g} {amp.imag:.17g}\n")
    write_text(path, "".join(out))


def read_state_file(path: str) -> np.ndarray:
    r = _Reader(path)
    fields = r.header("state")
    n = r.int_field(fields, "n")
    amps = []
    for lineno, text in r.body():
        toks = text.split()
        if len(toks) != 2:
            r.fail("expected '<re> <im>'", lineno)
        try:
            amps.append(complex(float(toks[0]), float(toks[1])))
        except ValueError:
            r.fail(f"bad amplitude {text!r}", lineno)
    if len(amps) != 2**n:
        r.fail(f"expected {2**n} amplitudes, got {len(amps)}")
    return np.array(amps, dtype=complex)
