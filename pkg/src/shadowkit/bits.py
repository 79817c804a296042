"""Bit-packed binary linear algebra over GF(2).

Rows of n bits are packed little-endian into ``ceil(n/64)`` uint64 words so
row operations are word-parallel XOR/AND. Everything here is shape-agnostic:
leading axes broadcast, the last axis is the word axis.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "words_for",
    "pack",
    "unpack",
    "popcount",
    "parity",
    "get_bit",
    "set_bit",
    "row_reduce",
    "solve",
]


def words_for(nbits: int) -> int:
    return (nbits + 63) >> 6


def pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., nbits) 0/1 array into (..., W) uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    nbits = bits.shape[-1]
    w = words_for(nbits)
    padded = np.zeros(bits.shape[:-1] + (w * 64,), dtype=np.uint8)
    padded[..., :nbits] = bits
    shaped = padded.reshape(bits.shape[:-1] + (w, 8, 8))
    packed_bytes = np.packbits(shaped, axis=-1, bitorder="little")
    return packed_bytes.reshape(bits.shape[:-1] + (w, 8)).view(np.uint64)[..., 0]


def unpack(words: np.ndarray, nbits: int) -> np.ndarray:
    """Inverse of :func:`pack`; returns a (..., nbits) uint8 array."""
    words = np.asarray(words, dtype=np.uint64)
    as_bytes = words[..., None].view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits.reshape(words.shape[:-1] + (words.shape[-1] * 64,))[..., :nbits]


def popcount(words: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=axis, dtype=np.int64)


def parity(words: np.ndarray, axis: int = -1) -> np.ndarray:
    # parity is additive under XOR, so fold the words before counting
    folded = np.bitwise_xor.reduce(words, axis=axis)
    return (np.bitwise_count(folded) & np.uint8(1)).astype(np.uint8)


def get_bit(words: np.ndarray, j: int) -> np.ndarray:
    return ((words[..., j >> 6] >> np.uint64(j & 63)) & np.uint64(1)).astype(np.uint8)


def set_bit(words: np.ndarray, j: int, value) -> None:
    mask = np.uint64(1) << np.uint64(j & 63)
    word = words[..., j >> 6]
    words[..., j >> 6] = np.where(np.asarray(value, dtype=bool), word | mask, word & ~mask)


def row_reduce(rows: np.ndarray, nbits: int) -> tuple[np.ndarray, list[int]]:
    """In-place-style Gaussian elimination to reduced row echelon form.

    Returns (reduced rows, pivot column list). Zero rows end up at the
    bottom; the input array is not modified.
    """
    rows = np.array(rows, dtype=np.uint64)
    m = rows.shape[0]
    pivots: list[int] = []
    rank = 0
    for col in range(nbits):
        if rank == m:
            break
        bits = get_bit(rows[rank:], col)
        hit = np.nonzero(bits)[0]
        if hit.size == 0:
            continue
        p = rank + int(hit[0])
        if p != rank:
            rows[[rank, p]] = rows[[p, rank]]
        elim = get_bit(rows, col).astype(bool)
        elim[rank] = False
        rows[elim] ^= rows[rank]
        pivots.append(col)
        rank += 1
    return rows, pivots


def solve(a_rows: np.ndarray, nbits: int, rhs: np.ndarray) -> np.ndarray | None:
    """Find a packed row w with ``parity(row_i & w) == rhs_i`` for every row.

    Free variables are set to zero; returns None if the system is
    inconsistent.
    """
    m = a_rows.shape[0]
    aug_bits = nbits + 1
    aug = np.zeros((m, words_for(aug_bits)), dtype=np.uint64)
    aug[:, : a_rows.shape[1]] = a_rows
    set_bit(aug, nbits, np.asarray(rhs, dtype=np.uint8))
    reduced, pivots = row_reduce(aug, aug_bits)
    if pivots and pivots[-1] == nbits:
        return None
    x = np.zeros(words_for(nbits), dtype=np.uint64)
    for i, col in enumerate(pivots):
        if get_bit(reduced[i : i + 1], nbits)[0]:
            set_bit(x[None, :], col, np.uint8(1))
    return x
