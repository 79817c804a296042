"""Deterministic random-stream derivation.

All randomness in the toolkit flows from a single 64-bit seed. Independent
streams are derived per (seed, purpose label, index) so that shots can be
generated in any order, or in parallel, and still reproduce the serial run
byte for byte.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "label_key", "random_seed"]


def label_key(label: str) -> int:
    """Stable 64-bit integer key for a purpose label."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Counter-style random stream keyed by (seed, label, index).

    Uses a Philox generator seeded through ``SeedSequence`` so derived
    streams are statistically independent and platform-stable.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, label_key(label), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def random_seed() -> int:
    """Fresh 63-bit seed for runs that did not specify one (always echoed in outputs)."""
    return int.from_bytes(np.random.SeedSequence().entropy.to_bytes(16, "little")[:8], "little") >> 1
