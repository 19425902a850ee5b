"""Deterministic, cross-platform random streams.

Every stochastic choice in the pipeline draws from a named substream derived
by hashing (seed, *labels) with BLAKE2. Identical inputs give bit-identical
streams on any platform, and sibling streams (scene vs. color vs. weather)
never interact, so adding draws to one purpose cannot shift another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints / strings."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, str):
            h.update(b"s" + p.encode("utf-8"))
        elif isinstance(p, (int, np.integer)):
            h.update(b"i" + int(p).to_bytes(16, "little", signed=True))
        else:
            raise TypeError(f"unhashable seed part: {p!r}")
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def substream(*parts) -> np.random.Generator:
    """Named random stream, a pure function of its labels."""
    return np.random.default_rng(derive_seed(*parts))
