"""Deterministic random streams.

All randomness in this package flows through Philox, a counter-based
generator, keyed by a SHA-256 hash of the master seed plus a label path
such as ("resample", fold_index). Equal (seed, labels) always yields the
same stream, independent streams never collide, and no global state is
involved, so concurrent workers and resumed runs reproduce bitwise.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _digest(seed: int, labels: tuple) -> bytes:
    msg = str(int(seed)) + "".join("|" + str(part) for part in labels)
    return hashlib.sha256(msg.encode("utf-8")).digest()


def substream(seed: int, *labels) -> np.random.Generator:
    """Philox generator derived from a master seed and a label path."""
    key = int.from_bytes(_digest(seed, labels)[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *labels) -> int:
    """63-bit integer seed derived the same way, for APIs that take ints."""
    return int.from_bytes(_digest(seed, labels)[16:24], "little") >> 1


def uniform_closed(rng: np.random.Generator, size=None):
    """Uniform draw on the closed interval [0, 1] (both endpoints reachable)."""
    return rng.integers(0, 2**53, size=size, endpoint=True) / 2**53
