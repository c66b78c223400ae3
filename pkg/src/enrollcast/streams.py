"""Deterministic derivation of named random streams for parallel Monte Carlo.

Every replicate, country, and purpose gets its own generator derived from the
master seed plus a label path, so results are identical for any worker count
and any execution order.

Derivation is a documented stable hash: the PCG64 state/increment pair is the
SHA-256 digest of the canonically encoded (seed, label path). Distinct paths
get distinct 128-bit increments, PCG64's multi-stream mechanism.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

__all__ = ["RandomStream"]

_MAX_SEED = 2**64


def _encode_label(label: int | str) -> bytes:
    """Injective canonical encoding of one path label (type tag + length prefix)."""
    if isinstance(label, bool) or not isinstance(label, (int, str)):
        raise TypeError(f"stream label must be int or str, got {type(label).__name__}")
    if isinstance(label, int):
        if not 0 <= label < 2**63:
            raise ValueError(f"int labels must be in [0, 2^63), got {label}")
        return b"i" + label.to_bytes(8, "little")
    raw = label.encode("utf-8")
    return b"s" + len(raw).to_bytes(4, "little") + raw


@dataclass(frozen=True)
class RandomStream:
    """A reproducible random stream rooted at a 64-bit master seed.

    ``child(*labels)`` derives an independent stream for the given label
    path; ``generator()`` materializes it as a numpy Generator. Two streams
    with different paths never share draws, and a stream's draws never
    depend on which other streams exist.
    """

    seed: int
    path: bytes = b""

    def __post_init__(self) -> None:
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"seed must be in [0, 2^64), got {self.seed}")

    def child(self, *labels: int | str) -> "RandomStream":
        encoded = b"".join(_encode_label(label) for label in labels)
        return RandomStream(self.seed, self.path + encoded)

    def state_ints(self) -> tuple[int, int]:
        """The (state, increment) PCG64 words for this stream (increment forced odd)."""
        digest = hashlib.sha256(self.seed.to_bytes(8, "little") + self.path).digest()
        state = int.from_bytes(digest[:16], "little")
        inc = int.from_bytes(digest[16:], "little") | 1
        return state, inc

    def generator(self) -> np.random.Generator:
        """A fresh, caller-owned generator positioned at this stream's origin."""
        bit_gen = np.random.PCG64(0)
        _inject(bit_gen, *self.state_ints())
        return np.random.Generator(bit_gen)


def _inject(bit_gen: np.random.PCG64, state: int, inc: int) -> None:
    full = bit_gen.state
    full["state"]["state"] = state
    full["state"]["inc"] = inc
    full["has_uint32"] = 0
    full["uinteger"] = 0
    bit_gen.state = full


class _ThreadKit(threading.local):
    """Per-thread reusable PCG64 so hot loops skip generator construction."""

    def __init__(self) -> None:
        self.bit_gen = np.random.PCG64(0)
        self.generator = np.random.Generator(self.bit_gen)


_KIT = _ThreadKit()


def bound_generator(stream: RandomStream) -> np.random.Generator:
    """This thread's shared generator, rebound to the stream's origin.

    Draws identically to ``stream.generator()`` but reuses one bit-generator
    per thread. The binding is only valid until the next bound_generator call
    on the same thread, so callers must finish drawing before rebinding;
    package-internal hot paths honor that, external callers should prefer
    ``generator()``.
    """
    _inject(_KIT.bit_gen, *stream.state_ints())
    return _KIT.generator
