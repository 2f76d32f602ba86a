"""Named, splittable counter-based random streams.

Every stream is a numpy ``Philox`` generator (4x64, 10 rounds) whose 128-bit key
is ``blake2b(f"{seed}:{name}", digest_size=16)`` read as a little-endian
integer, with the counter starting at zero. Any language with Philox4x64-10 and
BLAKE2b can reproduce the same draws, and two streams with different names never
share a key.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def derive_key(seed: int, name: str) -> int:
    """Return the 128-bit Philox key for ``(seed, name)``."""
    digest = hashlib.blake2b(f"{int(seed)}:{name}".encode(), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def generator_for(seed: int, name: str) -> np.random.Generator:
    """Build a fresh generator for the named stream."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, name)))


@dataclass(frozen=True, slots=True)
class RngStream:
    """A seed plus a slash-separated name path; ``split`` derives child streams."""

    seed: int
    name: str = "root"

    def split(self, child: str) -> RngStream:
        return RngStream(self.seed, f"{self.name}/{child}")

    def generator(self) -> np.random.Generator:
        return generator_for(self.seed, self.name)
