"""Deterministic seeding shared by every stage of the pipeline.

All randomness flows through numpy's Philox bit generator, a counter-based
64-bit scheme that produces the same stream on every platform and word
size. Derived seeds are computed with the splitmix64 finalizer, so a single
master seed splits into independent per-purpose and per-sample streams:

    stage seed   = splitmix64(master ^ blake2s(tag))
    sample seed  = master ^ splitmix64(sample_index)

Both rules are stable across processes and machines; they are part of the
on-disk contract (per-sample seeds are recorded in dataset manifests).
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step: a high-quality 64-bit integer mix."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _tag_to_int(tag: int | str) -> int:
    if isinstance(tag, int):
        return tag & MASK64
    digest = hashlib.blake2s(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master: int, *tags: int | str) -> int:
    """Derive an independent 64-bit seed from a master seed and tags."""
    s = master & MASK64
    for tag in tags:
        s = splitmix64(s ^ _tag_to_int(tag))
    return s


def sample_seed(master: int, index: int) -> int:
    """Per-sample seed rule used by dataset manifests: master ^ splitmix64(i)."""
    return (master & MASK64) ^ splitmix64(index & MASK64)


def generator(seed: int) -> np.random.Generator:
    """A Philox-backed Generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
