"""Deterministic seed derivation for study cells and repeats.

Python's builtin ``hash`` is randomized per process, so derived seeds go
through SHA-256 over a canonical string key instead.  The derivation is a
pure function of (base seed, key parts), which is what makes every study
runner reproducible regardless of thread scheduling.
"""

from __future__ import annotations

import hashlib

_MASK = (1 << 64) - 1


def stable_hash(*parts) -> int:
    """64-bit hash of the canonical textual form of the parts."""
    key = "\x1f".join(_canon(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed_base: int, *parts) -> int:
    """seed_base XOR stable_hash(parts), reduced to 64 bits."""
    return (int(seed_base) ^ stable_hash(*parts)) & _MASK


def _canon(p) -> str:
    if isinstance(p, float):
        return repr(p)
    if isinstance(p, (int, str)):
        return str(p)
    if isinstance(p, (tuple, list)):
        return "[" + ",".join(_canon(q) for q in p) + "]"
    raise TypeError(f"unhashable seed part type: {type(p).__name__}")
