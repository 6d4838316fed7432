from __future__ import annotations

import collections.abc
from typing import TYPE_CHECKING

import xxhash

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence
    from typing import Any

# Keeps digests inside a signed 64-bit range so they are valid seeds and SQL integers.
INT64_MAX = 2**63 - 1

PRIMITIVE_TYPES = frozenset((str, int, bool, float, type(None)))


def stable_hash_update(hasher: xxhash.xxh3_64, params: Sequence[Any]) -> None:
    for param in params:
        param_type = param.__class__
        if param_type is bytes:
            hasher.update(b"\x01")
            hasher.update(param)
        elif param_type in PRIMITIVE_TYPES:
            hasher.update(b"\x02")
            hasher.update(repr(param).encode())
        elif isinstance(param, collections.abc.Mapping):
            hasher.update(b"\x04")
            stable_hash_update(hasher, sorted((str(key), value) for key, value in param.items()))
        elif isinstance(param, list | tuple):
            hasher.update(b"\x05")
            stable_hash_update(hasher, param)
        else:
            raise TypeError(f"Can't hash value of type {param_type.__name__}: {param!r}")
        hasher.update(b"\x00")


def stable_hash(*args: Any) -> int:
    """
    Process-independent hash of primitive values and containers of them.

    >>> stable_hash(42, "data") == stable_hash(42, "data")
    True
    >>> stable_hash(42, "data") == stable_hash(42, "workload")
    False
    >>> stable_hash((1,)) == stable_hash([1])
    True
    """
    hasher = xxhash.xxh3_64()
    stable_hash_update(hasher, args)
    return hasher.intdigest() & INT64_MAX


def derive_seed(seed: int, purpose: str) -> int:
    """Sub-stream seed for `purpose`, independent of how other streams are consumed"""
    return stable_hash(seed, purpose)


def digest_rows(rows: Iterable[Sequence[Any]]) -> str:
    """Hex digest of a row sequence, sensitive to order and to every value"""
    hasher = xxhash.xxh3_128()
    for row in rows:
        stable_hash_update(hasher, [tuple(row)])
    return hasher.hexdigest()
