"""Countermeasures: keyed trait-value salting and genotype noise.

Salting replaces every stored trait value by its image under a per-trait
permutation derived from a 64-bit key. The transform is domain-closed (a
salted database is schema-indistinguishable from a plain one), invertible
with the key, and refuses to invert under a wrong key, so a breached copy
misleads an attacker while keyed readers recover the truth exactly.

Genotype noise is one-way: published-copy semantics, no removal path.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DomainError, KeyMismatchError, SaltStateError
from .genome import (
    MISSING,
    GenotypeDatabase,
    PhenotypeDatabase,
    SaltedPhenotypeDatabase,
    TraitDef,
)
from .rng import MASK64, SplitMix64, fnv1a64

# A salt key is a plain unsigned 64-bit integer.
SaltKey = int


def _check_key(key: SaltKey) -> int:
    if not isinstance(key, int) or isinstance(key, bool) or not 0 <= key <= MASK64:
        raise DomainError(f"salt key must be an unsigned 64-bit integer, got {key!r}")
    return key


def key_fingerprint(key: SaltKey) -> str:
    """One-way fingerprint of a key: SHA-256 of its 8 big-endian bytes, hex."""
    return hashlib.sha256(_check_key(key).to_bytes(8, "big")).hexdigest()


def salt_permutation(key: SaltKey, trait: TraitDef) -> tuple[int, ...]:
    """Deterministic permutation of ``trait``'s domain indices under ``key``.

    Derivation (pinned so salted files are bit-exact across implementations):
    seed a splitmix64 stream with ``key XOR fnv1a64(utf8(trait name))``, then
    run a Fisher-Yates shuffle of ``[0..k-1]`` drawing ``j = next() % (i+1)``
    for ``i = k-1 .. 1``.
    """
    _check_key(key)
    k = len(trait.domain)
    if k < 2:
        raise DomainError(
            f"trait {trait.name!r} has a singleton domain; nothing can be hidden"
        )
    stream = SplitMix64(key ^ fnv1a64(trait.name.encode("utf-8")))
    perm = list(range(k))
    for i in range(k - 1, 0, -1):
        j = stream.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


def _permute_values(
    pdb: PhenotypeDatabase, perms: dict[str, tuple[int, ...]]
) -> np.ndarray:
    out = np.array(pdb.values, copy=True)
    for t_idx, trait in enumerate(pdb.traits):
        lut = np.array(perms[trait.name], dtype=np.int8)
        col = out[:, t_idx]
        present = col != MISSING
        col[present] = lut[col[present]]
    return out


def apply_salt(pdb: PhenotypeDatabase, key: SaltKey) -> SaltedPhenotypeDatabase:
    """Salted copy of ``pdb``: values permuted per trait, MISSING untouched."""
    _check_key(key)
    if pdb.salted:
        raise SaltStateError("database is already salted")
    perms = {t.name: salt_permutation(key, t) for t in pdb.traits}
    return SaltedPhenotypeDatabase(
        pdb.traits, pdb.ids, _permute_values(pdb, perms), key_fingerprint(key)
    )


def remove_salt(sdb: SaltedPhenotypeDatabase, key: SaltKey) -> PhenotypeDatabase:
    """Invert :func:`apply_salt`; refuses (without output) under a wrong key."""
    _check_key(key)
    if not isinstance(sdb, SaltedPhenotypeDatabase) or not sdb.salted:
        raise SaltStateError("database is not salted")
    if key_fingerprint(key) != sdb.key_fingerprint:
        raise KeyMismatchError("key fingerprint mismatch")
    inverses = {}
    for trait in sdb.traits:
        perm = salt_permutation(key, trait)
        inverse = [0] * len(perm)
        for src, dst in enumerate(perm):
            inverse[dst] = src
        inverses[trait.name] = tuple(inverse)
    return PhenotypeDatabase(sdb.traits, sdb.ids, _permute_values(sdb, inverses))


def _flip_calls(calls: np.ndarray, rate: float, seed: int) -> np.ndarray:
    """Flip each non-missing call with probability ``rate`` to a uniformly
    chosen *different* value in {0,1,2}. Draw order is fixed (two full-shape
    draws), so output is deterministic in (calls, rate, seed)."""
    rng = np.random.default_rng(seed)
    flip = rng.random(calls.shape) < rate
    offset = rng.integers(1, 3, size=calls.shape, dtype=np.int8)
    out = np.array(calls, copy=True)
    present = out != MISSING
    target = flip & present
    out[target] = (out[target] + offset[target]) % 3
    return out


def add_genotype_noise(gdb: GenotypeDatabase, rate: float, seed: int) -> GenotypeDatabase:
    """Published-copy defense: each call flipped with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise DomainError(f"noise rate must be in [0, 1], got {rate!r}")
    return GenotypeDatabase(gdb.panel, gdb.ids, _flip_calls(gdb.calls, rate, seed))
