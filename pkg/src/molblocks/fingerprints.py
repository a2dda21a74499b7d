"""Circular fingerprints and Tanimoto similarity.

Hashing goes through blake2b rather than the builtin hash so that bit
positions are reproducible across processes and platforms.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .mol import Molecule

DEFAULT_RADIUS = 2
DEFAULT_BITS = 2048


@dataclass(frozen=True)
class Fingerprint:
    """Set bit positions within a fixed-size bit space."""

    bits: frozenset[int]
    size: int = DEFAULT_BITS
    radius: int = DEFAULT_RADIUS


def _feature_hash(*parts: object) -> int:
    payload = repr(parts).encode("ascii")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def circular_fingerprint(mol: Molecule,
                         radius: int = DEFAULT_RADIUS,
                         bits: int = DEFAULT_BITS) -> Fingerprint:
    """Hash atom neighborhoods at radii 0..radius into a bit set.

    The radius-0 invariant covers element, heavy-atom degree, formal
    charge, aromaticity and ring membership; each later radius folds in
    the sorted (bond, neighbor-hash) environment, so isomorphic inputs
    always produce the same bits regardless of atom order.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if bits < 1:
        raise ValueError("bit count must be positive")
    current = [
        _feature_hash(atom.element, mol.degree(i), atom.charge,
                      atom.aromatic, atom.in_ring)
        for i, atom in enumerate(mol.atoms)
    ]
    features = set(current)
    for _ in range(radius):
        expanded = []
        for i in range(mol.num_atoms):
            env = sorted((bond.order_value, bond.aromatic, current[j])
                         for j, bond in mol.neighbors(i))
            expanded.append(_feature_hash(current[i], tuple(env)))
        features.update(expanded)
        current = expanded
    return Fingerprint(bits=frozenset(h % bits for h in features),
                       size=bits, radius=radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|, with two empty sets counting as identical."""
    if a.size != b.size:
        raise ValueError(f"fingerprint sizes differ: {a.size} vs {b.size}")
    union = a.bits | b.bits
    if not union:
        return 1.0
    return len(a.bits & b.bits) / len(union)
