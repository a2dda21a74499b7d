"""Canonical atom ranking and canonical SMILES.

Ranking starts from per-atom invariants (element, isotope, charge,
aromaticity, degree, hydrogen count), refines them by iterated neighbor
signatures, and resolves remaining ties by individualization: every atom
of the lowest tied class is tried in turn and the lexicographically
smallest serialization wins.  Because the full tied class is explored,
the result does not depend on input atom order.

Canonical strings are unique per molecular graph under this scheme; they
are not required to agree with any other toolkit's canonical form.
Wildcard isotope masking supports comparisons that must ignore attachment
numbering.
"""

from __future__ import annotations

from collections import Counter

from .mol import Bond, Molecule
from .smiles import write_smiles


def _bond_code(bond: Bond) -> int:
    return 4 if bond.aromatic else bond.order


def _dense_rank(keys: list) -> list[int]:
    index = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [index[k] for k in keys]


def _initial_keys(mol: Molecule, mask: bool) -> list:
    keys = []
    for idx, atom in enumerate(mol.atoms):
        isotope = 0 if (mask and atom.is_wildcard) else (atom.isotope or 0)
        keys.append((
            atom.element,
            isotope,
            atom.charge,
            atom.aromatic,
            mol.degree(idx),
            atom.total_hs,
        ))
    return keys


# Neighbor entries pack (bond code, neighbor rank) into one integer with
# the same sort order as the tuple; ranks stay far below 2**20.
_RANK_BITS = 20


def _adjacency(mol: Molecule) -> list[list[tuple[int, int]]]:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(mol.num_atoms)]
    for bond in mol.bonds:
        code = _bond_code(bond) << _RANK_BITS
        adj[bond.a].append((code, bond.b))
        adj[bond.b].append((code, bond.a))
    return adj


def _refine(adj: list[list[tuple[int, int]]], ranks: list[int]) -> list[int]:
    n = len(ranks)
    nclasses = len(set(ranks))
    while True:
        sigs = [(ranks[i], tuple(sorted(code | ranks[j]
                                        for code, j in adj[i])))
                for i in range(n)]
        new = _dense_rank(sigs)
        count = len(set(new))
        if count == nclasses or count == n:
            return new
        ranks, nclasses = new, count


def _search(mol: Molecule, adj: list[list[tuple[int, int]]],
            ranks: list[int], mask: bool) -> tuple[str, list[int]]:
    n = mol.num_atoms
    if len(set(ranks)) == n:
        return write_smiles(mol, ranks, mask), ranks
    tied = min(r for r, c in Counter(ranks).items() if c > 1)
    best: tuple[str, list[int]] | None = None
    for chosen in (i for i in range(n) if ranks[i] == tied):
        keys = [(ranks[i], i != chosen) for i in range(n)]
        candidate = _search(mol, adj, _refine(adj, _dense_rank(keys)), mask)
        if best is None or candidate[0] < best[0]:
            best = candidate
    assert best is not None
    return best


def _canonical(mol: Molecule, mask: bool) -> tuple[str, list[int]]:
    cached = mol._cache.get(mask)
    if cached is not None:
        return cached
    adj = _adjacency(mol)
    ranks = _refine(adj, _dense_rank(_initial_keys(mol, mask)))
    result = _search(mol, adj, ranks, mask)
    if mol.frozen:
        mol._cache[mask] = result
    return result


def canonical_ranks(mol: Molecule, mask_wildcard_isotopes: bool = False) -> list[int]:
    """Permutation of 0..n-1 giving each atom's canonical position."""
    return _canonical(mol, mask_wildcard_isotopes)[1]


def canonical_smiles(mol: Molecule, mask_wildcard_isotopes: bool = False) -> str:
    return _canonical(mol, mask_wildcard_isotopes)[0]
