"""Whole-molecule descriptors computed from the graph."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .mol import Molecule
from .periodic import mass_of


def molecular_weight(mol: Molecule) -> float:
    """Average molecular weight including implicit and explicit hydrogens."""
    total = 0.0
    h_mass = mass_of("H")
    for atom in mol.atoms:
        total += mass_of(atom.element)
        total += h_mass * atom.total_hs
    return total


def heavy_atom_count(mol: Molecule) -> int:
    """Number of non-hydrogen, non-wildcard atoms."""
    return sum(1 for a in mol.atoms if not a.is_wildcard and a.element != "H")


def molecular_formula(mol: Molecule) -> str:
    """Hill-order formula: C, H, then remaining elements alphabetically."""
    counts: Counter[str] = Counter()
    for atom in mol.atoms:
        if atom.is_wildcard:
            continue
        counts[atom.element] += 1
        counts["H"] += atom.total_hs
    parts: list[str] = []
    ordered: list[str] = []
    if "C" in counts:
        ordered.append("C")
        if "H" in counts:
            ordered.append("H")
        ordered.extend(sorted(e for e in counts if e not in ("C", "H")))
    else:
        ordered.extend(sorted(counts))
    for elem in ordered:
        n = counts[elem]
        if n == 0:
            continue
        parts.append(elem if n == 1 else f"{elem}{n}")
    return "".join(parts)


def hbond_donors(mol: Molecule) -> int:
    """Count of N/O atoms bearing at least one hydrogen."""
    return sum(1 for a in mol.atoms if a.element in ("N", "O") and a.total_hs > 0)


def hbond_acceptors(mol: Molecule) -> int:
    """Count of N and O atoms."""
    return sum(1 for a in mol.atoms if a.element in ("N", "O"))


def ring_bond_count(mol: Molecule) -> int:
    return sum(1 for b in mol.bonds if b.in_ring)


def _heavy_degree(mol: Molecule, idx: int) -> int:
    return sum(1 for j, _ in mol.neighbors(idx)
               if mol.atoms[j].element != "H" and not mol.atoms[j].is_wildcard)


def _is_amide_cn(mol: Molecule, a: int, b: int) -> bool:
    elements = {mol.atoms[a].element, mol.atoms[b].element}
    if elements != {"C", "N"}:
        return False
    carbon = a if mol.atoms[a].element == "C" else b
    return any(mol.atoms[j].element == "O" and bond.order == 2
               for j, bond in mol.neighbors(carbon))


def rotatable_bonds(mol: Molecule) -> int:
    """Non-ring single bonds joining two non-terminal heavy atoms.

    Amide C-N bonds are excluded; their rotation is hindered enough that
    the usual flexibility counts leave them out.
    """
    count = 0
    for bond in mol.bonds:
        if bond.in_ring or bond.aromatic or bond.order != 1:
            continue
        ends = (mol.atoms[bond.a], mol.atoms[bond.b])
        if any(a.element == "H" or a.is_wildcard for a in ends):
            continue
        if _heavy_degree(mol, bond.a) < 2 or _heavy_degree(mol, bond.b) < 2:
            continue
        if _is_amide_cn(mol, bond.a, bond.b):
            continue
        count += 1
    return count


def aromatic_ring_count(mol: Molecule) -> int:
    """Independent cycles in the aromatic-bond subgraph.

    The circuit rank (edges - vertices + components) counts one ring for
    benzene and two for naphthalene without enumerating ring paths.
    """
    edges = [(b.a, b.b) for b in mol.bonds if b.aromatic]
    if not edges:
        return 0
    vertices = {v for edge in edges for v in edge}
    parent = {v: v for v in vertices}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    components = len({find(v) for v in vertices})
    return len(edges) - len(vertices) + components


@dataclass(frozen=True)
class Descriptors:
    molecular_weight: float
    heavy_atom_count: int
    hbd: int
    hba: int
    rotatable_bonds: int
    aromatic_ring_count: int


def compute_descriptors(mol: Molecule) -> Descriptors:
    return Descriptors(
        molecular_weight=molecular_weight(mol),
        heavy_atom_count=heavy_atom_count(mol),
        hbd=hbond_donors(mol),
        hba=hbond_acceptors(mol),
        rotatable_bonds=rotatable_bonds(mol),
        aromatic_ring_count=aromatic_ring_count(mol),
    )
