"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from molblocks.mol import Atom, Molecule

IMATINIB = "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1"


@st.composite
def random_molecules(draw) -> Molecule:
    """Random valence-safe single-bonded trees over C, N, O."""
    n = draw(st.integers(min_value=1, max_value=12))
    max_degree = {"C": 4, "N": 3, "O": 2}
    mol = Molecule()
    elements = [draw(st.sampled_from(["C", "C", "C", "N", "O"]))]
    degrees = [0]
    mol.add_atom(Atom(element=elements[0]))
    for _ in range(n - 1):
        candidates = [j for j, d in enumerate(degrees)
                      if d < max_degree[elements[j]]]
        if not candidates:
            break
        parent = draw(st.sampled_from(candidates))
        elem = draw(st.sampled_from(["C", "C", "C", "N", "O"]))
        idx = mol.add_atom(Atom(element=elem))
        mol.add_bond(parent, idx, 1)
        elements.append(elem)
        degrees.append(1)
        degrees[parent] += 1
    return mol


def relabel(mol: Molecule, perm: list[int]) -> Molecule:
    """Rebuild a molecule with atoms reordered by perm (new index of old i)."""
    out = Molecule()
    inverse = [0] * len(perm)
    for old, new in enumerate(perm):
        inverse[new] = old
    for new in range(len(perm)):
        out.add_atom(mol.atoms[inverse[new]].clone())
    for bond in mol.bonds:
        clone = bond.clone()
        out.add_bond(perm[clone.a], perm[clone.b], clone.order,
                     aromatic_requested=clone.aromatic_requested)
    return out.sanitize()


def shuffled(mol: Molecule, seed: int) -> Molecule:
    rng = random.Random(seed)
    perm = list(range(mol.num_atoms))
    rng.shuffle(perm)
    return relabel(mol, perm)


@pytest.fixture
def imatinib_smiles() -> str:
    return IMATINIB
