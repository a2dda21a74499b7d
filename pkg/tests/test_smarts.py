"""Pattern matcher unit tests against hand-checked molecules."""

from __future__ import annotations

import pytest

from molblocks import parse_smiles
from molblocks.smarts import SmartsParseError, parse


def hits(pattern: str, smiles: str) -> list[int]:
    pat = parse(pattern)
    mol = parse_smiles(smiles)
    return [i for i in range(mol.num_atoms) if pat.matches_at(mol, i)]


def test_element_primitive() -> None:
    assert hits("[#7]", "CCN") == [2]
    assert hits("[#6]", "CCN") == [0, 1]


def test_bare_atoms() -> None:
    assert hits("N", "CCN") == [2]
    # bare uppercase means aliphatic only
    assert hits("N", "c1ccncc1") == []
    assert hits("n", "c1ccncc1") == [3]
    assert hits("C", "Cc1ccccc1") == [0]


def test_two_letter_elements() -> None:
    assert hits("Cl", "CCl") == [1]
    assert hits("[Cl]", "CCl") == [1]
    # Cl must not parse as carbon + ell
    assert hits("C", "CCl") == [0]


def test_wildcard_matches_everything() -> None:
    assert hits("*", "CO") == [0, 1]
    assert hits("[*]", "[1*]CO") == [0, 1, 2]


def test_degree_primitive() -> None:
    assert hits("[C;D1]", "CC(C)C") == [0, 2, 3]
    assert hits("[C;D3]", "CC(C)C") == [1]
    # D with no digit means D1
    assert hits("[C;D]", "CC") == [0, 1]


def test_ring_primitive() -> None:
    assert hits("[C;R]", "C1CCC1C") == [0, 1, 2, 3]
    assert hits("[C;!R]", "C1CCC1C") == [4]


def test_hydrogen_count_primitive() -> None:
    assert hits("[CH3]", "CCO") == [0]
    assert hits("[CH2]", "CCO") == [1]
    assert hits("[OH]", "CCO") == [2]
    assert hits("[nH]", "c1cc[nH]c1") == [3]


def test_charge_primitives() -> None:
    assert hits("[N+]", "C[N+](C)(C)C") == [1]
    assert hits("[O-]", "[O-]C") == [0]
    assert hits("[N;+0]", "C[N+](C)(C)C") == []
    assert hits("[#8;-]", "[O-]C") == [0]


def test_or_and_not_logic() -> None:
    assert hits("[#7,#8]", "NCO") == [0, 2]
    assert hits("[!#6]", "NCO") == [0, 2]
    assert hits("[C;!D1]", "CCC") == [1]
    # juxtaposition is an implicit AND
    assert hits("[CD2]", "CCC") == [1]


def test_recursive_environment() -> None:
    # carbon next to a carbonyl carbon
    assert hits("[C;$(C-C=O)]", "CCC(C)=O") == [1, 3]
    assert hits("[$(C=O)]", "CCC(C)=O") == [2]


def test_recursive_with_nested_parens() -> None:
    # carbonyl carbon bearing a nitrogen (amide-like)
    assert hits("[$(C(=O)N)]", "CC(=O)NC") == [1]
    assert hits("[$(C(=O)N)]", "CC(=O)OC") == []


def test_bond_expressions() -> None:
    assert hits("C=O", "CC(C)=O") == [1]
    assert hits("C-O", "CC(C)=O") == []
    assert hits("C~O", "CC(C)=O") == [1]
    assert hits("C#N", "CC#N") == [1]


def test_default_bond_is_single_or_aromatic() -> None:
    assert hits("cc", "c1ccccc1") == [0, 1, 2, 3, 4, 5]
    assert hits("CO", "CO") == [0]
    # default must not match a double bond
    assert hits("CO", "C=O") == []


def test_ring_bond_primitive() -> None:
    assert hits("C@C", "C1CCC1C") == [0, 1, 2, 3]
    assert hits("C-;!@C", "C1CCC1C") == [3, 4]


def test_aromatic_bond_primitive() -> None:
    assert hits("c:c", "c1ccccc1") == [0, 1, 2, 3, 4, 5]
    # biphenyl junction is a single, not aromatic, bond
    pat = parse("c-c")
    mol = parse_smiles("c1ccc(-c2ccccc2)cc1")
    assert [i for i in range(mol.num_atoms) if pat.matches_at(mol, i)] == [3, 4]


def test_branch_matching_backtracks() -> None:
    # both neighbors must be distinct atoms
    assert hits("C(O)O", "OCO") == [1]
    assert hits("C(O)O", "CO") == []
    assert hits("C(N)O", "NCO") == [1]


def test_anchored_match_is_per_atom() -> None:
    pat = parse("[O;D2]")
    mol = parse_smiles("COC")
    assert pat.matches_at(mol, 1)
    assert not pat.matches_at(mol, 0)


@pytest.mark.parametrize("bad", [
    "",
    "[",
    "[]",
    "[C",
    "C(O",
    "[$(C]",
    "[Zz]",
    "[C;R2]",
])
def test_malformed_patterns_raise(bad: str) -> None:
    with pytest.raises(SmartsParseError):
        parse(bad)
