"""Seeded synthetic molecule generators.

Benchmarks and large-corpus tests need reproducible molecules at exact
heavy-atom sizes; public collections do not stratify by size, so these
generators assemble linear alkyl/aryl chains (para-linked benzene rings
joined by short ether/amine runs) instead.  All randomness flows through
a caller-supplied seed.
"""

from __future__ import annotations

import random

from .brics import break_molecule, find_brics_bonds
from .mol import Molecule
from .smiles import parse_smiles

RING_SIZE = 6
MIN_CHAIN_ATOMS = 5


def chain_smiles(n_heavy: int, rng: random.Random) -> str:
    """A linear molecule with exactly ``n_heavy`` heavy atoms.

    Guarantees at least two cleavable bonds and a non-branching full
    decomposition.  Ring content grows with size so larger molecules
    carry proportionally more aromatic perception work.
    """
    if n_heavy < MIN_CHAIN_ATOMS:
        raise ValueError(
            f"cannot build a chain with {n_heavy} heavy atoms; "
            f"need at least {MIN_CHAIN_ATOMS}")
    for _ in range(64):
        smiles = _assemble(n_heavy, rng)
        mol = parse_smiles(smiles)
        if len(mol.atoms) != n_heavy:
            continue
        bonds = find_brics_bonds(mol)
        if len(bonds) < 2:
            continue
        if break_molecule(mol, bonds).is_path:
            return smiles
    raise RuntimeError(f"chain generator stalled at size {n_heavy}")


def _assemble(n: int, rng: random.Random) -> str:
    rings = n // RING_SIZE
    while rings > 0 and n - RING_SIZE * rings < 2:
        rings -= 1
    if rings > 0 and rng.random() < 0.3:
        rings -= 1
    linker_atoms = n - RING_SIZE * rings
    slots = _split(linker_atoms, rings + 1, rng)
    runs = [_run(length, rng, touches_ring=rings > 0)
            for length in slots]
    return _nest(runs, rings)


def _split(total: int, slots: int, rng: random.Random) -> list[int]:
    counts = [0] * slots
    for _ in range(total):
        counts[rng.randrange(slots)] += 1
    return counts


def _run(length: int, rng: random.Random, touches_ring: bool) -> str:
    """A linker run; one interior position may become an ether O or amine N."""
    if length == 0:
        return ""
    atoms = ["C"] * length
    if length == 1 and touches_ring:
        # A single bridging atom between rings: diaryl ether or amine.
        atoms[0] = rng.choice(["O", "N", "C"])
    elif length >= 2:
        where = rng.randrange(length - 1) + 1 if length > 2 else 1
        atoms[where] = rng.choice(["O", "O", "N"])
    return "".join(atoms)


def _nest(runs: list[str], rings: int) -> str:
    """runs[0] ring runs[1] ring ... runs[rings], rings para-substituted."""
    def tail(idx: int) -> str:
        if idx == rings:
            return runs[idx]
        rest = tail(idx + 1)
        # Distinct closure digits: inner rings open while outer ones
        # are still unclosed.
        d = idx + 1
        ring = f"c{d}ccc({rest})cc{d}" if rest else f"c{d}ccccc{d}"
        return (runs[idx] if idx > 0 else "") + ring

    return runs[0] + tail(0) if rings else runs[0]


def benchmark_molecules(size: int, count: int, seed: int) -> list[str]:
    """``count`` distinct-seeded chains at one exact heavy-atom size."""
    rng = random.Random(f"{seed}:{size}")
    return [chain_smiles(size, rng) for _ in range(count)]


def tree_smiles(rng: random.Random, max_atoms: int = 12) -> str:
    """Random valence-safe tree over C, N, O; may branch."""
    max_degree = {"C": 4, "N": 3, "O": 2}
    n = rng.randint(1, max_atoms)
    elements = [rng.choice(["C", "C", "C", "N", "O"])]
    degrees = [0]
    parents: list[int] = []
    for _ in range(n - 1):
        candidates = [j for j, d in enumerate(degrees)
                      if d < max_degree[elements[j]]]
        if not candidates:
            break
        parent = rng.choice(candidates)
        elements.append(rng.choice(["C", "C", "C", "N", "O"]))
        degrees.append(1)
        degrees[parent] += 1
        parents.append(parent)
    mol = Molecule()
    from .mol import Atom

    mol.add_atom(Atom(element=elements[0]))
    for i, parent in enumerate(parents, start=1):
        mol.add_atom(Atom(element=elements[i]))
        mol.add_bond(parent, i, 1)
    return mol.sanitize().to_smiles()


def drug_like_corpus(count: int, seed: int,
                     max_cleavable: int = 16) -> list[str]:
    """Mixed chains and trees, each with at most ``max_cleavable`` bonds."""
    rng = random.Random(seed)
    out: list[str] = []
    while len(out) < count:
        if rng.random() < 0.7:
            smiles = chain_smiles(rng.randint(6, 22), rng)
        else:
            smiles = tree_smiles(rng)
        mol = parse_smiles(smiles)
        if len(find_brics_bonds(mol)) <= max_cleavable:
            out.append(smiles)
    return out


def tiny_corpus(count: int, seed: int) -> list[str]:
    """Small fast-to-enumerate molecules for vocabulary-scale tests."""
    rng = random.Random(seed)
    out: list[str] = []
    while len(out) < count:
        if rng.random() < 0.6:
            out.append(chain_smiles(rng.randint(5, 9), rng))
        else:
            out.append(tree_smiles(rng, max_atoms=8))
    return out
