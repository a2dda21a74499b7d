"""Tokenization of molecules into frequency-selected block sequences.

The main path enumerates every linear decomposition over a molecule's
cleavable bonds, then picks the coarsest one whose blocks all clear the
vocabulary's frequency floor; ties inside that tier go to the candidate
with the most even frequency profile.  A naive mode cuts every cleavable
bond at once instead and refuses branching molecules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .brics import (
    BACKWARD_LABEL,
    FORWARD_LABEL,
    Block,
    break_molecule,
    find_brics_bonds,
)
from .mol import Molecule
from .vocab import Vocabulary

DEFAULT_MAX_BONDS = 16


class BondLimitError(ValueError):
    """Molecule has more cleavable bonds than exhaustive search permits."""


class BranchedMoleculeError(ValueError):
    """All-bond fragmentation produced a branching layout."""


class DetokenizeError(ValueError):
    """Block sequence cannot be rejoined into a single molecule."""


@dataclass
class Fragmentation:
    """An ordered block sequence with per-block vocabulary frequencies."""

    blocks: list[Block]
    frequencies: list[int] = field(default_factory=list)
    mode: str = "bfe"

    @property
    def keys(self) -> list[str]:
        return [block.canonical_key for block in self.blocks]


def enumerate_decompositions(
        mol: Molecule,
        max_bonds: int = DEFAULT_MAX_BONDS) -> list[Fragmentation]:
    """All linear decompositions, coarsest first.

    Candidates are ordered by block count, then lexicographically on their
    concatenated keys, then on the key tuple, so equal-content candidates
    always appear in the same position regardless of input atom order.
    """
    bonds = find_brics_bonds(mol)
    if len(bonds) > max_bonds:
        raise BondLimitError(
            f"{len(bonds)} cleavable bonds exceeds the exhaustive-search "
            f"limit of {max_bonds}")
    out: list[Fragmentation] = []
    for size in range(len(bonds) + 1):
        for subset in combinations(bonds, size):
            layout = break_molecule(mol, subset)
            if not layout.is_path:
                continue
            out.append(Fragmentation(blocks=list(layout.fragments)))
    out.sort(key=lambda f: (len(f.blocks), "".join(f.keys), tuple(f.keys)))
    return out


def _population_std(values: Sequence[int]) -> float:
    mean = sum(values) / len(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))


def _with_frequencies(candidate: Fragmentation,
                      vocab: Vocabulary) -> Fragmentation:
    return Fragmentation(
        blocks=candidate.blocks,
        frequencies=[vocab.frequency(key) for key in candidate.keys],
        mode="bfe")


def select_decomposition(candidates: Sequence[Fragmentation],
                         vocab: Vocabulary) -> Fragmentation:
    """Coarsest all-frequent candidate, evenest profile among equals.

    Scanning in candidate order, the first candidate whose blocks all have
    frequency >= f_min fixes the winning block count; among same-count
    passers the smallest population standard deviation of the frequency
    vector wins, earlier candidates breaking exact ties.  When nothing
    passes, the finest-grained candidate is returned instead.
    """
    if not candidates:
        raise ValueError("no decomposition candidates")
    winning_count = None
    for candidate in candidates:
        freqs = [vocab.frequency(key) for key in candidate.keys]
        if all(f >= vocab.f_min for f in freqs):
            winning_count = len(candidate.blocks)
            break
    if winning_count is None:
        finest = len(candidates[-1].blocks)
        for candidate in candidates:
            if len(candidate.blocks) == finest:
                return _with_frequencies(candidate, vocab)
    best = None
    best_std = math.inf
    for candidate in candidates:
        if len(candidate.blocks) != winning_count:
            continue
        freqs = [vocab.frequency(key) for key in candidate.keys]
        if not all(f >= vocab.f_min for f in freqs):
            continue
        spread = _population_std(freqs)
        if spread < best_std:
            best = candidate
            best_std = spread
    return _with_frequencies(best, vocab)


def tokenize(mol: Molecule, vocab: Vocabulary, mode: str = "bfe",
             max_bonds: int = DEFAULT_MAX_BONDS) -> Fragmentation:
    if mode == "bfe":
        candidates = enumerate_decompositions(mol, max_bonds)
        return select_decomposition(candidates, vocab)
    if mode == "naive_brics":
        layout = break_molecule(mol, find_brics_bonds(mol))
        if not layout.is_path:
            raise BranchedMoleculeError(
                "cutting every cleavable bond branches this molecule; "
                "only linear layouts form a block sequence")
        return Fragmentation(
            blocks=list(layout.fragments),
            frequencies=[vocab.frequency(b.canonical_key)
                         for b in layout.fragments],
            mode="naive_brics")
    raise ValueError(f"unknown tokenization mode {mode!r}")


def detokenize(source: Fragmentation | Iterable[Block]) -> Molecule:
    """Rejoin a block sequence into one sanitized molecule.

    Adjacent blocks connect through their ``[2*]``/``[1*]`` wildcard pair;
    no cut metadata is needed.  Blocks whose wildcard labels do not match
    their position (extra, missing, or duplicated labels) are rejected.
    """
    blocks = list(source.blocks) if isinstance(source, Fragmentation) \
        else list(source)
    if not blocks:
        raise DetokenizeError("empty block sequence")
    out = Molecule()
    prev_forward: int | None = None
    last = len(blocks) - 1
    for pos, block in enumerate(blocks):
        expected = []
        if pos > 0:
            expected.append(BACKWARD_LABEL)
        if pos < last:
            expected.append(FORWARD_LABEL)
        labels = sorted(block.graph.atoms[i].isotope or 0
                        for i in block.wildcard_atoms)
        if labels != sorted(expected):
            raise DetokenizeError(
                f"block {pos} carries wildcard labels {labels}, "
                f"expected {sorted(expected)}")
        local: dict[int, int] = {}
        for i, atom in enumerate(block.graph.atoms):
            if not atom.is_wildcard:
                local[i] = out.add_atom(atom.clone())
        anchor_forward: int | None = None
        anchor_backward: int | None = None
        for bond in block.graph.bonds:
            a_wild = block.graph.atoms[bond.a].is_wildcard
            b_wild = block.graph.atoms[bond.b].is_wildcard
            if a_wild and b_wild:
                raise DetokenizeError("wildcard-wildcard bond in block")
            if a_wild or b_wild:
                wc, real = (bond.a, bond.b) if a_wild else (bond.b, bond.a)
                if block.graph.atoms[wc].isotope == FORWARD_LABEL:
                    anchor_forward = local[real]
                else:
                    anchor_backward = local[real]
                continue
            out.add_bond(local[bond.a], local[bond.b], bond.order)
        if pos > 0:
            if anchor_backward is None:
                raise DetokenizeError(f"block {pos} has a detached wildcard")
            out.add_bond(prev_forward, anchor_backward, 1)
        if pos < last and anchor_forward is None:
            raise DetokenizeError(f"block {pos} has a detached wildcard")
        prev_forward = anchor_forward
    return out.sanitize()


def scaffold_key(block: Block) -> str:
    """Canonical SMILES of the block with wildcards replaced by hydrogens.

    Anchors with pinned hydrogen counts gain one hydrogen per removed
    wildcard; unpinned anchors recompute implicitly once their degree
    drops.
    """
    graph = block.graph
    out = Molecule()
    local: dict[int, int] = {}
    for i, atom in enumerate(graph.atoms):
        if not atom.is_wildcard:
            local[i] = out.add_atom(atom.clone())
    if not out.atoms:
        raise ValueError("block has no heavy atoms")
    for bond in graph.bonds:
        a_wild = graph.atoms[bond.a].is_wildcard
        b_wild = graph.atoms[bond.b].is_wildcard
        if a_wild and b_wild:
            raise ValueError("wildcard-wildcard bond in block")
        if a_wild or b_wild:
            real = bond.b if a_wild else bond.a
            anchor = out.atoms[local[real]]
            if anchor.explicit_hs is not None:
                anchor.explicit_hs += 1
            continue
        out.add_bond(local[bond.a], local[bond.b], bond.order)
    return out.sanitize().to_smiles()


@dataclass
class NameTable:
    """Scaffold SMILES to display-name lookup."""

    entries: dict[str, str]

    @classmethod
    def load(cls, path: str | Path | None = None) -> "NameTable":
        if path is None:
            source = resources.files("molblocks") / "data" / "scaffold_names.tsv"
            text = source.read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        entries: dict[str, str] = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, name = stripped.partition("\t")
            if not sep or not name:
                raise ValueError(
                    f"scaffold name table line {line_no}: "
                    "expected smiles<TAB>name")
            entries[key] = name
        return cls(entries=entries)

    def name_for(self, scaffold: str) -> str | None:
        return self.entries.get(scaffold)


def block_name(block: Block, names: NameTable) -> str:
    name = names.name_for(scaffold_key(block))
    return name if name is not None else "unnamed"


def render(fragmentation: Fragmentation, names: NameTable) -> str:
    """Human-readable form: ``name [key] -> name [key] -> ...``."""
    parts = [f"{block_name(b, names)} [{b.canonical_key}]"
             for b in fragmentation.blocks]
    return " -> ".join(parts)


def to_records(fragmentation: Fragmentation,
               names: NameTable) -> list[dict[str, object]]:
    """Machine form: one record per block with smiles, name, frequency."""
    freqs = fragmentation.frequencies or [0] * len(fragmentation.blocks)
    return [{"smiles": block.canonical_key,
             "name": block_name(block, names),
             "frequency": freq}
            for block, freq in zip(fragmentation.blocks, freqs)]
