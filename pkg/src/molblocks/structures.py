"""Fixed-column PDB/PDBQT parsing into immutable structures.

Only ATOM/HETATM records are read; when a file holds multiple models the
first one wins.  Alternate locations collapse to the highest-occupancy
conformer, and heavy-atom views exclude hydrogen and deuterium, which is
what every distance computation downstream consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .periodic import KNOWN_ELEMENTS


class StructureError(ValueError):
    """Raised when a structure file cannot be parsed."""


@dataclass(frozen=True)
class ResidueId:
    chain: str
    resname: str
    resseq: int
    icode: str

    def label(self) -> str:
        return f"{self.chain}/{self.resname}/{self.resseq}{self.icode}"


@dataclass
class Residue:
    ident: ResidueId
    atom_indices: list[int]


@dataclass
class StructAtom:
    element: str
    x: float
    y: float
    z: float
    name: str
    occupancy: float
    residue: int

    @property
    def is_heavy(self) -> bool:
        return self.element.upper() not in ("H", "D")


class Structure:
    """Parsed atoms plus residue grouping, with cached heavy-atom arrays."""

    def __init__(self, atoms: list[StructAtom], residues: list[Residue]) -> None:
        self.atoms = atoms
        self.residues = residues
        self._heavy_indices: list[int] | None = None
        self._heavy_coords: np.ndarray | None = None
        self._heavy_residues: np.ndarray | None = None

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def heavy_indices(self) -> list[int]:
        if self._heavy_indices is None:
            self._heavy_indices = [i for i, a in enumerate(self.atoms)
                                   if a.is_heavy]
        return self._heavy_indices

    @property
    def heavy_coords(self) -> np.ndarray:
        if self._heavy_coords is None:
            rows = [(self.atoms[i].x, self.atoms[i].y, self.atoms[i].z)
                    for i in self.heavy_indices]
            self._heavy_coords = np.array(rows, dtype=np.float64).reshape(-1, 3)
        return self._heavy_coords

    @property
    def heavy_residues(self) -> np.ndarray:
        """Residue index per heavy atom, aligned with heavy_coords rows."""
        if self._heavy_residues is None:
            self._heavy_residues = np.array(
                [self.atoms[i].residue for i in self.heavy_indices],
                dtype=np.intp)
        return self._heavy_residues

    def coords_of(self, atom_index: int) -> np.ndarray:
        atom = self.atoms[atom_index]
        return np.array((atom.x, atom.y, atom.z), dtype=np.float64)

    def residue_of(self, atom_index: int) -> ResidueId:
        return self.residues[self.atoms[atom_index].residue].ident


def _element_from_name(name: str) -> str:
    # PDB right-justifies one-letter elements inside the four-column name
    # field; a name starting in the first column is either a two-letter
    # element (CA calcium, FE) or a four-character hydrogen name (HG21).
    letters = "".join(ch for ch in name if ch.isalpha())
    if not letters:
        return ""
    if not name.startswith(" "):
        two = letters[:2].capitalize()
        if two in KNOWN_ELEMENTS:
            return two
    return letters[0].upper()


def _element_of(line: str, fmt: str) -> str:
    if fmt == "pdb":
        field = line[76:78].strip().capitalize()
        if field in KNOWN_ELEMENTS or field in ("D", "T"):
            return field
    # pdbqt stores a force-field atom type in the element columns (NA is a
    # hydrogen-bonding nitrogen there, not sodium), so the name decides.
    return _element_from_name(line[12:16])


def parse_structure(text: str, format: str = "pdb") -> Structure:
    """Parse ATOM/HETATM records from fixed-column text."""
    if format not in ("pdb", "pdbqt"):
        raise ValueError(f"unknown structure format {format!r}")

    raw_atoms: list[tuple[StructAtom, ResidueId, str]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        tag = line[:6].rstrip()
        if tag == "ENDMDL" or tag == "END":
            break
        if tag not in ("ATOM", "HETATM"):
            continue
        line = line.ljust(80)
        try:
            coords = tuple(float(line[start:start + 8])
                           for start in (30, 38, 46))
        except ValueError:
            raise StructureError(
                f"line {line_no}: malformed coordinate field") from None
        if not all(math.isfinite(c) for c in coords):
            raise StructureError(
                f"line {line_no}: malformed coordinate field")
        resseq_text = line[22:26].strip()
        try:
            resseq = int(resseq_text) if resseq_text else 0
        except ValueError:
            raise StructureError(
                f"line {line_no}: malformed residue number") from None
        try:
            occupancy = float(line[54:60])
        except ValueError:
            occupancy = 1.0
        name = line[12:16]
        ident = ResidueId(chain=line[21].strip(),
                          resname=line[17:20].strip(),
                          resseq=resseq,
                          icode=line[26].strip())
        atom = StructAtom(element=_element_of(line, format),
                          x=coords[0], y=coords[1], z=coords[2],
                          name=name.strip(), occupancy=occupancy,
                          residue=-1)
        raw_atoms.append((atom, ident, name.strip()))
    if not raw_atoms:
        raise StructureError("no atom records found")

    # Alternate locations: one atom per (residue, name), highest occupancy,
    # first record's position kept so ordering stays stable.
    kept: list[tuple[StructAtom, ResidueId]] = []
    slot: dict[tuple[str, int, str, str], int] = {}
    for atom, ident, name in raw_atoms:
        key = (ident.chain, ident.resseq, ident.icode, name)
        at = slot.get(key)
        if at is None:
            slot[key] = len(kept)
            kept.append((atom, ident))
        elif atom.occupancy > kept[at][0].occupancy:
            kept[at] = (atom, ident)

    residues: list[Residue] = []
    residue_index: dict[ResidueId, int] = {}
    atoms: list[StructAtom] = []
    for atom, ident in kept:
        at = residue_index.get(ident)
        if at is None:
            at = len(residues)
            residue_index[ident] = at
            residues.append(Residue(ident=ident, atom_indices=[]))
        atom.residue = at
        residues[at].atom_indices.append(len(atoms))
        atoms.append(atom)
    return Structure(atoms=atoms, residues=residues)


def read_structure(path: str | Path, format: str | None = None) -> Structure:
    """Parse a file, inferring pdbqt from the extension unless told."""
    path = Path(path)
    if format is None:
        format = "pdbqt" if path.suffix.lower() == ".pdbqt" else "pdb"
    return parse_structure(path.read_text(), format)
