"""Growth-hotspot geometry around a docked ligand.

Each ligand heavy atom gets a cubic probe lattice; lattice points clear of
both the receptor and the ligand by their van der Waals clearances count
toward the atom's available volume, and atoms rank by that volume.  A
uniform-cell spatial index prunes receptor atoms before the distance
kernels run; pruning is conservative, so results are bit-identical to the
exhaustive computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import count_clear_points, within_mask
from .structures import ResidueId, Structure
from .tokenizer import Fragmentation

DEFAULT_CONTACT = 7.0


@dataclass(frozen=True)
class GridConfig:
    edge: float = 5.0
    resolution: float = 0.5
    receptor_clearance: float = 2.2
    ligand_clearance: float = 1.2

    def __post_init__(self) -> None:
        if self.edge <= 0:
            raise ValueError("edge must be positive")
        if not 0 < self.resolution <= self.edge:
            raise ValueError("resolution must be in (0, edge]")
        if self.receptor_clearance <= 0 or self.ligand_clearance <= 0:
            raise ValueError("clearances must be positive")

    @property
    def half_steps(self) -> int:
        return int(round(self.edge / (2 * self.resolution)))

    @property
    def points_per_axis(self) -> int:
        return 2 * self.half_steps + 1


@dataclass(frozen=True)
class Hotspot:
    ligand_atom_index: int
    element: str
    volume: float
    grid_count: int
    neighbors: tuple[ResidueId, ...]
    rank: int


def _residue_sort_key(r: ResidueId) -> tuple:
    return (r.chain, r.resseq, r.icode, r.resname)


@lru_cache(maxsize=8)
def _grid_offsets(edge: float, resolution: float) -> np.ndarray:
    half = int(round(edge / (2 * resolution)))
    steps = np.arange(-half, half + 1, dtype=np.float64)
    mesh = np.meshgrid(steps, steps, steps, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, 3) * resolution


class CellIndex:
    """Uniform-cell index answering conservative ball queries.

    Candidates are a superset of every atom within the query radius, so
    filtering them with the exact distance test reproduces the exhaustive
    answer bit for bit.
    """

    def __init__(self, coords: np.ndarray, cell: float) -> None:
        if cell <= 0:
            raise ValueError("cell size must be positive")
        self.coords = np.ascontiguousarray(coords,
                                           dtype=np.float64).reshape(-1, 3)
        self.cell = float(cell)
        self._table: dict[tuple[int, int, int], list[int]] = {}
        keys = np.floor(self.coords / self.cell).astype(np.int64)
        for i, key in enumerate(map(tuple, keys)):
            self._table.setdefault(key, []).append(i)

    def candidates(self, center: np.ndarray, radius: float) -> np.ndarray:
        """Ascending atom indices from every cell overlapping the ball."""
        if not self._table:
            return np.zeros(0, dtype=np.intp)
        reach = int(math.ceil(radius / self.cell))
        base = np.floor(np.asarray(center, dtype=np.float64) / self.cell)
        cx, cy, cz = (int(v) for v in base)
        found: list[int] = []
        for ix in range(cx - reach, cx + reach + 1):
            for iy in range(cy - reach, cy + reach + 1):
                for iz in range(cz - reach, cz + reach + 1):
                    found.extend(self._table.get((ix, iy, iz), ()))
        found.sort()
        return np.array(found, dtype=np.intp)


def neighboring_residues(atom, receptor: Structure,
                         d_c: float = DEFAULT_CONTACT, *,
                         index: CellIndex | None = None) -> frozenset[ResidueId]:
    """Residues with a heavy atom within the inclusive contact distance."""
    if d_c <= 0:
        raise ValueError("contact distance must be positive")
    coords = receptor.heavy_coords
    if coords.shape[0] == 0:
        return frozenset()
    center = np.asarray(atom, dtype=np.float64)
    cutoff2 = d_c * d_c
    if index is None:
        mask = within_mask(center, coords, cutoff2)
        hit_rows = np.nonzero(mask)[0]
    else:
        cand = index.candidates(center, d_c)
        mask = within_mask(center, coords[cand], cutoff2)
        hit_rows = cand[np.nonzero(mask)[0]]
    residue_rows = receptor.heavy_residues[hit_rows]
    return frozenset(receptor.residues[i].ident
                     for i in np.unique(residue_rows))


def available_volume(atom, receptor: Structure, ligand: Structure,
                     cfg: GridConfig = GridConfig(), *,
                     index: CellIndex | None = None) -> tuple[float, int]:
    """(volume in cubic angstroms, clear grid point count) around an atom."""
    center = np.asarray(atom, dtype=np.float64)
    points = center[None, :] + _grid_offsets(cfg.edge, cfg.resolution)
    rec = receptor.heavy_coords
    if index is not None and rec.shape[0]:
        # Atoms beyond the grid's corner radius plus clearance cannot
        # occlude any point; one extra resolution step absorbs rounding.
        reach = (math.sqrt(3.0) * cfg.half_steps * cfg.resolution
                 + cfg.receptor_clearance + cfg.resolution)
        rec = rec[index.candidates(center, reach)]
    count = count_clear_points(points, rec, ligand.heavy_coords,
                               cfg.receptor_clearance ** 2,
                               cfg.ligand_clearance ** 2)
    return count * cfg.resolution ** 3, count


def identify_hotspots(receptor: Structure, ligand: Structure, k: int = 5,
                      d_c: float = DEFAULT_CONTACT,
                      cfg: GridConfig = GridConfig()) -> list[Hotspot]:
    """Top-k ligand heavy atoms by available volume, rank 1 first.

    Ties in volume resolve to the lower ligand atom index.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    heavy = ligand.heavy_indices
    if not heavy:
        raise ValueError("ligand has no heavy atoms")
    index = CellIndex(receptor.heavy_coords, cell=max(d_c, 1.0)) \
        if receptor.heavy_coords.shape[0] else None
    measured = []
    for atom_index in heavy:
        center = ligand.coords_of(atom_index)
        volume, count = available_volume(center, receptor, ligand, cfg,
                                         index=index)
        residues = neighboring_residues(center, receptor, d_c, index=index)
        measured.append((atom_index, volume, count, residues))
    measured.sort(key=lambda m: (-m[1], m[0]))
    out = []
    for rank, (atom_index, volume, count, residues) in enumerate(
            measured[:k], start=1):
        out.append(Hotspot(
            ligand_atom_index=atom_index,
            element=ligand.atoms[atom_index].element,
            volume=volume,
            grid_count=count,
            neighbors=tuple(sorted(residues, key=_residue_sort_key)),
            rank=rank))
    return out


def context_record(h: Hotspot,
                   fragment: Fragmentation | None = None) -> dict:
    """JSON-ready payload of one hotspot plus the ligand's block sequence."""
    record = {
        "rank": h.rank,
        "ligand_atom_index": h.ligand_atom_index,
        "element": h.element,
        "available_volume_A3": float(f"{h.volume:.3f}"),
        "grid_count": h.grid_count,
        "neighboring_residues": [
            {"chain": r.chain, "resname": r.resname,
             "resseq": r.resseq, "icode": r.icode}
            for r in h.neighbors
        ],
    }
    if fragment is not None:
        record["fragment_blocks"] = list(fragment.keys)
    return record


def context_paragraph(h: Hotspot, fragment: Fragmentation | None = None,
                      d_c: float = DEFAULT_CONTACT) -> str:
    """Deterministic English rendering of the same payload."""
    if h.neighbors:
        residues = ("Residues within "
                    f"{d_c:.1f} A: "
                    + ", ".join(r.label() for r in h.neighbors) + ".")
    else:
        residues = f"No residues lie within {d_c:.1f} A."
    parts = [
        f"Growth hotspot {h.rank}: ligand atom {h.ligand_atom_index} "
        f"({h.element}) has {h.volume:.3f} A^3 of open volume across "
        f"{h.grid_count} grid points.",
        residues,
    ]
    if fragment is not None:
        parts.append("Ligand blocks: " + " -> ".join(fragment.keys) + ".")
    return " ".join(parts)
