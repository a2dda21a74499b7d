"""Hotspot geometry: grids, clearances, contact residues, ranking."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from molblocks import _kernels
from molblocks.brics import Block
from molblocks.hotspots import (
    CellIndex,
    GridConfig,
    Hotspot,
    available_volume,
    context_paragraph,
    context_record,
    identify_hotspots,
    neighboring_residues,
)
from molblocks.structures import Residue, ResidueId, StructAtom, Structure
from molblocks.tokenizer import Fragmentation

DEFAULTS = GridConfig()


def make_structure(coords, element="C", atoms_per_residue=1):
    """One chain, residues filled left to right from the coordinate list."""
    atoms: list[StructAtom] = []
    residues: list[Residue] = []
    for i, (x, y, z) in enumerate(coords):
        res_no = i // atoms_per_residue
        if res_no == len(residues):
            ident = ResidueId(chain="A", resname="GLY", resseq=res_no + 1,
                              icode="")
            residues.append(Residue(ident=ident, atom_indices=[]))
        residues[res_no].atom_indices.append(i)
        atoms.append(StructAtom(element=element, x=float(x), y=float(y),
                                z=float(z), name=element, occupancy=1.0,
                                residue=res_no))
    return Structure(atoms=atoms, residues=residues)


EMPTY = make_structure([])
ORIGIN_LIGAND = make_structure([(0.0, 0.0, 0.0)])


def random_cloud(n, seed, span=18.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-span, span, size=(n, 3))


class TestGridConfig:
    def test_defaults(self):
        assert (DEFAULTS.edge, DEFAULTS.resolution) == (5.0, 0.5)
        assert DEFAULTS.receptor_clearance == 2.2
        assert DEFAULTS.ligand_clearance == 1.2
        assert DEFAULTS.half_steps == 5
        assert DEFAULTS.points_per_axis == 11

    @pytest.mark.parametrize("kwargs", [
        {"edge": 0.0},
        {"edge": -1.0},
        {"resolution": 0.0},
        {"resolution": 6.0},
        {"receptor_clearance": 0.0},
        {"ligand_clearance": -0.5},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            GridConfig(**kwargs)


class TestAvailableVolume:
    def test_single_atom_empty_receptor(self):
        volume, count = available_volume((0.0, 0.0, 0.0), EMPTY,
                                         ORIGIN_LIGAND)
        assert count == 1274
        assert volume == 159.25

    def test_single_atom_matches_lattice_recount(self):
        # Independent recount: 11^3 lattice minus points within 1.2 A of
        # the center.
        excluded = sum(
            1 for i, j, k in itertools.product(range(-5, 6), repeat=3)
            if math.dist((0, 0, 0), (i * 0.5, j * 0.5, k * 0.5)) <= 1.2)
        _, count = available_volume((0.0, 0.0, 0.0), EMPTY, ORIGIN_LIGAND)
        assert count == 11 ** 3 - excluded
        assert excluded == 57

    def test_total_occlusion(self):
        grid_atoms = [(i * 0.5, j * 0.5, k * 0.5)
                      for i, j, k in itertools.product(range(-5, 6), repeat=3)]
        receptor = make_structure(grid_atoms)
        volume, count = available_volume((0.0, 0.0, 0.0), receptor,
                                         ORIGIN_LIGAND)
        assert (volume, count) == (0.0, 0)

    def test_volume_is_count_times_cell_volume(self):
        receptor = make_structure(random_cloud(150, seed=2, span=6.0))
        volume, count = available_volume((0.0, 0.0, 0.0), receptor,
                                         ORIGIN_LIGAND)
        assert volume == count * 0.5 ** 3

    def test_receptor_clearance_boundary_is_strict(self):
        # A receptor atom exactly 2.2 A from the central grid point blocks
        # it; nudging the atom outward frees exactly that one point.
        far_ligand = make_structure([(50.0, 50.0, 50.0)])
        on_boundary = make_structure([(2.2, 0.0, 0.0)])
        past_boundary = make_structure([(2.2 + 1e-6, 0.0, 0.0)])
        _, at = available_volume((0.0, 0.0, 0.0), on_boundary, far_ligand)
        _, past = available_volume((0.0, 0.0, 0.0), past_boundary, far_ligand)
        assert past - at == 1

    def test_occlusion_monotone_in_clearance(self):
        receptor = make_structure(random_cloud(120, seed=3, span=5.0))
        counts = []
        for clearance in (1.0, 1.8, 2.2, 3.0):
            cfg = GridConfig(receptor_clearance=clearance)
            counts.append(available_volume((0.0, 0.0, 0.0), receptor,
                                           ORIGIN_LIGAND, cfg)[1])
        assert counts == sorted(counts, reverse=True)

    def test_occlusion_monotone_in_receptor_size(self):
        cloud = random_cloud(200, seed=4, span=5.0)
        previous = None
        for n in (0, 50, 100, 200):
            receptor = make_structure(cloud[:n])
            count = available_volume((0.0, 0.0, 0.0), receptor,
                                     ORIGIN_LIGAND)[1]
            if previous is not None:
                assert count <= previous
            previous = count

    def test_index_pruning_is_exact(self):
        receptor = make_structure(random_cloud(900, seed=5))
        index = CellIndex(receptor.heavy_coords, cell=7.0)
        for center in ((0.0, 0.0, 0.0), (4.0, -3.0, 8.5), (-12.0, 6.0, 1.0)):
            plain = available_volume(center, receptor, ORIGIN_LIGAND)
            pruned = available_volume(center, receptor, ORIGIN_LIGAND,
                                      index=index)
            assert plain == pruned


class TestNeighboringResidues:
    def residue_at(self, xyz):
        return make_structure([xyz])

    def test_below_threshold_included(self):
        hits = neighboring_residues((0.0, 0.0, 0.0), self.residue_at((6.9, 0, 0)))
        assert len(hits) == 1

    def test_exact_threshold_included(self):
        hits = neighboring_residues((0.0, 0.0, 0.0), self.residue_at((7.0, 0, 0)))
        assert len(hits) == 1

    def test_above_threshold_excluded(self):
        hits = neighboring_residues((0.0, 0.0, 0.0), self.residue_at((7.1, 0, 0)))
        assert hits == frozenset()

    def test_residues_deduplicated(self):
        receptor = make_structure([(1.0, 0, 0), (2.0, 0, 0), (3.0, 0, 0)],
                                  atoms_per_residue=3)
        hits = neighboring_residues((0.0, 0.0, 0.0), receptor)
        assert len(hits) == 1

    def test_hydrogens_ignored(self):
        receptor = make_structure([(1.0, 0.0, 0.0)], element="H")
        assert neighboring_residues((0.0, 0.0, 0.0), receptor) == frozenset()

    def test_empty_receptor(self):
        assert neighboring_residues((0.0, 0.0, 0.0), EMPTY) == frozenset()

    def test_invalid_cutoff(self):
        with pytest.raises(ValueError, match="contact distance"):
            neighboring_residues((0.0, 0.0, 0.0), EMPTY, d_c=0.0)

    def test_index_matches_exhaustive_on_large_cloud(self):
        receptor = make_structure(random_cloud(5000, seed=6, span=40.0),
                                  atoms_per_residue=8)
        index = CellIndex(receptor.heavy_coords, cell=7.0)
        rng = np.random.default_rng(7)
        for center in rng.uniform(-35.0, 35.0, size=(20, 3)):
            plain = neighboring_residues(center, receptor)
            indexed = neighboring_residues(center, receptor, index=index)
            assert plain == indexed


def oracle_hotspots(receptor, ligand, k, d_c, cfg):
    """Exhaustive re-implementation without kernels or spatial pruning."""
    steps = np.arange(-cfg.half_steps, cfg.half_steps + 1,
                      dtype=np.float64) * cfg.resolution
    offsets = np.array([(x, y, z) for x in steps for y in steps for z in steps])
    rec = receptor.heavy_coords
    lig = ligand.heavy_coords
    rows = []
    for atom_index in ligand.heavy_indices:
        center = ligand.coords_of(atom_index)
        points = center + offsets
        keep = np.ones(len(points), dtype=bool)
        for coords, clearance in ((rec, cfg.receptor_clearance),
                                  (lig, cfg.ligand_clearance)):
            if len(coords):
                delta = points[:, None, :] - coords[None, :, :]
                dist2 = (delta * delta).sum(axis=2)
                keep &= (dist2 > clearance * clearance).all(axis=1)
        count = int(keep.sum())
        if len(rec):
            delta = center[None, :] - rec
            hit = (delta * delta).sum(axis=1) <= d_c * d_c
            residue_rows = receptor.heavy_residues[hit]
            neighbors = frozenset(receptor.residues[i].ident
                                  for i in set(residue_rows))
        else:
            neighbors = frozenset()
        rows.append((atom_index, count * cfg.resolution ** 3, count,
                     neighbors))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows[:k]


class TestIdentifyHotspots:
    def test_fewer_atoms_than_k(self):
        ligand = make_structure([(0.0, 0, 0), (20.0, 0, 0), (40.0, 0, 0)])
        spots = identify_hotspots(EMPTY, ligand, k=5)
        assert [h.rank for h in spots] == [1, 2, 3]

    def test_k_truncates(self):
        ligand = make_structure([(0.0, 0, 0), (20.0, 0, 0), (40.0, 0, 0)])
        assert len(identify_hotspots(EMPTY, ligand, k=2)) == 2

    def test_equal_volume_tie_prefers_lower_index(self):
        ligand = make_structure([(0.0, 0, 0), (20.0, 0, 0)])
        spots = identify_hotspots(EMPTY, ligand)
        assert [h.ligand_atom_index for h in spots] == [0, 1]
        assert spots[0].volume == spots[1].volume == 159.25

    def test_exposed_atom_outranks_buried(self):
        wall = [(2.0 * dx, 2.0 * dy, 2.0 * dz)
                for dx, dy, dz in itertools.product((-1, 0, 1), repeat=3)
                if (dx, dy, dz) != (0, 0, 0)]
        receptor = make_structure(wall)
        ligand = make_structure([(0.0, 0.0, 0.0), (30.0, 0.0, 0.0)])
        spots = identify_hotspots(receptor, ligand)
        assert spots[0].ligand_atom_index == 1
        assert spots[0].volume > spots[1].volume

    def test_matches_exhaustive_oracle_on_large_fixture(self):
        receptor = make_structure(random_cloud(5000, seed=8, span=25.0),
                                  atoms_per_residue=8)
        ligand = make_structure(random_cloud(5, seed=9, span=10.0))
        spots = identify_hotspots(receptor, ligand, k=5)
        expected = oracle_hotspots(receptor, ligand, k=5,
                                   d_c=7.0, cfg=DEFAULTS)
        assert len(spots) == len(expected)
        for h, (atom_index, volume, count, neighbors) in zip(spots, expected):
            assert h.ligand_atom_index == atom_index
            assert h.volume == volume
            assert h.grid_count == count
            assert frozenset(h.neighbors) == neighbors

    def test_deterministic(self):
        receptor = make_structure(random_cloud(400, seed=10),
                                  atoms_per_residue=4)
        ligand = make_structure(random_cloud(4, seed=11, span=8.0))
        assert identify_hotspots(receptor, ligand) == \
            identify_hotspots(receptor, ligand)

    def test_neighbors_sorted(self):
        receptor = make_structure(random_cloud(60, seed=12, span=6.0),
                                  atoms_per_residue=3)
        spots = identify_hotspots(receptor, ORIGIN_LIGAND, k=1)
        keys = [(r.chain, r.resseq, r.icode) for r in spots[0].neighbors]
        assert keys == sorted(keys)

    def test_empty_ligand_rejected(self):
        with pytest.raises(ValueError, match="ligand has no heavy atoms"):
            identify_hotspots(EMPTY, make_structure([], element="C"))

    def test_hydrogen_only_ligand_rejected(self):
        ligand = make_structure([(0.0, 0.0, 0.0)], element="H")
        with pytest.raises(ValueError, match="no heavy atoms"):
            identify_hotspots(EMPTY, ligand)

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError, match="k must be"):
            identify_hotspots(EMPTY, ORIGIN_LIGAND, k=0)


class TestKernelPaths:
    def setup_data(self):
        rng = np.random.default_rng(13)
        points = rng.uniform(-4.0, 4.0, size=(300, 3))
        receptor = rng.uniform(-6.0, 6.0, size=(500, 3))
        ligand = rng.uniform(-3.0, 3.0, size=(12, 3))
        return points, receptor, ligand

    @pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE,
                        reason="numba not installed")
    def test_jit_and_numpy_counts_identical(self, monkeypatch):
        points, receptor, ligand = self.setup_data()
        monkeypatch.delenv("MOLBLOCKS_DISABLE_NUMBA", raising=False)
        jit = _kernels.count_clear_points(points, receptor, ligand,
                                          2.2 ** 2, 1.2 ** 2)
        monkeypatch.setenv("MOLBLOCKS_DISABLE_NUMBA", "1")
        plain = _kernels.count_clear_points(points, receptor, ligand,
                                            2.2 ** 2, 1.2 ** 2)
        assert jit == plain

    @pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE,
                        reason="numba not installed")
    def test_jit_and_numpy_masks_identical(self, monkeypatch):
        _, receptor, _ = self.setup_data()
        center = np.array([0.5, -0.25, 1.0])
        monkeypatch.delenv("MOLBLOCKS_DISABLE_NUMBA", raising=False)
        jit = _kernels.within_mask(center, receptor, 49.0)
        monkeypatch.setenv("MOLBLOCKS_DISABLE_NUMBA", "1")
        plain = _kernels.within_mask(center, receptor, 49.0)
        assert np.array_equal(jit, plain)

    def test_env_flag_selects_numpy_path(self, monkeypatch):
        monkeypatch.setenv("MOLBLOCKS_DISABLE_NUMBA", "1")
        assert not _kernels.use_jit()
        monkeypatch.setenv("MOLBLOCKS_DISABLE_NUMBA", "0")
        assert _kernels.use_jit() == _kernels.NUMBA_AVAILABLE

    def test_full_pipeline_matches_across_paths(self, monkeypatch):
        receptor = make_structure(random_cloud(300, seed=14, span=12.0),
                                  atoms_per_residue=4)
        ligand = make_structure(random_cloud(3, seed=15, span=6.0))
        monkeypatch.setenv("MOLBLOCKS_DISABLE_NUMBA", "1")
        plain = identify_hotspots(receptor, ligand)
        monkeypatch.delenv("MOLBLOCKS_DISABLE_NUMBA")
        fast = identify_hotspots(receptor, ligand)
        assert plain == fast


class TestContextRecords:
    def hotspot(self, neighbors=None):
        if neighbors is None:
            neighbors = (ResidueId(chain="A", resname="ASP", resseq=189,
                                   icode=""),)
        return Hotspot(ligand_atom_index=5, element="C", volume=42.5,
                       grid_count=340, neighbors=neighbors, rank=1)

    def fragmentation(self):
        return Fragmentation(blocks=[Block.from_smiles("[2*]c1cccnc1"),
                                     Block.from_smiles("[1*]CN1CCN(C)CC1")])

    def test_record_fields(self):
        record = context_record(self.hotspot(), self.fragmentation())
        assert record == {
            "rank": 1,
            "ligand_atom_index": 5,
            "element": "C",
            "available_volume_A3": 42.5,
            "grid_count": 340,
            "neighboring_residues": [
                {"chain": "A", "resname": "ASP", "resseq": 189, "icode": ""},
            ],
            "fragment_blocks": ["[2*]c1cccnc1", "[1*]CN1CCN(C)CC1"],
        }

    def test_paragraph_golden(self):
        text = context_paragraph(self.hotspot(), self.fragmentation())
        assert text == (
            "Growth hotspot 1: ligand atom 5 (C) has 42.500 A^3 of open "
            "volume across 340 grid points. Residues within 7.0 A: "
            "A/ASP/189. Ligand blocks: [2*]c1cccnc1 -> [1*]CN1CCN(C)CC1."
        )

    def test_paragraph_without_neighbors(self):
        text = context_paragraph(self.hotspot(neighbors=()),
                                 self.fragmentation())
        assert "No residues lie within 7.0 A." in text

    def test_paragraph_stable(self):
        first = context_paragraph(self.hotspot(), self.fragmentation())
        second = context_paragraph(self.hotspot(), self.fragmentation())
        assert first == second
