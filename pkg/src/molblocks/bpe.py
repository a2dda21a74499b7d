"""Merge-based vocabulary construction and a break-vs-merge timing harness.

The builder starts every corpus molecule as its primitive block path and
repeatedly collapses the corpus-wide most frequent adjacent block pair,
one pair per pass, until the vocabulary reaches the target size or no
pairs remain.  The benchmark times a single break against a single
merge-and-sanitize at several molecule sizes; merging re-runs full
perception while breaking inherits it, which is the cost asymmetry the
ratio column captures.
"""

from __future__ import annotations

import logging
import os
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from statistics import fmean, median
from typing import Iterable, Sequence

from .brics import (
    BACKWARD_LABEL,
    FORWARD_LABEL,
    Block,
    break_molecule,
    find_brics_bonds,
)
from .mol import Molecule
from .smiles import parse_smiles
from .synth import benchmark_molecules
from .tokenizer import BranchedMoleculeError
from .vocab import Vocabulary

logger = logging.getLogger(__name__)


class MergeError(ValueError):
    """Blocks cannot be joined at complementary wildcards."""


class BenchmarkError(RuntimeError):
    """Timing run could not produce trustworthy numbers."""


def merge_fragments(a: Block, b: Block) -> Molecule:
    """Join a's forward wildcard to b's backward wildcard.

    Returns the sanitized union with a single bond between the two
    wildcard neighbors; any remaining wildcards resolve to hydrogens.
    Full sanitization (rings, aromaticity, valence) runs unconditionally,
    which is the whole cost of this operation compared with breaking.
    """
    if a.wildcard_with_label(FORWARD_LABEL) is None \
            or b.wildcard_with_label(BACKWARD_LABEL) is None:
        raise MergeError("blocks lack complementary wildcard labels")
    out = Molecule()
    anchors: list[int | None] = [None, None]
    for which, (block, consumed_label) in enumerate(
            ((a, FORWARD_LABEL), (b, BACKWARD_LABEL))):
        graph = block.graph
        consumed = block.wildcard_with_label(consumed_label)
        local: dict[int, int] = {}
        for i, atom in enumerate(graph.atoms):
            if not atom.is_wildcard:
                local[i] = out.add_atom(atom.clone())
        for bond in graph.bonds:
            a_wild = graph.atoms[bond.a].is_wildcard
            b_wild = graph.atoms[bond.b].is_wildcard
            if a_wild and b_wild:
                raise MergeError("wildcard-wildcard bond in block")
            if a_wild or b_wild:
                wc, real = (bond.a, bond.b) if a_wild else (bond.b, bond.a)
                if wc == consumed:
                    anchors[which] = local[real]
                else:
                    anchor = out.atoms[local[real]]
                    if anchor.explicit_hs is not None:
                        anchor.explicit_hs += 1
                continue
            out.add_bond(local[bond.a], local[bond.b], bond.order)
    out.add_bond(anchors[0], anchors[1], 1)
    return out.sanitize()


@dataclass
class BpeStats:
    merge_count: int = 0
    passes: int = 0
    reached_target: bool = True


def _attachment_cut(block: Block, label: int) -> int:
    wc = block.wildcard_with_label(label)
    return block.wildcard_cuts[wc]


def _run_key(mol: Molecule, prims: Sequence[Block], i: int, j: int) -> str:
    """Vocabulary key of the contiguous primitive run i..j inclusive.

    The key is spelled exactly as block enumeration would spell it: the
    block delimited by the run's two boundary cuts, with the molecule
    itself standing in when both boundaries are the chain ends.
    """
    last = len(prims) - 1
    if i == 0 and j == last:
        return mol.to_smiles()
    left = None if i == 0 else _attachment_cut(prims[i], BACKWARD_LABEL)
    right = None if j == last else _attachment_cut(prims[j], FORWARD_LABEL)
    cuts = tuple(c for c in (left, right) if c is not None)
    layout = break_molecule(mol, cuts)
    if len(cuts) == 2:
        for block in layout.fragments:
            if block.attachment_count == 2:
                return block.canonical_key
    marker = next(iter(prims[i].source_atoms))
    for block in layout.fragments:
        if block.source_atoms is not None and marker in block.source_atoms:
            return block.canonical_key
    raise AssertionError("run has no covering fragment")


@dataclass
class _PathState:
    mol: Molecule
    prims: list[Block]
    runs: list[tuple[int, int]]

    def key(self, t: int) -> str:
        return _run_key(self.mol, self.prims, *self.runs[t])

    def merge(self, t: int) -> str:
        self.runs[t] = (self.runs[t][0], self.runs[t + 1][1])
        del self.runs[t + 1]
        return self.key(t)


def graph_bpe_build(corpus: Iterable[str | Molecule],
                    target_vocab_size: int) -> tuple[Vocabulary, BpeStats]:
    """Iterative pair-merging vocabulary over a non-branching corpus.

    Counts are occurrence counts: how often each primitive appeared
    initially, and how many adjacent pairs each merged block collapsed.
    An unreachable target is reported through the stats and a warning,
    not an exception.
    """
    mols = [parse_smiles(item) if isinstance(item, str) else item
            for item in corpus]
    if not mols:
        raise ValueError("empty corpus")
    states: list[_PathState] = []
    counts: dict[str, int] = {}
    for mol in mols:
        layout = break_molecule(mol, find_brics_bonds(mol))
        if not layout.is_path:
            raise BranchedMoleculeError(
                "corpus molecule branches under full decomposition")
        prims = list(layout.fragments)
        state = _PathState(mol=mol, prims=prims,
                           runs=[(p, p) for p in range(len(prims))])
        states.append(state)
        for t in range(len(state.runs)):
            key = state.key(t)
            counts[key] = counts.get(key, 0) + 1
    if target_vocab_size <= len(counts):
        raise ValueError(
            f"target vocabulary size {target_vocab_size} must exceed the "
            f"initial primitive vocabulary size {len(counts)}")

    stats = BpeStats()
    while len(counts) < target_vocab_size:
        stats.passes += 1
        pair_counts: Counter[tuple[str, str]] = Counter()
        for state in states:
            for t in range(len(state.runs) - 1):
                pair_counts[(state.key(t), state.key(t + 1))] += 1
        if not pair_counts:
            stats.reached_target = False
            logger.warning(
                "target vocabulary size %d unreachable; stopped at %d",
                target_vocab_size, len(counts))
            break
        top = max(pair_counts.values())
        best_pair = min(pair for pair, n in pair_counts.items() if n == top)
        for state in states:
            t = 0
            while t < len(state.runs) - 1:
                if (state.key(t), state.key(t + 1)) == best_pair:
                    merged_key = state.merge(t)
                    counts[merged_key] = counts.get(merged_key, 0) + 1
                    stats.merge_count += 1
                t += 1
    return (Vocabulary(counts=counts, f_min=0, corpus_size=len(mols),
                       include_full=True),
            stats)


@dataclass(frozen=True)
class BenchReport:
    sizes: tuple[int, ...]
    break_time: tuple[float, ...]
    merge_time: tuple[float, ...]
    ratio: tuple[float, ...]
    samples: int

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ValueError("sizes must be strictly increasing")
        lengths = {len(self.sizes), len(self.break_time),
                   len(self.merge_time), len(self.ratio)}
        if lengths != {len(self.sizes)}:
            raise ValueError("per-size columns must align")
        if any(t <= 0 for t in self.break_time + self.merge_time):
            raise ValueError("all times must be positive")


def _timed(op, *args) -> float:
    start = time.perf_counter_ns()
    op(*args)
    stop = time.perf_counter_ns()
    if stop <= start:
        raise BenchmarkError(
            "operation finished below timer resolution; cannot report it")
    return (stop - start) / 1e9


def _break_setup(smiles: str, salt: int):
    # Fresh parse per measurement: layouts are memoized per molecule, so
    # a reused object would time a cache hit instead of the break.
    mol = parse_smiles(smiles)
    bonds = find_brics_bonds(mol)
    rng = random.Random(salt)
    i, j = sorted(rng.sample(range(len(bonds)), 2))
    return mol, (bonds[i], bonds[j])


def _merge_setup(smiles: str):
    mol = parse_smiles(smiles)
    bonds = find_brics_bonds(mol)
    layout = break_molecule(mol, (bonds[len(bonds) // 2],))
    first, second = layout.fragments
    return first, second


def benchmark_break_vs_merge(sizes: Sequence[int], samples: int = 300, *,
                             reps: int = 3, seed: int = 0,
                             warmup: int = 5) -> BenchReport:
    """Median-of-means per-operation timings for each heavy-atom size.

    Runs single-threaded, pinned to one logical processor when the
    platform allows it; warm-up measurements are discarded.
    """
    sizes = tuple(sizes)
    if reps < 3:
        raise ValueError("need at least 3 repetitions")
    previous_affinity = None
    try:
        previous_affinity = os.sched_getaffinity(0)
        os.sched_setaffinity(0, {min(previous_affinity)})
    except (AttributeError, OSError):
        previous_affinity = None
    try:
        break_means, merge_means = [], []
        for size in sizes:
            try:
                pool = benchmark_molecules(size, samples + warmup, seed)
            except ValueError as exc:
                raise BenchmarkError(
                    f"cannot supply molecules at size {size}: {exc}") from exc
            rep_break, rep_merge = [], []
            for rep in range(reps):
                breaks, merges = [], []
                for idx, smiles in enumerate(pool):
                    mol, cuts = _break_setup(smiles, seed + rep * 7919 + idx)
                    t_break = _timed(break_molecule, mol, cuts)
                    first, second = _merge_setup(smiles)
                    t_merge = _timed(merge_fragments, first, second)
                    if idx >= warmup:
                        breaks.append(t_break)
                        merges.append(t_merge)
                rep_break.append(fmean(breaks))
                rep_merge.append(fmean(merges))
            break_means.append(median(rep_break))
            merge_means.append(median(rep_merge))
    finally:
        if previous_affinity is not None:
            os.sched_setaffinity(0, previous_affinity)
    return BenchReport(
        sizes=sizes,
        break_time=tuple(break_means),
        merge_time=tuple(merge_means),
        ratio=tuple(m / b for b, m in zip(break_means, merge_means)),
        samples=samples)


def report_csv(report: BenchReport) -> str:
    lines = ["size,break_mean_s,merge_mean_s,ratio,samples"]
    for i, size in enumerate(report.sizes):
        lines.append(f"{size},{report.break_time[i]:.9f},"
                     f"{report.merge_time[i]:.9f},{report.ratio[i]:.3f},"
                     f"{report.samples}")
    return "\n".join(lines) + "\n"


def report_table(report: BenchReport) -> str:
    header = f"{'size':>6} {'break (s)':>12} {'merge (s)':>12} " \
             f"{'ratio':>8} {'samples':>8}"
    rows = [header, "-" * len(header)]
    for i, size in enumerate(report.sizes):
        rows.append(f"{size:>6} {report.break_time[i]:>12.3e} "
                    f"{report.merge_time[i]:>12.3e} "
                    f"{report.ratio[i]:>8.2f} {report.samples:>8}")
    return "\n".join(rows) + "\n"
