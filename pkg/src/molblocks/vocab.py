"""Block vocabulary construction over SMILES corpora.

A vocabulary counts, over a corpus, every contiguous block a molecule can
yield: for each unordered pair drawn from its cleavable bonds plus two
virtual terminal bonds, the block delimited by the pair is counted once.
Pairing two real bonds yields the middle fragment, a real bond with a
virtual end yields an end fragment, and the two virtual ends delimit the
whole molecule (skipped by default).  Counts merge associatively, so any
partitioning of the corpus produces identical results.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .brics import break_molecule, find_brics_bonds
from .mol import Molecule
from .smiles import SmilesError, parse_smiles

FORMAT_VERSION = "bfe-vocab v1"
DEFAULT_F_MIN = 20


class VocabularyError(ValueError):
    """Raised for malformed vocabulary files or inconsistent merges."""


@dataclass
class Vocabulary:
    counts: dict[str, int] = field(default_factory=dict)
    f_min: int = DEFAULT_F_MIN
    corpus_size: int = 0
    include_full: bool = False
    version: str = FORMAT_VERSION

    def frequency(self, key: str) -> int:
        return self.counts.get(key, 0)

    def __len__(self) -> int:
        return len(self.counts)


@dataclass
class BuildStats:
    parsed: int = 0
    skipped: int = 0
    break_count: int = 0
    skipped_records: list[tuple[int, str]] = field(default_factory=list)


def enumerate_blocks(mol: Molecule, include_full: bool = False) -> Counter[str]:
    """Multiset of canonical block keys over all bond 2-subsets."""
    blocks, _ = enumerate_blocks_with_stats(mol, include_full)
    return blocks


def enumerate_blocks_with_stats(
        mol: Molecule, include_full: bool = False) -> tuple[Counter[str], int]:
    """Like enumerate_blocks, also reporting the number of break actions.

    Every 2-subset of the augmented bond set counts as one break action,
    including the whole-molecule pair even when its block is not emitted.
    """
    bonds = find_brics_bonds(mol)
    out: Counter[str] = Counter()
    breaks = 0
    for i in range(len(bonds)):
        for j in range(i + 1, len(bonds)):
            breaks += 1
            layout = break_molecule(mol, (bonds[i], bonds[j]))
            for block in layout.fragments:
                if block.attachment_count == 2:
                    out[block.canonical_key] += 1
    for bond in bonds:
        # One layout serves both end-delimited subsets.
        breaks += 2
        layout = break_molecule(mol, (bond,))
        for block in layout.fragments:
            out[block.canonical_key] += 1
    breaks += 1
    if include_full:
        out[mol.to_smiles()] += 1
    return out, breaks


def build_vocabulary(records: Iterable[tuple[int, str]] | Iterable[str],
                     f_min: int = DEFAULT_F_MIN,
                     include_full: bool = False,
                     partitions: int = 1) -> tuple[Vocabulary, BuildStats]:
    """Count blocks across a corpus in a single enumeration pass per molecule.

    Records may be bare SMILES strings or (record number, SMILES) pairs.
    Unparseable records are skipped and reported, not fatal.  ``partitions``
    splits the corpus round-robin into independently counted parts that are
    merged afterwards; the result is identical for any partition count.
    """
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    normalized: list[tuple[int, str]] = []
    for item in records:
        if isinstance(item, str):
            normalized.append((len(normalized) + 1, item))
        else:
            normalized.append(item)
    if not normalized:
        raise VocabularyError("empty corpus")

    parts = [Vocabulary(f_min=f_min, include_full=include_full)
             for _ in range(partitions)]
    stats = BuildStats()
    for pos, (record_no, smiles) in enumerate(normalized):
        part = parts[pos % partitions]
        try:
            mol = parse_smiles(smiles)
            blocks = enumerate_blocks_with_stats(mol, include_full)
        except SmilesError as exc:
            stats.skipped += 1
            stats.skipped_records.append((record_no, str(exc)))
            continue
        counted, breaks = blocks
        for key, count in counted.items():
            part.counts[key] = part.counts.get(key, 0) + count
        part.corpus_size += 1
        stats.parsed += 1
        stats.break_count += breaks
    return merge_vocabularies(parts), stats


def merge_vocabularies(parts: Iterable[Vocabulary]) -> Vocabulary:
    parts = list(parts)
    if not parts:
        raise VocabularyError("nothing to merge")
    first = parts[0]
    merged = Vocabulary(f_min=first.f_min, include_full=first.include_full,
                        version=first.version)
    for part in parts:
        if (part.f_min, part.include_full) != (first.f_min, first.include_full):
            raise VocabularyError("cannot merge vocabularies with different "
                                  "f_min or include_full settings")
        merged.corpus_size += part.corpus_size
        for key, count in part.counts.items():
            merged.counts[key] = merged.counts.get(key, 0) + count
    return merged


def _sorted_rows(v: Vocabulary) -> list[tuple[str, int]]:
    return sorted(v.counts.items(), key=lambda kv: (-kv[1], kv[0]))


def save_vocabulary(v: Vocabulary, destination: str | Path | TextIO) -> None:
    if hasattr(destination, "write"):
        _write_vocab(v, destination)
        return
    with open(destination, "w", encoding="utf-8") as handle:
        _write_vocab(v, handle)


def _write_vocab(v: Vocabulary, handle: TextIO) -> None:
    handle.write(f"# {v.version}\n")
    handle.write(f"# f_min={v.f_min}\n")
    handle.write(f"# corpus_size={v.corpus_size}\n")
    handle.write(f"# include_full={'true' if v.include_full else 'false'}\n")
    for key, count in _sorted_rows(v):
        handle.write(f"{key}\t{count}\n")


def load_vocabulary(source: str | Path | TextIO) -> Vocabulary:
    if hasattr(source, "read"):
        return _read_vocab(source)
    with open(source, "r", encoding="utf-8") as handle:
        return _read_vocab(handle)


def loads_vocabulary(text: str) -> Vocabulary:
    return _read_vocab(io.StringIO(text))


def _read_vocab(handle: TextIO) -> Vocabulary:
    lines = handle.read().splitlines()
    if not lines or not lines[0].startswith("# ") or "vocab" not in lines[0]:
        raise VocabularyError("missing vocabulary header")
    version = lines[0][2:].strip()
    if version != FORMAT_VERSION:
        raise VocabularyError(f"unsupported vocabulary version {version!r}")
    header: dict[str, str] = {}
    row_start = 1
    for line in lines[1:4]:
        if not line.startswith("# ") or "=" not in line:
            raise VocabularyError(f"malformed header line {line!r}")
        key, _, value = line[2:].partition("=")
        header[key.strip()] = value.strip()
        row_start += 1
    for required in ("f_min", "corpus_size", "include_full"):
        if required not in header:
            raise VocabularyError(f"header missing {required}")
    try:
        f_min = int(header["f_min"])
        corpus_size = int(header["corpus_size"])
    except ValueError as exc:
        raise VocabularyError(f"non-numeric header field: {exc}") from exc
    if header["include_full"] not in ("true", "false"):
        raise VocabularyError("include_full must be true or false")
    vocab = Vocabulary(f_min=f_min, corpus_size=corpus_size,
                       include_full=header["include_full"] == "true",
                       version=version)
    for line_no, line in enumerate(lines[row_start:], start=row_start + 1):
        if not line.strip():
            continue
        key, sep, count_text = line.partition("\t")
        if not sep or not key:
            raise VocabularyError(f"line {line_no}: expected key<TAB>count")
        try:
            count = int(count_text)
        except ValueError:
            raise VocabularyError(
                f"line {line_no}: non-numeric count {count_text!r}") from None
        if count < 1:
            raise VocabularyError(f"line {line_no}: count must be >= 1")
        if key in vocab.counts:
            raise VocabularyError(f"line {line_no}: duplicate key {key!r}")
        vocab.counts[key] = count
    return vocab


def iter_smiles_records(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
    """(line number, SMILES) for non-blank, non-comment lines.

    The first whitespace-separated field is the SMILES; trailing fields
    (names, ids) are ignored.
    """
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        yield line_no, text.split()[0]
