"""Command-line entry points for vocabulary building, tokenization,
hotspot mapping, screening and benchmarking.

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
stderr; results go to stdout or the --out file. Output is byte-stable
for identical inputs and flags: JSON keys keep a fixed order, volumes
print with 3 decimals and probability-scale numbers with 6.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Iterator, TextIO

from . import __version__
from .admet import (
    DEFAULT_ADMET_THRESHOLD,
    DEFAULT_QED_THRESHOLD,
    candidate_from_mapping,
    candidate_from_tsv_row,
    parse_candidate_header,
    passes_filter,
)
from .bpe import BenchmarkError, benchmark_break_vs_merge, report_csv, report_table
from .brics import Block, default_rules
from .cluster import DEFAULT_DISTANCE_CUTOFF, butina_cluster
from .hotspots import (
    DEFAULT_CONTACT,
    GridConfig,
    context_paragraph,
    context_record,
    identify_hotspots,
)
from .smiles import parse_smiles
from .structures import read_structure
from .tokenizer import (
    DEFAULT_MAX_BONDS,
    NameTable,
    detokenize,
    render,
    to_records,
    tokenize,
)
from .vocab import (
    DEFAULT_F_MIN,
    build_vocabulary,
    iter_smiles_records,
    load_vocabulary,
    save_vocabulary,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

CONFIG_ENV = "MOLBLOCKS_CONFIG"
DEFAULT_CONFIG_PATH = "~/.config/molblocks.json"

# Flag defaults that a config file may override.
CONFIG_KEYS = frozenset({
    "f_min", "k", "d_c", "grid_edge", "grid_resolution",
    "receptor_clearance", "ligand_clearance", "admet_threshold",
    "qed_threshold", "butina_cutoff", "max_bonds", "threads", "seed",
})


class UsageError(Exception):
    """Bad flag combination discovered after parsing."""


class DataError(Exception):
    """Unreadable or invalid input."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract reserves 2
    # for data errors.
    def error(self, message: str):  # noqa: ANN201 - argparse signature
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _size_list(text: str) -> list[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size list: {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("size list is empty")
    return sizes


def load_config(path: str | None = None) -> dict:
    """Defaults from a JSON config file; unknown keys are rejected.

    The file named by $MOLBLOCKS_CONFIG wins over the standard location;
    a missing file simply contributes nothing.
    """
    chosen = path or os.environ.get(CONFIG_ENV) \
        or os.path.expanduser(DEFAULT_CONFIG_PATH)
    target = Path(chosen)
    if not target.exists():
        return {}
    try:
        loaded = json.loads(target.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"config {target}: {exc}")
    if not isinstance(loaded, dict):
        raise DataError(f"config {target}: expected a JSON object")
    unknown = sorted(set(loaded) - CONFIG_KEYS)
    if unknown:
        raise DataError(
            f"config {target}: unknown key(s) {', '.join(unknown)}")
    return loaded


def _open_input(path: str | None) -> TextIO:
    if path in (None, "-"):
        return sys.stdin
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}")


def _open_output(path: str | None) -> TextIO:
    if path in (None, "-"):
        return sys.stdout
    try:
        return open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}")


def _close(handle: TextIO) -> None:
    if handle not in (sys.stdin, sys.stdout):
        handle.close()


def _map_records(records: Iterable[tuple[int, str]],
                 fn: Callable[[str], str],
                 threads: int) -> Iterator[tuple[int, str | None, str | None]]:
    """(line number, output, error) per record, in input order."""

    def work(item: tuple[int, str]) -> tuple[int, str | None, str | None]:
        line_no, payload = item
        try:
            return line_no, fn(payload), None
        except ValueError as exc:
            return line_no, None, str(exc)

    if threads <= 1:
        yield from map(work, records)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(work, records)


def _stream(records: Iterable[tuple[int, str]], fn: Callable[[str], str],
            out: TextIO, *, strict: bool, threads: int,
            what: str) -> tuple[int, int]:
    """Write one output line per good record; report and skip bad ones."""
    done = skipped = 0
    for line_no, result, error in _map_records(records, fn, threads):
        if error is not None:
            if strict:
                raise DataError(f"line {line_no}: {error}")
            print(f"line {line_no}: skipped ({error})", file=sys.stderr)
            skipped += 1
            continue
        print(result, file=out)
        done += 1
    print(f"{what}: {done} records, {skipped} skipped", file=sys.stderr)
    return done, skipped


def _version_text() -> str:
    return f"molblocks {__version__} ({default_rules().version})"


# --- subcommands -----------------------------------------------------------


def cmd_vocab(args: argparse.Namespace) -> int:
    source = _open_input(args.infile)
    try:
        records = list(iter_smiles_records(source))
    finally:
        _close(source)
    try:
        vocab, stats = build_vocabulary(records, f_min=args.f_min,
                                        include_full=args.include_full,
                                        partitions=args.partitions)
    except ValueError as exc:
        raise DataError(str(exc))
    for line_no, message in stats.skipped_records:
        if args.strict:
            raise DataError(f"line {line_no}: {message}")
        print(f"line {line_no}: skipped ({message})", file=sys.stderr)
    out = _open_output(args.out)
    try:
        save_vocabulary(vocab, out)
    finally:
        _close(out)
    print(f"vocab: {stats.parsed} molecules, {stats.skipped} skipped, "
          f"{len(vocab.counts)} blocks", file=sys.stderr)
    return EXIT_OK


def cmd_tokenize(args: argparse.Namespace) -> int:
    try:
        vocab = load_vocabulary(args.vocab)
    except (OSError, ValueError) as exc:
        raise DataError(f"vocabulary {args.vocab}: {exc}")
    names = NameTable.load(args.names) if args.format in ("render", "json") \
        else None

    def one(smiles: str) -> str:
        fragmentation = tokenize(parse_smiles(smiles), vocab,
                                 mode=args.mode, max_bonds=args.max_bonds)
        if args.format == "keys":
            return "\t".join(fragmentation.keys)
        if args.format == "render":
            return render(fragmentation, names)
        return json.dumps({"smiles": smiles,
                           "blocks": to_records(fragmentation, names)})

    source = _open_input(args.infile)
    out = _open_output(args.out)
    try:
        _stream(iter_smiles_records(source), one, out,
                strict=args.strict, threads=args.threads, what="tokenize")
    finally:
        _close(source)
        _close(out)
    return EXIT_OK


def cmd_detokenize(args: argparse.Namespace) -> int:
    def one(line: str) -> str:
        keys = [part for part in line.split("\t") if part.strip()]
        if not keys:
            raise ValueError("empty block sequence")
        blocks = [Block.from_smiles(key) for key in keys]
        return detokenize(blocks).to_smiles()

    def records(lines: Iterable[str]) -> Iterator[tuple[int, str]]:
        for line_no, raw in enumerate(lines, start=1):
            text = raw.rstrip("\n")
            if not text.strip() or text.lstrip().startswith("#"):
                continue
            yield line_no, text

    source = _open_input(args.infile)
    out = _open_output(args.out)
    try:
        _stream(records(source), one, out,
                strict=args.strict, threads=args.threads, what="detokenize")
    finally:
        _close(source)
        _close(out)
    return EXIT_OK


def cmd_hotspots(args: argparse.Namespace) -> int:
    if (args.ligand_smiles is None) != (args.vocab is None):
        raise UsageError(
            "--ligand-smiles and --vocab must be given together")
    try:
        receptor = read_structure(args.receptor)
        ligand = read_structure(args.ligand)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc))
    try:
        cfg = GridConfig(edge=args.grid_edge,
                         resolution=args.grid_resolution,
                         receptor_clearance=args.receptor_clearance,
                         ligand_clearance=args.ligand_clearance)
    except ValueError as exc:
        raise UsageError(str(exc))
    fragment = None
    if args.ligand_smiles is not None:
        try:
            vocab = load_vocabulary(args.vocab)
            fragment = tokenize(parse_smiles(args.ligand_smiles), vocab)
        except (OSError, ValueError) as exc:
            raise DataError(str(exc))
    try:
        spots = identify_hotspots(receptor, ligand, k=args.k, d_c=args.d_c,
                                  cfg=cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    out = _open_output(args.out)
    try:
        if args.format == "json":
            payload = [context_record(h, fragment) for h in spots]
            json.dump(payload, out, indent=2)
            out.write("\n")
        else:
            for h in spots:
                print(context_paragraph(h, fragment, d_c=args.d_c), file=out)
    finally:
        _close(out)
    return EXIT_OK


def cmd_cluster(args: argparse.Namespace) -> int:
    source = _open_input(args.infile)
    try:
        rows = list(iter_smiles_records(source))
    finally:
        _close(source)
    mols = []
    smiles_kept: list[str] = []
    for line_no, smiles in rows:
        try:
            mols.append(parse_smiles(smiles))
        except ValueError as exc:
            if args.strict:
                raise DataError(f"line {line_no}: {exc}")
            print(f"line {line_no}: skipped ({exc})", file=sys.stderr)
            continue
        smiles_kept.append(smiles)
    try:
        clusters = butina_cluster(mols, args.butina_cutoff)
    except ValueError as exc:
        raise DataError(str(exc))
    out = _open_output(args.out)
    try:
        for cluster_id, cluster in enumerate(clusters):
            record = {
                "cluster_id": cluster_id,
                "representative_smiles": smiles_kept[cluster.representative],
                "member_smiles": [smiles_kept[m] for m in cluster.members],
            }
            print(json.dumps(record), file=out)
    finally:
        _close(out)
    print(f"cluster: {len(mols)} molecules, {len(clusters)} clusters",
          file=sys.stderr)
    return EXIT_OK


def cmd_filter(args: argparse.Namespace) -> int:
    source = _open_input(args.infile)
    out = _open_output(args.out)
    kept = seen = skipped = 0
    header_state: dict[str, list[str] | None] = {"names": None}

    def one_tsv(header: list[str], line: str) -> bool:
        return passes_filter(candidate_from_tsv_row(header, line),
                             args.admet_threshold, args.qed_threshold,
                             admet_only=args.admet_only)

    def one_jsonl(line: str) -> bool:
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"bad JSON: {exc}")
        if not isinstance(data, dict):
            raise ValueError("expected a JSON object")
        return passes_filter(candidate_from_mapping(data),
                             args.admet_threshold, args.qed_threshold,
                             admet_only=args.admet_only)

    try:
        fmt = args.input_format
        for line_no, raw in enumerate(source, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if fmt == "auto":
                fmt = "jsonl" if line.lstrip().startswith("{") else "tsv"
            if fmt == "tsv" and header_state["names"] is None:
                try:
                    header_state["names"] = parse_candidate_header(line)
                except ValueError as exc:
                    raise DataError(f"line {line_no}: {exc}")
                print(line, file=out)
                continue
            seen += 1
            try:
                keep = one_tsv(header_state["names"], line) if fmt == "tsv" \
                    else one_jsonl(line)
            except ValueError as exc:
                if args.strict:
                    raise DataError(f"line {line_no}: {exc}")
                print(f"line {line_no}: skipped ({exc})", file=sys.stderr)
                skipped += 1
                continue
            if keep:
                print(line, file=out)
                kept += 1
    finally:
        _close(source)
        _close(out)
    print(f"filter: kept {kept} of {seen} "
          f"(admet > {args.admet_threshold:.6f}, "
          f"qed > {args.qed_threshold:.6f}), {skipped} skipped",
          file=sys.stderr)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        report = benchmark_break_vs_merge(args.sizes, args.samples,
                                          reps=args.reps, seed=args.seed)
    except (BenchmarkError, ValueError) as exc:
        raise DataError(str(exc))
    out = _open_output(args.out)
    try:
        text = report_csv(report) if args.format == "csv" \
            else report_table(report)
        print(text, file=out)
    finally:
        _close(out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    cfg = config or {}

    def default(key: str, fallback):
        return cfg.get(key, fallback)

    parser = _Parser(prog="molblocks", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=_version_text())
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                metavar="subcommand")

    def add_io(p: argparse.ArgumentParser, *, streaming: bool) -> None:
        p.add_argument("--in", dest="infile", default=None, metavar="PATH",
                       help="input file (default: stdin)")
        p.add_argument("--out", default=None, metavar="PATH",
                       help="output file (default: stdout)")
        if streaming:
            p.add_argument("--strict", action="store_true",
                           help="fail on the first malformed record "
                                "instead of skipping")
            p.add_argument("--threads",
                           type=_positive_int,
                           default=default("threads", 1),
                           help="worker count; output stays in input order")

    p = sub.add_parser("vocab", help="build a block vocabulary from SMILES")
    add_io(p, streaming=True)
    p.add_argument("--f-min", type=_positive_int,
                   default=default("f_min", DEFAULT_F_MIN))
    p.add_argument("--include-full", action="store_true",
                   help="also count each whole molecule as a block")
    p.add_argument("--partitions", type=_positive_int, default=1,
                   help="independent counting partitions (result identical)")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("tokenize", help="decompose SMILES into block keys")
    add_io(p, streaming=True)
    p.add_argument("--vocab", required=True, metavar="PATH")
    p.add_argument("--mode", choices=("bfe", "naive_brics"), default="bfe")
    p.add_argument("--max-bonds", type=_positive_int,
                   default=default("max_bonds", DEFAULT_MAX_BONDS))
    p.add_argument("--format", choices=("keys", "render", "json"),
                   default="keys")
    p.add_argument("--names", default=None, metavar="PATH",
                   help="scaffold name table (default: packaged)")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize",
                       help="rejoin tab-separated block keys into SMILES")
    add_io(p, streaming=True)
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("hotspots",
                       help="rank ligand atoms by open pocket volume")
    p.add_argument("--receptor", required=True, metavar="PATH")
    p.add_argument("--ligand", required=True, metavar="PATH")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--k", type=_positive_int, default=default("k", 5))
    p.add_argument("--d-c", type=_positive_float,
                   default=default("d_c", DEFAULT_CONTACT),
                   help="residue contact distance in angstroms")
    p.add_argument("--grid-edge", type=_positive_float,
                   default=default("grid_edge", 5.0))
    p.add_argument("--grid-resolution", type=_positive_float,
                   default=default("grid_resolution", 0.5))
    p.add_argument("--receptor-clearance", type=_positive_float,
                   default=default("receptor_clearance", 2.2))
    p.add_argument("--ligand-clearance", type=_positive_float,
                   default=default("ligand_clearance", 1.2))
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--ligand-smiles", default=None,
                   help="adds the ligand's block sequence to each record")
    p.add_argument("--vocab", default=None, metavar="PATH",
                   help="vocabulary for --ligand-smiles tokenization")
    p.set_defaults(func=cmd_hotspots)

    p = sub.add_parser("cluster",
                       help="Butina-cluster SMILES by Tanimoto distance")
    add_io(p, streaming=True)
    p.add_argument("--cutoff", dest="butina_cutoff", type=_positive_float,
                   default=default("butina_cutoff",
                                   DEFAULT_DISTANCE_CUTOFF))
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("filter",
                       help="keep candidates passing ADMET/QED thresholds")
    add_io(p, streaming=True)
    p.add_argument("--admet-threshold", type=float,
                   default=default("admet_threshold",
                                   DEFAULT_ADMET_THRESHOLD))
    p.add_argument("--qed-threshold", type=float,
                   default=default("qed_threshold", DEFAULT_QED_THRESHOLD))
    p.add_argument("--admet-only", action="store_true",
                   help="keep records that lack a qed value")
    p.add_argument("--input-format", choices=("auto", "tsv", "jsonl"),
                   default="auto")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("bench",
                       help="time fragment break versus merge operations")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--sizes", type=_size_list, default=[10, 15, 20],
                   help="comma-separated heavy-atom sizes")
    p.add_argument("--samples", type=_positive_int, default=300)
    p.add_argument("--reps", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=default("seed", 0))
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        config = load_config()
        parser = build_parser(config)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"molblocks: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"molblocks: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
