"""Command-line entry point: ``quickpart {partition,verify,prep,score,stats}``.

Exit codes: 0 success, 1 verification or scoring failure, 2 usage error,
3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .dataprep import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_TRAIN_FRACTION,
    ExternalTokenCounts,
    HeuristicTokenizer,
    MissingTokenCount,
    build_record,
    dumps_dataset,
    filter_and_split,
    read_dataset,
    token_histogram,
)
from .evalharness import read_completions, score
from .ir import lower
from .partition import DEFAULT_BLOCK_SIZE, PartitionError, quick_partition
from .qasm import QasmError, parse, serialize
from .verify import equivalent

log = logging.getLogger("quickpart")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class Config:
    block_size: int = DEFAULT_BLOCK_SIZE
    max_tokens: int = DEFAULT_MAX_TOKENS
    train_fraction: float = DEFAULT_TRAIN_FRACTION
    seed: int = 0
    token_mode: str = "heuristic"
    token_sidecar: str | None = None

    def validate(self) -> "Config":
        if not 2 <= self.block_size <= 16:
            raise UsageError(f"--block-size must be in [2, 16], got {self.block_size}")
        if not 0 < self.train_fraction <= 1:
            raise UsageError(f"--train-fraction must be in (0, 1], got {self.train_fraction}")
        if self.max_tokens < 0:
            raise UsageError("--max-tokens must be non-negative")
        if self.token_mode not in ("heuristic", "external"):
            raise UsageError(f"unknown --token-mode {self.token_mode!r}")
        if self.token_mode == "external" and not self.token_sidecar:
            raise UsageError("--token-mode external requires --token-sidecar")
        return self

    def estimator(self):
        if self.token_mode == "external":
            return ExternalTokenCounts.from_file(self.token_sidecar)
        return HeuristicTokenizer()


def resolve_config(args: argparse.Namespace) -> Config:
    """Defaults, overridden by ``--config`` file values, overridden by explicit flags."""
    values = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        known = {f.name for f in fields(Config)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
    for f in fields(Config):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return Config(**values).validate()


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(Path(out), text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def corpus_files(directory: str) -> list[Path]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"{directory}: not a directory")
    files = sorted(p for p in root.glob("*.qasm") if p.is_file())
    if not files:
        raise FileNotFoundError(f"{directory}: no .qasm files")
    return files


# ----------------------------------------------------------------- commands


def cmd_partition(args) -> int:
    cfg = resolve_config(args)
    program = parse(Path(args.input).read_text(encoding="utf-8"))
    partitioned = quick_partition(lower(program), cfg.block_size)
    emit(serialize(partitioned.to_program()), args.out)
    log.info("%d gates in %d blocks", len(partitioned.gates()), len(partitioned.blocks))
    return EXIT_OK


def cmd_verify(args) -> int:
    original = parse(Path(args.original).read_text(encoding="utf-8"))
    partitioned = parse(Path(args.partitioned).read_text(encoding="utf-8"))
    report = equivalent(lower(original), partitioned, args.block_size)
    if args.format == "structured":
        emit(_dump(report.to_dict()), args.out)
    else:
        status = "equivalent" if report.equivalent else "NOT equivalent"
        lines = [status]
        for flag in ("gate_multiset_ok", "per_qubit_order_ok", "width_ok"):
            lines.append(f"  {flag}: {getattr(report, flag)}")
        if report.first_divergence:
            q, pos = report.first_divergence
            lines.append(f"  first divergence: qubit {q}, gate #{pos} on that qubit")
        emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if report.equivalent else EXIT_FAIL


def build_records(files: list[Path], cfg: Config):
    estimator = cfg.estimator()
    return [
        build_record(parse(p.read_text(encoding="utf-8")), cfg.block_size, p.stem, estimator, p.name)
        for p in files
    ]


def cmd_prep(args) -> int:
    cfg = resolve_config(args)
    records = build_records(corpus_files(args.corpus), cfg)
    split = filter_and_split(records, cfg.max_tokens, cfg.train_fraction, cfg.seed)
    hist = token_histogram(r.token_count for r in records)
    out = Path(args.out)
    write_atomic(out / "dataset.jsonl", dumps_dataset(records))
    write_atomic(out / "split.json", _dump(split.to_dict()))
    write_atomic(out / "histogram.json", _dump(hist.to_dict()))
    write_atomic(out / "config.json", _dump(asdict(cfg)))
    log.info("%d records, %d train, %d test, %d dropped", len(records), len(split.train), len(split.test), len(split.dropped))
    return EXIT_OK


def cmd_score(args) -> int:
    dataset = read_dataset(args.dataset)
    completions = read_completions(args.completions)
    if args.split:
        test = set(json.loads(Path(args.split).read_text(encoding="utf-8"))["test"])
        dataset = [r for r in dataset if r.id in test]
        completions = [c for c in completions if c.record_id in test]
    report = score(dataset, completions)
    text = _dump(report.to_dict()) if args.format == "structured" else report.to_text()
    emit(text, args.out)
    if report.n and report.parse_failures / report.n > args.max_parse_failures:
        log.error("parse failures %d/%d exceed threshold %.2f", report.parse_failures, report.n, args.max_parse_failures)
        return EXIT_FAIL
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = resolve_config(args)
    files = corpus_files(args.corpus)
    if cfg.token_mode == "external":
        sidecar = cfg.estimator()
        counts = [sidecar.count("", p.name) for p in files]
    else:
        counts = [r.token_count for r in build_records(files, cfg)]
    hist = token_histogram(counts)
    if args.format == "structured":
        emit(_dump(hist.to_dict()), args.out)
    else:
        rows = [f"{label:>8}  {n}" for label, n in zip(hist.labels(), hist.counts)]
        emit("tokens    circuits\n" + "\n".join(rows) + f"\n   total  {hist.total}\n", args.out)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    # Defaults stay None so that config-file values are only overridden by explicit flags.
    if "block_size" in names:
        p.add_argument("--block-size", type=int, help=f"qubits per block (default {DEFAULT_BLOCK_SIZE})")
    if "max_tokens" in names:
        p.add_argument("--max-tokens", type=int, help=f"drop records above this (default {DEFAULT_MAX_TOKENS})")
    if "train_fraction" in names:
        p.add_argument("--train-fraction", type=float, help=f"default {DEFAULT_TRAIN_FRACTION}")
    if "seed" in names:
        p.add_argument("--seed", type=int, help="shuffle seed (default 0)")
    if "token_mode" in names:
        p.add_argument("--token-mode", choices=["heuristic", "external"])
        p.add_argument("--token-sidecar", help="JSON object mapping file names to token counts")
    p.add_argument("--config", help="JSON file with defaults for the flags above")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quickpart", description="Quick Partition toolkit for QASM circuits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition a QASM file into barrier-separated blocks")
    p.add_argument("input")
    p.add_argument("--out", help="output file (default stdout)")
    _config_flags(p, "block_size")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("verify", help="check a partitioned file against its original")
    p.add_argument("original")
    p.add_argument("partitioned")
    p.add_argument("--block-size", type=int, help="also enforce this block width")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("prep", help="build the fine-tuning dataset from a corpus directory")
    p.add_argument("corpus")
    p.add_argument("--out", required=True, help="output directory")
    _config_flags(p, "block_size", "max_tokens", "train_fraction", "seed", "token_mode")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("score", help="score model completions against a dataset")
    p.add_argument("dataset")
    p.add_argument("completions", help="JSONL file or directory of <record_id>.txt files")
    p.add_argument("--split", help="split.json; restricts scoring to its test ids")
    p.add_argument("--max-parse-failures", type=float, default=1.0, help="fail if the unparsable fraction exceeds this")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", help="token-count histogram of a corpus")
    p.add_argument("corpus")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--out")
    _config_flags(p, "block_size", "token_mode")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (QasmError, PartitionError, MissingTokenCount, KeyError, ValueError, OSError) as exc:
        print(f"quickpart: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
