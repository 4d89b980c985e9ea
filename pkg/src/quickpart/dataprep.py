"""Fine-tuning dataset preparation for the circuit partitioning task.

A record pairs a prompt (instruction plus the cleaned, symbolized circuit)
with a target (the quick-partitioned circuit, blocks separated by bare
barriers, followed by the terminator line). Floating point literals are
replaced by ``F0, F1, ...`` in both, using one table per record.
"""

from __future__ import annotations

import json
import math
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .ir import lower, reorder_to_execution_order, to_program
from .partition import DEFAULT_BLOCK_SIZE, quick_partition
from .qasm import REAL_LITERAL, Barrier, Comment, GateCall, Measure, QasmProgram, parse, serialize

__all__ = [
    "INSTRUCTION",
    "FEWSHOT_INSTRUCTION",
    "TERMINATOR",
    "SEPARATOR",
    "DEFAULT_MAX_TOKENS",
    "DEFAULT_TRAIN_FRACTION",
    "HISTOGRAM_BOUNDS",
    "SymbolError",
    "SymbolTable",
    "DatasetRecord",
    "DatasetSplit",
    "TokenHistogram",
    "HeuristicTokenizer",
    "ExternalTokenCounts",
    "MissingTokenCount",
    "clean",
    "symbolize",
    "desymbolize",
    "build_record",
    "build_fewshot_prompt",
    "count_tokens",
    "token_histogram",
    "filter_and_split",
    "splitmix64_shuffle",
    "read_dataset",
    "write_dataset",
    "dumps_dataset",
]

INSTRUCTION = (
    "Create barriers for efficient processing. Make sure that you check gates with multiple qubits "
    "and do not change their order if they depend on each other:"
)
# The few-shot experiments used a slightly different wording; kept byte for byte.
FEWSHOT_INSTRUCTION = (
    "Create barriers for efficient processing. Make sure that you check gates with multiple qbits "
    "and not change their order if they depend on each other."
)
TERMINATOR = "End of barrier creation"
SEPARATOR = "- - -"

DEFAULT_MAX_TOKENS = 6000
DEFAULT_TRAIN_FRACTION = 0.8
HISTOGRAM_BOUNDS: tuple[int | None, ...] = (3000, 6000, 12000, 24000, 48000, None)


# ------------------------------------------------------------------- cleaning


def clean(program: QasmProgram) -> QasmProgram:
    """Drop comments, measurements, barriers and classical registers; put gates in execution order."""
    kept = [s for s in program.statements if not isinstance(s, (Comment, Measure, Barrier))]
    stripped = program.replace(cregs=(), statements=tuple(kept))
    return to_program(reorder_to_execution_order(lower(stripped)))


# -------------------------------------------------------------- symbolization


class SymbolError(ValueError):
    pass


_FLOAT_RE = re.compile(rf"(?<![\w.])(?:{REAL_LITERAL})(?![\w.])")
_SYMBOL_RE = re.compile(r"(?<![\w.])F\d+(?![\w.])")


@dataclass
class SymbolTable:
    """Float literal text -> placeholder, in first-occurrence order."""

    entries: "OrderedDict[str, str]" = field(default_factory=OrderedDict)

    def symbol_for(self, literal: str) -> str:
        if literal not in self.entries:
            self.entries[literal] = f"F{len(self.entries)}"
        return self.entries[literal]

    def inverse(self) -> dict[str, str]:
        return {sym: lit for lit, sym in self.entries.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict[str, str]:
        return dict(self.entries)

    @classmethod
    def from_dict(cls, mapping: Mapping[str, str]) -> "SymbolTable":
        table = cls(OrderedDict(mapping))
        if len(set(table.entries.values())) != len(table.entries):
            raise SymbolError("symbol table is not injective")
        return table


def _map_params(program: QasmProgram, fn) -> QasmProgram:
    statements = []
    for s in program.statements:
        if isinstance(s, GateCall) and s.params:
            s = GateCall(s.name, tuple(fn(p) for p in s.params), s.qubits, s.line)
        statements.append(s)
    return program.replace(statements=tuple(statements))


def symbolize(program: QasmProgram) -> tuple[QasmProgram, SymbolTable]:
    """Replace every float literal in gate parameters by a placeholder.

    Raises :class:`SymbolError` if a parameter already uses an ``F<n>`` name,
    since the substitution could not be inverted.
    """
    table = SymbolTable()
    for call in program.gate_calls():
        for p in call.params:
            if _SYMBOL_RE.search(p):
                raise SymbolError(f"parameter {p!r} already contains a placeholder name")
    result = _map_params(program, lambda p: _FLOAT_RE.sub(lambda m: table.symbol_for(m.group()), p))
    return result, table


def desymbolize(program: QasmProgram, table: SymbolTable) -> QasmProgram:
    inverse = table.inverse()

    def restore(m: re.Match) -> str:
        try:
            return inverse[m.group()]
        except KeyError:
            raise SymbolError(f"unknown symbol {m.group()!r}") from None

    return _map_params(program, lambda p: _SYMBOL_RE.sub(restore, p))


# -------------------------------------------------------------------- tokens


class TokenEstimator(Protocol):
    def count(self, text: str, key: str | None = None) -> int: ...


class MissingTokenCount(KeyError):
    pass


class HeuristicTokenizer:
    """Character-class token estimate.

    Letters and underscores form words split every 4 characters, digits form
    runs split every 3, every other visible character is its own token and
    whitespace is free. Appending text never lowers the count.
    """

    _PIECE = re.compile(r"[A-Za-z_]{1,4}|\d{1,3}|[^\sA-Za-z_\d]")

    def count(self, text: str, key: str | None = None) -> int:
        return sum(1 for _ in self._PIECE.finditer(text))


class ExternalTokenCounts:
    """Token counts computed elsewhere, keyed by circuit file name."""

    def __init__(self, counts: Mapping[str, int]):
        self.counts = dict(counts)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExternalTokenCounts":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: token sidecar must be a JSON object mapping file names to counts")
        return cls({str(k): int(v) for k, v in data.items()})

    def count(self, text: str, key: str | None = None) -> int:
        if key is not None:
            for candidate in (key, Path(key).name, Path(key).stem):
                if candidate in self.counts:
                    return self.counts[candidate]
        raise MissingTokenCount(f"no external token count for {key!r}")


def count_tokens(text: str, estimator: TokenEstimator | None = None, key: str | None = None) -> int:
    return (estimator or HeuristicTokenizer()).count(text, key)


@dataclass(frozen=True)
class TokenHistogram:
    bounds: tuple[int | None, ...]
    counts: tuple[int, ...]

    @staticmethod
    def label(bound: int | None, previous: int | None) -> str:
        return f"{previous}+" if bound is None else str(bound)

    def labels(self) -> list[str]:
        prev = [None, *self.bounds[:-1]]
        return [self.label(b, p) for b, p in zip(self.bounds, prev)]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def to_dict(self) -> dict:
        return {"buckets": dict(zip(self.labels(), self.counts)), "total": self.total}


def token_histogram(token_counts: Iterable[int], bounds: Sequence[int | None] = HISTOGRAM_BOUNDS) -> TokenHistogram:
    """Bucket counts by inclusive upper bound; ``None`` is the open-ended last bucket."""
    if bounds[-1] is not None:
        bounds = (*bounds, None)
    buckets = [0] * len(bounds)
    for n in token_counts:
        for i, bound in enumerate(bounds):
            if bound is None or n <= bound:
                buckets[i] += 1
                break
    return TokenHistogram(tuple(bounds), tuple(buckets))


# ------------------------------------------------------------------- records


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    prompt: str
    target: str
    token_count: int
    symbols: SymbolTable

    @property
    def input_text(self) -> str:
        """The symbolized circuit inside the prompt."""
        return self.prompt[len(INSTRUCTION) + 1 :] if self.prompt.startswith(INSTRUCTION + "\n") else self.prompt

    @property
    def target_body(self) -> str:
        suffix = "\n" + TERMINATOR
        return self.target[: -len(suffix)] if self.target.endswith(suffix) else self.target

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "prompt": self.prompt,
                "target": self.target,
                "token_count": self.token_count,
                "symbols": self.symbols.to_dict(),
            },
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "DatasetRecord":
        d = json.loads(line)
        return cls(d["id"], d["prompt"], d["target"], int(d["token_count"]), SymbolTable.from_dict(d["symbols"]))


def build_record(
    program: QasmProgram | str,
    block_size: int = DEFAULT_BLOCK_SIZE,
    record_id: str = "circuit",
    estimator: TokenEstimator | None = None,
    token_key: str | None = None,
) -> DatasetRecord:
    """Clean, symbolize and partition one circuit into a training record."""
    if isinstance(program, str):
        program = parse(program)
    symbolic, table = symbolize(clean(program))
    partitioned = quick_partition(lower(symbolic), block_size)
    input_text = serialize(symbolic).rstrip("\n")
    target_body = serialize(partitioned.to_program()).rstrip("\n")
    prompt = f"{INSTRUCTION}\n{input_text}"
    target = f"{target_body}\n{TERMINATOR}"
    tokens = count_tokens(f"{prompt}\n{target}", estimator, token_key or record_id)
    return DatasetRecord(record_id, prompt, target, tokens, table)


_NUMBER_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}


def build_fewshot_prompt(examples: Sequence[DatasetRecord], query: DatasetRecord, shots: int | None = None) -> str:
    """Few-shot prompt: worked examples, then the query circuit awaiting an answer."""
    if shots is None:
        shots = len(examples)
    if shots != len(examples):
        raise ValueError(f"shots={shots} but {len(examples)} examples were given")
    text = FEWSHOT_INSTRUCTION
    if shots:
        lead = "Here is one example:" if shots == 1 else f"Here are {_NUMBER_WORDS.get(shots, shots)} examples:"
        sections = [f"{ex.input_text}\n{SEPARATOR}\nAnswer: {ex.target}." for ex in examples]
        text += f" {lead}\n" + "\n".join(sections)
    return text + f" Create partitions for this:\n{query.input_text}\n{SEPARATOR}\nAnswer: "


# -------------------------------------------------------------------- splits


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    train_fraction: float
    dropped: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "train": list(self.train),
            "test": list(self.test),
            "dropped": list(self.dropped),
        }


_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def splitmix64_shuffle(items: Sequence, seed: int) -> list:
    """Fisher-Yates shuffle driven by SplitMix64.

    Reproducible across platforms and languages: for i from n-1 down to 1,
    swap item i with item ``next() % (i + 1)``.
    """
    out = list(items)
    rng = _splitmix64(seed & _MASK64)
    for i in range(len(out) - 1, 0, -1):
        j = next(rng) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def filter_and_split(
    records: Iterable[DatasetRecord],
    max_tokens: int = DEFAULT_MAX_TOKENS,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int = 0,
) -> DatasetSplit:
    """Drop records over ``max_tokens``, shuffle the rest by id and split.

    ``|train| = floor(train_fraction * kept + 0.5)``.
    """
    if not 0 < train_fraction <= 1:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    records = sorted(records, key=lambda r: r.id)
    kept = [r.id for r in records if r.token_count <= max_tokens]
    dropped = tuple(r.id for r in records if r.token_count > max_tokens)
    if not kept:
        raise ValueError(f"no records left after filtering at max_tokens={max_tokens}")
    shuffled = splitmix64_shuffle(kept, seed)
    n_train = math.floor(train_fraction * len(shuffled) + 0.5)
    return DatasetSplit(tuple(shuffled[:n_train]), tuple(shuffled[n_train:]), seed, train_fraction, dropped)


# ---------------------------------------------------------------------- I/O


def dumps_dataset(records: Iterable[DatasetRecord]) -> str:
    return "".join(r.to_json() + "\n" for r in records)


def write_dataset(records: Iterable[DatasetRecord], path: str | Path) -> None:
    Path(path).write_text(dumps_dataset(records), encoding="utf-8")


def read_dataset(path: str | Path) -> list[DatasetRecord]:
    with open(path, encoding="utf-8") as fh:
        return [DatasetRecord.from_json(line) for line in fh if line.strip()]
