"""Scoring of model completions against quick-partition references.

Per record three independent judgements are made on the truncated,
whitespace-normalized completion:

* exact: identical to the reference partitioned circuit;
* repeated: identical to the unpartitioned input;
* correct: parses and is equivalent to the input circuit.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .dataprep import TERMINATOR, DatasetRecord, desymbolize
from .qasm import QasmError, parse
from .verify import equivalent

__all__ = [
    "Completion",
    "RecordScore",
    "EvalReport",
    "truncate",
    "normalize",
    "score",
    "score_record",
    "read_completions",
]


@dataclass(frozen=True)
class Completion:
    record_id: str
    raw_text: str


@dataclass(frozen=True)
class RecordScore:
    id: str
    exact: bool
    repeated: bool
    correct: bool
    parse_ok: bool


@dataclass(frozen=True)
class EvalReport:
    n: int
    exact_match_rate: float
    repeated_code_rate: float
    correct_code_rate: float
    per_record: tuple[RecordScore, ...]

    @property
    def parse_failures(self) -> int:
        return sum(not r.parse_ok for r in self.per_record)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.exact_match_rate,
            "repeated_code": self.repeated_code_rate,
            "correct_code": self.correct_code_rate,
            "parse_failures": self.parse_failures,
            "per_record": [asdict(r) for r in self.per_record],
        }

    def to_text(self) -> str:
        lines = [
            f"n              {self.n}",
            f"accuracy       {self.exact_match_rate:.2%}",
            f"repeated code  {self.repeated_code_rate:.2%}",
            f"correct code   {self.correct_code_rate:.2%}",
            "",
            "id\texact\trepeated\tcorrect\tparse_ok",
        ]
        lines += [f"{r.id}\t{int(r.exact)}\t{int(r.repeated)}\t{int(r.correct)}\t{int(r.parse_ok)}" for r in self.per_record]
        return "\n".join(lines) + "\n"


def _is_terminator(line: str) -> bool:
    return line.strip().rstrip(".").rstrip() == TERMINATOR


def truncate(raw_text: str) -> str:
    """Everything before the first terminator line, or the whole text if there is none."""
    lines = raw_text.split("\n")
    for i, line in enumerate(lines):
        if _is_terminator(line):
            return "\n".join(lines[:i])
    return raw_text


def normalize(text: str) -> str:
    """Trim line ends and drop blank lines."""
    return "\n".join(line.rstrip() for line in text.splitlines() if line.strip())


def _with_input_header(completion: str, record: DatasetRecord) -> str:
    # Completions that only list gates borrow the reference's declarations.
    if "qreg" in completion:
        return completion
    header = [ln for ln in record.input_text.splitlines() if ln.startswith(("OPENQASM", "include", "qreg", "gate ", "opaque "))]
    return "\n".join(header + [completion])


def score_record(record: DatasetRecord, raw_text: str) -> RecordScore:
    text = normalize(truncate(raw_text))
    exact = text == normalize(record.target_body)
    repeated = text == normalize(record.input_text)
    try:
        reference = desymbolize(parse(record.input_text), record.symbols)
        candidate = desymbolize(parse(_with_input_header(text, record)), record.symbols)
        parse_ok = True
    except (QasmError, ValueError):
        return RecordScore(record.id, exact, repeated, False, False)
    try:
        correct = equivalent(reference, candidate).equivalent
    except ValueError:
        correct = False
    return RecordScore(record.id, exact, repeated, correct, parse_ok)


def score(dataset: Iterable[DatasetRecord], completions: Iterable[Completion]) -> EvalReport:
    """Score ``completions`` against ``dataset``; rows come out in record-id order.

    A record id seen twice keeps the latest completion and emits a warning.
    An id missing from the dataset raises :class:`KeyError`.
    """
    by_id: Mapping[str, DatasetRecord] = {r.id: r for r in dataset}
    latest: dict[str, str] = {}
    for c in completions:
        if c.record_id not in by_id:
            raise KeyError(f"completion for unknown record id {c.record_id!r}")
        if c.record_id in latest:
            warnings.warn(f"duplicate completion for {c.record_id!r}; keeping the latest", stacklevel=2)
        latest[c.record_id] = c.raw_text

    rows = tuple(score_record(by_id[rid], latest[rid]) for rid in sorted(latest))
    n = len(rows)

    def rate(flag: str) -> float:
        return sum(getattr(r, flag) for r in rows) / n if n else 0.0

    return EvalReport(n, rate("exact"), rate("repeated"), rate("correct"), rows)


def read_completions(path: str | Path) -> list[Completion]:
    """Load completions from a JSONL file or a directory of ``<record_id>.*`` text files.

    JSONL rows need ``record_id`` and one of ``completion``/``raw_text``/``text``.
    """
    path = Path(path)
    if path.is_dir():
        return [
            Completion(p.stem, p.read_text(encoding="utf-8"))
            for p in sorted(path.iterdir())
            if p.is_file() and not p.name.startswith(".")
        ]
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            row = json.loads(line)
            for key in ("completion", "raw_text", "text"):
                if key in row:
                    out.append(Completion(str(row["record_id"]), row[key]))
                    break
            else:
                raise ValueError(f"{path}:{lineno}: row has no completion text")
    return out
