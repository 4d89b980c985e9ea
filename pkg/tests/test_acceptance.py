"""Acceptance suite; every criterion prints one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and look for the ``[acceptance]``
lines. A real token-count sidecar for the benchmark corpus can be supplied
through QUICKPART_MQT_SIDECAR (JSON file) and QUICKPART_MQT_CORPUS (directory).
"""

from __future__ import annotations

import json
import os
import random
import re
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from quickpart.cli import main
from quickpart.dataprep import HISTOGRAM_BOUNDS, desymbolize, read_dataset, symbolize
from quickpart.evalharness import Completion, score
from quickpart.ir import Circuit, GateOp, lower
from quickpart.partition import quick_partition
from quickpart.qasm import parse, serialize
from quickpart.verify import equivalent, validate_blocks

from helpers import circuit_from_lines, describe_blocks
from test_partition_traces import TRACES
from unitary_oracle import unitary

CORPUS = Path(__file__).parent / "data" / "corpus"
FILES = sorted(CORPUS.glob("*.qasm"))
FAMILY = re.compile(r"_indep_qiskit_(\d+)\.qasm$")
FIG3_COUNTS = (349, 136, 98, 119, 142, 475)


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[acceptance] {'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail

    return emit


def test_partitioner_soundness(report):
    programs = [lower(parse(p.read_text(encoding="utf-8"))) for p in FILES]
    start = time.perf_counter()
    lines, ok = [], True
    for bs in (2, 3, 4, 6):
        eligible = [c for c in programs if all(g.arity <= bs for g in c.gates)]
        passed = 0
        for c in eligible:
            p = quick_partition(c, bs)
            passed += bool(equivalent(c, p)) and bool(validate_blocks(p, bs)) and bool(equivalent(c, serialize(p.to_program()), bs))
        ok &= passed == len(eligible) and len(eligible) >= 50
        lines.append(f"bs={bs} {passed}/{len(eligible)}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report("partitioner soundness", ok, f"{', '.join(lines)}; {elapsed:.2f}s (< 60s)")


def test_trace_fidelity(report):
    matched = [name for name, (lines, bs, expected) in TRACES.items() if describe_blocks(quick_partition(circuit_from_lines(lines), bs)) == expected]
    ok = len(matched) == len(TRACES) and "chain4_bs3" in matched and len(TRACES) - 1 >= 5
    report("trace fidelity", ok, f"{len(matched)}/{len(TRACES)} hand traces match block by block (chain + {len(TRACES) - 1} others)")


def _random_circuit(rng: random.Random) -> Circuit:
    n = rng.randint(1, 4)
    gates = []
    for _ in range(rng.randint(1, 12)):
        kind = rng.choice(["h", "x", "rz", "cx"] if n > 1 else ["h", "x", "rz"])
        if kind == "cx":
            gates.append(GateOp("cx", (), tuple(rng.sample(range(n), 2))))
        elif kind == "rz":
            gates.append(GateOp("rz", (repr(rng.uniform(-np.pi, np.pi)),), (rng.randrange(n),)))
        else:
            gates.append(GateOp(kind, (), (rng.randrange(n),)))
    return Circuit(n, tuple(gates))


def test_unitary_oracle(report):
    rng = random.Random(20240601)
    circuits = [_random_circuit(rng) for _ in range(40)]
    worst, checked = 0.0, 0
    for c in circuits:
        for bs in (2, 3):
            p = quick_partition(c, bs)
            if not equivalent(c, p):
                report("unitary oracle", False, "verifier rejected a partition")
            dev = float(np.max(np.abs(unitary(c.gates, c.qubit_count) - unitary(p.gates(), c.qubit_count))))
            worst = max(worst, dev)
            checked += 1
    report("unitary oracle", checked >= 20 and worst <= 1e-10, f"{checked} partitions of {len(circuits)} circuits, max deviation {worst:.2e} (<= 1e-10)")


def test_parser_round_trip(report):
    good = 0
    for path in FILES:
        program = parse(path.read_text(encoding="utf-8"))
        good += parse(serialize(program)) == program
    report("parser round trip", good == len(FILES), f"{good}/{len(FILES)} corpus files")


def test_symbolization_involution(report):
    good = 0
    for path in FILES:
        program = parse(path.read_text(encoding="utf-8"))
        symbolic, table = symbolize(program)
        restored = desymbolize(symbolic, table)
        good += serialize(restored) == serialize(program) and restored == program
    report("symbolization involution", good == len(FILES), f"{good}/{len(FILES)} corpus files byte-exact")


def _table_corpus(tmp_path: Path, block_size: int) -> Path:
    # Circuits that fit one block have target == input; those are excluded so
    # that an input copy can never also be an exact match.
    root = tmp_path / "table_corpus"
    root.mkdir()
    for path in FILES:
        m = FAMILY.search(path.name)
        if m and int(m.group(1)) > block_size:
            shutil.copy(path, root / path.name)
    return root


def test_table_logic(report, tmp_path):
    corpus = _table_corpus(tmp_path, 4)
    out = tmp_path / "prep"
    assert main(["prep", str(corpus), "--out", str(out), "--block-size", "4", "--max-tokens", "1000000", "--seed", "1"]) == 0
    test_ids = set(json.loads((out / "split.json").read_text())["test"])
    records = [r for r in read_dataset(out / "dataset.jsonl") if r.id in test_ids]
    assert records and all("barrier;" in r.target for r in records)

    copies = score(records, [Completion(r.id, r.input_text) for r in records])
    ideal = score(records, [Completion(r.id, r.target) for r in records])
    ok = (
        (copies.repeated_code_rate, copies.exact_match_rate, copies.correct_code_rate) == (1.0, 0.0, 1.0)
        and (ideal.exact_match_rate, ideal.repeated_code_rate) == (1.0, 0.0)
    )
    detail = (
        f"n={len(records)}; input copies: repeated {copies.repeated_code_rate:.0%}, accuracy {copies.exact_match_rate:.0%}, "
        f"correct {copies.correct_code_rate:.0%}; references: accuracy {ideal.exact_match_rate:.0%}, repeated {ideal.repeated_code_rate:.0%}"
    )
    report("table logic", ok, detail)


def _stats(args) -> dict:
    out = args[args.index("--out") + 1]
    assert main(args) == 0
    return json.loads(Path(out).read_text())


def test_histogram_real_sidecar(report, tmp_path, capsys):
    sidecar, corpus = os.environ.get("QUICKPART_MQT_SIDECAR"), os.environ.get("QUICKPART_MQT_CORPUS")
    if not (sidecar and corpus):
        with capsys.disabled():
            print("\n[acceptance] SKIP token histogram (real sidecar): QUICKPART_MQT_SIDECAR / QUICKPART_MQT_CORPUS not set")
        pytest.skip("no external token-count sidecar")
    hist = _stats(["stats", corpus, "--token-mode", "external", "--token-sidecar", sidecar, "--format", "structured", "--out", str(tmp_path / "h.json")])
    counts = tuple(hist["buckets"].values())
    report("token histogram (real sidecar)", counts == FIG3_COUNTS, f"buckets {counts}, expected {FIG3_COUNTS}")


def test_histogram_synthetic_sidecar(report, tmp_path):
    # One file per synthetic circuit; counts sit on and just past each bucket edge.
    corpus = tmp_path / "synthetic"
    corpus.mkdir()
    edges = [b for b in HISTOGRAM_BOUNDS if b is not None]
    lows = [0] + [e + 1 for e in edges]
    highs = edges + [10**6]
    counts = {}
    for bucket, n in enumerate(FIG3_COUNTS):
        for i in range(n):
            name = f"b{bucket}_{i:04d}.qasm"
            (corpus / name).write_text("qreg q[1];\nh q[0];\n", encoding="utf-8")
            counts[name] = (lows[bucket], highs[bucket])[i % 2]
    sidecar = tmp_path / "sidecar.json"
    sidecar.write_text(json.dumps(counts), encoding="utf-8")
    hist = _stats(["stats", str(corpus), "--token-mode", "external", "--token-sidecar", str(sidecar), "--format", "structured", "--out", str(tmp_path / "h.json")])
    got = tuple(hist["buckets"].values())
    report("token histogram (synthetic sidecar)", got == FIG3_COUNTS and hist["total"] == sum(FIG3_COUNTS), f"buckets {got}")


def test_histogram_heuristic(report, tmp_path):
    hist = _stats(["stats", str(CORPUS), "--format", "structured", "--out", str(tmp_path / "h.json")])
    records = [json.loads(line) for line in _prep(tmp_path / "p").read_text().splitlines()]
    tokens = sorted(r["token_count"] for r in records)
    bounds = [b for b in HISTOGRAM_BOUNDS if b is not None]

    def bucket(n):
        return next((i for i, b in enumerate(bounds) if n <= b), len(bounds))

    monotone = all(bucket(a) <= bucket(b) for a, b in zip(tokens, tokens[1:]))
    expected = tuple(sum(bucket(n) == i for n in tokens) for i in range(len(HISTOGRAM_BOUNDS)))
    conserved = hist["total"] == len(FILES) == sum(hist["buckets"].values())
    ok = monotone and conserved and tuple(hist["buckets"].values()) == expected
    report("token histogram (heuristic)", ok, f"buckets {tuple(hist['buckets'].values())}, total {hist['total']}/{len(FILES)}")


def _prep(out: Path) -> Path:
    assert main(["prep", str(CORPUS), "--out", str(out), "--seed", "42", "--max-tokens", "6000"]) == 0
    return out / "dataset.jsonl"


def test_prep_determinism(report, tmp_path):
    a, b = _prep(tmp_path / "a").parent, _prep(tmp_path / "b").parent
    names = ["dataset.jsonl", "split.json", "histogram.json", "config.json"]
    same = [n for n in names if (a / n).read_bytes() == (b / n).read_bytes()]
    report("prep determinism", same == names, f"{len(same)}/{len(names)} output files byte-identical")
