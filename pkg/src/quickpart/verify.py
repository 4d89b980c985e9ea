"""Equivalence of a partitioned circuit with its original.

Removing the block separators and recomputing the ASAP schedule gives the
same cycles exactly when every qubit sees the same gate sequence. The check
is syntactic: gate names, parameter text and operands must match.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Union

from .ir import Circuit, GateOp, lower, per_qubit_sequences, schedule_asap
from .partition import PartitionedCircuit
from .qasm import Barrier, GateCall, QasmProgram, parse

__all__ = ["VerifyReport", "equivalent", "validate_blocks", "blocks_from_program"]


@dataclass(frozen=True)
class VerifyReport:
    equivalent: bool
    gate_multiset_ok: bool = True
    per_qubit_order_ok: bool = True
    width_ok: bool = True
    first_divergence: tuple[int, int] | None = None
    # Recalculated ASAP depth of each side; equal whenever the orders are.
    depths: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.equivalent

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "gate_multiset_ok": self.gate_multiset_ok,
            "per_qubit_order_ok": self.per_qubit_order_ok,
            "width_ok": self.width_ok,
            "first_divergence": list(self.first_divergence) if self.first_divergence else None,
        }


def blocks_from_program(program: QasmProgram) -> tuple[Circuit, list[frozenset[int]], list[tuple[GateOp, ...]]]:
    """Split a program at its bare barriers.

    Returns the lowered circuit plus the qubit footprint and gates of every
    non-empty group. Barriers with operands are not block separators.
    """
    circuit = lower(program)
    groups: list[list[GateOp]] = [[]]
    it = iter(circuit.gates)
    for stmt in program.statements:
        if isinstance(stmt, Barrier) and stmt.bare:
            groups.append([])
        elif isinstance(stmt, GateCall):
            # broadcast calls lower to several consecutive gates
            count = _broadcast_count(stmt, program)
            groups[-1].extend(next(it) for _ in range(count))
    groups = [g for g in groups if g]
    footprints = [frozenset(q for gate in g for q in gate.qubits) for g in groups]
    return circuit, footprints, [tuple(g) for g in groups]


def _broadcast_count(stmt: GateCall, program: QasmProgram) -> int:
    sizes = dict(program.qregs)
    widths = {sizes[r.register] for r in stmt.qubits if r.index is None}
    return widths.pop() if widths else 1


def _first_divergence(a: list[list[GateOp]], b: list[list[GateOp]]) -> tuple[int, int] | None:
    for q, (seq_a, seq_b) in enumerate(zip(a, b)):
        for pos, (x, y) in enumerate(zip(seq_a, seq_b)):
            if x != y:
                return q, pos
        if len(seq_a) != len(seq_b):
            return q, min(len(seq_a), len(seq_b))
    return None


def _width_ok(footprints, groups, block_size: int | None) -> bool:
    for qubits, gates in zip(footprints, groups):
        if block_size is not None and len(qubits) > block_size:
            return False
        if any(not set(g.qubits) <= qubits for g in gates):
            return False
    return True


PartitionedInput = Union[PartitionedCircuit, QasmProgram, str]


def equivalent(original: Circuit | QasmProgram | str, partitioned: PartitionedInput, block_size: int | None = None) -> VerifyReport:
    """Check that ``partitioned`` is a reordering-free regrouping of ``original``.

    ``partitioned`` may be a :class:`PartitionedCircuit`, a program whose
    blocks are separated by bare barriers, or QASM text of such a program.
    ``block_size`` defaults to the partitioned circuit's own bound; for
    textual input the width check only requires each gate to fit its block
    unless a bound is given.

    Raises :class:`~quickpart.qasm.QasmError` on unparsable text and
    :class:`ValueError` when the qubit counts differ.
    """
    if isinstance(original, str):
        original = parse(original)
    if isinstance(original, QasmProgram):
        original = lower(original)
    if isinstance(partitioned, str):
        partitioned = parse(partitioned)

    if isinstance(partitioned, PartitionedCircuit):
        flat = partitioned.flatten()
        footprints = [b.qubits for b in partitioned.blocks]
        groups = [b.gates for b in partitioned.blocks]
        if block_size is None:
            block_size = partitioned.block_size
    else:
        flat, footprints, groups = blocks_from_program(partitioned)

    if flat.qubit_count != original.qubit_count:
        raise ValueError(f"qubit count mismatch: original has {original.qubit_count}, partitioned has {flat.qubit_count}")

    multiset_ok = Counter(original.gates) == Counter(flat.gates)
    seq_a = per_qubit_sequences(original.gates, original.qubit_count)
    seq_b = per_qubit_sequences(flat.gates, flat.qubit_count)
    divergence = _first_divergence(seq_a, seq_b)
    order_ok = divergence is None
    width_ok = _width_ok(footprints, groups, block_size)
    depths = (max(schedule_asap(original), default=-1) + 1, max(schedule_asap(flat), default=-1) + 1)

    return VerifyReport(
        equivalent=multiset_ok and order_ok and width_ok,
        gate_multiset_ok=multiset_ok,
        per_qubit_order_ok=order_ok,
        width_ok=width_ok,
        first_divergence=divergence,
        depths=depths,
    )


def validate_blocks(partitioned: PartitionedCircuit, block_size: int) -> VerifyReport:
    """Structural check only: widths within ``block_size``, gates inside their block."""
    ok = all(
        len(b.qubits) <= block_size and all(set(g.qubits) <= b.qubits for g in b.gates)
        for b in partitioned.blocks
    )
    return VerifyReport(equivalent=ok, width_ok=ok)
