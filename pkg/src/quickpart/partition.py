"""Quick Partition: one-pass grouping of a circuit into qubit-bounded blocks.

Gates are visited in execution order. Each gate joins an open ("active")
partition that already touches one of its qubits, stays within the block size
and has none of the gate's qubits blocked; otherwise it opens a new partition.
Placing a gate blocks its qubits in every other active partition. A partition
whose qubits are all blocked is closed and either merged into a compatible
block at the tail of the output or appended to it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .ir import Circuit, GateOp, Layout, execution_order, to_program
from .qasm import QasmProgram

__all__ = [
    "DEFAULT_BLOCK_SIZE",
    "PartitionError",
    "Block",
    "PartitionedCircuit",
    "quick_partition",
]

DEFAULT_BLOCK_SIZE = 4


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    qubits: frozenset[int]
    gates: tuple[GateOp, ...]

    @property
    def width(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class PartitionedCircuit:
    blocks: tuple[Block, ...]
    qubit_count: int
    block_size: int
    origin: Layout | None = field(default=None, compare=False)

    def gates(self) -> tuple[GateOp, ...]:
        """Gates of all blocks, block by block."""
        return tuple(g for b in self.blocks for g in b.gates)

    def flatten(self) -> Circuit:
        return Circuit(self.qubit_count, self.gates(), self.origin)

    def to_program(self) -> QasmProgram:
        """QASM program with a bare ``barrier;`` between consecutive blocks."""
        return to_program(self.flatten(), [b.gates for b in self.blocks])


@dataclass
class _Active:
    birth: int
    qubits: set[int]
    blocked: set[int] = field(default_factory=set)
    gates: list[GateOp] = field(default_factory=list)

    def fully_blocked(self) -> bool:
        return self.qubits <= self.blocked


class _Output:
    """The growing list of closed blocks."""

    def __init__(self):
        self.qubits: list[set[int]] = []
        self.gates: list[list[GateOp]] = []

    def close(self, part: _Active) -> None:
        # Walk back from the tail. Disjoint blocks are skipped; the first block
        # sharing a qubit either has a subset relation with the partition (merge)
        # or shadows everything before it (append).
        for k in range(len(self.qubits) - 1, -1, -1):
            existing = self.qubits[k]
            if existing.isdisjoint(part.qubits):
                continue
            if existing <= part.qubits or part.qubits <= existing:
                existing |= part.qubits
                self.gates[k].extend(part.gates)
                return
            break
        self.qubits.append(set(part.qubits))
        self.gates.append(list(part.gates))

    def blocks(self) -> tuple[Block, ...]:
        return tuple(Block(frozenset(q), tuple(g)) for q, g in zip(self.qubits, self.gates))


def quick_partition(circuit: Circuit, block_size: int = DEFAULT_BLOCK_SIZE) -> PartitionedCircuit:
    """Partition ``circuit`` into blocks of at most ``block_size`` qubits.

    The result is deterministic. Concatenating the blocks gives a gate list
    whose per-qubit gate sequences equal those of ``circuit``.

    Raises :class:`PartitionError` if ``block_size < 2`` or some gate acts on
    more than ``block_size`` qubits.
    """
    if block_size < 2:
        raise PartitionError(f"block_size must be at least 2, got {block_size}")
    for pos, g in enumerate(circuit.gates):
        if g.arity > block_size:
            raise PartitionError(f"gate {pos} ({g.name}) acts on {g.arity} qubits, more than block_size={block_size}")

    births = itertools.count()
    active: list[_Active] = []  # birth order
    out = _Output()

    def close(part: _Active) -> None:
        active.remove(part)
        # Older partitions sharing a qubit hold earlier gates on that qubit and
        # must reach the output first.
        for older in [p for p in active if p.birth < part.birth and not p.qubits.isdisjoint(part.qubits)]:
            if older in active:
                close(older)
        out.close(part)

    for pos in execution_order(circuit):
        g = circuit.gates[pos]
        gq = set(g.qubits)
        candidates = [p for p in active if not p.qubits.isdisjoint(gq) and p.blocked.isdisjoint(gq)]
        fitting = [p for p in candidates if len(p.qubits | gq) <= block_size]
        if not fitting:
            target = _Active(next(births), set(gq))
            active.append(target)
        else:
            target = next((p for p in fitting if gq <= p.qubits), fitting[0])
        target.gates.append(g)
        target.qubits |= gq

        for p in active:
            if p is not target:
                p.blocked |= gq
        for p in [p for p in active if p.fully_blocked()]:
            if p in active:
                close(p)

    while active:
        close(active[0])

    return PartitionedCircuit(out.blocks(), circuit.qubit_count, block_size, circuit.origin)
