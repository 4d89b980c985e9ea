"""Flat circuit representation with ASAP scheduling.

Registers are flattened to global qubit indices in declaration order. Barriers,
measurements and comments do not survive lowering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .qasm import Barrier, GateCall, GateDef, QasmProgram, QasmSemanticError, QubitRef

__all__ = [
    "GateOp",
    "Layout",
    "Circuit",
    "lower",
    "schedule_asap",
    "execution_order",
    "reorder_to_execution_order",
    "to_program",
    "per_qubit_sequences",
    "gate_statement",
]


@dataclass(frozen=True)
class GateOp:
    name: str
    params: tuple[str, ...]
    qubits: tuple[int, ...]

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Layout:
    """What is needed to turn global indices back into a QASM program."""

    version: str = "2.0"
    includes: tuple[str, ...] = ("qelib1.inc",)
    qregs: tuple[tuple[str, int], ...] = ()
    definitions: tuple[GateDef, ...] = ()

    @classmethod
    def flat(cls, num_qubits: int, name: str = "q") -> "Layout":
        return cls(qregs=((name, num_qubits),) if num_qubits else ())

    def ref(self, index: int) -> QubitRef:
        for name, size in self.qregs:
            if index < size:
                return QubitRef(name, index)
            index -= size
        raise IndexError("qubit index outside layout")


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[GateOp, ...] = ()
    origin: Layout | None = field(default=None, compare=False)

    def __post_init__(self):
        for pos, gate in enumerate(self.gates):
            if not gate.qubits:
                raise ValueError(f"gate {pos} ({gate.name}) has no qubit operands")
            if len(set(gate.qubits)) != len(gate.qubits):
                raise ValueError(f"gate {pos} ({gate.name}) repeats a qubit operand")
            if min(gate.qubits) < 0 or max(gate.qubits) >= self.qubit_count:
                raise ValueError(f"gate {pos} ({gate.name}) addresses a qubit outside 0..{self.qubit_count - 1}")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def layout(self) -> Layout:
        return self.origin if self.origin is not None else Layout.flat(self.qubit_count)


def lower(program: QasmProgram) -> Circuit:
    """Flatten ``program`` into a :class:`Circuit`.

    Whole-register operands are broadcast following QASM rules (all whole
    registers in one call must have equal size).
    """
    offsets = {}
    sizes = dict(program.qregs)
    total = 0
    for name, size in program.qregs:
        offsets[name] = total
        total += size

    def resolve(ref: QubitRef, k: int) -> int:
        return offsets[ref.register] + (k if ref.index is None else ref.index)

    gates: list[GateOp] = []
    definitions: list[GateDef] = []
    for stmt in program.statements:
        if isinstance(stmt, GateDef):
            definitions.append(stmt)
        if not isinstance(stmt, GateCall):
            continue
        widths = {sizes[r.register] for r in stmt.qubits if r.index is None}
        if len(widths) > 1:
            raise QasmSemanticError(f"{stmt.name}: whole-register operands differ in size", stmt.line)
        repeat = widths.pop() if widths else 1
        for k in range(repeat):
            qubits = tuple(resolve(r, k) for r in stmt.qubits)
            if len(set(qubits)) != len(qubits):
                raise QasmSemanticError(f"{stmt.name}: repeated qubit operand after broadcast", stmt.line)
            gates.append(GateOp(stmt.name, stmt.params, qubits))

    layout = Layout(program.version, program.includes, program.qregs, tuple(definitions))
    return Circuit(total, tuple(gates), layout)


def schedule_asap(circuit: Circuit) -> list[int]:
    """Return the ASAP cycle of every gate, indexed by gate position.

    A gate runs one cycle after the latest earlier gate on any of its qubits,
    or at cycle 0 if none of its qubits has been used yet.
    """
    last = [-1] * circuit.qubit_count
    cycles = []
    for gate in circuit.gates:
        cycle = 1 + max(last[q] for q in gate.qubits)
        for q in gate.qubits:
            last[q] = cycle
        cycles.append(cycle)
    return cycles


def execution_order(circuit: Circuit) -> list[int]:
    """Gate positions sorted by (cycle, lowest qubit index, original position)."""
    cycles = schedule_asap(circuit)
    return sorted(range(len(circuit.gates)), key=lambda i: (cycles[i], min(circuit.gates[i].qubits), i))


def reorder_to_execution_order(circuit: Circuit) -> Circuit:
    order = execution_order(circuit)
    return Circuit(circuit.qubit_count, tuple(circuit.gates[i] for i in order), circuit.origin)


def per_qubit_sequences(gates, qubit_count: int) -> list[list[GateOp]]:
    sequences: list[list[GateOp]] = [[] for _ in range(qubit_count)]
    for gate in gates:
        for q in gate.qubits:
            sequences[q].append(gate)
    return sequences


def gate_statement(gate: GateOp, layout: Layout) -> GateCall:
    return GateCall(gate.name, gate.params, tuple(layout.ref(q) for q in gate.qubits))


def to_program(circuit: Circuit, groups=None) -> QasmProgram:
    """Raise a circuit back to QASM; consecutive ``groups`` are separated by bare barriers.

    ``groups`` is an iterable of gate sequences; by default the whole circuit
    forms a single group.
    """
    layout = circuit.layout
    if groups is None:
        groups = [circuit.gates]
    statements: list = list(layout.definitions)
    for k, group in enumerate(groups):
        if k:
            statements.append(Barrier())
        statements.extend(gate_statement(g, layout) for g in group)
    return QasmProgram(
        version=layout.version,
        includes=layout.includes,
        qregs=layout.qregs,
        cregs=(),
        statements=tuple(statements),
    )
