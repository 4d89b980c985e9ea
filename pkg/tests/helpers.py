"""Small builders shared by the test modules."""

from __future__ import annotations

import re

from quickpart.ir import Circuit, GateOp

_LINE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+([\d\s]+)$")


def gate(line: str) -> GateOp:
    """``"rz(0.5) 2"`` -> GateOp("rz", ("0.5",), (2,))."""
    m = _LINE.match(line.strip())
    if not m:
        raise ValueError(line)
    name, params, qubits = m.groups()
    return GateOp(name, tuple(p.strip() for p in params.split(",")) if params else (), tuple(int(q) for q in qubits.split()))


def gate_text(g: GateOp) -> str:
    head = g.name + (f"({','.join(g.params)})" if g.params else "")
    return f"{head} {' '.join(map(str, g.qubits))}"


def circuit_from_lines(lines, qubit_count: int | None = None) -> Circuit:
    gates = tuple(gate(line) for line in lines)
    if qubit_count is None:
        qubit_count = 1 + max((max(g.qubits) for g in gates), default=-1)
    return Circuit(qubit_count, gates)


def describe_blocks(partitioned):
    return [(tuple(sorted(b.qubits)), [gate_text(g) for g in b.gates]) for b in partitioned.blocks]


def circuits(max_qubits: int = 6, max_gates: int = 30, max_arity: int = 3, names=("h", "x", "rz", "cx", "ccx")):
    """Hypothesis strategy for random flat circuits."""
    from hypothesis import strategies as st

    arity_of = {"h": 1, "x": 1, "rz": 1, "cx": 2, "cz": 2, "ccx": 3}

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_qubits))
        usable = [name for name in names if arity_of.get(name, 1) <= min(n, max_arity)]
        gates = []
        for _ in range(draw(st.integers(0, max_gates))):
            name = draw(st.sampled_from(usable))
            qubits = tuple(draw(st.permutations(range(n)))[: arity_of.get(name, 1)])
            params = (draw(st.sampled_from(["0.5", "-1.25", "pi/4", "3.0"])),) if name == "rz" else ()
            gates.append(GateOp(name, params, qubits))
        return Circuit(n, tuple(gates))

    return build()
