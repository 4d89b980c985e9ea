"""Quick Partition for QASM circuits, with equivalence checking and LLM dataset tooling."""

__version__ = "0.1.0"

from .ir import Circuit, GateOp, execution_order, lower, reorder_to_execution_order, schedule_asap
from .partition import Block, PartitionedCircuit, PartitionError, quick_partition
from .qasm import QasmError, QasmProgram, parse, serialize
from .verify import VerifyReport, equivalent, validate_blocks

__all__ = [
    "Circuit",
    "GateOp",
    "lower",
    "schedule_asap",
    "execution_order",
    "reorder_to_execution_order",
    "Block",
    "PartitionedCircuit",
    "PartitionError",
    "quick_partition",
    "QasmError",
    "QasmProgram",
    "parse",
    "serialize",
    "VerifyReport",
    "equivalent",
    "validate_blocks",
]
