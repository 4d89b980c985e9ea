"""scikit-learn style wrappers around the partitioning pipeline.

The transformers are stateless apart from validated hyper-parameters, so they
slot into :class:`sklearn.pipeline.Pipeline`, ``clone`` and grid search::

    Pipeline([("clean", QasmCleaner()), ("partition", QuickPartitioner(block_size=4))])
"""

from __future__ import annotations

from numbers import Integral
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dataprep import clean, symbolize
from .ir import Circuit, lower
from .partition import DEFAULT_BLOCK_SIZE, PartitionedCircuit, quick_partition
from .qasm import QasmProgram, parse
from .verify import equivalent

__all__ = [
    "check_program",
    "check_programs",
    "check_circuit",
    "check_circuits",
    "check_block_size",
    "QasmCleaner",
    "Symbolizer",
    "QuickPartitioner",
]

BLOCK_SIZE_RANGE = (2, 16)


def check_program(x) -> QasmProgram:
    """Coerce QASM text, a path to a ``.qasm`` file, or a program into a :class:`QasmProgram`."""
    if isinstance(x, QasmProgram):
        return x
    if isinstance(x, Path):
        return parse(x.read_text(encoding="utf-8"))
    if isinstance(x, str):
        return parse(x)
    raise TypeError(f"expected QASM text, a Path or a QasmProgram, got {type(x).__name__}")


def check_circuit(x) -> Circuit:
    if isinstance(x, Circuit):
        return x
    return lower(check_program(x))


def _as_list(X, name: str) -> list:
    if isinstance(X, (str, Path, QasmProgram, Circuit)):
        raise TypeError(f"{name} expects a sequence of circuits; wrap a single circuit in a list")
    return list(X)


def check_programs(X) -> list[QasmProgram]:
    return [check_program(x) for x in _as_list(X, "check_programs")]


def check_circuits(X) -> list[Circuit]:
    return [check_circuit(x) for x in _as_list(X, "check_circuits")]


def check_block_size(block_size) -> int:
    lo, hi = BLOCK_SIZE_RANGE
    if isinstance(block_size, bool) or not isinstance(block_size, Integral):
        raise TypeError(f"block_size must be an integer, got {block_size!r}")
    if not lo <= block_size <= hi:
        raise ValueError(f"block_size must be in [{lo}, {hi}], got {block_size}")
    return int(block_size)


class QasmCleaner(TransformerMixin, BaseEstimator):
    """Strip comments, measurements, barriers and cregs; reorder gates by execution."""

    def fit(self, X, y=None):
        check_programs(X)
        self.is_fitted_ = True
        return self

    def transform(self, X) -> list[QasmProgram]:
        check_is_fitted(self)
        return [clean(p) for p in check_programs(X)]


class Symbolizer(TransformerMixin, BaseEstimator):
    """Replace float literals with placeholders; tables are kept in ``tables_`` after transform."""

    def fit(self, X, y=None):
        check_programs(X)
        self.is_fitted_ = True
        return self

    def transform(self, X) -> list[QasmProgram]:
        check_is_fitted(self)
        pairs = [symbolize(p) for p in check_programs(X)]
        self.tables_ = [t for _, t in pairs]
        return [p for p, _ in pairs]


class QuickPartitioner(TransformerMixin, BaseEstimator):
    """Quick Partition as a transformer: circuits in, :class:`PartitionedCircuit` out.

    Parameters
    ----------
    block_size : int, default=4
        Maximum number of qubits per block.
    """

    def __init__(self, block_size: int = DEFAULT_BLOCK_SIZE):
        self.block_size = block_size

    def fit(self, X, y=None):
        self.block_size_ = check_block_size(self.block_size)
        circuits = check_circuits(X)
        self.max_arity_ = max((g.arity for c in circuits for g in c.gates), default=0)
        return self

    def transform(self, X) -> list[PartitionedCircuit]:
        check_is_fitted(self, "block_size_")
        return [quick_partition(c, self.block_size_) for c in check_circuits(X)]

    def inverse_transform(self, P) -> list[Circuit]:
        """Drop block boundaries again."""
        return [p.flatten() for p in P]

    def score(self, X, y=None) -> float:
        """Fraction of inputs whose partition verifies as equivalent (1.0 by construction)."""
        circuits = check_circuits(X)
        if not circuits:
            return 1.0
        parts = self.transform(circuits)
        return sum(equivalent(c, p).equivalent for c, p in zip(circuits, parts)) / len(circuits)
