"""OpenQASM 2.0 parsing and serialization.

The accepted language is the subset found in MQT-Bench-style benchmark files:
header, ``include``, register declarations, gate applications with arbitrary
identifiers, ``barrier`` (with or without operands), ``measure``, comments,
and custom ``gate``/``opaque`` definitions, which are kept verbatim.

A bare ``barrier;`` is accepted and means "all qubits". Partitioned files use
it as the block separator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

__all__ = [
    "QasmError",
    "QasmSyntaxError",
    "QasmSemanticError",
    "QubitRef",
    "GateCall",
    "Barrier",
    "Measure",
    "Comment",
    "GateDef",
    "Statement",
    "QasmProgram",
    "REAL_LITERAL",
    "parse",
    "serialize",
]


class QasmError(ValueError):
    """Base class for QASM ingestion failures, carrying a source location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class QasmSyntaxError(QasmError):
    pass


class QasmSemanticError(QasmError):
    """Undeclared register, index out of range, duplicated operand."""


# A real literal needs a decimal point or an exponent; bare integers are not floats.
REAL_LITERAL = r"(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+"

_TOKEN_SPEC = [
    ("COMMENT", r"//[^\n]*"),
    ("STRING", r'"[^"\n]*"'),
    ("REAL", REAL_LITERAL),
    ("INT", r"\d+"),
    ("ID", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("ARROW", r"->"),
    ("OP", r"==|[;,()\[\]{}+\-*/^]"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r\f\v]+"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        assert kind is not None
        column = m.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = m.end()
            continue
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise QasmSyntaxError(f"unexpected character {m.group()!r}", line, column)
        tokens.append(_Token(kind, m.group(), m.start(), line, column))
    return tokens


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class QubitRef:
    """A register operand; ``index is None`` addresses the whole register."""

    register: str
    index: int | None = None

    def __str__(self) -> str:
        if self.index is None:
            return self.register
        return f"{self.register}[{self.index}]"


@dataclass(frozen=True)
class GateCall:
    name: str
    params: tuple[str, ...]
    qubits: tuple[QubitRef, ...]
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Barrier:
    qubits: tuple[QubitRef, ...] = ()
    line: int | None = field(default=None, compare=False)

    @property
    def bare(self) -> bool:
        return not self.qubits


@dataclass(frozen=True)
class Measure:
    qubit: QubitRef
    bit: QubitRef
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Comment:
    text: str  # including the leading "//"
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class GateDef:
    """A ``gate`` or ``opaque`` definition kept as its source text."""

    name: str
    text: str
    line: int | None = field(default=None, compare=False)


Statement = Union[GateCall, Barrier, Measure, Comment, GateDef]


@dataclass(frozen=True)
class QasmProgram:
    version: str = "2.0"
    includes: tuple[str, ...] = ()
    qregs: tuple[tuple[str, int], ...] = ()
    cregs: tuple[tuple[str, int], ...] = ()
    statements: tuple[Statement, ...] = ()

    @property
    def num_qubits(self) -> int:
        return sum(size for _, size in self.qregs)

    def gate_calls(self) -> Iterator[GateCall]:
        return (s for s in self.statements if isinstance(s, GateCall))

    def replace(self, **changes) -> "QasmProgram":
        from dataclasses import replace

        return replace(self, **changes)


# ------------------------------------------------------------------------ parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.version: str | None = None
        self.includes: list[str] = []
        self.qregs: dict[str, int] = {}
        self.cregs: dict[str, int] = {}
        self.statements: list[Statement] = []

    # token helpers
    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise QasmSyntaxError(
                "unexpected end of input",
                last.line if last else 1,
                (last.column + len(last.text)) if last else 1,
            )
        self.pos += 1
        return tok

    def _expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self._next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text is not None else kind
            raise QasmSyntaxError(f"expected {want}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def _at(self, text: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.text == text and tok.kind in ("OP", "ARROW")

    def parse(self) -> QasmProgram:
        while self._peek() is not None:
            self._statement()
        return QasmProgram(
            version=self.version or "2.0",
            includes=tuple(self.includes),
            qregs=tuple(self.qregs.items()),
            cregs=tuple(self.cregs.items()),
            statements=tuple(self.statements),
        )

    def _statement(self) -> None:
        tok = self._next()
        if tok.kind == "COMMENT":
            self.statements.append(Comment(tok.text.rstrip(), tok.line))
            return
        if tok.kind != "ID":
            raise QasmSyntaxError(f"unknown statement form starting with {tok.text!r}", tok.line, tok.column)
        word = tok.text
        if word == "OPENQASM":
            version = self._next()
            if version.kind not in ("REAL", "INT"):
                raise QasmSyntaxError("expected version number", version.line, version.column)
            if self.version is not None:
                raise QasmSyntaxError("duplicate OPENQASM header", tok.line, tok.column)
            self.version = version.text
            self._expect("OP", ";")
        elif word == "include":
            name = self._expect("STRING")
            self.includes.append(name.text[1:-1])
            self._expect("OP", ";")
        elif word in ("qreg", "creg"):
            self._declaration(tok)
        elif word in ("gate", "opaque"):
            self._gate_definition(tok)
        elif word == "barrier":
            qubits: tuple[QubitRef, ...] = ()
            if not self._at(";"):
                qubits = self._operand_list(self.qregs, allow_duplicates=True)
            self._expect("OP", ";")
            self.statements.append(Barrier(qubits, tok.line))
        elif word == "measure":
            qubit = self._operand(self.qregs)
            self._expect("ARROW")
            bit = self._operand(self.cregs)
            self._expect("OP", ";")
            self.statements.append(Measure(qubit, bit, tok.line))
        elif word == "if":
            raise QasmSyntaxError("classical control ('if') is not supported", tok.line, tok.column)
        else:
            self._gate_call(tok)

    def _declaration(self, tok: _Token) -> None:
        name = self._expect("ID")
        self._expect("OP", "[")
        size = int(self._expect("INT").text)
        self._expect("OP", "]")
        self._expect("OP", ";")
        if name.text in self.qregs or name.text in self.cregs:
            raise QasmSemanticError(f"register {name.text!r} declared twice", name.line, name.column)
        if size == 0:
            raise QasmSemanticError(f"register {name.text!r} has size 0", name.line, name.column)
        (self.qregs if tok.text == "qreg" else self.cregs)[name.text] = size

    def _gate_definition(self, tok: _Token) -> None:
        name = self._expect("ID")
        if tok.text == "opaque":
            while not self._at(";"):
                self._next()
            end = self._next()
        else:
            while not self._at("{"):
                self._next()
            depth = 0
            while True:
                t = self._next()
                if t.kind == "OP" and t.text == "{":
                    depth += 1
                elif t.kind == "OP" and t.text == "}":
                    depth -= 1
                    if depth == 0:
                        end = t
                        break
        source = self.text[tok.offset : end.offset + 1]
        self.statements.append(GateDef(name.text, source, tok.line))

    def _params(self) -> tuple[str, ...]:
        open_tok = self._expect("OP", "(")
        depth = 1
        start = open_tok.offset + 1
        params = []
        while True:
            t = self._next()
            if t.kind == "OP" and t.text == "(":
                depth += 1
            elif t.kind == "OP" and t.text == ")":
                depth -= 1
                if depth == 0:
                    params.append(self.text[start : t.offset].strip())
                    break
            elif t.kind == "OP" and t.text == "," and depth == 1:
                params.append(self.text[start : t.offset].strip())
                start = t.offset + 1
        if params == [""]:
            return ()
        for p in params:
            if not p:
                raise QasmSyntaxError("empty parameter expression", open_tok.line, open_tok.column)
        return tuple(params)

    def _operand(self, registers: dict[str, int]) -> QubitRef:
        name = self._expect("ID")
        if name.text not in registers:
            kind = "quantum" if registers is self.qregs else "classical"
            raise QasmSemanticError(f"undeclared {kind} register {name.text!r}", name.line, name.column)
        if not self._at("["):
            return QubitRef(name.text)
        self._next()
        index_tok = self._expect("INT")
        self._expect("OP", "]")
        index = int(index_tok.text)
        if index >= registers[name.text]:
            raise QasmSemanticError(
                f"index {index} out of range for register {name.text}[{registers[name.text]}]",
                index_tok.line,
                index_tok.column,
            )
        return QubitRef(name.text, index)

    def _operand_list(self, registers: dict[str, int], allow_duplicates: bool = False) -> tuple[QubitRef, ...]:
        start = self._peek()
        refs = [self._operand(registers)]
        while self._at(","):
            self._next()
            refs.append(self._operand(registers))
        if not allow_duplicates and len(set(refs)) != len(refs):
            assert start is not None
            raise QasmSemanticError("repeated qubit operand", start.line, start.column)
        return tuple(refs)

    def _gate_call(self, tok: _Token) -> None:
        params: tuple[str, ...] = ()
        if self._at("("):
            params = self._params()
        nxt = self._peek()
        if nxt is None or nxt.kind != "ID":
            where = nxt or tok
            raise QasmSyntaxError(f"unknown statement form {tok.text!r}", where.line, where.column)
        qubits = self._operand_list(self.qregs)
        self._expect("OP", ";")
        self.statements.append(GateCall(tok.text, params, qubits, tok.line))


def parse(text: str) -> QasmProgram:
    """Parse QASM 2.0 source into a :class:`QasmProgram`.

    Parameter expressions are kept as their source text. Raises
    :class:`QasmSyntaxError` or :class:`QasmSemanticError` with the offending
    line and column.
    """
    return _Parser(text).parse()


# -------------------------------------------------------------------- serializer


def _statement_line(stmt: Statement) -> str:
    if isinstance(stmt, GateCall):
        head = stmt.name + (f"({','.join(stmt.params)})" if stmt.params else "")
        return f"{head} {','.join(map(str, stmt.qubits))};"
    if isinstance(stmt, Barrier):
        if stmt.bare:
            return "barrier;"
        return f"barrier {','.join(map(str, stmt.qubits))};"
    if isinstance(stmt, Measure):
        return f"measure {stmt.qubit} -> {stmt.bit};"
    if isinstance(stmt, Comment):
        return stmt.text
    if isinstance(stmt, GateDef):
        return stmt.text
    raise TypeError(f"not a statement: {stmt!r}")


def serialize(program: QasmProgram) -> str:
    """Render ``program`` one statement per line, newline-terminated."""
    lines = [f"OPENQASM {program.version};"]
    lines += [f'include "{name}";' for name in program.includes]
    lines += [f"qreg {name}[{size}];" for name, size in program.qregs]
    lines += [f"creg {name}[{size}];" for name, size in program.cregs]
    lines += [_statement_line(s) for s in program.statements]
    return "\n".join(lines) + "\n"
