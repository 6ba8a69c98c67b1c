"""Logical program representation with classical registers and conditionals.

Programs are flat statement lists over named quantum and classical registers.
Gadget boundaries are marked with :class:`BlockBegin` / :class:`BlockEnd`
pairs carrying metadata; they have no run-time effect.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .sim import GATE_ARITY, GATE_NPARAMS

QASM_GATES = ("h", "s", "sdg", "t", "tdg", "x", "y", "z", "cx", "cz", "ch", "rz", "ry", "u1", "id")
ASSIGN_OPS = ("=", "^", "&", "|")


class Qubit(NamedTuple):
    reg: str
    index: int

    def __str__(self):
        return f"{self.reg}[{self.index}]"


class Bit(NamedTuple):
    reg: str
    index: int

    def __str__(self):
        return f"{self.reg}[{self.index}]"


def _norm_param(p: float) -> float:
    # Angles are stored at the precision they are written out with, so that
    # text round trips reproduce the program exactly.
    return float(format(float(p), ".12g"))


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "params", tuple(_norm_param(p) for p in self.params))


@dataclass(frozen=True)
class Measure:
    qubit: Qubit
    bit: Bit


@dataclass(frozen=True)
class Reset:
    qubit: Qubit


@dataclass(frozen=True)
class Barrier:
    qubits: tuple


@dataclass(frozen=True)
class Assign:
    """Classical bit assignment ``target = a op b op ...``.

    ``op`` is ``"="`` for a plain copy (single operand) or one of ``^ & |``.
    Operands are :class:`Bit` or the constants 0 / 1.
    """

    target: Bit
    op: str
    operands: tuple


@dataclass(frozen=True)
class If:
    creg: str
    value: int
    body: Union[Gate, Measure, Reset, Assign]


@dataclass(frozen=True)
class Comment:
    text: str


@dataclass(frozen=True)
class BlockBegin:
    kind: str
    attrs: tuple = ()

    def attr(self, key, default=None):
        return dict(self.attrs).get(key, default)


@dataclass(frozen=True)
class BlockEnd:
    kind: str


Statement = Union[Gate, Measure, Reset, Barrier, Assign, If, Comment, BlockBegin, BlockEnd]


@dataclass(frozen=True)
class LogicalProgram:
    qregs: tuple = ()
    cregs: tuple = ()
    statements: tuple = ()
    meta: tuple = ()

    def qreg_width(self, name):
        return dict(self.qregs).get(name)

    def creg_width(self, name):
        return dict(self.cregs).get(name)

    def meta_values(self, key) -> list[str]:
        return [v for k, v in self.meta if k == key]

    def meta_value(self, key, default=None):
        vals = self.meta_values(key)
        return vals[-1] if vals else default

    @property
    def num_qubits(self) -> int:
        return sum(w for _, w in self.qregs)


@dataclass(frozen=True)
class Diagnostic:
    index: int | None
    message: str

    def __str__(self):
        where = "program" if self.index is None else f"statement {self.index}"
        return f"{where}: {self.message}"


class ValidationError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def validate(program: LogicalProgram) -> list[Diagnostic]:
    """Check register declarations, widths, gate arities and block nesting."""
    diags: list[Diagnostic] = []
    qw = dict(program.qregs)
    cw = dict(program.cregs)
    names = [n for n, _ in program.qregs] + [n for n, _ in program.cregs]
    for n in set(names):
        if names.count(n) > 1:
            diags.append(Diagnostic(None, f"register {n!r} declared more than once"))

    def check_qubit(i, q):
        if q.reg not in qw:
            diags.append(Diagnostic(i, f"undeclared quantum register {q.reg!r}"))
        elif not 0 <= q.index < qw[q.reg]:
            diags.append(Diagnostic(i, f"index {q.index} out of range for {q.reg}[{qw[q.reg]}]"))

    def check_bit(i, b):
        if b.reg not in cw:
            diags.append(Diagnostic(i, f"undeclared classical register {b.reg!r}"))
        elif not 0 <= b.index < cw[b.reg]:
            diags.append(Diagnostic(i, f"index {b.index} out of range for {b.reg}[{cw[b.reg]}]"))

    def check(i, st):
        if isinstance(st, Gate):
            if st.name not in QASM_GATES:
                diags.append(Diagnostic(i, f"unsupported gate {st.name!r}"))
            else:
                if len(st.qubits) != GATE_ARITY[st.name]:
                    diags.append(Diagnostic(i, f"gate {st.name} expects {GATE_ARITY[st.name]} qubit(s)"))
                if len(st.params) != GATE_NPARAMS.get(st.name, 0):
                    diags.append(Diagnostic(i, f"gate {st.name} expects {GATE_NPARAMS.get(st.name, 0)} parameter(s)"))
            if len(set(st.qubits)) != len(st.qubits):
                diags.append(Diagnostic(i, f"gate {st.name} repeats a qubit"))
            for q in st.qubits:
                check_qubit(i, q)
        elif isinstance(st, Measure):
            check_qubit(i, st.qubit)
            check_bit(i, st.bit)
        elif isinstance(st, Reset):
            check_qubit(i, st.qubit)
        elif isinstance(st, Barrier):
            for q in st.qubits:
                check_qubit(i, q)
        elif isinstance(st, Assign):
            check_bit(i, st.target)
            if st.op not in ASSIGN_OPS:
                diags.append(Diagnostic(i, f"unknown classical operator {st.op!r}"))
            if st.op == "=" and len(st.operands) != 1:
                diags.append(Diagnostic(i, "copy takes exactly one operand"))
            if st.op != "=" and len(st.operands) < 2:
                diags.append(Diagnostic(i, f"operator {st.op} needs two or more operands"))
            for o in st.operands:
                if isinstance(o, Bit):
                    check_bit(i, o)
                elif o not in (0, 1):
                    diags.append(Diagnostic(i, f"invalid classical operand {o!r}"))
        elif isinstance(st, If):
            if st.creg not in cw:
                diags.append(Diagnostic(i, f"undeclared classical register {st.creg!r}"))
            elif not 0 <= st.value < 2 ** cw[st.creg]:
                diags.append(Diagnostic(
                    i, f"condition value {st.value} out of range for {st.creg}[{cw[st.creg]}]"))
            if isinstance(st.body, (If, Barrier, Comment, BlockBegin, BlockEnd)):
                diags.append(Diagnostic(i, "conditional body must be a gate, measure, reset or assignment"))
            else:
                check(i, st.body)

    stack: list[str] = []
    for i, st in enumerate(program.statements):
        if isinstance(st, BlockBegin):
            stack.append(st.kind)
        elif isinstance(st, BlockEnd):
            if not stack or stack[-1] != st.kind:
                diags.append(Diagnostic(i, f"block end {st.kind!r} does not match an open block"))
            else:
                stack.pop()
        else:
            check(i, st)
    for kind in stack:
        diags.append(Diagnostic(None, f"block {kind!r} is never closed"))
    return diags


def require_valid(program: LogicalProgram) -> None:
    diags = validate(program)
    if diags:
        raise ValidationError(diags)


class QubitBudgetError(RuntimeError):
    pass


class ProgramBuilder:
    """Mutable helper that assembles a :class:`LogicalProgram`.

    Physical qubits come from a single pool register; blocks are allocated
    from and returned to it, so the pool width is the program's physical
    qubit count.
    """

    def __init__(self, pool_size: int, pool_name: str = "q"):
        self.pool_name = pool_name
        self.pool_size = pool_size
        self._qregs = [(pool_name, pool_size)]
        self._cregs: list[tuple[str, int]] = []
        self._statements: list = []
        self._meta: list[tuple[str, str]] = []
        self._free = list(range(pool_size))
        self._in_use: set[int] = set()
        self._used: set[int] = set()
        self.peak_in_use = 0
        self._counters: dict[str, int] = {}
        self._cond: tuple[str, int] | None = None
        self._cond_scope: dict[str, tuple] = {}

    # -- registers ----------------------------------------------------------
    def creg(self, name: str, width: int) -> str:
        if any(n == name for n, _ in self._cregs + self._qregs):
            raise ValueError(f"register {name!r} already declared")
        self._cregs.append((name, width))
        self._cond_scope[name] = self._cond
        return name

    def fresh_creg(self, prefix: str, width: int) -> str:
        k = self._counters.get(prefix, 0)
        self._counters[prefix] = k + 1
        return self.creg(f"{prefix}{k}", width)

    def next_id(self, kind: str) -> int:
        k = self._counters.get(kind, 0)
        self._counters[kind] = k + 1
        return k

    def allocate(self, count: int) -> list[Qubit]:
        if count > len(self._free):
            raise QubitBudgetError(
                f"need {count} more physical qubits but only {len(self._free)} of {self.pool_size} are free")
        self._free.sort()
        taken, self._free = self._free[:count], self._free[count:]
        self._in_use.update(taken)
        self.peak_in_use = max(self.peak_in_use, len(self._in_use))
        qubits = [Qubit(self.pool_name, i) for i in taken]
        for q in qubits:
            # reused slots are returned to |0> explicitly
            if q.index in self._used:
                self.reset(q)
            self._used.add(q.index)
        return qubits

    def free(self, qubits) -> None:
        for q in qubits:
            if q.index not in self._in_use:
                raise ValueError(f"{q} is not allocated")
            self._in_use.discard(q.index)
            self._free.append(q.index)

    @property
    def free_count(self) -> int:
        return len(self._free)

    def meta(self, key: str, value) -> None:
        self._meta.append((key, str(value)))

    # -- statements ---------------------------------------------------------
    def _emit(self, st) -> None:
        if self._cond is not None and not isinstance(st, (Comment, BlockBegin, BlockEnd, Barrier)):
            st = If(self._cond[0], self._cond[1], st)
        self._statements.append(st)

    def gate(self, name: str, *qubits, params=()) -> None:
        self._emit(Gate(name, tuple(qubits), tuple(params)))

    def gates(self, name: str, qubits, params=()) -> None:
        for q in qubits:
            self.gate(name, q, params=params)

    def measure(self, qubit: Qubit, bit: Bit) -> None:
        self._emit(Measure(Qubit(*qubit), Bit(*bit)))

    def reset(self, qubit: Qubit) -> None:
        self._emit(Reset(qubit))

    def assign(self, target: Bit, op: str, *operands) -> None:
        ops = tuple(o if o in (0, 1) else Bit(*o) for o in operands)
        self._emit(Assign(Bit(*target), op, ops))

    def barrier(self, qubits) -> None:
        self._statements.append(Barrier(tuple(qubits)))

    def comment(self, text: str) -> None:
        self._statements.append(Comment(text))

    @contextlib.contextmanager
    def block(self, kind: str, **attrs):
        items = [(k, str(v)) for k, v in attrs.items()]
        if self._cond is not None:
            items.append(("cond", f"{self._cond[0]}=={self._cond[1]}"))
        self._statements.append(BlockBegin(kind, tuple(items)))
        try:
            yield
        finally:
            self._statements.append(BlockEnd(kind))

    @contextlib.contextmanager
    def conditional(self, creg: str, value: int = 1):
        """Guard every statement emitted inside the context by ``if(creg==value)``.

        OpenQASM 2.0 has no nested conditionals.  Inside an outer guard, an
        inner guard replaces it; that is sound only when the inner register
        was declared under the outer guard (it can then only be nonzero if the
        outer condition held), which is checked here.
        """
        outer = self._cond
        if outer is not None and self._cond_scope.get(creg) != outer:
            raise ValueError(
                f"cannot nest condition on {creg!r} inside {outer[0]}=={outer[1]}: "
                "register was not declared under the outer condition")
        self._cond = (creg, value)
        try:
            yield
        finally:
            self._cond = outer

    @property
    def condition(self):
        return self._cond

    def build(self) -> LogicalProgram:
        return LogicalProgram(
            qregs=tuple(self._qregs),
            cregs=tuple(self._cregs),
            statements=tuple(self._statements),
            meta=tuple(self._meta),
        )
