"""OpenQASM 2.0 subset emitter and parser.

Beyond standard OpenQASM 2.0 the text may contain classical bit assignments
(``c[0] = a[0] ^ b[1];``) used for real-time syndrome decoding.  Gadget
boundaries and program metadata travel in comments:

    // @key value            program metadata
    // begin kind k=v ...    block start
    // end kind              block end
"""

from __future__ import annotations

import math
import re

from .ir import (
    QASM_GATES, Assign, Barrier, Bit, BlockBegin, BlockEnd, Comment, Gate, If,
    LogicalProgram, Measure, Qubit, Reset, require_valid,
)

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def _fmt(p: float) -> str:
    return format(p, ".12g")


def _stmt_text(st) -> str:
    if isinstance(st, Gate):
        head = st.name
        if st.params:
            head += "(" + ",".join(_fmt(p) for p in st.params) + ")"
        return f"{head} {','.join(str(q) for q in st.qubits)};"
    if isinstance(st, Measure):
        return f"measure {st.qubit} -> {st.bit};"
    if isinstance(st, Reset):
        return f"reset {st.qubit};"
    if isinstance(st, Barrier):
        return f"barrier {','.join(str(q) for q in st.qubits)};"
    if isinstance(st, Assign):
        sep = f" {st.op} " if st.op != "=" else ""
        return f"{st.target} = {sep.join(str(o) for o in st.operands)};"
    if isinstance(st, If):
        return f"if({st.creg}=={st.value}) {_stmt_text(st.body)}"
    if isinstance(st, Comment):
        return f"//{st.text}"
    if isinstance(st, BlockBegin):
        attrs = "".join(f" {k}={v}" for k, v in st.attrs)
        return f"// begin {st.kind}{attrs}"
    if isinstance(st, BlockEnd):
        return f"// end {st.kind}"
    raise TypeError(f"cannot emit {st!r}")


def emit_qasm(program: LogicalProgram) -> str:
    """Deterministic text: header, metadata, declarations, one statement per line."""
    require_valid(program)
    lines = [HEADER.rstrip("\n")]
    lines += [f"// @{k} {v}" for k, v in program.meta]
    lines += [f"qreg {n}[{w}];" for n, w in program.qregs]
    lines += [f"creg {n}[{w}];" for n, w in program.cregs]
    lines += [_stmt_text(st) for st in program.statements]
    return "\n".join(lines) + "\n"


class QasmParseError(ValueError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


_TOKEN = re.compile(
    r"""
    (?P<comment>//[^\n]*)
  | (?P<ws>[ \t\r\n]+)
  | (?P<real>(\d+\.\d*|\.\d+)([eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<eqeq>==)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[;,\[\]\(\)\+\-\*/\^=&|{}])
    """,
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text):
        self.toks = []
        line, col, pos = 1, 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise QasmParseError(f"unexpected character {text[pos]!r}", line, col)
            kind, val = m.lastgroup, m.group()
            if kind != "ws":
                self.toks.append((kind, val, line, col))
            nl = val.count("\n")
            if nl:
                line += nl
                col = len(val) - val.rfind("\n")
            else:
                col += len(val)
            pos = m.end()
        self.toks.append(("eof", "", line, col))
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return QasmParseError(msg, tok[2], tok[3])

    def expect(self, value=None, kind=None):
        tok = self.next()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            raise self.error(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok


def _parse_comment(text):
    body = text[2:]
    if body.startswith(" @"):
        key, _, value = body[2:].partition(" ")
        return ("meta", key, value)
    if body.startswith(" begin "):
        parts = body[len(" begin "):].split(" ")
        attrs = tuple(tuple(p.split("=", 1)) for p in parts[1:])
        if any(len(a) != 2 for a in attrs):
            return Comment(body)
        return BlockBegin(parts[0], attrs)
    if body.startswith(" end ") and " " not in body[len(" end "):]:
        return BlockEnd(body[len(" end "):])
    return Comment(body)


def parse_qasm(text: str) -> LogicalProgram:
    """Parse text in the emitted subset back into a :class:`LogicalProgram`."""
    tk = _Tokens(text)
    qregs, cregs, statements, meta = [], [], [], []

    def skip_comments_into(out):
        while tk.peek()[0] == "comment":
            item = _parse_comment(tk.next()[1])
            if isinstance(item, tuple):
                meta.append(item[1:])
            else:
                out.append(item)

    skip_comments_into(statements)
    tok = tk.peek()
    if tok[1] != "OPENQASM":
        raise tk.error("expected OPENQASM 2.0 header")
    tk.next()
    ver = tk.next()
    if ver[1] not in ("2.0", "2"):
        raise tk.error(f"unsupported OpenQASM version {ver[1]!r}; expected OPENQASM 2.0", ver)
    tk.expect(";")
    skip_comments_into(statements)
    if tk.peek()[1] == "include":
        tk.next()
        tk.expect(kind="string")
        tk.expect(";")

    def index_ref(kind_regs):
        name_tok = tk.expect(kind="id")
        tk.expect("[")
        idx = int(tk.expect(kind="int")[1])
        tk.expect("]")
        return name_tok[1], idx

    def param_expr():
        return _expr(tk)

    def statement(allow_decl=True):
        tok = tk.peek()
        word = tok[1]
        if word in ("qreg", "creg"):
            if not allow_decl:
                raise tk.error("declaration not allowed here")
            tk.next()
            name, width = index_ref(None)
            tk.expect(";")
            (qregs if word == "qreg" else cregs).append((name, width))
            return None
        if word in ("gate", "opaque"):
            raise tk.error(f"unsupported construct {word!r}: gate definitions are not part of the subset")
        if word == "measure":
            tk.next()
            q = Qubit(*index_ref(None))
            tk.expect(kind="arrow")
            b = Bit(*index_ref(None))
            tk.expect(";")
            return Measure(q, b)
        if word == "reset":
            tk.next()
            q = Qubit(*index_ref(None))
            tk.expect(";")
            return Reset(q)
        if word == "barrier":
            tk.next()
            qs = [Qubit(*index_ref(None))]
            while tk.peek()[1] == ",":
                tk.next()
                qs.append(Qubit(*index_ref(None)))
            tk.expect(";")
            return Barrier(tuple(qs))
        if word == "if":
            tk.next()
            tk.expect("(")
            creg = tk.expect(kind="id")[1]
            tk.expect(kind="eqeq")
            value = int(tk.expect(kind="int")[1])
            tk.expect(")")
            body_tok = tk.peek()
            body = statement(allow_decl=False)
            if body is None or isinstance(body, (If, Barrier)):
                raise tk.error("conditional body must be a gate, measure, reset or assignment", body_tok)
            return If(creg, value, body)
        if tok[0] == "id" and tk.peek(1)[1] == "[":
            # classical assignment: reg[i] = operand (op operand)*;
            target = Bit(*index_ref(None))
            tk.expect("=")
            operands = [_operand(tk)]
            op = "="
            while tk.peek()[1] in ("^", "&", "|"):
                this = tk.next()[1]
                if op not in ("=", this):
                    raise tk.error("mixed classical operators are not supported")
                op = this
                operands.append(_operand(tk))
            tk.expect(";")
            return Assign(target, op, tuple(operands))
        if tok[0] == "id":
            name = tk.next()[1]
            if name not in QASM_GATES:
                raise QasmParseError(f"unsupported gate {name!r}", tok[2], tok[3])
            params = []
            if tk.peek()[1] == "(":
                tk.next()
                params.append(param_expr())
                while tk.peek()[1] == ",":
                    tk.next()
                    params.append(param_expr())
                tk.expect(")")
            qs = [Qubit(*index_ref(None))]
            while tk.peek()[1] == ",":
                tk.next()
                qs.append(Qubit(*index_ref(None)))
            tk.expect(";")
            return Gate(name, tuple(qs), tuple(params))
        raise tk.error(f"unexpected token {word or 'end of input'!r}")

    while True:
        skip_comments_into(statements)
        if tk.peek()[0] == "eof":
            break
        st = statement()
        if st is not None:
            statements.append(st)
    return LogicalProgram(tuple(qregs), tuple(cregs), tuple(statements), tuple(meta))


def _operand(tk):
    tok = tk.peek()
    if tok[0] == "int" and tok[1] in ("0", "1"):
        tk.next()
        return int(tok[1])
    name = tk.expect(kind="id")[1]
    tk.expect("[")
    idx = int(tk.expect(kind="int")[1])
    tk.expect("]")
    return Bit(name, idx)


def _expr(tk):
    """Arithmetic over numbers and ``pi`` with + - * /."""

    def atom():
        tok = tk.next()
        if tok[1] == "-":
            return -atom()
        if tok[1] == "+":
            return atom()
        if tok[0] in ("real", "int"):
            return float(tok[1])
        if tok[1] == "pi":
            return math.pi
        if tok[1] == "(":
            v = expr()
            tk.expect(")")
            return v
        raise tk.error(f"bad parameter expression near {tok[1]!r}", tok)

    def term():
        v = atom()
        while tk.peek()[1] in ("*", "/"):
            if tk.next()[1] == "*":
                v *= atom()
            else:
                v /= atom()
        return v

    def expr():
        v = term()
        while tk.peek()[1] in ("+", "-"):
            if tk.next()[1] == "+":
                v += term()
            else:
                v -= term()
        return v

    return expr()
