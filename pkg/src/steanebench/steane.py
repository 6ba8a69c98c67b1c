"""[[7,1,3]] Steane-code primitives as program-fragment builders.

Qubit ``i`` of a block (0-based) is the paper-style qubit ``i + 1``.  All
builders take a :class:`ProgramBuilder` and append statements to it; gadgets
that consume their input block return the block now holding the data.

Logical gate conventions:

* ``H̄ = H⊗7``, ``S̄ = (S†)⊗7``, ``S̄† = S⊗7``, ``CNOT̄`` and ``CZ̄`` pairwise;
* ``X̄``, ``Z̄`` act on the weight-3 support {4, 5, 6}.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from .ir import Bit, ProgramBuilder, Qubit
from .pauli import PauliString

GENERATOR_TEXT = ("XXXXIII", "IXXIXXI", "IIXXIXX", "ZZZZIII", "IZZIZZI", "IIZZIZZ")
LOGICAL_X_TEXT = "IIIIXXX"
LOGICAL_Z_TEXT = "IIIIZZZ"
X_SUPPORTS = ((0, 1, 2, 3), (1, 2, 4, 5), (2, 3, 5, 6))
LOGICAL_SUPPORT = (4, 5, 6)
INPUT_QUBIT = 6

# Encoder: spread the input onto the logical support, then one X-type
# generator per pivot qubit (g1 = s1 s2, g2 = s2 s3, g3 = s3).
_ENCODER_INPUT_CNOTS = ((6, 4), (6, 5))
_ENCODER_PIVOTS = (0, 1, 2)
_ENCODER_CNOTS = ((0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 6), (2, 3), (2, 5), (2, 6))

# Z̄-parity verification support of the repeat-until-success |0̄> preparation,
# found by :func:`find_verification_supports`.
VERIFY_SUPPORT = (4, 5, 6)
# data positions after which the H̄-measurement ancilla is copied to the flag
FLAG_AFTER = (0, 5)

QUARTER = math.pi / 4
HALF = math.pi / 2


def _wrap(theta: float) -> float:
    """Angle reduced to (-pi, pi]."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if math.isclose(t, -math.pi) else t


def _multiple(theta: float, unit: float) -> int | None:
    k = theta / unit
    r = round(k)
    return int(r) if abs(k - r) < 1e-9 else None


def _fmt_angle(theta: float) -> str:
    return format(theta, ".12g")


class SteaneCode:
    """Stabilizers, logical operators and lookup decoder of the [[7,1,3]] code."""

    n = 7

    def __init__(self):
        self.generators = [PauliString.from_str(t) for t in GENERATOR_TEXT]
        self.logical_x = PauliString.from_str(LOGICAL_X_TEXT)
        self.logical_z = PauliString.from_str(LOGICAL_Z_TEXT)
        self.supports = X_SUPPORTS
        self.logical_support = LOGICAL_SUPPORT
        # syndrome (bit j = generator j fired) -> qubit to correct
        self.lookup = {self.column(q): q for q in range(self.n)}

    def column(self, qubit: int) -> int:
        return sum(1 << j for j, sup in enumerate(self.supports) if qubit in sup)

    def syndrome(self, bits: int) -> int:
        """Parities of a 7-bit measurement string (bit i = qubit i) over the generators."""
        return sum((bin(bits & _mask(sup)).count("1") & 1) << j for j, sup in enumerate(self.supports))

    def correction(self, syndrome: int) -> int | None:
        return self.lookup.get(syndrome) if syndrome else None

    def flips_logical(self, syndrome: int) -> bool:
        q = self.correction(syndrome)
        return q is not None and q in self.logical_support

    def decode(self, bits: int) -> "SyndromeRecord":
        raw = bin(bits & _mask(self.logical_support)).count("1") & 1
        syn = self.syndrome(bits)
        return SyndromeRecord(raw, syn, raw ^ int(self.flips_logical(syn)), syn != 0)

    def error_syndrome(self, error: PauliString, basis: str = "Z") -> int:
        """Syndrome a destructive ``basis`` measurement reports for ``error``."""
        flipped = error.x if basis == "Z" else error.z
        return self.syndrome(flipped)

    def codeword(self, value: int) -> np.ndarray:
        """Amplitudes of |0̄> or |1̄> over 7 qubits (qubit 0 most significant)."""
        vec = np.zeros(2 ** self.n, dtype=complex)
        offset = _mask(self.logical_support) if value else 0
        for k in range(8):
            word = offset
            for j, sup in enumerate(self.supports):
                if (k >> j) & 1:
                    word ^= _mask(sup)
            vec[_to_index(word, self.n)] = 1.0
        return vec / np.linalg.norm(vec)

    def logical_state(self, alpha: complex, beta: complex) -> np.ndarray:
        v = alpha * self.codeword(0) + beta * self.codeword(1)
        return v / np.linalg.norm(v)

    def code_projector(self) -> np.ndarray:
        dim = 2 ** self.n
        proj = np.eye(dim, dtype=complex)
        for g in self.generators:
            proj = proj @ (np.eye(dim) + g.to_matrix()) / 2
        return proj


def _mask(support) -> int:
    return sum(1 << q for q in support)


def _to_index(word: int, n: int) -> int:
    """Bit i of ``word`` (qubit i) becomes tensor position i with qubit 0 as MSB."""
    return sum(((word >> q) & 1) << (n - 1 - q) for q in range(n))


CODE = SteaneCode()


@dataclass(frozen=True)
class LogicalBlock:
    """Seven data qubits of one logical qubit, plus an optional physical ancilla."""

    qubits: tuple
    ancilla: Qubit | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if len(self.qubits) != 7:
            raise ValueError(f"a Steane block needs 7 qubits, got {len(self.qubits)}")
        ids = list(self.qubits) + ([self.ancilla] if self.ancilla is not None else [])
        if len(set(ids)) != len(ids):
            raise ValueError("block qubits must be distinct")

    def __getitem__(self, i):
        return self.qubits[i]

    def __iter__(self):
        return iter(self.qubits)


@dataclass(frozen=True)
class SyndromeRecord:
    """Decoded result of one destructive logical measurement."""

    raw_logical: int
    syndrome: int
    decoded_logical: int
    detected: bool


@dataclass(frozen=True)
class MeasDecode:
    """Classical registers written by :func:`measure_destructive`."""

    bits: str
    raw: str
    log: str
    syn: str
    basis: str

    def read(self, shot) -> SyndromeRecord:
        regs = shot.registers
        return SyndromeRecord(regs[self.raw], regs[self.syn], regs[self.log], regs[self.syn] != 0)


def new_block(b: ProgramBuilder) -> LogicalBlock:
    return LogicalBlock(tuple(b.allocate(7)))


def free_block(b: ProgramBuilder, block: LogicalBlock) -> None:
    b.free(block.qubits)


# ---------------------------------------------------------------------------
# Encoding and initialization
# ---------------------------------------------------------------------------

def _input_gates(state) -> list[tuple]:
    """Physical gates preparing the single-qubit input on the encoder's input qubit."""
    if state == "0":
        return []
    if state == "1":
        return [("x", ())]
    if state == "+":
        return [("h", ())]
    if state == "-":
        return [("h", ()), ("z", ())]
    if state == "H":
        return [("ry", (QUARTER,))]
    theta = _wrap(float(state))
    gates = [("h", ())]
    named = {1: "t", -1: "tdg", 2: "s", -2: "sdg", 4: "z"}
    k = _multiple(theta, QUARTER)
    if k == 0:
        return gates
    if k in named:
        return gates + [(named[k], ())]
    return gates + [("u1", (theta,))]


def is_magic(state) -> bool:
    """True for input states that are not stabilizer states."""
    if state in ("0", "1", "+", "-"):
        return False
    if state == "H":
        return True
    return _multiple(_wrap(float(state)), HALF) is None


def encode_nonft(b: ProgramBuilder, block: LogicalBlock, state="0") -> None:
    """Non-fault-tolerant encoder with the input on the block's last qubit.

    ``state`` is one of ``"0"``, ``"1"``, ``"+"``, ``"-"``, ``"H"`` (the
    state cos(pi/8)|0> + sin(pi/8)|1>) or an angle θ for P(θ)H|0>.
    """
    label = state if isinstance(state, str) else _fmt_angle(_wrap(float(state)))
    with b.block("encode", state=label, magic=int(is_magic(state))):
        inp = block[INPUT_QUBIT]
        for name, params in _input_gates(state):
            b.gate(name, inp, params=params)
        if state != "0":
            for c, t in _ENCODER_INPUT_CNOTS:
                b.gate("cx", block[c], block[t])
        for q in _ENCODER_PIVOTS:
            b.gate("h", block[q])
        for c, t in _ENCODER_CNOTS:
            b.gate("cx", block[c], block[t])


def init_zero_ft_rus(b: ProgramBuilder, block: LogicalBlock, ancilla: Qubit, limit: int = 3,
                     support=VERIFY_SUPPORT, flag: str | None = None) -> str:
    """Repeat-until-success |0̄> preparation verified by a Z̄-parity check.

    Returns the 1-bit register that is 1 after the last attempt iff every
    attempt was rejected; it is registered as a discard flag.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    reg = flag or b.fresh_creg("init", 1)
    b.meta("discard", reg)
    with b.block("init_rus", limit=limit):
        for attempt in range(limit):
            guard = b.conditional(reg, 1) if attempt else contextlib.nullcontext()
            kind = "rus_retry" if attempt else "rus_attempt"
            with guard, b.block(kind, attempt=attempt + 1):
                if attempt:
                    for q in list(block) + [ancilla]:
                        b.reset(q)
                encode_nonft(b, block, "0")
                for q in support:
                    b.gate("cx", block[q], ancilla)
                b.measure(ancilla, Bit(reg, 0))
    return reg


def weight3_logical_z_supports() -> list[tuple]:
    """Weight-3 supports whose Z string is a logical Z̄ representative."""
    out = []
    for trip in _triples():
        m = _mask(trip)
        if all(bin(m & _mask(s)).count("1") % 2 == 0 for s in X_SUPPORTS) and \
                bin(m & _mask(LOGICAL_SUPPORT)).count("1") % 2 == 1:
            out.append(trip)
    return out


def _triples():
    import itertools
    return itertools.combinations(range(7), 3)


def verification_passes(support) -> bool:
    """Exhaustive single-fault check of the RUS preparation with ``support``.

    Every accepted output must be within one single-qubit error of |0̄>.
    """
    from .execute import qubit_ids
    from .faults import recovery_fidelity, run_with_fault, single_faults

    b = ProgramBuilder(8)
    block = new_block(b)
    anc = b.allocate(1)[0]
    reg = init_zero_ft_rus(b, block, anc, limit=1, support=support)
    prog = b.build()
    ids = qubit_ids(prog, block.qubits)
    ideal = CODE.codeword(0)
    for fault in single_faults(prog):
        rec, state = run_with_fault(prog, fault)
        if rec.registers[reg]:
            continue
        if recovery_fidelity(state.statevector(ids), ideal) < 1 - 1e-9:
            return False
    return True


def find_verification_supports() -> list[tuple]:
    return [s for s in weight3_logical_z_supports() if verification_passes(s)]


# ---------------------------------------------------------------------------
# Transversal gates and measurement
# ---------------------------------------------------------------------------

_ONE_BLOCK = {"H": "h", "S": "sdg", "SDG": "s", "X": "x", "Y": "y", "Z": "z"}


def transversal_gate(b: ProgramBuilder, gate: str, *blocks: LogicalBlock) -> None:
    """Logical H, S, S†, Paulis on one block, or CNOT / CZ between two blocks."""
    gate = gate.upper()
    if gate in ("CX", "CNOT", "CZ"):
        if len(blocks) != 2:
            raise ValueError(f"{gate} needs two blocks")
        a, t = blocks
        if set(a.qubits) & set(t.qubits):
            raise ValueError("blocks overlap")
        name = "cz" if gate == "CZ" else "cx"
        with b.block("transversal", gate=name, logical_tq=1):
            for qa, qt in zip(a, t):
                b.gate(name, qa, qt)
        return
    if len(blocks) != 1:
        raise ValueError(f"{gate} acts on one block")
    (blk,) = blocks
    if gate not in _ONE_BLOCK:
        raise ValueError(f"unsupported transversal gate {gate!r}")
    support = LOGICAL_SUPPORT if gate in ("X", "Y", "Z") else range(7)
    with b.block("transversal", gate=gate.lower(), logical_tq=0):
        for i in support:
            b.gate(_ONE_BLOCK[gate], blk[i])


def logical_clifford_phase(b: ProgramBuilder, block: LogicalBlock, k: int) -> None:
    """Logical P(k pi/2)."""
    k %= 4
    if k == 1:
        transversal_gate(b, "S", block)
    elif k == 2:
        transversal_gate(b, "Z", block)
    elif k == 3:
        transversal_gate(b, "SDG", block)


def measure_destructive(b: ProgramBuilder, block: LogicalBlock, basis: str = "Z",
                        detect: bool = False, prefix: str = "c", names=None) -> MeasDecode:
    """Measure all seven qubits and decode the logical outcome in real time.

    ``names`` optionally fixes the (bits, raw, decoded, syndrome) register
    names; otherwise fresh registers ``{prefix}_k``, ``{prefix}LogRaw_k``,
    ``{prefix}Log_k`` and ``{prefix}Syn_k`` are declared.
    """
    basis = basis.upper()
    if basis not in ("Z", "X"):
        raise ValueError(f"unsupported basis {basis!r}")
    if names is None:
        k = b.next_id("meas")
        names = (f"{prefix}_{k}", f"{prefix}LogRaw_{k}", f"{prefix}Log_{k}", f"{prefix}Syn_{k}")
    bits, raw, log, syn = names
    for name, width in zip(names, (7, 1, 1, 3)):
        b.creg(name, width)
    if detect:
        b.meta("detect", syn)
    with b.block("meas_decode", basis=basis):
        if basis == "X":
            for q in block:
                b.gate("h", q)
        for i, q in enumerate(block):
            b.measure(q, Bit(bits, i))
        for j, sup in enumerate(X_SUPPORTS):
            b.assign(Bit(syn, j), "^", *[Bit(bits, i) for i in sup])
        b.assign(Bit(raw, 0), "^", *[Bit(bits, i) for i in LOGICAL_SUPPORT])
        # flip iff the lookup correction lies in {4,5,6}: not s1 and (s2 or s3)
        b.assign(Bit(log, 0), "|", Bit(syn, 0), Bit(syn, 1), Bit(syn, 2))
        b.assign(Bit(log, 0), "^", Bit(log, 0), Bit(syn, 0), Bit(raw, 0))
    return MeasDecode(bits, raw, log, syn, basis)


# ---------------------------------------------------------------------------
# Teleportation gadgets
# ---------------------------------------------------------------------------

def apply_phase(b: ProgramBuilder, block: LogicalBlock, theta: float, method: str = "two",
                recursive: bool = True) -> LogicalBlock:
    """Logical P(θ): transversal for multiples of pi/2, teleported otherwise."""
    theta = _wrap(theta)
    k = _multiple(theta, HALF)
    if k is not None:
        logical_clifford_phase(b, block, k)
        return block
    clifford_part = 0
    if _multiple(theta, QUARTER) is not None and abs(theta) > HALF:
        # e.g. 3pi/4 = pi/2 + pi/4: one teleported T plus a transversal phase
        clifford_part = int(math.copysign(1, theta))
        theta -= clifford_part * HALF
    out, _ = teleport_p_gate(b, block, theta, method=method, recursive=recursive)
    logical_clifford_phase(b, out, clifford_part)
    return out


def teleport_p_gate(b: ProgramBuilder, data: LogicalBlock, theta: float, method: str = "one",
                    ancilla: LogicalBlock | None = None, recursive: bool = True,
                    prepare=None):
    """Teleport P(θ) onto ``data`` using a non-FT encoded |θ̄>.

    Returns ``(output_block, MeasDecode)``.  Method one keeps ``data`` as the
    output; method two measures ``data`` and returns the ancilla block.
    Inside a classically controlled region the block identity must not
    depend on the branch, so method one is used there.  ``prepare(b, anc)``
    replaces the default non-FT encoding of the resource state.
    """
    if method not in ("one", "two"):
        raise ValueError(f"unknown teleportation method {method!r}")
    theta = _wrap(theta)
    correction = _wrap(2 * theta)
    if _multiple(correction, HALF) is None and not recursive:
        raise ValueError(f"correction P({correction:g}) is not transversal and recursion is disabled")
    if b.condition is not None:
        method = "one"
    anc = ancilla or new_block(b)
    with b.block("teleport", theta=_fmt_angle(theta), method=method):
        if prepare is None:
            encode_nonft(b, anc, theta)
        else:
            prepare(b, anc)
        if method == "one":
            transversal_gate(b, "CX", data, anc)
            rec = measure_destructive(b, anc, "Z", detect=True, prefix="cT")
            free_block(b, anc)
            out = data
            with b.conditional(rec.log, 1):
                apply_phase(b, out, correction, method="one", recursive=recursive)
        else:
            transversal_gate(b, "CX", anc, data)
            rec = measure_destructive(b, data, "Z", detect=True, prefix="cT")
            free_block(b, data)
            out = anc
            with b.conditional(rec.log, 1):
                transversal_gate(b, "X", out)
                apply_phase(b, out, correction, method="one", recursive=recursive)
    return out, rec


def recursive_teleport(b: ProgramBuilder, data: LogicalBlock, k: int, method: str = "two",
                       anc1: LogicalBlock | None = None) -> LogicalBlock:
    """P(pi/2^k) by teleportation, with a teleported P(pi/2^(k-1)) correction.

    The inner gadgets live inside the classically controlled branch, so
    their ancilla blocks are only prepared when needed.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    out, _ = teleport_p_gate(b, data, math.pi / 2 ** k, method=method, ancilla=anc1)
    return out


def controlled_phase_decomposition(b: ProgramBuilder, a: LogicalBlock, t: LogicalBlock,
                                   theta: float, method: str = "two"):
    """CP(θ) = P(θ/2)⊗P(θ/2) · CNOT · (I⊗P(-θ/2)) · CNOT, phases teleported."""
    with b.block("cphase", theta=_fmt_angle(theta), scheme="decomposition"):
        a = apply_phase(b, a, theta / 2, method)
        t = apply_phase(b, t, theta / 2, method)
        transversal_gate(b, "CX", a, t)
        t = apply_phase(b, t, -theta / 2, method)
        transversal_gate(b, "CX", a, t)
    return a, t


def controlled_s_decomposition(b: ProgramBuilder, q0: LogicalBlock, q1: LogicalBlock,
                               sign: int = 1, method: str = "two"):
    """Controlled-S (or controlled-S† for ``sign=-1``) from two CNOT̄ and three T/T†."""
    return controlled_phase_decomposition(b, q0, q1, math.copysign(HALF, sign), method)


def ancilla_assisted_cp(b: ProgramBuilder, q0: LogicalBlock, q1: LogicalBlock, theta: float,
                        anc: LogicalBlock | None = None, method: str = "two"):
    """Controlled-P(θ) through a temporary logical AND.

    The AND is computed into an ancilla prepared as |T̄> with three more
    teleported T/T† gates; P(θ) is teleported onto the ancilla, which is then
    measured in the X basis with a CZ̄ correction on outcome 1.
    """
    with b.block("cphase", theta=_fmt_angle(theta), scheme="ancilla"):
        anc = anc or new_block(b)
        with b.block("and_compute"):
            encode_nonft(b, anc, QUARTER)
            transversal_gate(b, "CX", q0, anc)
            anc = apply_phase(b, anc, -QUARTER, method)
            transversal_gate(b, "CX", q1, anc)
            anc = apply_phase(b, anc, QUARTER, method)
            transversal_gate(b, "CX", q0, anc)
            anc = apply_phase(b, anc, -QUARTER, method)
            transversal_gate(b, "CX", q1, anc)
            transversal_gate(b, "H", anc)
            # the a AND b branch carries a phase -i
            transversal_gate(b, "S", anc)
        anc = apply_phase(b, anc, theta, method)
        with b.block("and_uncompute"):
            rec = measure_destructive(b, anc, "X", prefix="cA")
            free_block(b, anc)
            with b.conditional(rec.log, 1):
                transversal_gate(b, "CZ", q0, q1)
    return q0, q1


# ---------------------------------------------------------------------------
# Three-qubit QFT
# ---------------------------------------------------------------------------

QFT_METHODS = ("recursive", "ancilla")


def _ft_zero(b: ProgramBuilder, limit: int = 3) -> LogicalBlock:
    block = new_block(b)
    anc = b.allocate(1)[0]
    init_zero_ft_rus(b, block, anc, limit=limit)
    b.free([anc])
    return block


def logical_qft3(method: str, prepare=None, finish=None, pool: int = 28,
                 gadget_method: str = "two"):
    """Logical three-qubit QFT program without the final qubit reversal.

    Args:
        method: ``"recursive"`` (controlled-T from teleported P(±pi/8)) or
            ``"ancilla"`` (controlled-T through a temporary AND).
        prepare: optional ``prepare(builder, j, block) -> block`` applied to
            logical qubit ``j`` right after its |0̄> initialization.
        finish: optional ``finish(builder, blocks)`` appended after the QFT.
        pool: physical qubit budget.

    Qubit 0 is the most significant bit of the input.  In the ancilla method
    the controlled-T on (q2, q0) runs before q1 is initialized; diagonal gates
    commute, so the unitary is unchanged and four blocks suffice.

    Returns:
        ``(LogicalProgram, blocks)``.
    """
    if method not in QFT_METHODS:
        raise ValueError(f"unknown QFT method {method!r}")
    b = ProgramBuilder(pool)
    b.meta("qft_method", method)
    gm = gadget_method

    def init(j):
        blk = _ft_zero(b)
        if prepare is not None:
            blk = prepare(b, j, blk) or blk
        return blk

    with b.block("qft", method=method):
        if method == "recursive":
            q = [init(0), init(1), init(2)]
            with b.block("qft_body"):
                transversal_gate(b, "H", q[0])
                q[1], q[0] = controlled_s_decomposition(b, q[1], q[0], method=gm)
                q[2], q[0] = controlled_phase_decomposition(b, q[2], q[0], QUARTER, method=gm)
                transversal_gate(b, "H", q[1])
                q[2], q[1] = controlled_s_decomposition(b, q[2], q[1], method=gm)
                transversal_gate(b, "H", q[2])
        else:
            q = [init(0), None, init(2)]
            with b.block("qft_body"):
                transversal_gate(b, "H", q[0])
                q[2], q[0] = ancilla_assisted_cp(b, q[2], q[0], QUARTER, method=gm)
            q[1] = init(1)
            with b.block("qft_body"):
                q[1], q[0] = controlled_s_decomposition(b, q[1], q[0], method=gm)
                transversal_gate(b, "H", q[1])
                q[2], q[1] = controlled_s_decomposition(b, q[2], q[1], method=gm)
                transversal_gate(b, "H", q[2])
    if finish is not None:
        finish(b, q)
    return b.build(), q


# ---------------------------------------------------------------------------
# Partially fault-tolerant |T̄> preparation
# ---------------------------------------------------------------------------

def flagged_hadamard_measurement(b: ProgramBuilder, block: LogicalBlock, anc: Qubit, flag: Qubit,
                                 out: str | None = None) -> str:
    """Measure H̄ with a physical ancilla and a flag qubit.

    Writes the ancilla X-basis outcome to bit 0 and the flag outcome to bit 1
    of a 2-bit register, which is returned.
    """
    reg = out or b.fresh_creg("cH", 2)
    with b.block("flagged_h"):
        b.gate("h", anc)
        for i, q in enumerate(block):
            # controlled-H = Ry(pi/4) CZ Ry(-pi/4) on the target
            b.gate("ry", q, params=(-QUARTER,))
            b.gate("cz", anc, q)
            b.gate("ry", q, params=(QUARTER,))
            if i in FLAG_AFTER:
                b.gate("cx", anc, flag)
        b.gate("h", anc)
        b.measure(anc, Bit(reg, 0))
        b.measure(flag, Bit(reg, 1))
    return reg


def prepare_t_state_partial_ft(b: ProgramBuilder, block: LogicalBlock, anc: Qubit, flag: Qubit,
                               rus_limit: int = 1) -> str:
    """|T̄> from a flag-verified |H̄>, repeated up to ``rus_limit`` times.

    Returns the 1-bit failure register (registered as a discard flag).
    """
    if rus_limit < 1:
        raise ValueError("rus_limit must be >= 1")
    fail = b.fresh_creg("tfail", 1)
    b.meta("discard", fail)
    with b.block("t_prep_ft", limit=rus_limit):
        for attempt in range(rus_limit):
            guard = b.conditional(fail, 1) if attempt else contextlib.nullcontext()
            kind = "rus_retry" if attempt else "rus_attempt"
            with guard, b.block(kind, attempt=attempt + 1):
                if attempt:
                    for q in list(block) + [anc, flag]:
                        b.reset(q)
                encode_nonft(b, block, "H")
                reg = flagged_hadamard_measurement(b, block, anc, flag)
                b.assign(Bit(fail, 0), "|", Bit(reg, 0), Bit(reg, 1))
        # |T̄> ∝ Rz(pi/2) Rx(pi/2) |H̄>, with Rx(pi/2) ∝ H S H and Rz(pi/2) ∝ S
        transversal_gate(b, "H", block)
        transversal_gate(b, "S", block)
        transversal_gate(b, "H", block)
        transversal_gate(b, "S", block)
    return fail
