"""QFT and control-T benchmarks over two mutually unbiased bases."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..execute import CompiledProgram, execute_shot, shot_rng
from ..ir import ProgramBuilder
from ..sim import NoiseModel
from .. import steane as st
from .data import MubBenchmarkResult, StateOutcome

N_QUBITS = 3
DIM = 2 ** N_QUBITS
BASES = ("computational", "fourier")


@dataclass(frozen=True)
class QftReference:
    """Preparation and readout for one QFT benchmark input.

    Attributes:
        x: input label in ``0..7``.
        basis: ``"computational"`` or ``"fourier"``.
        flips: logical X̄ per qubit after |0̄> (computational inputs).
        prep_phases: phase applied after H̄ on each qubit (Fourier inputs).
        unrotation: phase applied before H̄ and Z̄ readout of each output qubit
            (computational inputs); ``None`` means a plain Z̄ readout.
        expected: ideal outcome bits, one per qubit.
    """

    x: int
    basis: str
    flips: tuple
    prep_phases: tuple | None
    unrotation: tuple | None
    expected: tuple

    @property
    def expected_value(self) -> int:
        return sum(bit << j for j, bit in enumerate(self.expected))


def qft_reference(x: int, basis: str) -> QftReference:
    """Measurement and preparation description for input ``x``.

    Qubit 0 is the most significant input bit.  Without the final reversal,
    output qubit ``j`` of ``QFT|x>`` holds ``|0> + exp(2 pi i x / 2^(3-j))|1>``,
    so un-rotating by the negative angle and applying H̄ yields |0̄>.  A Fourier
    input ``f_x`` is mapped to ``|-x mod 8>`` with bit ``j`` on qubit ``j``
    (least significant first, because the reversal is omitted).
    """
    if not 0 <= x < DIM:
        raise ValueError(f"x must be in 0..{DIM - 1}, got {x}")
    if basis == "computational":
        flips = tuple((x >> (N_QUBITS - 1 - j)) & 1 for j in range(N_QUBITS))
        unrot = tuple(-2 * math.pi * x / 2 ** (N_QUBITS - j) for j in range(N_QUBITS))
        return QftReference(x, basis, flips, None, unrot, (0,) * N_QUBITS)
    if basis == "fourier":
        # f_x on the MSB-first input register: qubit j carries 2 pi x / 2^(j+1)
        prep = tuple(2 * math.pi * x / 2 ** (j + 1) for j in range(N_QUBITS))
        y = (-x) % DIM
        return QftReference(x, basis, (0,) * N_QUBITS, prep, None,
                            tuple((y >> j) & 1 for j in range(N_QUBITS)))
    raise ValueError(f"unknown basis {basis!r}")


def qft_state_program(method: str, ref: QftReference, gadget_method: str = "two"):
    """Program running the logical QFT on one MUB input; returns ``(program, readouts)``."""
    readouts = []

    def prepare(b, j, blk):
        if ref.flips[j]:
            st.transversal_gate(b, "X", blk)
        if ref.prep_phases is not None:
            st.transversal_gate(b, "H", blk)
            with b.block("state_prep", qubit=j):
                blk = st.apply_phase(b, blk, ref.prep_phases[j], gadget_method)
        return blk

    def finish(b, blocks):
        for j, blk in enumerate(blocks):
            if ref.unrotation is not None:
                with b.block("unrotation", qubit=j):
                    blk = st.apply_phase(b, blk, ref.unrotation[j], gadget_method)
                    st.transversal_gate(b, "H", blk)
            readouts.append(st.measure_destructive(b, blk, "Z", prefix="cQ").log)
        for j, reg in enumerate(readouts):
            b.meta("expect", f"{reg}={ref.expected[j]}")

    prog, _ = st.logical_qft3(method, prepare=prepare, finish=finish, gadget_method=gadget_method)
    return prog, tuple(readouts)


@dataclass(frozen=True)
class ControlTInput:
    """One input of the control-T benchmark (control q0, target q1)."""

    basis: str
    control: str
    target: str

    @property
    def label(self) -> str:
        return f"{self.control}{self.target}"


CONTROL_T_INPUTS = tuple(
    [ControlTInput("x-control", c, t) for c in "+-" for t in "01"]
    + [ControlTInput("z-control", c, t) for c in "01" for t in "+-"]
)


def control_t_state_program(inp: ControlTInput, gadget_method: str = "two", pool: int = 28):
    """Controlled-T through the temporary AND on one mixed-basis product input.

    The qubit in the X basis picks up a T when the other qubit is |1>; a T̄†
    un-rotation is applied in that case before the X̄ readout.
    """
    b = ProgramBuilder(pool)
    blocks = []
    for s in (inp.control, inp.target):
        blk = st.new_block(b)
        anc = b.allocate(1)[0]
        st.init_zero_ft_rus(b, blk, anc)
        b.free([anc])
        if s in "1-":
            st.transversal_gate(b, "X", blk)
        if s in "+-":
            st.transversal_gate(b, "H", blk)
        blocks.append(blk)
    blocks[0], blocks[1] = st.ancilla_assisted_cp(b, blocks[0], blocks[1], st.QUARTER, method=gadget_method)
    states = (inp.control, inp.target)
    readouts, expected = [], []
    for j, (blk, s) in enumerate(zip(blocks, states)):
        other = states[1 - j]
        if s in "+-":
            if other == "1":
                with b.block("unrotation", qubit=j):
                    blk = st.apply_phase(b, blk, -st.QUARTER, gadget_method)
            readouts.append(st.measure_destructive(b, blk, "X", prefix="cQ").log)
            expected.append(int(s == "-"))
        else:
            readouts.append(st.measure_destructive(b, blk, "Z", prefix="cQ").log)
            expected.append(int(s))
    for reg, e in zip(readouts, expected):
        b.meta("expect", f"{reg}={e}")
    return b.build(), tuple(readouts), tuple(expected)


def _run_cell(program, readouts, expected, noise, shots, seed):
    compiled = CompiledProgram(program)
    n = ok = kept = kept_ok = 0
    for s in range(shots):
        rec, _ = execute_shot(compiled, noise, shot_rng(seed, s), s)
        if rec.discarded:
            continue
        hit = all(rec.registers[r] == e for r, e in zip(readouts, expected))
        n += 1
        ok += hit
        if not rec.detected:
            kept += 1
            kept_ok += hit
    return n, ok, kept, kept_ok


def run_qft_benchmark(method: str, noise: NoiseModel | None = None, shots_per_state: int = 100,
                      seed: int = 0, postselect: bool = True, gadget_method: str = "two",
                      inputs=None) -> MubBenchmarkResult:
    """Run the logical QFT on the 16 computational and Fourier basis inputs.

    ``postselect`` only selects the headline numbers in ``metadata``; both
    raw and post-selected variants are always available on the result.
    ``inputs`` restricts the run to a subset of ``(basis, x)`` pairs.
    """
    if shots_per_state < 1:
        raise ValueError("shots_per_state must be >= 1")
    noise = noise or NoiseModel()
    inputs = list(inputs or [(bs, x) for bs in BASES for x in range(DIM)])
    states = []
    for k, (basis, x) in enumerate(inputs):
        ref = qft_reference(x, basis)
        prog, regs = qft_state_program(method, ref, gadget_method)
        n, ok, kept, kept_ok = _run_cell(prog, regs, ref.expected, noise, shots_per_state,
                                         seed + 7919 * k)
        states.append(StateOutcome(basis, str(x), n, ok, kept, kept_ok))
    meta = {"protocol": "qft", "method": method, "gadget_method": gadget_method, "seed": seed,
            "shots_per_state": shots_per_state, "postselect": postselect, "noise": asdict(noise)}
    return MubBenchmarkResult(DIM, states, meta)


def run_control_t_benchmark(noise: NoiseModel | None = None, shots_per_state: int = 100, seed: int = 0,
                            gadget_method: str = "two") -> MubBenchmarkResult:
    """Control-T fidelities over the eight mixed X/Z product inputs (d = 4)."""
    if shots_per_state < 1:
        raise ValueError("shots_per_state must be >= 1")
    noise = noise or NoiseModel()
    states = []
    for k, inp in enumerate(CONTROL_T_INPUTS):
        prog, regs, expected = control_t_state_program(inp, gadget_method)
        n, ok, kept, kept_ok = _run_cell(prog, regs, expected, noise, shots_per_state, seed + 7919 * k)
        states.append(StateOutcome(inp.basis, inp.label, n, ok, kept, kept_ok))
    meta = {"protocol": "control-t", "gadget_method": gadget_method, "seed": seed,
            "shots_per_state": shots_per_state, "noise": asdict(noise)}
    return MubBenchmarkResult(4, states, meta)
