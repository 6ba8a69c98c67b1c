"""Two-qubit logical randomized benchmarking."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..ir import LogicalProgram, ProgramBuilder
from ..pauli import CliffordElement, compose, enumerate_two_qubit_cliffords, invert
from ..sim import NoiseModel
from .. import steane as st
from .data import DecaySeries
from .runner import run_circuits

RB_LENGTHS = (2, 6, 10, 14)
RB_POOL = 16


@dataclass
class RBCircuit:
    """One RB sequence and its program."""

    length: int
    indices: list
    inverse: CliffordElement
    program: LogicalProgram
    outputs: tuple

    def survived(self, shot) -> bool:
        return all(shot.registers[r] == 0 for r in self.outputs)


def apply_clifford_word(b: ProgramBuilder, blocks, word) -> None:
    for g in word:
        name = g[0]
        if name == "CX":
            st.transversal_gate(b, "CX", blocks[g[1]], blocks[g[2]])
        else:
            st.transversal_gate(b, name, blocks[g[1]])


def rb_program(elements, inverse: CliffordElement, init_limit: int = 3):
    """FT-initialize two blocks, apply the sequence and its inverse, measure both."""
    b = ProgramBuilder(RB_POOL)
    blocks = [st.new_block(b), st.new_block(b)]
    anc = b.allocate(2)
    for blk, a in zip(blocks, anc):
        st.init_zero_ft_rus(b, blk, a, limit=init_limit)
    b.free(anc)
    with b.block("rb_sequence", length=len(elements)):
        for el in elements:
            with b.block("clifford"):
                apply_clifford_word(b, blocks, el.gate_word)
        with b.block("clifford", inverse=1):
            apply_clifford_word(b, blocks, inverse.gate_word)
    outs = tuple(st.measure_destructive(b, blk, "Z", prefix="cRB").log for blk in blocks)
    for r in outs:
        b.meta("expect", f"{r}=0")
    return b.build(), outs


def build_rb_circuits(lengths=RB_LENGTHS, circuits_per_length: int = 10, seed: int = 0,
                      init_limit: int = 3) -> list[RBCircuit]:
    """Random Clifford sequences followed by their exact group inverse."""
    lengths = list(lengths)
    if not lengths:
        raise ValueError("lengths must not be empty")
    table = enumerate_two_qubit_cliffords()
    rng = np.random.default_rng(seed)
    circuits = []
    for L in lengths:
        for _ in range(circuits_per_length):
            idx = rng.integers(len(table), size=L).tolist()
            elements = [table[i] for i in idx]
            total = CliffordElement.identity(2)
            for el in elements:
                total = compose(el, total)
            inv = invert(total, table)
            prog, outs = rb_program(elements, inv, init_limit)
            circuits.append(RBCircuit(L, idx, inv, prog, outs))
    return circuits


def run_rb(lengths=RB_LENGTHS, circuits_per_length: int = 10, shots: int = 100,
           noise: NoiseModel | None = None, seed: int = 0):
    """Build and run logical RB; returns ``(raw, post_selected)`` :class:`DecaySeries`."""
    noise = noise or NoiseModel()
    lengths = list(lengths)
    circuits = build_rb_circuits(lengths, circuits_per_length, seed)
    res = run_circuits(circuits, lambda c, r: c.survived(r), noise, shots, seed, lengths)
    meta = {"protocol": "rb", "seed": seed, "shots": shots, "circuits_per_length": circuits_per_length,
            "noise": asdict(noise)}
    series = []
    for tag, (surv, n, ret, cs, cn) in zip(("raw", "post-selected"), res):
        series.append(DecaySeries(lengths, surv, n, ret, cs, cn, metadata=meta | {"variant": tag}))
    return tuple(series)
