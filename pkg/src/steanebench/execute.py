"""Trajectory executor for :class:`LogicalProgram` under stochastic Pauli noise.

Noise grammar, per shot:

* after every executed gate, a uniformly random non-identity Pauli on the
  gate's support with probability ``p1`` (3 choices) or ``p2`` (15 choices);
* idle noise: every qubit keeps its own tick counter and gates start as soon
  as all their qubits are free.  A live qubit that waits ``k`` ticks before
  its next operation receives single-qubit depolarizing noise composed over
  ``k`` ticks;
* SPAM: an X flip with probability ``p_spam`` on the first use after reset,
  and a readout flip with probability ``p_spam``;
* crosstalk: each measurement depolarizes every other live qubit with
  probability ``crosstalk``.

Program metadata ``// @discard reg`` and ``// @detect reg`` name registers
whose nonzero final value marks a shot as discarded or syndrome-flagged.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .ir import (
    Assign, Barrier, BlockBegin, BlockEnd, Comment, Gate, If, LogicalProgram,
    Measure, Reset, require_valid,
)
from .sim import (
    FactoredState, NoiseModel, apply_random_pauli, idle_probability,
)

_GATE, _MEASURE, _RESET, _BARRIER, _ASSIGN = range(5)


@dataclass
class ShotRecord:
    """Outcome of one trajectory.

    Attributes:
        shot: shot index.
        registers: final integer value of every classical register.
        transcript: ``(qubit, register, bit, outcome)`` per executed measurement.
        discarded: a discard register (RUS exhaustion, rejected flag) is nonzero.
        detected: a syndrome register is nonzero.
        tq_count: executed two-qubit gates.
        peak_width: largest entangled factor seen, in qubits.
    """

    shot: int
    registers: dict
    transcript: list = field(default_factory=list)
    discarded: bool = False
    detected: bool = False
    tq_count: int = 0
    peak_width: int = 0

    def bit(self, reg: str, index: int = 0) -> int:
        return (self.registers[reg] >> index) & 1


class CompiledProgram:
    """Program lowered to integer qubit ids and register slots."""

    def __init__(self, program: LogicalProgram):
        require_valid(program)
        self.program = program
        offset, self.qubit_id = 0, {}
        for name, width in program.qregs:
            for i in range(width):
                self.qubit_id[(name, i)] = offset + i
            offset += width
        self.num_qubits = offset
        self.creg_names = [n for n, _ in program.cregs]
        self.creg_slot = {n: k for k, n in enumerate(self.creg_names)}
        self.creg_width = [w for _, w in program.cregs]
        self.ops = []
        self.op_statement = []
        for i, st in enumerate(program.statements):
            op = self._lower(st)
            if op is not None:
                self.ops.append(op)
                self.op_statement.append(i)
        self.discard_slots = [self.creg_slot[r] for r in program.meta_values("discard")]
        self.detect_slots = [self.creg_slot[r] for r in program.meta_values("detect")]

    def _bit(self, b):
        return (self.creg_slot[b.reg], b.index)

    def _lower(self, st, cond=None):
        if isinstance(st, (Comment, BlockBegin, BlockEnd)):
            return None
        if isinstance(st, If):
            return self._lower(st.body, (self.creg_slot[st.creg], st.value))
        if isinstance(st, Gate):
            qs = tuple(self.qubit_id[q] for q in st.qubits)
            return (_GATE, cond, st.name, qs, st.params)
        if isinstance(st, Measure):
            return (_MEASURE, cond, self.qubit_id[st.qubit], self._bit(st.bit))
        if isinstance(st, Reset):
            return (_RESET, cond, self.qubit_id[st.qubit])
        if isinstance(st, Barrier):
            return (_BARRIER, cond, tuple(self.qubit_id[q] for q in st.qubits))
        if isinstance(st, Assign):
            ops = tuple(o if o in (0, 1) else self._bit(o) for o in st.operands)
            return (_ASSIGN, cond, st.op, self._bit(st.target), ops)
        raise TypeError(f"cannot execute {st!r}")


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(shot)]))


def _read(regs, operand):
    if isinstance(operand, int):
        return operand
    slot, index = operand
    return (regs[slot] >> index) & 1


def execute_shot(compiled: CompiledProgram, noise: NoiseModel, rng, shot: int = 0,
                 faults: dict | None = None):
    """Run one trajectory and return ``(ShotRecord, FactoredState)``.

    ``faults`` maps a statement index to a list of ``(qubit_id, pauli)`` pairs
    applied right after that statement executes (used for fault injection).
    """
    state = FactoredState()
    n = compiled.num_qubits
    for q in range(n):
        state.allocate(q)
    regs = [0] * len(compiled.creg_names)
    transcript = []
    tq = 0
    noisy = not noise.is_noiseless
    tick = [0] * n
    live = [False] * n
    fresh = [True] * n

    def idle(q, start):
        gap = start - tick[q]
        if live[q] and gap > 0 and noise.p_idle_per_tick:
            if rng.random() < idle_probability(noise.p_idle_per_tick, gap):
                apply_random_pauli(state, (q,), rng)

    def prep(q):
        if fresh[q]:
            fresh[q] = False
            if noise.p_spam and rng.random() < noise.p_spam:
                state.apply_gate("x", (q,))

    for k, op in enumerate(compiled.ops):
        cond = op[1]
        if cond is not None and regs[cond[0]] != cond[1]:
            continue
        kind = op[0]
        if kind == _GATE:
            _, _, name, qs, params = op
            if noisy:
                start = max(tick[q] for q in qs)
                for q in qs:
                    prep(q)
                    idle(q, start)
            state.apply_gate(name, qs, params)
            if len(qs) == 2:
                tq += 1
            if noisy:
                p = noise.p2 if len(qs) == 2 else (noise.p1 if name != "id" else 0.0)
                if p and rng.random() < p:
                    apply_random_pauli(state, qs, rng)
                for q in qs:
                    tick[q] = start + 1
                    live[q] = True
        elif kind == _MEASURE:
            _, _, q, (slot, index) = op
            if noisy:
                prep(q)
                idle(q, tick[q])
            outcome = state.measure(q, rng)
            if noisy:
                if noise.p_spam and rng.random() < noise.p_spam:
                    outcome ^= 1
                if noise.crosstalk:
                    for s in range(n):
                        if s != q and live[s] and rng.random() < noise.crosstalk:
                            apply_random_pauli(state, (s,), rng)
                tick[q] += 1
                live[q] = False
            regs[slot] = (regs[slot] & ~(1 << index)) | (outcome << index)
            transcript.append((q, compiled.creg_names[slot], index, outcome))
        elif kind == _RESET:
            q = op[2]
            state.reset(q, rng)
            live[q] = False
            fresh[q] = True
        elif kind == _BARRIER:
            qs = op[2]
            top = max(tick[q] for q in qs)
            for q in qs:
                idle(q, top)
                tick[q] = top
        else:  # _ASSIGN
            _, _, aop, (slot, index), operands = op
            vals = [_read(regs, o) for o in operands]
            if aop == "=":
                v = vals[0]
            elif aop == "^":
                v = int(np.bitwise_xor.reduce(vals))
            elif aop == "&":
                v = int(all(vals))
            else:
                v = int(any(vals))
            regs[slot] = (regs[slot] & ~(1 << index)) | (v << index)
        if faults and compiled.op_statement[k] in faults:
            for q, pauli in faults[compiled.op_statement[k]]:
                state.apply_gate(pauli, (q,))

    record = ShotRecord(
        shot=shot,
        registers={name: regs[i] for i, name in enumerate(compiled.creg_names)},
        transcript=transcript,
        discarded=any(regs[s] for s in compiled.discard_slots),
        detected=any(regs[s] for s in compiled.detect_slots),
        tq_count=tq,
        peak_width=state.peak_width,
    )
    return record, state


def run_program(program: LogicalProgram, noise: NoiseModel | None = None, shots: int = 1,
                seed: int | None = None) -> list[ShotRecord]:
    """Execute ``shots`` independent trajectories.

    Shot ``i`` draws from its own stream seeded by ``(seed, i)``, so results do
    not depend on execution order.  ``seed`` defaults to ``noise.seed`` or 0.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    noise = noise or NoiseModel()
    if seed is None:
        seed = noise.seed if noise.seed is not None else 0
    compiled = program if isinstance(program, CompiledProgram) else CompiledProgram(program)
    return [execute_shot(compiled, noise, shot_rng(seed, i), shot=i)[0] for i in range(shots)]


def simulate(program: LogicalProgram, noise: NoiseModel | None = None, seed: int = 0,
             shot: int = 0, faults: dict | None = None):
    """Run a single shot and also return the final state (for verification)."""
    compiled = CompiledProgram(program)
    return execute_shot(compiled, noise or NoiseModel(), shot_rng(seed, shot), shot, faults)


def qubit_ids(program: LogicalProgram, qubits) -> list[int]:
    """Integer ids of IR qubits, matching the executor's numbering."""
    offset, table = 0, {}
    for name, width in program.qregs:
        table[name] = offset
        offset += width
    return [table[q.reg] + q.index for q in qubits]


# -- serialization ----------------------------------------------------------

def records_to_jsonl(records) -> str:
    """One JSON object per shot mapping register name to its integer value."""
    return "".join(json.dumps(r.registers, sort_keys=True) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def records_to_csv(records, program_id: str) -> str:
    """Aggregate histogram with columns program_id, shots, register, value, count."""
    hist: Counter = Counter()
    for r in records:
        for name, value in r.registers.items():
            hist[(name, value)] += 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["program_id", "shots", "register", "value", "count"])
    for (name, value), count in sorted(hist.items()):
        w.writerow([program_id, len(records), name, value, count])
    return buf.getvalue()
