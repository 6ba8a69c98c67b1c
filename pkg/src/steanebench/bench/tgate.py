"""Logical T-gate decay benchmark.

Each circuit prepares |+̄>, applies L teleported T gates and measures X̄.
With L a multiple of 4, T^L = Z^(L/4) so the ideal outcome is (L/4) mod 2.
The optional twirl applies S̄X̄ to each injected |T̄> with probability 1/2;
S X |T> equals |T> up to a global phase, so no frame update is needed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..ir import Bit, LogicalProgram, ProgramBuilder
from ..sim import NoiseModel
from .. import steane as st
from .data import DecaySeries
from .runner import run_circuits

T_LENGTHS = (4, 8, 12, 16)


@dataclass
class TCircuit:
    length: int
    twirl: list
    program: LogicalProgram
    output: str
    ideal: int

    def survived(self, shot) -> bool:
        return shot.registers[self.output] == self.ideal


def _coin_angle(eps: float) -> float:
    # Ry(theta)|0> gives outcome 1 with probability sin^2(theta/2)
    return 2.0 * math.asin(math.sqrt(eps))


def t_bench_program(length: int, method: str = "two", twirl_bits=None, z_error_rate: float | None = None,
                    rus_limit: int | None = None, coherent_z: float | None = None,
                    init_limit: int = 3):
    """Program for one T-benchmark circuit.

    Args:
        length: number of T gates (multiple of 4).
        method: teleportation gadget, ``"one"`` or ``"two"``.
        twirl_bits: one 0/1 entry per T selecting the S̄X̄ twirl.
        z_error_rate: if set, a Z̄ error is applied after each T with this
            probability, drawn from a physical coin qubit.
        rus_limit: if set, the |T̄> resource comes from the partially
            fault-tolerant flagged preparation with this repetition limit.
        coherent_z: if set, a logical Rz of this angle is applied to every
            injected |T̄> before the twirl (coherent error model).
    """
    if length % 4:
        raise ValueError("T-benchmark lengths must be multiples of 4")
    twirl_bits = list(twirl_bits or [0] * length)
    extra = (1 if z_error_rate else 0) + (2 if rus_limit else 0)
    b = ProgramBuilder(15 + extra)
    b.meta("t_method", method)
    data = st.new_block(b)
    anc = b.allocate(1)
    st.init_zero_ft_rus(b, data, anc[0], limit=init_limit)
    b.free(anc)
    st.transversal_gate(b, "H", data)

    def prepare(tw):
        def _prep(bb, blk):
            if rus_limit:
                aux = bb.allocate(2)
                st.prepare_t_state_partial_ft(bb, blk, aux[0], aux[1], rus_limit=rus_limit)
                bb.free(aux)
            else:
                st.encode_nonft(bb, blk, st.QUARTER)
            if coherent_z:
                # logical Rz(delta) = P(delta) up to phase; Z̄ support qubits carry it
                for q in st.LOGICAL_SUPPORT:
                    bb.gate("rz", blk[q], params=(coherent_z,))
            if tw:
                with bb.block("twirl", element="SX"):
                    st.transversal_gate(bb, "X", blk)
                    st.transversal_gate(bb, "S", blk)
        return _prep

    with b.block("t_sequence", length=length):
        for i in range(length):
            data, _ = st.teleport_p_gate(b, data, st.QUARTER, method=method, prepare=prepare(twirl_bits[i]))
            if z_error_rate:
                coin = b.allocate(1)[0]
                reg = b.fresh_creg("coin", 1)
                b.gate("ry", coin, params=(_coin_angle(z_error_rate),))
                b.measure(coin, Bit(reg, 0))
                with b.conditional(reg, 1):
                    st.transversal_gate(b, "Z", data)
                b.free([coin])
    out = st.measure_destructive(b, data, "X", prefix="cOut")
    ideal = (length // 4) % 2
    b.meta("expect", f"{out.log}={ideal}")
    return b.build(), out.log, ideal


def build_t_bench_circuits(lengths=T_LENGTHS, method: str = "two", circuits_per_length: int = 10,
                           seed: int = 0, twirl: bool = True, z_error_rate: float | None = None,
                           rus_limit: int | None = None, coherent_z: float | None = None) -> list[TCircuit]:
    lengths = list(lengths)
    if not lengths:
        raise ValueError("lengths must not be empty")
    bad = [L for L in lengths if L % 4]
    if bad:
        raise ValueError(f"T-benchmark lengths must be multiples of 4, got {bad}")
    rng = np.random.default_rng(seed)
    circuits = []
    for L in lengths:
        for _ in range(circuits_per_length):
            bits = rng.integers(2, size=L).tolist() if twirl else [0] * L
            prog, out, ideal = t_bench_program(L, method, bits, z_error_rate, rus_limit, coherent_z)
            circuits.append(TCircuit(L, bits, prog, out, ideal))
    return circuits


def run_t_bench(lengths=T_LENGTHS, method: str = "two", circuits_per_length: int = 10, shots: int = 100,
                noise: NoiseModel | None = None, seed: int = 0, twirl: bool = True,
                z_error_rate: float | None = None, rus_limit: int | None = None,
                coherent_z: float | None = None):
    """Build and run the T benchmark; returns ``(raw, post_selected)`` series."""
    noise = noise or NoiseModel()
    lengths = list(lengths)
    circuits = build_t_bench_circuits(lengths, method, circuits_per_length, seed, twirl,
                                      z_error_rate, rus_limit, coherent_z)
    res = run_circuits(circuits, lambda c, r: c.survived(r), noise, shots, seed, lengths)
    meta = {"protocol": "t-bench", "method": method, "seed": seed, "shots": shots,
            "circuits_per_length": circuits_per_length, "twirl": twirl, "noise": asdict(noise),
            "z_error_rate": z_error_rate, "rus_limit": rus_limit}
    series = []
    for tag, (surv, n, ret, cs, cn) in zip(("raw", "post-selected"), res):
        series.append(DecaySeries(lengths, surv, n, ret, cs, cn, metadata=meta | {"variant": tag}))
    return tuple(series)
