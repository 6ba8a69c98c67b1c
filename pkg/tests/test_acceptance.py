"""One test per acceptance criterion, at the stated tolerances."""

import math

import numpy as np
import pytest
from corpus import random_program

from steanebench import steane as st
from steanebench.bench import (
    DecaySeries, depolarizing_logical_model, fit_rb, fit_t_decay, hofmann_bound, run_control_t_benchmark,
    run_qft_benchmark, run_rb, run_t_bench,
)
from steanebench.execute import run_program, simulate
from steanebench.ir import ProgramBuilder
from steanebench.pauli import CliffordElement, compose, invert
from steanebench.qasm import emit_qasm, parse_qasm
from steanebench.resources import count_resources
from steanebench.sim import NoiseModel

pytestmark = pytest.mark.acceptance


def test_1_noiseless_exactness():
    raw, ps = run_rb([2, 6, 10, 14], circuits_per_length=2, shots=2, seed=0)
    assert raw.survival == ps.survival == [1.0] * 4
    for method in ("one", "two"):
        raw, _ = run_t_bench([4, 8, 12, 16], method, circuits_per_length=2, shots=2, seed=0)
        assert raw.survival == [1.0] * 4
    for method in st.QFT_METHODS:
        res = run_qft_benchmark(method, shots_per_state=2, seed=0)
        assert len(res.states) == 16 and res.F1 == res.F2 == 1.0
    res = run_control_t_benchmark(shots_per_state=2, seed=0)
    assert [s.fidelity for s in res.states] == [1.0] * 8


def test_2_clifford_group(clifford_table):
    assert len(clifford_table) == 11520
    rng = np.random.default_rng(0)
    ident = CliffordElement.identity(2)
    for _ in range(200):
        a, b = (clifford_table[int(i)] for i in rng.integers(len(clifford_table), size=2))
        assert compose(a, b) in clifford_table
        assert compose(invert(a, clifford_table), a) == ident


def _decode_after_error(state, basis, qubit, pauli):
    b = ProgramBuilder(7)
    blk = st.new_block(b)
    st.encode_nonft(b, blk, state)
    b.gate(pauli, blk[qubit])
    dec = st.measure_destructive(b, blk, basis)
    return dec.read(simulate(b.build(), seed=qubit)[0]).decoded_logical


def _cnot_fault_decodes(blk_idx, qubit, pauli, before, basis):
    b = ProgramBuilder(14)
    blocks = [st.new_block(b), st.new_block(b)]
    st.encode_nonft(b, blocks[0], "+")
    st.encode_nonft(b, blocks[1], "0")
    if before:
        b.gate(pauli, blocks[blk_idx][qubit])
    st.transversal_gate(b, "CX", *blocks)
    if not before:
        b.gate(pauli, blocks[blk_idx][qubit])
    decs = [st.measure_destructive(b, blk, basis) for blk in blocks]
    prog = b.build()
    return [tuple(d.read(simulate(prog, seed=s)[0]).decoded_logical for d in decs) for s in range(2)]


def test_3_decoder_and_fault_tolerance():
    for state, basis, ideal in (("0", "Z", 0), ("+", "X", 0)):
        for q in range(7):
            for p in ("x", "y", "z"):
                assert _decode_after_error(state, basis, q, p) == ideal
    assert st.verification_passes(st.VERIFY_SUPPORT)
    for blk_idx in (0, 1):
        for q in range(7):
            for p in ("x", "y", "z"):
                for before in (True, False):
                    for basis in ("Z", "X"):
                        # the ideal state is a logical Bell pair
                        assert all(a == b for a, b in _cnot_fault_decodes(blk_idx, q, p, before, basis))


def test_4_depolarizing_logical_model():
    pred = depolarizing_logical_model(f_cnot=0.9980, f_t=0.990, shots=100_000, seed=0)
    assert abs(pred.F1 - 0.898) <= 0.01
    assert abs(pred.F2 - 0.889) <= 0.01


def test_5_hofmann_arithmetic():
    assert f"{hofmann_bound(0.78, 0.66, 8)[1]:.2f}" == "0.50"
    assert f"{hofmann_bound(0.72, 0.65, 8)[1]:.2f}" == "0.44"


def test_6_resource_counts():
    anc = count_resources(st.logical_qft3("ancilla")[0])
    rec = count_resources(st.logical_qft3("recursive")[0])
    assert (anc.injections_min, anc.injections_max) == (11, 11)
    assert anc.physical_qubits == 28
    assert (rec.injections_min, rec.injections_max) == (9, 12)
    assert (rec.logical_tq_min, rec.logical_tq_max) == (15, 18)
    assert 0.85 * 256 <= anc.physical_tq_min <= anc.physical_tq_max <= 1.15 * 263
    assert 0.85 * 237 <= rec.physical_tq_min <= rec.physical_tq_max <= 1.15 * 291
    assert (anc.logical_tq_min, anc.logical_tq_max) == (13, 14)


def _sampled(rng, curve, lengths, circuits=10, shots=100):
    surv, n, cs, cn = [], [], [], []
    for p in curve:
        hits = rng.binomial(shots, p, size=circuits)
        cs.append((hits / shots).tolist())
        cn.append([shots] * circuits)
        surv.append(hits.sum() / (shots * circuits))
        n.append(shots * circuits)
    return DecaySeries(lengths, surv, n, None, cs, cn)


def test_7_fit_recovery_coverage():
    rng = np.random.default_rng(7)
    reps = 50
    rb_hits = t_hits = 0
    f, eps = 0.99, 0.01
    rb_l, t_l = [2, 6, 10, 14], [4, 8, 12, 16]
    for k in range(reps):
        rb = fit_rb(_sampled(rng, [0.75 * f ** L + 0.25 for L in rb_l], rb_l), 1.5, n_boot=200, seed=k)
        rb_hits += abs(rb.params["f"] - f) <= 3 * rb.stderr["f"]
        t = fit_t_decay(_sampled(rng, [0.5 + 0.5 * (1 - 2 * eps) ** L for L in t_l], t_l), n_boot=200, seed=k)
        t_hits += abs(t.params["eps"] - eps) <= 3 * t.stderr["eps"]
    assert rb_hits / reps >= 0.95
    assert t_hits / reps >= 0.95


def test_8_dephasing_oracle():
    eps, shots = 0.05, 10_000
    raw, _ = run_t_bench([4, 8], circuits_per_length=1, shots=shots, seed=8, twirl=False, z_error_rate=eps)
    for L, p_hat, n in zip(raw.lengths, raw.survival, raw.shots):
        p = 0.5 + 0.5 * (1 - 2 * eps) ** L
        assert n == shots
        assert abs(p_hat - p) <= 3 * math.sqrt(p * (1 - p) / n), (L, p_hat, p)


def _ps_not_worse(p_raw, n_raw, p_ps, n_ps):
    if n_ps == 0:
        return True
    var = max(p_raw * (1 - p_raw), 1.0 / n_raw)
    return p_ps >= p_raw - 3 * math.sqrt(var / n_ps)


def _check_9a_postselection_not_worse():
    noise = NoiseModel.preset("h1-1")
    cells = []
    raw, ps = run_rb([2, 6, 10, 14], circuits_per_length=2, shots=50, noise=noise, seed=91)
    cells += list(zip(raw.survival, raw.shots, ps.survival, ps.shots))
    for method in ("one", "two"):
        raw, ps = run_t_bench([4, 8, 12, 16], method, circuits_per_length=2, shots=50, noise=noise, seed=92)
        cells += list(zip(raw.survival, raw.shots, ps.survival, ps.shots))
    mubs = [run_qft_benchmark(m, noise, shots_per_state=10, seed=93) for m in st.QFT_METHODS]
    mubs.append(run_control_t_benchmark(noise, shots_per_state=20, seed=94))
    for res in mubs:
        cells += [(s.fidelity, s.shots, s.fidelity_ps or 0.0, s.retained) for s in res.states]
    bad = [c for c in cells if not _ps_not_worse(*c)]
    return [] if not bad else [f"9a: post-selected below raw in {bad}"]


def _check_9b_rus_limit_ordering():
    noise = NoiseModel.preset("h2-1", 2.0)
    fid, ret = {}, {}
    for limit in (1, 2):
        raw, _ = run_t_bench([4, 8, 12, 16], "two", circuits_per_length=5, shots=100, noise=noise, seed=0,
                             rus_limit=limit)
        fid[limit] = fit_t_decay(raw, n_boot=100, seed=0).derived["F_avg"]
        ret[limit] = raw.retention[1]
    n = 5 * 100
    errors = []
    if not ret[2] - ret[1] > 3 * math.sqrt(ret[1] * (1 - ret[1]) / n + ret[2] * (1 - ret[2]) / n):
        errors.append(f"9b: retention {ret}")
    if not fid[1] > fid[2]:
        errors.append(f"9b: fidelity {fid}")
    return errors


def _check_9c_method_two_under_idle_noise():
    noise = NoiseModel(p_idle_per_tick=2e-3)
    fits = {}
    for method in ("one", "two"):
        raw, _ = run_t_bench([4, 8, 12, 16], method, circuits_per_length=3, shots=100, noise=noise, seed=95)
        fits[method] = fit_t_decay(raw, n_boot=100, seed=0)
    f1, f2 = (fits[m].derived["F_avg"] for m in ("one", "two"))
    s1, s2 = (fits[m].stderr["F_avg"] for m in ("one", "two"))
    return [] if f2 >= f1 - 3 * math.hypot(s1, s2) else [f"9c: method two {f2} vs method one {f1}"]


def test_9_hardware_shape_checks():
    errors = (_check_9a_postselection_not_worse() + _check_9b_rus_limit_ordering()
              + _check_9c_method_two_under_idle_noise())
    assert not errors, errors


def test_10_qasm_interchange():
    rng = np.random.default_rng(10)
    noise = NoiseModel(p1=0.05, p2=0.05, p_spam=0.02, p_idle_per_tick=0.01)
    for k in range(1000):
        prog = random_program(rng)
        text = emit_qasm(prog)
        back = parse_qasm(text)
        assert emit_qasm(back) == text
        assert run_program(back, noise, shots=2, seed=k) == run_program(prog, noise, shots=2, seed=k)
