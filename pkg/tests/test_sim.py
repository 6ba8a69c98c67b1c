import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from steanebench.execute import run_program, simulate
from steanebench.ir import Bit, ProgramBuilder
from steanebench.sim import (
    FactoredState, NoiseModel, SimulationError, depolarizing_probability, idle_probability,
    state_fidelity,
)

from conftest import H, S, X, Y, Z, cnot, on, phase

ONE_Q = {"h": H, "x": X, "y": Y, "z": Z, "s": S, "sdg": S.conj().T, "t": phase(math.pi / 4),
         "tdg": phase(-math.pi / 4)}


def fresh(n):
    st = FactoredState()
    for q in range(n):
        st.allocate(q)
    return st


def test_hadamard_amplitudes():
    st = fresh(1)
    st.apply_gate("h", (0,))
    assert np.allclose(st.statevector([0]), [1 / math.sqrt(2)] * 2)


def test_bell_state_merges_factors():
    st = fresh(2)
    st.apply_gate("h", (0,))
    st.apply_gate("cx", (0, 1))
    assert np.allclose(st.statevector([0, 1]), np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert len(st.factors) == 1 and len(st.factors[0][0]) == 2


def test_t_state_phase():
    st = fresh(1)
    st.apply_gate("h", (0,))
    st.apply_gate("p", (0,), (math.pi / 4,))
    assert state_fidelity(st, [1, np.exp(1j * math.pi / 4)], [0]) == pytest.approx(1.0)


def test_errors():
    st = fresh(1)
    with pytest.raises(SimulationError):
        st.apply_gate("h", (5,))
    with pytest.raises(SimulationError):
        st.apply_gate("cx", (0,))
    with pytest.raises(SimulationError):
        st.apply_gate("bogus", (0,))
    with pytest.raises(ValueError):
        state_fidelity(st, [1, 0, 0, 0], [0])


def test_state_fidelity_examples():
    st = fresh(1)
    assert state_fidelity(st, [1, 0], [0]) == 1.0
    assert state_fidelity(st, [0, 1], [0]) == 0.0
    assert state_fidelity(st, [1, 1], [0]) == pytest.approx(0.5)


def test_measure_basis_states_and_born_rule():
    rng = np.random.default_rng(0)
    st = fresh(1)
    st.apply_gate("x", (0,))
    assert st.measure(0, rng) == 1
    ones = 0
    for _ in range(10_000):
        st = fresh(1)
        st.apply_gate("h", (0,))
        ones += st.measure(0, rng)
    assert abs(ones / 10_000 - 0.5) < 0.02


def test_x_basis_measurement():
    rng = np.random.default_rng(1)
    st = fresh(1)
    st.apply_gate("h", (0,))
    st.apply_gate("z", (0,))
    assert st.measure(0, rng, basis="X") == 1


def test_bell_correlation():
    rng = np.random.default_rng(2)
    for _ in range(200):
        st = fresh(2)
        st.apply_gate("h", (0,))
        st.apply_gate("cx", (0, 1))
        assert st.measure(0, rng) == st.measure(1, rng)
        assert st.factors == []


def _dense_run(n, ops):
    v = np.zeros(2 ** n, dtype=complex)
    v[0] = 1
    for name, qs in ops:
        if name == "cx":
            v = cnot(n, *qs) @ v
        elif name == "cz":
            v = np.diag([(-1) ** (((i >> (n - 1 - qs[0])) & (i >> (n - 1 - qs[1]))) & 1)
                         for i in range(2 ** n)]) @ v
        else:
            v = on(n, qs[0], ONE_Q[name]) @ v
    return v


def _random_ops(draw_data, n):
    names = list(ONE_Q) + ["cx", "cz"]
    ops = []
    for name, a, b in draw_data:
        name = names[name % len(names)]
        a %= n
        b %= n
        if name in ("cx", "cz"):
            if a == b:
                b = (a + 1) % n
            ops.append((name, (a, b)))
        else:
            ops.append((name, (a,)))
    return ops


@settings(max_examples=60, deadline=None)
@given(hst.integers(2, 8), hst.lists(hst.tuples(hst.integers(0, 20), hst.integers(0, 20),
                                                hst.integers(0, 20)), max_size=40))
def test_factored_matches_dense(n, data):
    ops = _random_ops(data, n)
    st = fresh(n)
    for name, qs in ops:
        st.apply_gate(name, qs)
        assert all(abs(v - 1) < 1e-10 for v in st.norms())
    # basis-state qubits carry no global phase
    assert abs(np.vdot(st.statevector(list(range(n))), _dense_run(n, ops))) == pytest.approx(1.0)


def test_factored_measurement_distribution_matches_dense():
    rng = np.random.default_rng(5)
    n = 5
    ops = _random_ops([tuple(rng.integers(0, 21, size=3)) for _ in range(30)], n)
    probs = np.abs(_dense_run(n, ops)) ** 2
    shots = 4000
    counts = np.zeros(2 ** n)
    for _ in range(shots):
        st = fresh(n)
        for name, qs in ops:
            st.apply_gate(name, qs)
        # measure in a shuffled order to exercise factor splitting
        bits = {q: st.measure(q, rng) for q in rng.permutation(n)}
        counts[sum(bits[q] << (n - 1 - q) for q in range(n))] += 1
    sigma = np.sqrt(probs * (1 - probs) / shots)
    assert np.all(np.abs(counts / shots - probs) <= 5 * sigma + 1e-12)


def test_depolarizing_conversion_and_presets():
    assert depolarizing_probability(0.01, 1) == pytest.approx(0.015)
    h1 = NoiseModel.preset("h1-1")
    assert h1.p2 == pytest.approx(5 / 4 * 8.8e-4)
    assert h1.p_spam == pytest.approx(26e-4 / 2)
    assert NoiseModel.preset("zero").is_noiseless
    with pytest.raises(ValueError):
        NoiseModel.preset("h9")
    with pytest.raises(ValueError):
        NoiseModel(p1=1.5)


def _cx_zz():
    b = ProgramBuilder(2)
    q = b.allocate(2)
    reg = b.creg("c", 2)
    b.gate("cx", q[0], q[1])
    b.measure(q[0], Bit(reg, 0))
    b.measure(q[1], Bit(reg, 1))
    return b.build()


def test_noiseless_bell_parity():
    b = ProgramBuilder(2)
    q = b.allocate(2)
    b.creg("c", 2)
    b.gate("h", q[0])
    b.gate("cx", q[0], q[1])
    b.measure(q[0], Bit("c", 0))
    b.measure(q[1], Bit("c", 1))
    recs = run_program(b.build(), NoiseModel(), shots=1000, seed=1)
    assert all(r.registers["c"] in (0, 3) for r in recs)


def test_two_qubit_depolarizing_parity():
    p2 = 0.01
    shots = 100_000
    recs = run_program(_cx_zz(), NoiseModel(p2=p2), shots=shots, seed=3)
    freq = np.mean([bin(r.registers["c"]).count("1") % 2 for r in recs])
    expected = p2 * 8 / 15
    assert abs(freq - expected) < 3 * math.sqrt(expected * (1 - expected) / shots)


def _idle_oracle(p, ticks):
    """Flip probability of |0> after ``ticks`` depolarizing steps, by density matrix."""
    rho = np.diag([1.0, 0.0]).astype(complex)
    for _ in range(ticks):
        rho = (1 - p) * rho + p / 3 * sum(P @ rho @ P.conj().T for P in (X, Y, Z))
    return rho[1, 1].real


def test_idle_noise_matches_density_matrix():
    p, ticks, shots = 0.001, 100, 20_000
    b = ProgramBuilder(2)
    q = b.allocate(2)
    b.creg("c", 1)
    b.gate("id", q[0])
    for _ in range(ticks + 1):
        b.gate("id", q[1])
    b.barrier(q)
    b.measure(q[0], Bit("c", 0))
    recs = run_program(b.build(), NoiseModel(p_idle_per_tick=p), shots=shots, seed=4)
    freq = np.mean([r.registers["c"] for r in recs])
    expected = _idle_oracle(p, ticks)
    assert expected == pytest.approx(2 / 3 * idle_probability(p, ticks))
    assert abs(freq - expected) < 3 * math.sqrt(expected * (1 - expected) / shots)


def test_single_qubit_channel_matches_depolarizing_map():
    # trajectory average of p1 noise after one gate equals the depolarizing map
    p1, shots = 0.05, 100_000
    b = ProgramBuilder(1)
    q = b.allocate(1)
    b.creg("c", 1)
    b.gate("h", q[0])
    b.gate("h", q[0])
    b.measure(q[0], Bit("c", 0))
    recs = run_program(b.build(), NoiseModel(p1=p1), shots=shots, seed=6)
    freq = np.mean([r.registers["c"] for r in recs])
    # two noisy gates, each flipping Z with probability 2p/3
    f1 = 2 * p1 / 3
    expected = 2 * f1 * (1 - f1)
    assert abs(freq - expected) < 3 * math.sqrt(expected * (1 - expected) / shots)


def test_spam_readout_flip():
    shots = 20_000
    b = ProgramBuilder(1)
    q = b.allocate(1)
    b.creg("c", 1)
    b.measure(q[0], Bit("c", 0))
    recs = run_program(b.build(), NoiseModel(p_spam=0.05), shots=shots, seed=7)
    freq = np.mean([r.registers["c"] for r in recs])
    # prep flip and readout flip
    expected = 2 * 0.05 * 0.95
    assert abs(freq - expected) < 3 * math.sqrt(expected * (1 - expected) / shots)


def test_determinism():
    prog = _cx_zz()
    a = run_program(prog, NoiseModel(p2=0.2, p_spam=0.1), shots=50, seed=9)
    b = run_program(prog, NoiseModel(p2=0.2, p_spam=0.1), shots=50, seed=9)
    assert a == b


def test_reset_returns_zero():
    rng = np.random.default_rng(0)
    st = fresh(2)
    st.apply_gate("h", (0,))
    st.apply_gate("cx", (0, 1))
    st.reset(0, rng)
    assert st.probability_one(0) == 0.0
    r, _ = simulate(_cx_zz())
    assert r.registers["c"] == 0
