import itertools
import math

import numpy as np
import pytest

from steanebench.bench import (
    MubBenchmarkResult, StateOutcome, build_rb_circuits, build_t_bench_circuits, depolarizing_logical_model,
    depolarizing_parameter, hofmann_bound, qft_reference, run_control_t_benchmark, run_rb, run_t_bench,
)
from steanebench.bench.qft import BASES, CONTROL_T_INPUTS, control_t_state_program
from steanebench.bench.tgate import t_bench_program
from steanebench.execute import run_program
from steanebench.pauli import CliffordElement, compose
from steanebench.sim import NoiseModel


# -- RB ---------------------------------------------------------------------------

def test_rb_sequences_compose_to_identity(clifford_table):
    for c in build_rb_circuits([2, 6], circuits_per_length=3, seed=5):
        total = CliffordElement.identity(2)
        for i in c.indices:
            total = compose(clifford_table[i], total)
        assert compose(c.inverse, total) == CliffordElement.identity(2)
        assert c.program.num_qubits == 16


def test_rb_noiseless_survival():
    raw, ps = run_rb([2, 6, 10], circuits_per_length=2, shots=2, seed=1)
    assert raw.survival == [1.0, 1.0, 1.0] == ps.survival
    assert raw.metadata["variant"] == "raw" and ps.metadata["variant"] == "post-selected"


def test_rb_rejects_empty_lengths():
    with pytest.raises(ValueError):
        build_rb_circuits([])


# -- T benchmark ----------------------------------------------------------------

@pytest.mark.parametrize("method", ["one", "two"])
def test_t_bench_noiseless(method):
    raw, ps = run_t_bench([4, 8], method=method, circuits_per_length=2, shots=2, seed=2)
    assert raw.survival == [1.0, 1.0] == ps.survival
    assert raw.metadata["protocol"] == "t-bench"


def test_t_bench_long_twirled_sequence():
    for c in build_t_bench_circuits([16], "two", circuits_per_length=2, seed=9):
        assert any(c.twirl)
        assert all(c.survived(r) for r in run_program(c.program, shots=2, seed=0))


def test_t_bench_ideal_outcome_alternates():
    assert [t_bench_program(L)[2] for L in (4, 8, 12, 16)] == [1, 0, 1, 0]


def test_t_bench_program_width():
    assert t_bench_program(4)[0].num_qubits == 15


def test_t_bench_rejects_bad_lengths():
    with pytest.raises(ValueError):
        build_t_bench_circuits([4, 6])
    with pytest.raises(ValueError):
        t_bench_program(5)
    with pytest.raises(ValueError):
        build_t_bench_circuits([])


def test_z_coin_reproduces_dephasing_decay():
    eps, L, shots = 0.1, 4, 2000
    raw, _ = run_t_bench([L], circuits_per_length=1, shots=shots, seed=4, twirl=False, z_error_rate=eps)
    p = 0.5 + 0.5 * (1 - 2 * eps) ** L
    assert abs(raw.survival[0] - p) < 3 * math.sqrt(p * (1 - p) / shots)


def test_partial_ft_t_bench_noiseless():
    raw, _ = run_t_bench([4], circuits_per_length=1, shots=2, seed=0, rus_limit=1)
    assert raw.survival == [1.0]
    assert raw.metadata["rus_limit"] == 1


# -- QFT reference and Hofmann arithmetic ------------------------------------------

def test_qft_reference_examples():
    assert qft_reference(0, "fourier").expected_value == 0
    assert qft_reference(3, "fourier").expected_value == 5
    assert qft_reference(1, "computational").unrotation[0] == pytest.approx(-math.pi / 4)
    assert qft_reference(6, "computational").flips == (1, 1, 0)
    with pytest.raises(ValueError):
        qft_reference(8, "fourier")
    with pytest.raises(ValueError):
        qft_reference(0, "hadamard")


def test_hofmann_table_rows():
    assert round(hofmann_bound(0.78, 0.66, 8)[1], 2) == 0.50
    assert round(hofmann_bound(0.72, 0.65, 8)[1], 2) == 0.44
    assert round(hofmann_bound(0.79, 0.79, 4)[1], 2) == 0.66
    f_lo, f_avg = hofmann_bound(0.78, 0.66, 8)
    assert f_lo == 0.78 + 0.66 - 1.0
    assert f_avg == (8 * f_lo + 1.0) / 9.0


def test_mub_result_arithmetic():
    states = [StateOutcome("computational", str(x), 10, 8, 5, 5) for x in range(2)]
    states += [StateOutcome("fourier", "0", 10, 6, 4, 3), StateOutcome("fourier", "1", 10, 7, 0, 0)]
    res = MubBenchmarkResult(8, states)
    assert res.F1 == pytest.approx(0.8) and res.F2 == pytest.approx(0.65)
    assert res.F_lo == res.F1 + res.F2 - 1.0
    assert res.F_avg_bound == (8 * res.F_lo + 1) / 9
    assert res.F1_ps == 1.0 and res.F2_ps == pytest.approx(0.75)
    assert res.retention == pytest.approx(14 / 40)
    assert res.undefined_cells == ["fourier:1"]


# -- control-T ----------------------------------------------------------------------

def test_control_t_inputs_cover_both_bases():
    labels = {(i.basis, i.label) for i in CONTROL_T_INPUTS}
    assert ("z-control", "0+") in labels and ("x-control", "+1") in labels
    assert len(labels) == 8


def test_control_t_expected_outcomes():
    # |0>|+> is untouched; |+>|1> becomes |T>|1>, which the un-rotation maps back to |+>|1>
    by_label = {i.label: i for i in CONTROL_T_INPUTS}
    assert control_t_state_program(by_label["0+"])[2] == (0, 0)
    assert control_t_state_program(by_label["+1"])[2] == (0, 1)
    assert control_t_state_program(by_label["1-"])[2] == (1, 1)


def test_control_t_noiseless():
    res = run_control_t_benchmark(shots_per_state=2, seed=1)
    assert res.d == 4
    assert [s.fidelity for s in res.states] == [1.0] * 8


def test_benchmarks_reject_zero_shots():
    with pytest.raises(ValueError):
        run_control_t_benchmark(shots_per_state=0)


# -- logical depolarizing model -------------------------------------------------

def test_depolarizing_parameter():
    assert depolarizing_parameter(0.990, 2) == pytest.approx(0.020)
    assert depolarizing_parameter(0.9980, 4) == pytest.approx(4 * 0.002 / 3)


def test_model_noiseless():
    pred = depolarizing_logical_model(1.0, 1.0, shots=200)
    assert pred.F1 == pytest.approx(1.0) and pred.F2 == pytest.approx(1.0)


def test_model_rejects_bad_fidelity():
    with pytest.raises(ValueError):
        depolarizing_logical_model(0.0, 0.99)


_PAULIS = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
_HAD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _op(n, ops):
    out = np.eye(1)
    for q in range(n):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


class _Rho:
    """Exact four-qubit density matrix version of the model circuit."""

    def __init__(self, eps1, eps2):
        self.rho = np.zeros((16, 16), dtype=complex)
        self.rho[0, 0] = 1
        self.eps1, self.eps2 = eps1, eps2

    def u(self, m):
        self.rho = m @ self.rho @ m.conj().T

    def dep(self, qubits, eps):
        terms = [_op(4, dict(zip(qubits, ps))) for ps in itertools.product(_PAULIS, repeat=len(qubits))]
        mixed = sum(t @ self.rho @ t.conj().T for t in terms) / len(terms)
        self.rho = (1 - eps) * self.rho + eps * mixed

    def one(self, k, m):
        self.u(_op(4, {k: m}))

    def phase(self, k, theta, noisy):
        self.one(k, np.diag([1, np.exp(1j * theta)]))
        if noisy:
            self.dep([k], self.eps1)

    def t(self, k, sign=1):
        self.phase(k, sign * math.pi / 4, True)

    def cx(self, c, t):
        p0, p1 = np.diag([1.0, 0]), np.diag([0, 1.0])
        self.u(_op(4, {c: p0}) + _op(4, {c: p1, t: _PAULIS[1]}))
        self.dep([c, t], self.eps2)


def _oracle_fidelity(ref, eps1, eps2):
    s = _Rho(eps1, eps2)
    for j in range(3):
        if ref.flips[j]:
            s.one(j, _PAULIS[1])
        if ref.prep_phases is not None:
            s.one(j, _HAD)
            k = ref.prep_phases[j] / (math.pi / 4)
            s.phase(j, ref.prep_phases[j], abs(k - round(k)) < 1e-9 and round(k) % 2 == 1)

    def cs(a, t):
        s.t(a)
        s.t(t)
        s.cx(a, t)
        s.t(t, -1)
        s.cx(a, t)

    s.one(0, _HAD)
    cs(1, 0)
    # temporary AND on ancilla 3 for controls 2 and 0
    s.one(3, _HAD)
    s.t(3)
    s.cx(2, 3)
    s.t(3, -1)
    s.cx(0, 3)
    s.t(3)
    s.cx(2, 3)
    s.t(3, -1)
    s.cx(0, 3)
    s.one(3, _HAD)
    s.one(3, np.diag([1, 1j]))
    s.t(3)
    s.one(3, _HAD)
    p0, p1 = _op(4, {3: np.diag([1.0, 0])}), _op(4, {3: np.diag([0, 1.0])})
    kept = p0 @ s.rho @ p0
    flip = _op(4, {3: _PAULIS[1]}) @ p1
    s.rho = flip @ s.rho @ flip.conj().T
    cz = np.diag([-1.0 if (i >> 3) & (i >> 1) & 1 else 1.0 for i in range(16)])
    s.u(cz)
    s.dep([0, 2], eps2)
    s.rho = s.rho + kept
    s.one(1, _HAD)
    cs(2, 1)
    s.one(2, _HAD)
    if ref.unrotation is not None:
        for j in range(3):
            k = ref.unrotation[j] / (math.pi / 4)
            s.phase(j, ref.unrotation[j], abs(k - round(k)) < 1e-9 and round(k) % 2 == 1)
            s.one(j, _HAD)
    target = sum(b << (3 - j) for j, b in enumerate(ref.expected))
    return float(np.real(s.rho[target, target] + s.rho[target | 1, target | 1]))


def test_cz_oracle_indexing():
    # qubit 0 is the most significant of four
    cz = np.diag([-1.0 if (i >> 3) & (i >> 1) & 1 else 1.0 for i in range(16)])
    assert cz[0b1010, 0b1010] == -1 and cz[0b1000, 0b1000] == 1


def test_model_matches_density_matrix_oracle():
    f_cnot, f_t, shots = 0.97, 0.95, 20_000
    pred = depolarizing_logical_model(f_cnot, f_t, shots=shots, seed=3)
    eps1, eps2 = depolarizing_parameter(f_t, 2), depolarizing_parameter(f_cnot, 4)
    for basis in BASES:
        for x in (0, 3, 5):
            want = _oracle_fidelity(qft_reference(x, basis), eps1, eps2)
            got = pred.per_state[f"{basis}:{x}"]
            # trajectory fidelities are bounded in [0, 1], so sigma <= 0.5 / sqrt(shots)
            assert abs(got - want) < 5 * 0.5 / math.sqrt(shots), (basis, x, got, want)
