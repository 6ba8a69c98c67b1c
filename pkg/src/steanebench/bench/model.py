"""Depolarizing model of the ancilla-assisted QFT at the logical level.

Each logical qubit is a single unencoded qubit.  One-qubit depolarizing
noise follows every T/T†, and two-qubit depolarizing noise follows every
CNOT and every executed CZ.  Trajectories are simulated in a batch; the
fidelity of a trajectory is the exact probability of the ideal readout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qft import BASES, DIM, qft_reference

N = 4  # three data qubits and the AND ancilla (qubit 3)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def depolarizing_parameter(f_avg: float, d: int) -> float:
    """Depolarizing ``eps`` for average gate fidelity ``f_avg``: ``1 - F = (d - 1) eps / d``."""
    return d * (1.0 - f_avg) / (d - 1)


def _phase(theta):
    return np.diag([1.0, np.exp(1j * theta)])


def _embed(u, k):
    ops = [np.eye(2)] * N
    ops[k] = u
    out = ops[0]
    for o in ops[1:]:
        out = np.kron(out, o)
    return out


def _bits(k):
    return (np.arange(2 ** N) >> (N - 1 - k)) & 1


def _cx(c, t):
    idx = np.arange(2 ** N)
    src = idx ^ (_bits(c) << (N - 1 - t))
    m = np.zeros((2 ** N, 2 ** N))
    m[src, idx] = 1
    return m


def _cz(a, b):
    return np.diag(np.where(_bits(a) & _bits(b), -1.0, 1.0)).astype(complex)


class _Batch:
    """``n`` four-qubit state vectors with stochastic Pauli noise."""

    def __init__(self, n, rng, eps1, eps2):
        self.psi = np.zeros((n, 2 ** N), dtype=complex)
        self.psi[:, 0] = 1.0
        self.rng = rng
        self.eps1 = eps1
        self.eps2 = eps2
        idx = np.arange(2 ** N)
        self._xperm = [idx ^ (1 << (N - 1 - k)) for k in range(N)]
        self._zsign = [np.where(_bits(k), -1.0, 1.0) for k in range(N)]

    def apply(self, m, rows=None):
        if rows is None:
            self.psi = self.psi @ m.T
        else:
            self.psi[rows] = self.psi[rows] @ m.T

    def _pauli(self, rows, k, p):
        # p: 0 I, 1 X, 2 Y, 3 Z (global phases dropped)
        xs = rows[(p == 1) | (p == 2)]
        if xs.size:
            self.psi[xs] = self.psi[xs][:, self._xperm[k]]
        zs = rows[(p == 2) | (p == 3)]
        if zs.size:
            self.psi[zs] *= self._zsign[k]

    def depolarize1(self, k, rows=None):
        rows = np.arange(len(self.psi)) if rows is None else rows
        hit = self.rng.random(rows.size) < self.eps1
        # depolarizing with parameter eps picks a uniform Pauli, identity included
        p = np.where(hit, self.rng.integers(4, size=rows.size), 0)
        self._pauli(rows, k, p)

    def depolarize2(self, a, b, rows=None):
        rows = np.arange(len(self.psi)) if rows is None else rows
        hit = self.rng.random(rows.size) < self.eps2
        p = np.where(hit, self.rng.integers(16, size=rows.size), 0)
        self._pauli(rows, a, p // 4)
        self._pauli(rows, b, p % 4)

    def t(self, k, sign=1, rows=None):
        self.apply(_embed(_phase(sign * math.pi / 4), k), rows)
        self.depolarize1(k, rows)

    def phase(self, k, theta):
        """P(theta); a T-type remainder after Cliffords gets T noise."""
        self.apply(_embed(_phase(theta), k))
        if _odd_eighth(theta):
            self.depolarize1(k)

    def cx(self, c, t):
        self.apply(_cx(c, t))
        self.depolarize2(c, t)

    def h(self, k):
        self.apply(_embed(_H, k))

    def measure_x(self, k):
        """Destructive X measurement of qubit ``k``; returns outcomes."""
        self.h(k)
        one = _bits(k).astype(bool)
        p1 = np.sum(np.abs(self.psi[:, one]) ** 2, axis=1)
        out = self.rng.random(len(self.psi)) < p1
        self.psi[np.ix_(out, ~one)] = 0
        self.psi[np.ix_(~out, one)] = 0
        self.psi /= np.linalg.norm(self.psi, axis=1, keepdims=True)
        # return the qubit to |0>
        self.apply(np.eye(2 ** N)[self._xperm[k]].T, np.flatnonzero(out))
        return out


def _odd_eighth(theta) -> bool:
    k = theta / (math.pi / 4)
    return abs(k - round(k)) < 1e-9 and round(k) % 2 == 1


def _controlled_s(s: _Batch, a, t):
    # CS = P(pi/4)⊗P(pi/4) · CNOT · (I⊗P(-pi/4)) · CNOT
    s.t(a)
    s.t(t)
    s.cx(a, t)
    s.t(t, -1)
    s.cx(a, t)


def _controlled_t_ancilla(s: _Batch, q0, q1, anc=3):
    s.h(anc)
    s.t(anc)
    s.cx(q0, anc)
    s.t(anc, -1)
    s.cx(q1, anc)
    s.t(anc)
    s.cx(q0, anc)
    s.t(anc, -1)
    s.cx(q1, anc)
    s.h(anc)
    s.apply(_embed(_phase(math.pi / 2), anc))
    s.t(anc)
    out = s.measure_x(anc)
    rows = np.flatnonzero(out)
    s.apply(_cz(q0, q1), rows)
    s.depolarize2(q0, q1, rows)


def _qft(s: _Batch):
    s.h(0)
    _controlled_s(s, 1, 0)
    _controlled_t_ancilla(s, 2, 0)
    s.h(1)
    _controlled_s(s, 2, 1)
    s.h(2)


@dataclass(frozen=True)
class ModelPrediction:
    F1: float
    F2: float
    per_state: dict
    eps_t: float
    eps_cnot: float


def depolarizing_logical_model(f_cnot: float, f_t: float, shots: int = 100_000, seed: int = 0,
                               spam_t: bool = True) -> ModelPrediction:
    """Predicted QFT output fidelities ``(F1, F2)`` under logical depolarizing noise.

    Args:
        f_cnot: average fidelity of a logical CNOT (d = 4).
        f_t: average fidelity of a logical T (d = 2).
        shots: trajectories per input state.
        seed: RNG seed.
        spam_t: apply T noise to the T-type preparation and un-rotation
            phases of the benchmark, which are not corrected for.
    """
    for name, v in (("f_cnot", f_cnot), ("f_t", f_t)):
        if not 0.0 < v <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1]")
    eps1 = depolarizing_parameter(f_t, 2)
    eps2 = depolarizing_parameter(f_cnot, 4)
    rng = np.random.default_rng(seed)
    per_state = {}
    means = {}
    for basis in BASES:
        vals = []
        for x in range(DIM):
            ref = qft_reference(x, basis)
            s = _Batch(shots, rng, eps1 if spam_t else 0.0, eps2)
            for j in range(3):
                if ref.flips[j]:
                    s.apply(_embed(np.array([[0, 1], [1, 0]]), j))
                if ref.prep_phases is not None:
                    s.h(j)
                    s.phase(j, ref.prep_phases[j])
            s.eps1 = eps1
            _qft(s)
            s.eps1 = eps1 if spam_t else 0.0
            if ref.unrotation is not None:
                for j in range(3):
                    s.phase(j, ref.unrotation[j])
                    s.h(j)
            target = sum(ref.expected[j] << (N - 1 - j) for j in range(3))
            # sum over the ancilla value
            p = np.abs(s.psi[:, target]) ** 2 + np.abs(s.psi[:, target | 1]) ** 2
            per_state[f"{basis}:{x}"] = float(p.mean())
            vals.append(float(p.mean()))
        means[basis] = float(np.mean(vals))
    return ModelPrediction(means[BASES[0]], means[BASES[1]], per_state, eps1, eps2)
