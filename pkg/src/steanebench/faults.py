"""Single-fault enumeration and ideal-recovery oracles for the Steane code."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .execute import CompiledProgram, execute_shot, shot_rng
from .ir import Gate, If, LogicalProgram
from .sim import NoiseModel

_P1 = ("x", "y", "z")
_P2 = tuple(p for p in itertools.product(("id", "x", "y", "z"), repeat=2) if p != ("id", "id"))

X_SUPPORTS = ((0, 1, 2, 3), (1, 2, 4, 5), (2, 3, 5, 6))


def single_faults(program: LogicalProgram, statements=None):
    """Yield ``{statement_index: [(qubit_id, pauli), ...]}`` for every single fault.

    A fault is any non-identity Pauli on the support of one gate, applied
    right after that gate.  ``statements`` restricts the gate indices.
    """
    compiled = CompiledProgram(program)
    for i, st in enumerate(program.statements):
        if statements is not None and i not in statements:
            continue
        gate = st.body if isinstance(st, If) else st
        if not isinstance(gate, Gate):
            continue
        ids = [compiled.qubit_id[q] for q in gate.qubits]
        if len(ids) == 1:
            for p in _P1:
                yield {i: [(ids[0], p)]}
        else:
            for pa, pb in _P2:
                yield {i: [(q, p) for q, p in zip(ids, (pa, pb)) if p != "id"]}


def run_with_fault(program, fault, seed=0):
    """Noiseless run with one injected fault; returns ``(record, state)``."""
    compiled = program if isinstance(program, CompiledProgram) else CompiledProgram(program)
    return execute_shot(compiled, NoiseModel(), shot_rng(seed, 0), 0, fault)


def _pauli_matrix(sym):
    return {
        "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1]),
    }[sym].astype(complex)


def _kron_on(n, ops: dict):
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, ops.get(q, np.eye(2, dtype=complex)))
    return out


@lru_cache(maxsize=1)
def _recovery_operators():
    """Kraus operators ``C_s P_s`` of ideal lookup correction on 7 qubits."""
    n = 7
    lookup = {}
    for q in range(n):
        col = sum(1 << j for j, sup in enumerate(X_SUPPORTS) if q in sup)
        lookup[col] = q

    def projector(kind, syndrome):
        dim = 2 ** n
        proj = np.eye(dim, dtype=complex)
        for j, sup in enumerate(X_SUPPORTS):
            g = _kron_on(n, {q: _pauli_matrix(kind) for q in sup})
            sign = -1 if (syndrome >> j) & 1 else 1
            proj = proj @ (np.eye(dim) + sign * g) / 2
        return proj

    ops = []
    for sx in range(8):  # X-type generator syndrome detects Z errors
        px = projector("X", sx)
        for sz in range(8):
            pz = projector("Z", sz)
            corr = {}
            if sz:
                corr[lookup[sz]] = _pauli_matrix("X")
            if sx:
                q = lookup[sx]
                corr[q] = corr.get(q, np.eye(2)) @ _pauli_matrix("Z")
            ops.append(_kron_on(n, corr) @ pz @ px)
    return ops


def recovery_fidelity(psi: np.ndarray, ideal: np.ndarray) -> float:
    """Fidelity with ``ideal`` after one round of perfect lookup correction.

    Equals 1 whenever ``psi`` differs from a code state by an error acting on
    at most one qubit.
    """
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    ideal = np.asarray(ideal, dtype=complex) / np.linalg.norm(ideal)
    return float(sum(abs(np.vdot(ideal, k @ psi)) ** 2 for k in _recovery_operators()))
