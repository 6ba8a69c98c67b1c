"""Sparse, factored pure-state simulator with Monte Carlo Pauli noise.

Each entangled factor stores only its nonzero amplitudes as parallel arrays of
basis-state bitmasks and complex amplitudes.  Steane-code blocks have at most
16 nonzero amplitudes per block, so even four entangled blocks (28 qubits)
stay small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PRUNE = 1e-13
NORM_TOL = 1e-10

_SQ = 1 / math.sqrt(2)


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _u3(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
    )


_H = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)

# diagonal single-qubit gates: name -> phase applied to |1> (relative), phase on |0>
_DIAG = {
    "z": lambda: (1.0, -1.0),
    "s": lambda: (1.0, 1j),
    "sdg": lambda: (1.0, -1j),
    "t": lambda: (1.0, np.exp(1j * math.pi / 4)),
    "tdg": lambda: (1.0, np.exp(-1j * math.pi / 4)),
    "u1": lambda th: (1.0, np.exp(1j * th)),
    "p": lambda th: (1.0, np.exp(1j * th)),
    "rz": lambda th: (np.exp(-0.5j * th), np.exp(0.5j * th)),
}
_DENSE = {
    "h": lambda: _H,
    "ry": _ry,
    "rx": _rx,
    "u3": _u3,
    "u": _u3,
}
ONE_QUBIT = set(_DIAG) | set(_DENSE) | {"x", "y", "id"}
TWO_QUBIT = {"cx", "cz", "ch"}
GATE_ARITY = {**{g: 1 for g in ONE_QUBIT}, **{g: 2 for g in TWO_QUBIT}}
GATE_NPARAMS = {"u1": 1, "p": 1, "rz": 1, "ry": 1, "rx": 1, "u3": 3, "u": 3}


class SimulationError(RuntimeError):
    pass


class _Factor:
    __slots__ = ("qubits", "idx", "amp")

    def __init__(self, qubits, idx, amp):
        self.qubits = qubits  # list of global qubit ids; bit position = list index
        self.idx = idx        # int64 array of basis bitmasks
        self.amp = amp        # complex128 array


class FactoredState:
    """Pure state as a tensor product of sparse entangled factors.

    Qubits not held by any factor are in a known computational basis state
    (fresh ``|0>`` or the collapsed result of a measurement) and cost nothing.
    """

    def __init__(self):
        self._factor_of: dict[int, _Factor] = {}
        self._known: dict[int, int] = {}
        self.peak_width = 0
        self.peak_support = 0

    # -- allocation ---------------------------------------------------------
    def allocate(self, qubit: int, value: int = 0) -> None:
        self._drop(qubit)
        self._known[qubit] = value

    def is_allocated(self, qubit: int) -> bool:
        return qubit in self._known or qubit in self._factor_of

    @property
    def qubits(self) -> list[int]:
        return sorted(set(self._known) | set(self._factor_of))

    @property
    def factors(self) -> list[tuple[tuple[int, ...], np.ndarray, np.ndarray]]:
        seen, out = set(), []
        for f in self._factor_of.values():
            if id(f) not in seen:
                seen.add(id(f))
                out.append((tuple(f.qubits), f.idx.copy(), f.amp.copy()))
        return out

    def _drop(self, qubit):
        f = self._factor_of.get(qubit)
        if f is not None:
            raise SimulationError(f"qubit {qubit} is entangled; reset it instead")

    def _factor(self, qubit: int) -> _Factor:
        f = self._factor_of.get(qubit)
        if f is not None:
            return f
        if qubit not in self._known:
            raise SimulationError(f"qubit {qubit} is not allocated")
        value = self._known.pop(qubit)
        f = _Factor([qubit], np.array([value], dtype=np.int64), np.ones(1, dtype=complex))
        self._factor_of[qubit] = f
        return f

    def _merge(self, a: _Factor, b: _Factor) -> _Factor:
        if a is b:
            return a
        n = len(a.qubits)
        idx = (a.idx[:, None] | (b.idx[None, :] << n)).ravel()
        amp = (a.amp[:, None] * b.amp[None, :]).ravel()
        f = _Factor(a.qubits + b.qubits, idx, amp)
        for q in f.qubits:
            self._factor_of[q] = f
        self._track(f)
        return f

    def _track(self, f):
        if len(f.qubits) > self.peak_width:
            self.peak_width = len(f.qubits)
        if len(f.idx) > self.peak_support:
            self.peak_support = len(f.idx)

    # -- gates --------------------------------------------------------------
    def apply_gate(self, name: str, qubits, params=()) -> None:
        name = name.lower()
        arity = GATE_ARITY.get(name)
        if arity is None:
            raise SimulationError(f"unknown gate {name!r}")
        if len(qubits) != arity:
            raise SimulationError(f"gate {name} expects {arity} qubit(s), got {len(qubits)}")
        if arity == 1:
            self._apply_1q(name, qubits[0], params)
        else:
            self._apply_2q(name, qubits[0], qubits[1], params)

    def _apply_1q(self, name, q, params):
        if name == "id":
            if not self.is_allocated(q):
                raise SimulationError(f"qubit {q} is not allocated")
            return
        if name == "x" and q in self._known:
            self._known[q] ^= 1
            return
        if name in _DIAG and q in self._known:
            return  # global phase only
        f = self._factor(q)
        k = f.qubits.index(q)
        bit = np.int64(1) << np.int64(k)
        if name == "x":
            f.idx ^= bit
        elif name == "y":
            ones = (f.idx & bit) != 0
            f.amp = np.where(ones, -1j * f.amp, 1j * f.amp)
            f.idx ^= bit
        elif name in _DIAG:
            d0, d1 = _DIAG[name](*params)
            ones = (f.idx & bit) != 0
            if d0 == 1.0:
                f.amp = np.where(ones, d1 * f.amp, f.amp)
            else:
                f.amp = np.where(ones, d1 * f.amp, d0 * f.amp)
        else:
            u = _DENSE[name](*params)
            self._apply_dense(f, bit, u)

    def _apply_dense(self, f: _Factor, bit, u):
        ones = (f.idx & bit) != 0
        base = f.idx & ~bit
        col0 = np.where(ones, u[0, 1], u[0, 0])
        col1 = np.where(ones, u[1, 1], u[1, 0])
        keys = np.concatenate((base, base | bit))
        vals = np.concatenate((col0 * f.amp, col1 * f.amp))
        keys, inv = np.unique(keys, return_inverse=True)
        summed = np.bincount(inv, weights=vals.real, minlength=len(keys)) + 1j * np.bincount(
            inv, weights=vals.imag, minlength=len(keys)
        )
        keep = np.abs(summed) > PRUNE
        f.idx = keys[keep]
        f.amp = summed[keep]
        self._track(f)

    def _apply_2q(self, name, a, b, params):
        if a == b:
            raise SimulationError("two-qubit gate on a repeated qubit")
        if name == "cx" and a in self._known:
            if self._known[a]:
                self._apply_1q("x", b, ())
            elif not self.is_allocated(b):
                raise SimulationError(f"qubit {b} is not allocated")
            return
        if name == "cz" and (a in self._known or b in self._known):
            ctrl, tgt = (a, b) if a in self._known else (b, a)
            if self._known[ctrl]:
                self._apply_1q("z", tgt, ())
            elif not self.is_allocated(tgt):
                raise SimulationError(f"qubit {tgt} is not allocated")
            return
        if name == "ch":
            # CH = (I (x) Ry(pi/4)) CZ (I (x) Ry(-pi/4))
            self._apply_1q("ry", b, (-math.pi / 4,))
            self._apply_2q("cz", a, b, ())
            self._apply_1q("ry", b, (math.pi / 4,))
            return
        fa, fb = self._factor(a), self._factor(b)
        f = self._merge(fa, fb)
        ba = np.int64(1) << np.int64(f.qubits.index(a))
        bb = np.int64(1) << np.int64(f.qubits.index(b))
        if name == "cx":
            f.idx ^= np.where((f.idx & ba) != 0, bb, np.int64(0))
        else:  # cz
            both = ((f.idx & ba) != 0) & ((f.idx & bb) != 0)
            f.amp = np.where(both, -f.amp, f.amp)

    # -- measurement --------------------------------------------------------
    def measure(self, qubit: int, rng, basis: str = "Z") -> int:
        """Projective measurement; the qubit leaves its factor in the collapsed state."""
        if basis == "X":
            self.apply_gate("h", (qubit,))
        elif basis != "Z":
            raise ValueError(f"unsupported basis {basis!r}")
        if qubit in self._known:
            return self._known[qubit]
        f = self._factor(qubit)
        k = f.qubits.index(qubit)
        bit = np.int64(1) << np.int64(k)
        ones = (f.idx & bit) != 0
        w = np.abs(f.amp) ** 2
        total = w.sum()
        p1 = w[ones].sum() / total
        outcome = int(rng.random() < p1)
        keep = ones if outcome else ~ones
        idx = f.idx[keep]
        amp = f.amp[keep]
        amp = amp / math.sqrt((np.abs(amp) ** 2).sum())
        low = bit - 1
        f.idx = (idx & low) | ((idx >> np.int64(k + 1)) << np.int64(k))
        f.amp = amp
        f.qubits.pop(k)
        del self._factor_of[qubit]
        self._known[qubit] = outcome
        if len(f.idx) == 1:
            # a computational basis state needs no factor
            value = int(f.idx[0])
            for k, q in enumerate(f.qubits):
                del self._factor_of[q]
                self._known[q] = (value >> k) & 1
        return outcome

    def probability_one(self, qubit: int) -> float:
        if qubit in self._known:
            return float(self._known[qubit])
        f = self._factor(qubit)
        bit = np.int64(1) << np.int64(f.qubits.index(qubit))
        w = np.abs(f.amp) ** 2
        return float(w[(f.idx & bit) != 0].sum() / w.sum())

    def reset(self, qubit: int, rng=None) -> None:
        """Return a qubit to ``|0>``; an entangled qubit is first measured out."""
        if qubit in self._factor_of:
            if rng is None:
                rng = np.random.default_rng()
            self.measure(qubit, rng)
        self._known[qubit] = 0

    # -- inspection ---------------------------------------------------------
    def statevector(self, qubits) -> np.ndarray:
        """Dense amplitudes over ``qubits`` (qubit ``qubits[0]`` most significant).

        All factors touching ``qubits`` must be fully contained in the list.
        """
        qubits = list(qubits)
        n = len(qubits)
        pos = {q: n - 1 - i for i, q in enumerate(qubits)}
        vec = np.zeros(1, dtype=complex)
        vec[0] = 1.0
        idx = np.zeros(1, dtype=np.int64)
        done = set()
        for q in qubits:
            if q in done:
                continue
            if q in self._known:
                idx = idx | (np.int64(self._known[q]) << np.int64(pos[q]))
                done.add(q)
                continue
            if q not in self._factor_of:
                raise SimulationError(f"qubit {q} is not allocated")
            f = self._factor_of[q]
            missing = [p for p in f.qubits if p not in pos]
            if missing:
                raise SimulationError(f"qubits {missing} are entangled with the requested set")
            mapped = np.zeros(len(f.idx), dtype=np.int64)
            for k, p in enumerate(f.qubits):
                mapped |= ((f.idx >> np.int64(k)) & 1) << np.int64(pos[p])
                done.add(p)
            idx = (idx[:, None] | mapped[None, :]).ravel()
            vec = (vec[:, None] * f.amp[None, :]).ravel()
        out = np.zeros(2 ** n, dtype=complex)
        np.add.at(out, idx, vec)
        return out / np.linalg.norm(out)

    def norms(self) -> list[float]:
        seen, out = set(), []
        for f in self._factor_of.values():
            if id(f) not in seen:
                seen.add(id(f))
                out.append(float(np.sqrt((np.abs(f.amp) ** 2).sum())))
        return out


def state_fidelity(state: FactoredState, reference, qubits) -> float:
    """``|<reference|state>|^2`` over the given ordered qubits."""
    reference = np.asarray(reference, dtype=complex)
    if reference.shape != (2 ** len(qubits),):
        raise ValueError(
            f"dimension mismatch: reference has {reference.size} amplitudes for {len(qubits)} qubits"
        )
    vec = state.statevector(qubits)
    ref = reference / np.linalg.norm(reference)
    return float(min(1.0, abs(np.vdot(ref, vec)) ** 2))


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

# Error parameters as printed (units of 1e-4): 1Q, 2Q, memory, meas crosstalk, SPAM
HARDWARE_TABLE = {
    "h1-1": dict(single=0.29, two=8.8, memory=1.8, crosstalk=0.083, spam=26.0),
    "h2-1": dict(single=0.25, two=18.3, memory=2.2, crosstalk=0.045, spam=16.0),
}


def depolarizing_probability(infidelity: float, n_qubits: int) -> float:
    """Probability of a non-identity Pauli for a depolarizing channel of given average infidelity."""
    d = 2 ** n_qubits
    return (d + 1) / d * infidelity


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic Pauli noise.

    Gate and idle probabilities are the total probability of applying a
    uniformly random non-identity Pauli (3 choices on one qubit, 15 on two).
    """

    p1: float = 0.0
    p2: float = 0.0
    p_spam: float = 0.0
    p_idle_per_tick: float = 0.0
    crosstalk: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("p1", "p2", "p_spam", "p_idle_per_tick", "crosstalk"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return not (self.p1 or self.p2 or self.p_spam or self.p_idle_per_tick or self.crosstalk)

    @classmethod
    def preset(cls, name: str, scale: float = 1.0) -> "NoiseModel":
        """Noise from the printed hardware error table.

        Gate infidelities are converted to Pauli probabilities with
        ``p = (d+1)/d * (1 - F_avg)``; the SPAM figure is split evenly between
        preparation and readout.
        """
        name = name.lower()
        if name in ("zero", "none", "noiseless"):
            return cls()
        try:
            row = HARDWARE_TABLE[name]
        except KeyError:
            raise ValueError(f"unknown noise preset {name!r}") from None
        e = 1e-4 * scale
        return cls(
            p1=depolarizing_probability(row["single"] * e, 1),
            p2=depolarizing_probability(row["two"] * e, 2),
            p_spam=row["spam"] * e / 2,
            p_idle_per_tick=depolarizing_probability(row["memory"] * e, 1),
            crosstalk=depolarizing_probability(row["crosstalk"] * e, 1),
        )


def idle_probability(p: float, ticks: int) -> float:
    """Non-identity probability after composing ``ticks`` single-qubit depolarizing steps."""
    if ticks <= 0 or p == 0.0:
        return 0.0
    return 0.75 * (1.0 - (1.0 - 4.0 * p / 3.0) ** ticks)


_P1 = ("x", "y", "z")
_P2 = tuple((a, b) for a in ("id", "x", "y", "z") for b in ("id", "x", "y", "z"))[1:]


def apply_random_pauli(state: FactoredState, qubits, rng) -> tuple:
    """Apply a uniformly random non-identity Pauli on ``qubits``; return it."""
    if len(qubits) == 1:
        g = _P1[int(rng.integers(3))]
        state.apply_gate(g, (qubits[0],))
        return (g,)
    pair = _P2[int(rng.integers(15))]
    for g, q in zip(pair, qubits):
        if g != "id":
            state.apply_gate(g, (q,))
    return pair
