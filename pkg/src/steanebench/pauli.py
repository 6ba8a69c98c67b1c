"""Pauli strings, Clifford conjugation and the two-qubit Clifford group."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_PHASE_TEXT = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_SYMBOL = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _SYMBOL.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator ``i**phase * P_0 (x) ... (x) P_{n-1}``.

    Bit ``q`` of ``x`` / ``z`` describes qubit ``q`` (leftmost character in the
    text form).  ``(x, z) = (1, 1)`` denotes Y itself, not XZ.
    """

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_str(cls, text: str) -> "PauliString":
        text = text.strip()
        phase = 0
        for prefix, k in (("+i", 1), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)):
            if text.startswith(prefix) and len(text) > len(prefix):
                phase = k
                text = text[len(prefix):]
                break
        x = z = 0
        for q, ch in enumerate(text):
            if ch not in _BITS:
                raise ValueError(f"invalid Pauli symbol {ch!r} in {text!r}")
            bx, bz = _BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(text), x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, symbol: str) -> "PauliString":
        bx, bz = _BITS[symbol]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    def __str__(self) -> str:
        body = "".join(_SYMBOL[(self.x >> q) & 1, (self.z >> q) & 1] for q in range(self.n))
        return _PHASE_TEXT[self.phase] + body

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def symbol(self, qubit: int) -> str:
        return _SYMBOL[(self.x >> qubit) & 1, (self.z >> qubit) & 1]

    def to_matrix(self) -> np.ndarray:
        """Dense matrix with qubit 0 as the most significant tensor factor."""
        mats = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        out = np.array([[1.0 + 0j]])
        for q in range(self.n):
            out = np.kron(out, mats[self.symbol(q)])
        return (1j ** self.phase) * out


def _check_dims(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n} qubits")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Operator product ``p @ q`` with exact phase."""
    _check_dims(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    # Y = i X Z, so each operand carries i^{|x&z|} relative to its X^x Z^z form,
    # and moving Z^{z_p} past X^{x_q} costs (-1)^{|z_p & x_q|}.
    k = (
        p.phase + q.phase
        + _popcount(p.x & p.z) + _popcount(q.x & q.z)
        + 2 * _popcount(p.z & q.x)
        - _popcount(x & z)
    )
    return PauliString(p.n, x, z, k)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_dims(p, q)
    return _popcount((p.x & q.z) ^ (p.z & q.x)) % 2 == 0


def gf2_rank(rows) -> int:
    """Rank over GF(2) of a collection of integer bit-rows."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


# ---------------------------------------------------------------------------
# Clifford elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CliffordElement:
    """A Clifford unitary (up to global phase) stored by its action on Paulis.

    ``images`` lists ``U X_q U^dag`` and ``U Z_q U^dag`` for q = 0..n-1 in the
    order ``X_0, Z_0, X_1, Z_1, ...``.  That tuple is the canonical form; two
    elements are equal iff their images are.
    """

    n: int
    images: tuple
    gate_word: tuple = ()

    @property
    def key(self) -> tuple:
        return tuple((p.x, p.z, p.phase) for p in self.images)

    @property
    def cnot_count(self) -> int:
        return sum(1 for g in self.gate_word if g[0] == "CX")

    def __eq__(self, other):
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.n == other.n and self.key == other.key

    def __hash__(self):
        return hash((self.n, self.key))

    def __repr__(self):
        return f"CliffordElement(images={[str(p) for p in self.images]}, word={self.gate_word})"

    @classmethod
    def identity(cls, n: int) -> "CliffordElement":
        images = []
        for q in range(n):
            images.append(PauliString(n, x=1 << q))
            images.append(PauliString(n, z=1 << q))
        return cls(n, tuple(images))

    @classmethod
    def from_word(cls, n: int, word) -> "CliffordElement":
        el = cls.identity(n)
        for g in word:
            el = el.then(g)
        return el

    def then(self, gate: tuple) -> "CliffordElement":
        """Element obtained by applying ``gate`` after this one."""
        g = gate_element(self.n, gate)
        images = tuple(conjugate(g, p) for p in self.images)
        return CliffordElement(self.n, images, self.gate_word + (gate,))


def conjugate(c: CliffordElement, p: PauliString) -> PauliString:
    """Return ``c p c^dag``."""
    if c.n != p.n:
        raise ValueError(f"dimension mismatch: {c.n} vs {p.n} qubits")
    # p = i^{k + |x&z|} prod_q X_q^{x_q} prod_q Z_q^{z_q}
    out = PauliString(p.n, phase=p.phase + _popcount(p.x & p.z))
    for q in range(p.n):
        if (p.x >> q) & 1:
            out = multiply(out, c.images[2 * q])
    for q in range(p.n):
        if (p.z >> q) & 1:
            out = multiply(out, c.images[2 * q + 1])
    return out


def compose(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Operator product ``a @ b`` (``b`` acts first)."""
    images = tuple(conjugate(a, p) for p in b.images)
    return CliffordElement(a.n, images, b.gate_word + a.gate_word)


_SINGLE_IMAGES = {
    # gate: (image of X, image of Z) on one qubit
    "I": ("+X", "+Z"),
    "X": ("+X", "-Z"),
    "Y": ("-X", "-Z"),
    "Z": ("-X", "+Z"),
    "H": ("+Z", "+X"),
    "S": ("+Y", "+Z"),
    "SDG": ("-Y", "+Z"),
}


@lru_cache(maxsize=None)
def gate_element(n: int, gate: tuple) -> CliffordElement:
    """Clifford element of a single generator, e.g. ``("H", 0)`` or ``("CX", 0, 1)``."""
    name = gate[0]
    images = list(CliffordElement.identity(n).images)
    if name in _SINGLE_IMAGES:
        q = gate[1]
        for slot, text in zip((2 * q, 2 * q + 1), _SINGLE_IMAGES[name]):
            sign = 2 if text[0] == "-" else 0
            base = PauliString.single(n, q, text[1])
            images[slot] = PauliString(n, base.x, base.z, sign)
    elif name == "CX":
        c, t = gate[1], gate[2]
        images[2 * c] = PauliString(n, x=(1 << c) | (1 << t))
        images[2 * t + 1] = PauliString(n, z=(1 << c) | (1 << t))
    else:
        raise ValueError(f"unknown Clifford generator {gate!r}")
    return CliffordElement(n, tuple(images))


def two_qubit_generators() -> list[tuple]:
    """Generator set: single-qubit Paulis, H, S, S-dagger on each qubit, and CNOT."""
    gens = []
    for q in range(2):
        for name in ("X", "Y", "Z", "H", "S", "SDG"):
            gens.append((name, q))
    gens.append(("CX", 0, 1))
    gens.append(("CX", 1, 0))
    return gens


class CliffordTable:
    """Exhaustive table of the two-qubit Clifford group."""

    def __init__(self, elements: list[CliffordElement]):
        self.elements = elements
        self.index = {el.key: i for i, el in enumerate(elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> CliffordElement:
        return self.elements[i]

    def lookup(self, el: CliffordElement) -> CliffordElement:
        try:
            return self.elements[self.index[el.key]]
        except KeyError:
            raise KeyError("element not in Clifford table") from None

    def __contains__(self, el: CliffordElement) -> bool:
        return el.key in self.index

    @property
    def mean_cnot_count(self) -> float:
        return float(np.mean([el.cnot_count for el in self.elements]))

    def invert(self, c: CliffordElement) -> CliffordElement:
        return invert(c, self)


@lru_cache(maxsize=1)
def enumerate_two_qubit_cliffords() -> CliffordTable:
    """Closure of the generator set from the identity, CNOT-count first.

    Elements are visited in order of (CNOT count, word length), so each keeps
    a word with the fewest CNOTs and, among those, the fewest gates; ties
    follow the generator order of :func:`two_qubit_generators`.
    """
    gens = two_qubit_generators()
    start = CliffordElement.identity(2)
    best = {start.key: (0, 0)}
    order = []
    done = set()
    heap = [(0, 0, 0, start)]
    tick = 1
    while heap:
        cx, length, _, el = heapq.heappop(heap)
        if el.key in done:
            continue
        done.add(el.key)
        order.append(el)
        for g in gens:
            cost = (cx + (g[0] == "CX"), length + 1)
            nxt = el.then(g)
            if nxt.key not in done and cost < best.get(nxt.key, (1 << 30, 0)):
                best[nxt.key] = cost
                heapq.heappush(heap, (*cost, tick, nxt))
                tick += 1
    return CliffordTable(order)


def _solve_gf2(columns: list[int], target: int, n_bits: int) -> int:
    """Return coefficient bitmask s with XOR_{j in s} columns[j] == target."""
    rows = [(col, 1 << j) for j, col in enumerate(columns)]
    basis: list[tuple[int, int]] = []
    for v, tag in rows:
        for bv, btag in basis:
            if v ^ bv < v:
                v ^= bv
                tag ^= btag
        if v:
            basis.append((v, tag))
            basis.sort(reverse=True)
    v, coeff = target, 0
    for bv, btag in basis:
        if v ^ bv < v:
            v ^= bv
            coeff ^= btag
    if v:
        raise ValueError("not invertible")
    return coeff


def invert(c: CliffordElement, table: CliffordTable | None = None) -> CliffordElement:
    """Group inverse; looked up in ``table`` (so it carries a gate word) when given."""
    n = c.n
    # symplectic vector of an image: x bits in low half, z bits in high half
    cols = [p.x | (p.z << n) for p in c.images]
    images = []
    for p in CliffordElement.identity(n).images:
        coeff = _solve_gf2(cols, p.x | (p.z << n), 2 * n)
        qx = qz = 0
        for j in range(2 * n):
            if (coeff >> j) & 1:
                if j % 2 == 0:
                    qx |= 1 << (j // 2)
                else:
                    qz |= 1 << (j // 2)
        image = conjugate(c, PauliString(n, qx, qz))
        # fix the sign so that c maps the preimage exactly onto p
        images.append(PauliString(n, qx, qz, p.phase - image.phase))
    inv = CliffordElement(n, tuple(images))
    if table is not None:
        return table.lookup(inv)
    return inv
