"""Symbolic algebra over n-qubit Pauli strings and Pauli sums.

Convention
----------
A :class:`PauliString` stores two bit masks and a phase power and denotes the
operator ``i**phase * prod_q X_q**x_q Z_q**z_q`` (per qubit, Z acts first).
Under this convention ``Y = i X Z``, so a Y on qubit ``q`` has both mask bits
set and contributes one power of ``i``.  Qubit ``q`` is bit ``q`` of each mask.

A :class:`PauliSum` maps ``(x_bits, z_bits)`` keys to complex coefficients of
the *Hermitian* string with those masks (phase ``i**popcount(x & z)``), so a
sum is Hermitian exactly when every coefficient is real.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

PRUNE_TOL = 1e-12
DENSE_QUBIT_CAP = 6

_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
_IPOW = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class DenseCapError(ValueError):
    """Dense materialisation refused above the configured qubit cap."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"qubit count mismatch: {a} != {b}")


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase_power: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_bits & ~full or self.z_bits & ~full:
            raise ValueError("mask has bits beyond n_qubits")
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    @classmethod
    def from_label(cls, label: str, phase_power: int = 0) -> "PauliString":
        """Build from a dense label such as ``"XIZY"`` (character ``q`` is qubit ``q``)."""
        x = z = 0
        ph = phase_power
        for q, ch in enumerate(label.upper()):
            if ch == "X":
                x |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
                ph += 1
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(len(label), x, z, ph)

    @classmethod
    def single(cls, n_qubits: int, ops: Mapping[int, str]) -> "PauliString":
        """Build from a sparse ``{qubit: letter}`` mapping."""
        label = ["I"] * n_qubits
        for q, ch in ops.items():
            label[q] = ch
        return cls.from_label("".join(label))

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    @property
    def coefficient(self) -> complex:
        """Scalar multiplying the Hermitian string with the same masks."""
        return _IPOW[(self.phase_power - _popcount(self.x_bits & self.z_bits)) % 4]

    def is_hermitian(self) -> bool:
        return (self.phase_power - _popcount(self.x_bits & self.z_bits)) % 2 == 0

    def label(self) -> str:
        out = []
        for q in range(self.n_qubits):
            xb, zb = (self.x_bits >> q) & 1, (self.z_bits >> q) & 1
            out.append("IXZY"[xb | (zb << 1)])
        return "".join(out)

    def commutes_with(self, other: "PauliString") -> bool:
        _check_n(self.n_qubits, other.n_qubits)
        return _symplectic(self.x_bits, self.z_bits, other.x_bits, other.z_bits) == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def to_sum(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {(self.x_bits, self.z_bits): self.coefficient})

    def __repr__(self) -> str:
        k = (self.phase_power - _popcount(self.x_bits & self.z_bits)) % 4
        return f"PauliString({('+', '+i', '-', '-i')[k]}{self.label()})"


def _symplectic(x1: int, z1: int, x2: int, z2: int) -> int:
    return (_popcount(x1 & z2) + _popcount(z1 & x2)) & 1


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a @ b`` with the phase from reordering ``Z**z1 X**x2``."""
    _check_n(a.n_qubits, b.n_qubits)
    phase = a.phase_power + b.phase_power + 2 * _popcount(a.z_bits & b.x_bits)
    return PauliString(a.n_qubits, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, phase)


def _key_product(k1: tuple[int, int], k2: tuple[int, int]) -> tuple[tuple[int, int], complex]:
    """Product of two Hermitian basis strings as (key, scalar)."""
    x1, z1 = k1
    x2, z2 = k2
    x, z = x1 ^ x2, z1 ^ z2
    # P_k = i^{|x&z|} X^x Z^z
    ph = (_popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2)
          - _popcount(x & z))
    return (x, z), _IPOW[ph % 4]


class PauliSum:
    """Complex-weighted sum of Hermitian Pauli strings, treated as immutable."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None,
                 tol: float = PRUNE_TOL):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        self.n_qubits = n_qubits
        self.terms: dict[tuple[int, int], complex] = {
            k: complex(c) for k, c in (terms or {}).items() if abs(c) >= tol
        }

    @classmethod
    def from_strings(cls, n_qubits: int, items: Iterable[tuple[complex, PauliString | str]]) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        for coef, p in items:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            _check_n(n_qubits, p.n_qubits)
            key = (p.x_bits, p.z_bits)
            acc[key] = acc.get(key, 0) + coef * p.coefficient
        return cls(n_qubits, acc)

    @classmethod
    def identity(cls, n_qubits: int, coef: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): coef})

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def allclose(self, other: "PauliSum", atol: float = 1e-12) -> bool:
        _check_n(self.n_qubits, other.n_qubits)
        keys = self.terms.keys() | other.terms.keys()
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        _check_n(self.n_qubits, other.n_qubits)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0) + c
        return PauliSum(self.n_qubits, acc)

    def __neg__(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def scale(self, s: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return product(self, other)
        return self.scale(other)

    def __rmul__(self, s):
        return self.scale(s)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def trace(self) -> complex:
        """Normalised trace ``Tr(A) / 2**n``."""
        return self.terms.get((0, 0), 0j)

    def strings(self) -> list[tuple[complex, PauliString]]:
        """Terms as (coefficient, Hermitian PauliString) pairs, in key order."""
        return [(c, PauliString(self.n_qubits, x, z, _popcount(x & z)))
                for (x, z), c in sorted(self.terms.items())]

    def max_weight(self) -> int:
        return max((_popcount(x | z) for x, z in self.terms), default=0)

    def __repr__(self) -> str:
        return f"PauliSum({self.n_qubits}, {render(self)!r})"


def product(a: PauliSum, b: PauliSum) -> PauliSum:
    _check_n(a.n_qubits, b.n_qubits)
    acc: dict[tuple[int, int], complex] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            key, s = _key_product(ka, kb)
            acc[key] = acc.get(key, 0) + s * ca * cb
    return PauliSum(a.n_qubits, acc)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """``[a, b] = ab - ba``; only anticommuting string pairs contribute (as ``2ab``)."""
    _check_n(a.n_qubits, b.n_qubits)
    acc: dict[tuple[int, int], complex] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            if not _symplectic(ka[0], ka[1], kb[0], kb[1]):
                continue
            key, s = _key_product(ka, kb)
            acc[key] = acc.get(key, 0) + 2 * s * ca * cb
    return PauliSum(a.n_qubits, acc)


def hs_inner(a: PauliSum, b: PauliSum) -> complex:
    """Normalised Hilbert-Schmidt product ``Tr(a^dagger b) / 2**n``."""
    _check_n(a.n_qubits, b.n_qubits)
    if len(a.terms) > len(b.terms):
        return sum((a.terms[k].conjugate() * c for k, c in b.terms.items() if k in a.terms), 0j)
    return sum((c.conjugate() * b.terms[k] for k, c in a.terms.items() if k in b.terms), 0j)


def _string_matrix(n: int, x: int, z: int) -> np.ndarray:
    # kron ordering puts qubit 0 in the least significant index position
    out = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n)):
        m = _I2
        if (x >> q) & 1 and (z >> q) & 1:
            m = _X2 @ _Z2
        elif (x >> q) & 1:
            m = _X2
        elif (z >> q) & 1:
            m = _Z2
        out = np.kron(out, m)
    return out


def to_dense(a: PauliSum | PauliString, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix; basis index bit ``q`` is qubit ``q``. Test oracle only."""
    if a.n_qubits > cap:
        raise DenseCapError(f"refusing dense matrix for {a.n_qubits} > {cap} qubits")
    if isinstance(a, PauliString):
        return _IPOW[a.phase_power] * _string_matrix(a.n_qubits, a.x_bits, a.z_bits)
    dim = 1 << a.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for (x, z), c in a.terms.items():
        out += c * _IPOW[_popcount(x & z) % 4] * _string_matrix(a.n_qubits, x, z)
    return out


# Text rendering: "+0.5·Z0 Z1 -0.25·X0 Y2 Z3"

def _fmt_coef(c: complex) -> str:
    if c.imag == 0:
        sign = "-" if c.real < 0 or (c.real == 0 and np.signbit(c.real)) else "+"
        return f"{sign}{abs(c.real)!r}"
    return f"+({c.real!r}{'+' if c.imag >= 0 else '-'}{abs(c.imag)!r}j)"


def _fmt_ops(n: int, x: int, z: int) -> str:
    ops = []
    for q in range(n):
        xb, zb = (x >> q) & 1, (z >> q) & 1
        if xb or zb:
            ops.append(f"{'IXZY'[xb | (zb << 1)]}{q}")
    return " ".join(ops) or "I"


def render(a: PauliSum) -> str:
    return " ".join(f"{_fmt_coef(c)}·{_fmt_ops(a.n_qubits, x, z)}" for (x, z), c in sorted(a.terms.items()))


_TERM_RE = re.compile(
    r"([+\-−])\s*(\([^)]*\)|[0-9.eE+\-]+?)\s*[·*]\s*((?:[XYZ]\d+\s*)+|I\b)")


def parse(text: str, n_qubits: int) -> PauliSum:
    """Inverse of :func:`render`; accepts ``·`` or ``*`` and ASCII or Unicode minus."""
    acc: dict[tuple[int, int], complex] = {}
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse Pauli sum near {text[pos:pos + 20]!r}")
        sign = -1 if m.group(1) in "-−" else 1
        coef = complex(m.group(2).strip("()"))
        x = z = 0
        for letter, q in re.findall(r"([XYZ])(\d+)", m.group(3)):
            bit = 1 << int(q)
            if int(q) >= n_qubits:
                raise DimensionError(f"qubit {q} out of range for n={n_qubits}")
            if letter in "XY":
                x |= bit
            if letter in "ZY":
                z |= bit
        acc[(x, z)] = acc.get((x, z), 0) + sign * coef
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return PauliSum(n_qubits, acc)


# Builders used across the package

def z_term(n: int, *qubits: int, coef: float = 1.0) -> PauliSum:
    z = 0
    for q in qubits:
        z |= 1 << q
    return PauliSum(n, {(0, z): coef})


def xy_mixer(n: int, edges: Iterable[tuple[int, int]]) -> PauliSum:
    """``sum_(i,j) X_i X_j + Y_i Y_j`` over the given edges."""
    acc: dict[tuple[int, int], complex] = {}
    for i, j in edges:
        m = (1 << i) | (1 << j)
        acc[(m, 0)] = acc.get((m, 0), 0) + 1
        acc[(m, m)] = acc.get((m, m), 0) + 1
    return PauliSum(n, acc)


def transverse_mixer(n: int) -> PauliSum:
    return PauliSum(n, {(1 << q, 0): 1.0 for q in range(n)})
