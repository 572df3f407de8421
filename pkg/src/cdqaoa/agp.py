"""Counterdiabatic operator pools and the variational gauge-potential solve.

The pool is read off the commutator of the cost and mixer Hamiltonians: each
surviving Pauli pattern (the qubits flipped plus the Z-only qubits) becomes one
Hermitian generator, e.g. ``X_i Y_k Z_j - Y_i X_k Z_j``.  For a fixed parameter
``lam`` the coefficients solve ``M c = v`` with

    M_kl = -Tr([O_k, H][O_l, H]),    v_k = i Tr(O_k [H, dH/dlam]),

``H = (1 - lam) H_M + lam H_C``.  Traces are raw (un-normalised) traces,
evaluated as ``2**n`` times the Pauli-basis inner product.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .pauli import (DimensionError, PauliString, PauliSum, _key_product, _popcount, _symplectic,
                    commutator, render)

log = logging.getLogger(__name__)

SOLVE_TOL = 1e-10


@dataclass(frozen=True)
class Generator:
    op: PauliSum
    kind: str
    flips: tuple[int, ...]
    z_qubits: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.flips) + len(self.z_qubits)

    @property
    def index_tuple(self) -> tuple[int, ...]:
        return self.flips + self.z_qubits

    def strings(self) -> list[tuple[float, PauliString]]:
        return [(c.real, p) for c, p in self.op.strings()]


@dataclass
class OperatorPool:
    n_qubits: int
    generators: list[Generator] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, k) -> Generator:
        return self.generators[k]

    @property
    def empty(self) -> bool:
        return not self.generators

    def gram(self) -> np.ndarray:
        k = len(self.generators)
        g = np.empty((k, k))
        for a in range(k):
            for b in range(k):
                ta, tb = self.generators[a].op.terms, self.generators[b].op.terms
                g[a, b] = sum((ta[s].conjugate() * tb[s]).real for s in ta if s in tb)
        return g

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "generators": [{"operator": render(g.op), "kind": g.kind, "flips": list(g.flips),
                            "z_qubits": list(g.z_qubits)} for g in self.generators],
        }


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(q for q in range(mask.bit_length()) if (mask >> q) & 1)


def _kind(weight: int) -> str:
    return {1: "one_body", 2: "two_body", 3: "three_body"}.get(weight, f"{weight}_body")


def _hermitian_commutator(a: PauliSum, b: PauliSum) -> dict[tuple[int, int], complex]:
    """Terms of ``i [a, b]`` without pruning across contributions."""
    acc: dict[tuple[int, int], complex] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            if _symplectic(ka[0], ka[1], kb[0], kb[1]):
                key, s = _key_product(ka, kb)
                acc[key] = acc.get(key, 0) + 2j * s * ca * cb
    return acc


def _canonical_shape(terms: dict[tuple[int, int], complex]) -> tuple | None:
    """Normalise a group of strings to unit max coefficient with a fixed sign."""
    items = sorted((k, c.real) for k, c in terms.items() if abs(c) > 1e-12)
    if not items:
        return None
    scale = max(abs(c) for _, c in items)
    flips = items[0][0][0]
    low = flips & -flips
    # the string carrying X (not Y) on the lowest flipped qubit is made positive
    ref = next((c for (x, z), c in items if not z & low), items[0][1]) if flips else items[0][1]
    sign = 1.0 if ref > 0 else -1.0
    return tuple((k, round(sign * c / scale, 12)) for k, c in items)


def _shapes(h_c: PauliSum, other: PauliSum, max_weight: int) -> set[tuple]:
    shapes = set()
    for key_c, coef_c in h_c.terms.items():
        comm = _hermitian_commutator(PauliSum(h_c.n_qubits, {key_c: coef_c}), other)
        groups: dict[tuple[int, int], dict] = {}
        for (x, z), c in comm.items():
            if _popcount(x | z) > max_weight or (x == 0):
                continue
            groups.setdefault((x, z & ~x), {})[(x, z)] = c
        for g in groups.values():
            shape = _canonical_shape(g)
            if shape is not None:
                shapes.add(shape)
    return shapes


def generate_pool(h_c: PauliSum, h_m: PauliSum, max_weight: int = 3, order: int = 1) -> OperatorPool:
    """Hermitian generators spanned by the (nested) commutator of ``h_c`` and ``h_m``.

    Every cost term is commuted with the full mixer separately, so generators
    whose contributions happen to cancel in the summed commutator are kept.
    ``order > 1`` adds patterns from two further commutations with either
    Hamiltonian per extra order (exposed, not validated).
    """
    if h_c.n_qubits != h_m.n_qubits:
        raise DimensionError("cost and mixer act on different qubit counts")
    if max_weight < 2:
        raise ValueError("max_weight must be at least 2")
    n = h_c.n_qubits
    shapes = _shapes(h_c, h_m, max_weight)
    frontier = set(shapes)
    for _ in range(order - 1):
        nxt = set()
        for shape in frontier:
            g = PauliSum(n, dict(shape))
            for first, second in ((h_m, h_c), (h_c, h_m), (h_m, h_m), (h_c, h_c)):
                inner = PauliSum(n, _hermitian_commutator(first, g))
                if inner:
                    nxt |= _shapes(second, inner, max_weight)
        frontier = nxt - shapes
        shapes |= nxt
    gens = []
    for shape in shapes:
        op = PauliSum(n, dict(shape))
        x = shape[0][0][0]
        zonly = 0
        for (_, z), _c in shape:
            zonly |= z & ~x
        flips, zq = _bits(x), _bits(zonly)
        gens.append(Generator(op, _kind(len(flips) + len(zq)), flips, zq))
    gens.sort(key=lambda g: (g.weight, g.index_tuple, sorted(g.op.terms)))
    if not gens:
        log.warning("operator pool is empty: cost and mixer commute")
    return OperatorPool(n, gens)


def _coef_matrix(sums: Sequence[PauliSum]) -> tuple[np.ndarray, dict]:
    index: dict[tuple[int, int], int] = {}
    for s in sums:
        for k in s.terms:
            index.setdefault(k, len(index))
    mat = np.zeros((len(sums), len(index)), dtype=complex)
    for r, s in enumerate(sums):
        for k, c in s.terms.items():
            mat[r, index[k]] = c
    return mat, index


def _require_hermitian(*ops: PauliSum) -> None:
    for op in ops:
        if not op.is_hermitian(1e-10):
            raise ValueError("action system requires Hermitian operators")


def build_action_system(h_lambda: PauliSum, dh_dlambda: PauliSum,
                        pool: OperatorPool) -> tuple[np.ndarray, np.ndarray]:
    """``(M, v)`` for the pool at one value of the schedule parameter."""
    _require_hermitian(h_lambda, dh_dlambda, *(g.op for g in pool))
    n = h_lambda.n_qubits
    k = len(pool)
    if k == 0:
        return np.zeros((0, 0)), np.zeros(0)
    comms = [commutator(g.op, h_lambda) for g in pool]
    drive = commutator(h_lambda, dh_dlambda)
    mat, index = _coef_matrix(comms + [drive] + [g.op for g in pool])
    a = mat[:k]
    d = mat[k]
    o = mat[k + 1:]
    dim = float(2 ** n)
    # Hermitian Pauli basis: Tr(P_s P_t) = 2**n delta_st
    m = -dim * (a @ a.T)
    v = 1j * dim * (o @ d)
    return _real(m, "M"), _real(v, "v")


def _real(x: np.ndarray, name: str) -> np.ndarray:
    scale = max(1.0, float(np.abs(x).max(initial=0.0)))
    if np.abs(x.imag).max(initial=0.0) > 1e-10 * scale:
        raise ArithmeticError(f"{name} has a non-negligible imaginary part")
    return np.ascontiguousarray(x.real)


@dataclass
class AGPSolve:
    lam: float
    M: np.ndarray
    v: np.ndarray
    coefficients: np.ndarray
    residual: float
    regularization: float = 0.0
    degenerate: bool = False


def solve_coefficients(M: np.ndarray, v: np.ndarray, tol: float = SOLVE_TOL,
                       lam: float = float("nan")) -> AGPSolve:
    """Solve the symmetric system, adding ``tol * trace(M) / k`` to the diagonal when near-singular."""
    M = np.asarray(M, dtype=float)
    v = np.asarray(v, dtype=float)
    k = v.shape[0]
    if k == 0:
        return AGPSolve(lam, M.reshape(0, 0), v, np.zeros(0), 0.0)
    if M.shape != (k, k):
        raise ValueError("M must be square and match v")
    if not np.allclose(M, M.T, atol=1e-10 * max(1.0, np.abs(M).max())):
        raise ValueError("M is not symmetric")
    M = 0.5 * (M + M.T)
    eig = np.linalg.eigvalsh(M)
    norm = float(np.abs(eig).max())
    mu = 0.0
    if norm == 0.0:
        c = np.zeros(k)
    else:
        a = M
        if eig.min() < tol * norm:
            mu = tol * float(np.trace(M)) / k
            a = M + mu * np.eye(k)
        c = scipy.linalg.solve(a, v, assume_a="sym")
    residual = float(np.linalg.norm(M @ c - v))
    degenerate = residual > 1e-6 * max(1.0, float(np.linalg.norm(v)))
    return AGPSolve(lam, M, v, c, residual, mu, degenerate)


def interpolating_hamiltonian(h_c: PauliSum, h_m: PauliSum, lam: float) -> PauliSum:
    return h_m.scale(1.0 - lam) + h_c.scale(lam)


def agp_schedule(h_c: PauliSum, h_m: PauliSum, pool: OperatorPool, grid: Iterable[float],
                 tol: float = SOLVE_TOL) -> list[AGPSolve]:
    """One solve per grid point of ``H(lam) = (1 - lam) H_M + lam H_C``.

    ``[O_k, H]`` is linear in ``lam`` and ``[H, dH]`` equals ``[H_M, H_C]``, so both
    pieces are expanded once and recombined per grid point.
    """
    grid = [float(x) for x in grid]
    for lam in grid:
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda {lam} outside [0, 1]")
    if pool.empty:
        return []
    _require_hermitian(h_c, h_m, *(g.op for g in pool))
    n = h_c.n_qubits
    k = len(pool)
    cm = [commutator(g.op, h_m) for g in pool]
    cc = [commutator(g.op, h_c) for g in pool]
    drive = commutator(h_m, h_c)
    mat, _ = _coef_matrix(cm + cc + [drive] + [g.op for g in pool])
    am, ac, d, o = mat[:k], mat[k:2 * k], mat[2 * k], mat[2 * k + 1:]
    dim = float(2 ** n)
    v = _real(1j * dim * (o @ d), "v")
    out = []
    for lam in grid:
        a = (1.0 - lam) * am + lam * ac
        m = _real(-dim * (a @ a.T), "M")
        out.append(solve_coefficients(m, v, tol, lam))
    return out


def schedule_to_json(pool: OperatorPool, solves: Sequence[AGPSolve]) -> str:
    doc = pool.to_json()
    doc["schedule"] = [{"lambda": s.lam, "coefficients": [float(c) for c in s.coefficients],
                        "residual": s.residual, "regularization": s.regularization,
                        "degenerate": s.degenerate} for s in solves]
    return json.dumps(doc, indent=1)
