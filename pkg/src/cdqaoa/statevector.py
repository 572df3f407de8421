"""Dense statevector simulation for the QAOA gate families.

Basis index bit ``q`` holds qubit ``q`` (qubit 0 is least significant).  Gate
functions act in place on ``state.amplitudes`` and return the state; pass
``inplace=False`` to work on a copy instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from ._backend import kernels
from .pauli import DimensionError, PauliString
from .portfolio import IsingModel, bitstring, feasible_indices

TOPOLOGIES = ("ring", "chain", "complete")


class QuantumState:
    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise DimensionError(f"expected {1 << n_qubits} amplitudes, got {amplitudes.shape}")
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "QuantumState":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))

    def weight_mass(self, budget: int) -> float:
        """Probability on basis states of Hamming weight ``budget``."""
        return float(self.probabilities()[_weights(self.n_qubits) == budget].sum())

    def top_k(self, k: int = 10) -> str:
        """Debug dump of the ``k`` most probable basis states."""
        p = self.probabilities()
        order = np.argsort(-p, kind="stable")[:k]
        return "\n".join(f"{bitstring(int(i), self.n_qubits)}  {p[i]:.6f}  {self.amplitudes[i]:.6f}"
                         for i in order)


@dataclass(frozen=True)
class DiagonalCost:
    n_qubits: int
    energies: np.ndarray

    @classmethod
    def from_ising(cls, ising: IsingModel) -> "DiagonalCost":
        return cls(ising.n_qubits, np.ascontiguousarray(ising.energies()))

    @cached_property
    def order(self) -> np.ndarray:
        """Basis indices sorted by energy (stable), reused across CVaR evaluations."""
        return np.argsort(self.energies, kind="stable")


@lru_cache(maxsize=32)
def _weights(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def _check(state: QuantumState, n: int) -> None:
    if state.n_qubits != n:
        raise DimensionError(f"qubit count mismatch: {state.n_qubits} != {n}")


def _target(state: QuantumState, inplace: bool) -> QuantumState:
    return state if inplace else state.copy()


def dicke_state(n: int, budget: int) -> QuantumState:
    if not 0 < budget < n:
        raise ValueError(f"budget must satisfy 0 < B < n, got B={budget}, n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[_weights(n) == budget] = 1.0 / math.sqrt(math.comb(n, budget))
    return QuantumState(n, amps)


def plus_state(n: int) -> QuantumState:
    return QuantumState(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def edges(n: int, topology: str) -> list[tuple[int, int]]:
    """Mixer edge list in ascending ``(i, j)`` order."""
    if topology == "chain":
        return [(i, i + 1) for i in range(n - 1)]
    if topology == "ring":
        if n == 2:
            return [(0, 1)]
        return sorted([(i, i + 1) for i in range(n - 1)] + [(0, n - 1)])
    if topology == "complete":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def apply_diagonal_phase(state: QuantumState, cost: DiagonalCost, gamma: float,
                         inplace: bool = True) -> QuantumState:
    _check(state, cost.n_qubits)
    out = _target(state, inplace)
    kernels.apply_phase(out.amplitudes, cost.energies, float(gamma))
    return out


def apply_xy_edges(state: QuantumState, edge_list: Sequence[tuple[int, int]], beta: float,
                   inplace: bool = True) -> QuantumState:
    """Product of ``exp(-i beta (X_i X_j + Y_i Y_j))`` over ``edge_list`` in the given order."""
    out = _target(state, inplace)
    if edge_list:
        ii = np.array([e[0] for e in edge_list], dtype=np.int64)
        jj = np.array([e[1] for e in edge_list], dtype=np.int64)
        kernels.apply_xy_edges(out.amplitudes, ii, jj, float(beta))
    return out


def apply_xy_layer(state: QuantumState, beta: float, topology: str,
                   inplace: bool = True) -> QuantumState:
    """First-order product of exact two-qubit XY rotations over the topology's edges.

    Each factor rotates the ``{|01>, |10>}`` block of its pair by ``2*beta`` and
    leaves ``|00>``, ``|11>`` alone, so Hamming weight is conserved exactly.
    """
    return apply_xy_edges(state, edges(state.n_qubits, topology), beta, inplace)


def apply_pauli_rotations(state: QuantumState, strings: Sequence[PauliString],
                          thetas: Sequence[float], inplace: bool = True) -> QuantumState:
    """Apply ``exp(-i theta_t P_t)`` for each pair in order."""
    out = _target(state, inplace)
    if not strings:
        return out
    xs, zs, ph = [], [], []
    for p in strings:
        _check(out, p.n_qubits)
        if not p.is_hermitian():
            raise ValueError(f"{p!r} is not Hermitian")
        xs.append(p.x_bits)
        zs.append(p.z_bits)
        ph.append(p.phase_power)
    kernels.apply_pauli_rotations(out.amplitudes, np.array(xs, dtype=np.int64),
                                  np.array(zs, dtype=np.int64), np.array(ph, dtype=np.int64),
                                  np.asarray(thetas, dtype=np.float64))
    return out


def apply_pauli_exponential(state: QuantumState, p: PauliString, theta: float,
                            inplace: bool = True) -> QuantumState:
    """``exp(-i theta P) = cos(theta) I - i sin(theta) P`` for a Hermitian string."""
    return apply_pauli_rotations(state, [p], [theta], inplace)


def apply_transverse_layer(state: QuantumState, beta: float, inplace: bool = True) -> QuantumState:
    """``exp(-i beta sum_q X_q)``."""
    out = _target(state, inplace)
    kernels.apply_rx_all(out.amplitudes, out.n_qubits, float(beta))
    return out


def apply_grover_mixer(state: QuantumState, beta: float, budget: int,
                       inplace: bool = True) -> QuantumState:
    """``exp(-i beta |F><F|)`` with ``|F>`` the weight-``budget`` Dicke state."""
    n = state.n_qubits
    if not 0 < budget < n:
        raise ValueError(f"budget must satisfy 0 < B < n, got B={budget}, n={n}")
    out = _target(state, inplace)
    idx = feasible_indices(n, budget)
    amp = 1.0 / math.sqrt(idx.shape[0])
    overlap = amp * out.amplitudes[idx].sum()
    out.amplitudes[idx] += (np.exp(-1j * beta) - 1.0) * overlap * amp
    return out


def expectation(state: QuantumState, cost: DiagonalCost) -> float:
    _check(state, cost.n_qubits)
    return float(state.probabilities() @ cost.energies)


def cvar_from_distribution(probs: np.ndarray, energies: np.ndarray, alpha: float,
                           order: np.ndarray | None = None) -> float:
    """Mean of the lowest-energy ``alpha`` probability mass.

    The state straddling the ``alpha`` boundary is included fractionally.
    ``order`` may carry a precomputed stable argsort of ``energies``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return float(probs @ energies)
    if order is None:
        order = np.argsort(energies, kind="stable")
    p = probs[order]
    e = energies[order]
    target = alpha * float(p.sum())
    cum = np.cumsum(p)
    k = int(np.searchsorted(cum, target, side="left"))
    k = min(k, p.shape[0] - 1)
    before = cum[k - 1] if k > 0 else 0.0
    total = float(p[:k] @ e[:k]) + (target - before) * e[k]
    return total / target


def cvar_expectation(state: QuantumState, cost: DiagonalCost, alpha: float) -> float:
    _check(state, cost.n_qubits)
    return cvar_from_distribution(state.probabilities(), cost.energies, alpha, cost.order)


def sample(state: QuantumState, shots: int, seed: int) -> list[str]:
    """Inverse-CDF sampling of computational-basis outcomes; deterministic for a seed."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    p = state.probabilities()
    cdf = np.cumsum(p)
    u = np.random.default_rng(seed).random(shots) * cdf[-1]
    picks = np.minimum(np.searchsorted(cdf, u, side="right"), p.shape[0] - 1)
    return [bitstring(int(i), state.n_qubits) for i in picks]
