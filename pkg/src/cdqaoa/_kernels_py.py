"""Pure-NumPy statevector kernels; same signatures and semantics as ``_kernels``."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

BACKEND = "numpy"

_IPOW = np.array([1, 1j, -1, -1j])


@lru_cache(maxsize=64)
def _parity_table(dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.uint64)
    return (np.bitwise_count(idx) & 1).astype(np.int8)


@lru_cache(maxsize=1024)
def _pair_indices(dim: int, low_mask: int, high_mask: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    return idx[((idx & low_mask) == 0) & ((idx & high_mask) != 0)]


def apply_phase(amps: np.ndarray, energies: np.ndarray, gamma: float) -> None:
    amps *= np.exp(-1j * gamma * energies)


def apply_xy_edges(amps: np.ndarray, ii, jj, beta: float) -> None:
    dim = amps.shape[0]
    c, s = np.cos(2 * beta), np.sin(2 * beta)
    for i, j in zip(ii, jj):
        bi, bj = 1 << int(i), 1 << int(j)
        k = _pair_indices(dim, bi, bj)
        p = k ^ (bi | bj)
        a, b = amps[k], amps[p]
        amps[k] = c * a - 1j * s * b
        amps[p] = -1j * s * a + c * b


def apply_pauli_rotations(amps: np.ndarray, xmasks, zmasks, phases, thetas) -> None:
    dim = amps.shape[0]
    par = _parity_table(dim)
    idx = np.arange(dim, dtype=np.int64)
    for x, z, ph, th in zip(xmasks, zmasks, phases, thetas):
        if th == 0.0:
            continue
        x, z = int(x), int(z)
        f = -1j * np.sin(th) * _IPOW[int(ph) & 3]
        c = np.cos(th)
        if x == 0:
            sign = 1 - 2 * par[idx & z]
            amps *= c + f * sign
            continue
        p = idx ^ x
        src = amps[p] * (1 - 2 * par[p & z])
        amps *= c
        amps += f * src


def apply_rx_all(amps: np.ndarray, n: int, beta: float) -> None:
    c, s = np.cos(beta), np.sin(beta)
    view = amps.reshape((2,) * n)
    for q in range(n):
        ax = n - 1 - q
        a0 = np.take(view, 0, axis=ax).copy()
        a1 = np.take(view, 1, axis=ax).copy()
        sl0 = [slice(None)] * n
        sl1 = [slice(None)] * n
        sl0[ax], sl1[ax] = 0, 1
        view[tuple(sl0)] = c * a0 - 1j * s * a1
        view[tuple(sl1)] = -1j * s * a0 + c * a1
