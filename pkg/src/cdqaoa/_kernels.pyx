# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled in-place statevector kernels. Mirrors ``_kernels_py``.

Every function takes a C-contiguous complex128 amplitude array and updates it in place.
"""
from libc.math cimport cos, sin
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    int __builtin_parityll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

BACKEND = "cython"


cdef inline double complex* _data(amps) except NULL:
    cdef cnp.ndarray arr = amps
    if arr.dtype != np.complex128 or not arr.flags.c_contiguous:
        raise TypeError("amplitudes must be a contiguous complex128 array")
    return <double complex*> cnp.PyArray_DATA(arr)


cdef inline size_t _insert_zero(size_t h, int bit) noexcept nogil:
    cdef size_t low = h & ((<size_t> 1 << bit) - 1)
    return ((h >> bit) << (bit + 1)) | low


def apply_phase(amps, const double[::1] energies, double gamma):
    cdef double complex* v = _data(amps)
    cdef size_t k, dim = energies.shape[0]
    cdef double a
    with nogil:
        for k in range(dim):
            a = -gamma * energies[k]
            v[k] = v[k] * (cos(a) + 1j * sin(a))


def apply_xy_edges(amps, const long[::1] ii, const long[::1] jj, double beta):
    """exp(-i beta (X_i X_j + Y_i Y_j)) for each edge in order."""
    cdef double complex* v = _data(amps)
    cdef size_t dim = amps.shape[0]
    cdef size_t e, h, k, p, bj, flip, quarter = dim // 4
    cdef int lo, hi
    cdef double c = cos(2.0 * beta), s = sin(2.0 * beta)
    cdef double complex a, b, mis = -1j * s
    with nogil:
        for e in range(<size_t> ii.shape[0]):
            lo = min(ii[e], jj[e])
            hi = max(ii[e], jj[e])
            bj = <size_t> 1 << jj[e]
            flip = (<size_t> 1 << ii[e]) | bj
            for h in range(quarter):
                # k has bit i clear and bit j set; p is its partner
                k = _insert_zero(_insert_zero(h, lo), hi) | bj
                p = k ^ flip
                a = v[k]
                b = v[p]
                v[k] = c * a + mis * b
                v[p] = c * b + mis * a


def apply_pauli_rotations(amps, const long[::1] xmasks, const long[::1] zmasks,
                          const long[::1] phases, const double[::1] thetas):
    """exp(-i theta P) for each Hermitian string P = i^phase X^x Z^z, in order."""
    cdef double complex* v = _data(amps)
    cdef size_t dim = amps.shape[0]
    cdef size_t t, h, k, p, x, z
    cdef int lb
    cdef double c, s, sk, sxz
    cdef double complex f, a, b
    with nogil:
        for t in range(<size_t> xmasks.shape[0]):
            if thetas[t] == 0.0:
                continue
            x = <size_t> xmasks[t]
            z = <size_t> zmasks[t]
            c = cos(thetas[t])
            s = sin(thetas[t])
            # f = -i s i^phase
            if phases[t] & 3 == 0:
                f = -1j * s
            elif phases[t] & 3 == 1:
                f = s
            elif phases[t] & 3 == 2:
                f = 1j * s
            else:
                f = -s
            if x == 0:
                for k in range(dim):
                    sk = -1.0 if __builtin_parityll(k & z) else 1.0
                    v[k] = v[k] * (c + sk * f)
                continue
            lb = __builtin_ctzll(x)
            sxz = -1.0 if __builtin_parityll(x & z) else 1.0
            for h in range(dim // 2):
                k = _insert_zero(h, lb)
                p = k ^ x
                # (P psi)[k] = i^phase (-1)^{|p & z|} psi[p]
                sk = -1.0 if __builtin_parityll(k & z) else 1.0
                a = v[k]
                b = v[p]
                v[k] = c * a + (sk * sxz) * f * b
                v[p] = c * b + sk * f * a


def apply_rx_all(amps, int n, double beta):
    """exp(-i beta X_q) on every qubit."""
    cdef double complex* v = _data(amps)
    cdef size_t dim = amps.shape[0]
    cdef size_t h, k, p, half = dim // 2
    cdef int q
    cdef double c = cos(beta)
    cdef double complex mis = -1j * sin(beta)
    cdef double complex a, b
    with nogil:
        for q in range(n):
            for h in range(half):
                k = _insert_zero(h, q)
                p = k | (<size_t> 1 << q)
                a = v[k]
                b = v[p]
                v[k] = c * a + mis * b
                v[p] = c * b + mis * a
