# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. See ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "cython"

ctypedef double complex cplx


cdef inline double cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def lindblad_superop(hamiltonian, jumps):
    cdef const cplx[:, ::1] H = np.ascontiguousarray(hamiltonian, dtype=np.complex128)
    cdef Py_ssize_t d = H.shape[0]
    cdef const cplx[:, :, ::1] J
    if len(jumps):
        J = np.ascontiguousarray(np.asarray(jumps, dtype=np.complex128).reshape(-1, d, d))
    else:
        J = np.zeros((0, d, d), dtype=np.complex128)
    cdef Py_ssize_t n = J.shape[0]
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    cdef cplx[:, ::1] M = out
    cdef cplx[:, ::1] K = np.zeros((d, d), dtype=np.complex128)
    cdef Py_ssize_t a, i, j, k, l, r, c
    cdef cplx acc, minus_i = -1j
    with nogil:
        for a in range(n):
            for i in range(d):
                for k in range(d):
                    acc = 0
                    for j in range(d):
                        acc = acc + J[a, j, i].conjugate() * J[a, j, k]
                    K[i, k] = K[i, k] + acc
        # row r = j*d + i  <->  (i, j); column c = l*d + k  <->  (k, l)
        for j in range(d):
            for i in range(d):
                r = j * d + i
                for l in range(d):
                    for k in range(d):
                        c = l * d + k
                        acc = 0
                        for a in range(n):
                            acc = acc + J[a, i, k] * J[a, j, l].conjugate()
                        if l == j:
                            acc = acc + minus_i * H[i, k] - 0.5 * K[i, k]
                        if i == k:
                            acc = acc - minus_i * H[l, j] - 0.5 * K[l, j]
                        M[r, c] = acc
    return out


def scan_projections(jumps, double tol):
    J_arr = np.ascontiguousarray(jumps, dtype=np.complex128)
    cdef Py_ssize_t n = J_arr.shape[0]
    cdef Py_ssize_t d = J_arr.shape[J_arr.ndim - 1]
    if n == 0:
        return np.arange(1, (1 << d) - 1, dtype=np.int64)
    cdef const cplx[:, :, ::1] J = J_arr
    cdef long long full = (1LL << d) - 1
    cdef long long mask
    cdef Py_ssize_t a, i, j, first
    cdef bint ok, in_i, in_j
    cdef cplx c0
    hits = []
    for mask in range(1, full):
        ok = True
        with nogil:
            first = -1
            for i in range(d):
                if (mask >> i) & 1:
                    first = i
                    break
            for a in range(n):
                if not ok:
                    break
                c0 = J[a, first, first]
                for i in range(d):
                    if not ok:
                        break
                    in_i = (mask >> i) & 1
                    for j in range(d):
                        in_j = (mask >> j) & 1
                        if in_i != in_j:
                            if cabs(J[a, i, j]) > tol:
                                ok = False
                                break
                        elif in_i:
                            if i == j:
                                if cabs(J[a, i, i] - c0) > tol:
                                    ok = False
                                    break
                            elif cabs(J[a, i, j]) > tol:
                                ok = False
                                break
        if ok:
            hits.append(mask)
    return np.asarray(hits, dtype=np.int64)
