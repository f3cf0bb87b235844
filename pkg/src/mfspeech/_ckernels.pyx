# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-bin kernels for small Hermitian systems.

Every routine works on a batch of M independent matrices of order N and
reads only the lower triangle of its Hermitian inputs. Signatures and
return conventions match :mod:`mfspeech._pykernels` exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


def hpd_factor(const cplx[:, :, ::1] a, double loading, double rel_tol):
    """Lower Cholesky factor of ``a + loading*I`` for each matrix in the batch.

    Returns ``(factor, ok)``; failed entries have an all-zero factor.
    """
    cdef Py_ssize_t m_count = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t m, i, j, k
    cdef double trace, tol, d
    cdef cplx acc
    out = np.zeros((m_count, n, n), dtype=np.complex128)
    ok = np.ones(m_count, dtype=np.bool_)
    cdef cplx[:, :, ::1] lo = out
    cdef cnp.npy_bool[::1] okv = ok
    with nogil:
        for m in range(m_count):
            trace = 0.0
            for i in range(n):
                trace = trace + a[m, i, i].real + loading
            tol = rel_tol * trace / n
            for j in range(n):
                d = a[m, j, j].real + loading
                for k in range(j):
                    d = d - _abs2(lo[m, j, k])
                if d <= tol or d <= 0.0:
                    okv[m] = 0
                    break
                d = sqrt(d)
                lo[m, j, j] = d
                for i in range(j + 1, n):
                    acc = a[m, i, j]
                    for k in range(j):
                        acc = acc - lo[m, i, k] * _conj(lo[m, j, k])
                    lo[m, i, j] = acc / d
            if not okv[m]:
                for i in range(n):
                    for j in range(n):
                        lo[m, i, j] = 0.0
    return out, ok


def factor_solve(const cplx[:, :, ::1] lo, const cplx[:, :, ::1] b):
    """Solve ``(L L^H) X = B`` given lower factors ``L`` and RHS ``B`` of shape (M, N, K)."""
    cdef Py_ssize_t m_count = lo.shape[0], n = lo.shape[1], kk = b.shape[2]
    cdef Py_ssize_t m, i, k, c
    cdef cplx acc
    out = np.empty((m_count, n, kk), dtype=np.complex128)
    cdef cplx[:, :, ::1] x = out
    with nogil:
        for m in range(m_count):
            for c in range(kk):
                for i in range(n):
                    acc = b[m, i, c]
                    for k in range(i):
                        acc = acc - lo[m, i, k] * x[m, k, c]
                    x[m, i, c] = acc / lo[m, i, i]
                for i in range(n - 1, -1, -1):
                    acc = x[m, i, c]
                    for k in range(i + 1, n):
                        acc = acc - _conj(lo[m, k, i]) * x[m, k, c]
                    x[m, i, c] = acc / _conj(lo[m, i, i])
    return out


def lower_inverse(const cplx[:, :, ::1] lo):
    """Inverse of each nonsingular lower-triangular matrix."""
    cdef Py_ssize_t m_count = lo.shape[0], n = lo.shape[1]
    cdef Py_ssize_t m, i, j, k
    cdef cplx acc
    out = np.zeros((m_count, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] y = out
    with nogil:
        for m in range(m_count):
            for j in range(n):
                y[m, j, j] = 1.0 / lo[m, j, j]
                for i in range(j + 1, n):
                    acc = 0.0
                    for k in range(j, i):
                        acc = acc + lo[m, i, k] * y[m, k, j]
                    y[m, i, j] = -acc / lo[m, i, i]
    return out


def outer_update(cplx[:, :, ::1] cov, const cplx[:, ::1] x, double old_weight,
                 double new_weight):
    """In place: ``cov = old_weight*cov + new_weight*x x^H``; upper triangle mirrored."""
    cdef Py_ssize_t m_count = cov.shape[0], n = cov.shape[1]
    cdef Py_ssize_t m, i, j
    cdef cplx v
    with nogil:
        for m in range(m_count):
            for i in range(n):
                for j in range(i):
                    v = old_weight * cov[m, i, j] + new_weight * x[m, i] * _conj(x[m, j])
                    cov[m, i, j] = v
                    cov[m, j, i] = _conj(v)
                cov[m, i, i] = old_weight * cov[m, i, i].real + new_weight * _abs2(x[m, i])


def compose(const cplx[:, :, ::1] h):
    """``H H^H`` per matrix; lower triangle computed, upper mirrored, diagonal real."""
    cdef Py_ssize_t m_count = h.shape[0], n = h.shape[1]
    cdef Py_ssize_t m, i, j, k
    cdef cplx acc
    cdef double d
    out = np.empty((m_count, n, n), dtype=np.complex128)
    cdef cplx[:, :, ::1] phi = out
    with nogil:
        for m in range(m_count):
            for i in range(n):
                for j in range(i):
                    acc = 0.0
                    for k in range(n):
                        acc = acc + h[m, i, k] * _conj(h[m, j, k])
                    phi[m, i, j] = acc
                    phi[m, j, i] = _conj(acc)
                d = 0.0
                for k in range(n):
                    d = d + _abs2(h[m, i, k])
                phi[m, i, i] = d
    return out
