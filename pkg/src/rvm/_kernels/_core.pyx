# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled semi-Lagrangian interpolation kernels.

Same arithmetic, same per-element operation order as the numpy reference in
``_ref.py``; compiled with floating-point contraction disabled so the two
backends agree bit-for-bit.
"""

from libc.math cimport floor as _floor


cdef inline void _weights(double t, double* w) noexcept nogil:
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0
    w[1] = (t * t - 1.0) * (t - 2.0) / 2.0
    w[2] = -t * (t + 1.0) * (t - 2.0) / 2.0
    w[3] = t * (t * t - 1.0) / 6.0


def shift_lines_2d(double[:, ::1] values, long long[:] base, double[:] frac,
                   bint periodic, double[:, ::1] out):
    """Row-wise constant-offset cubic shift; see _ref.shift_lines_2d."""
    cdef Py_ssize_t M = values.shape[0]
    cdef Py_ssize_t N = values.shape[1]
    cdef Py_ssize_t r, i, j, k
    cdef long long b
    cdef double w[4]
    cdef double acc, v
    with nogil:
        for r in range(M):
            b = base[r]
            _weights(frac[r], w)
            if periodic:
                for i in range(N):
                    acc = 0.0
                    for j in range(4):
                        k = (i + b - 1 + j) % N
                        if k < 0:
                            k += N
                        acc = acc + w[j] * values[r, k]
                    out[r, i] = acc
            else:
                for i in range(N):
                    acc = 0.0
                    for j in range(4):
                        k = i + b - 1 + j
                        if 0 <= k < N:
                            v = values[r, k]
                        else:
                            v = 0.0
                        acc = acc + w[j] * v
                    out[r, i] = acc


def gather_cubic_2d(double[:, ::1] block, double[:] c0, double[:] c1,
                    double[:] out):
    """Bicubic gather with zero fill; see _ref.gather_cubic (d = 2)."""
    cdef Py_ssize_t n0 = block.shape[0]
    cdef Py_ssize_t n1 = block.shape[1]
    cdef Py_ssize_t M = c0.shape[0]
    cdef Py_ssize_t m, a, bo
    cdef long long b0, b1, k0, k1
    cdef double t0, t1, acc, v
    cdef double w0[4]
    cdef double w1[4]
    with nogil:
        for m in range(M):
            b0 = <long long>_floor(c0[m]); t0 = c0[m] - b0
            b1 = <long long>_floor(c1[m]); t1 = c1[m] - b1
            _weights(t0, w0)
            _weights(t1, w1)
            acc = 0.0
            for a in range(4):
                k0 = b0 + a - 1
                for bo in range(4):
                    k1 = b1 + bo - 1
                    if 0 <= k0 < n0 and 0 <= k1 < n1:
                        v = block[k0, k1]
                    else:
                        v = 0.0
                    acc = acc + (w0[a] * w1[bo]) * v
            out[m] = acc


def gather_cubic_3d(double[:, :, ::1] block, double[:] c0, double[:] c1,
                    double[:] c2, double[:] out):
    """Tricubic gather with zero fill; see _ref.gather_cubic (d = 3)."""
    cdef Py_ssize_t n0 = block.shape[0]
    cdef Py_ssize_t n1 = block.shape[1]
    cdef Py_ssize_t n2 = block.shape[2]
    cdef Py_ssize_t M = c0.shape[0]
    cdef Py_ssize_t m, a, bo, c
    cdef long long b0, b1, b2, k0, k1, k2
    cdef double t0, t1, t2, acc, v
    cdef double w0[4]
    cdef double w1[4]
    cdef double w2[4]
    with nogil:
        for m in range(M):
            b0 = <long long>_floor(c0[m]); t0 = c0[m] - b0
            b1 = <long long>_floor(c1[m]); t1 = c1[m] - b1
            b2 = <long long>_floor(c2[m]); t2 = c2[m] - b2
            _weights(t0, w0)
            _weights(t1, w1)
            _weights(t2, w2)
            acc = 0.0
            for a in range(4):
                k0 = b0 + a - 1
                for bo in range(4):
                    k1 = b1 + bo - 1
                    for c in range(4):
                        k2 = b2 + c - 1
                        if 0 <= k0 < n0 and 0 <= k1 < n1 and 0 <= k2 < n2:
                            v = block[k0, k1, k2]
                        else:
                            v = 0.0
                        acc = acc + ((w0[a] * w1[bo]) * w2[c]) * v
            out[m] = acc
