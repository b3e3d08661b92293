# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled jet coefficient kernels (contract mirrored by _jet_core_py)."""

from libc.stdlib cimport free, malloc


def mul(const double[::1] a, const double[::1] b, double[::1] out,
        const int[::1] left, const int[::1] right, const int[::1] target):
    cdef Py_ssize_t k
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t npairs = left.shape[0]
    for k in range(n):
        out[k] = 0.0
    for k in range(npairs):
        out[target[k]] += a[left[k]] * b[right[k]]


def compose(double h0, double h1, double h2, double h3,
            const double[::1] a, double[::1] out,
            const int[::1] left, const int[::1] right, const int[::1] target,
            int order):
    # out = h0 + h1*d + (h2/2)*d^2 + (h3/6)*d^3 with d = a minus its value part
    cdef Py_ssize_t k
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t npairs = left.shape[0]
    cdef double c2 = h2 / 2.0
    cdef double c3 = h3 / 6.0
    cdef double* buf = <double*> malloc(3 * n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* d = buf
    cdef double* p2 = buf + n
    cdef double* p3 = buf + 2 * n
    try:
        for k in range(n):
            d[k] = a[k]
        d[0] = 0.0
        for k in range(n):
            out[k] = h1 * d[k]
        out[0] += h0
        if order >= 2:
            for k in range(n):
                p2[k] = 0.0
            for k in range(npairs):
                p2[target[k]] += d[left[k]] * d[right[k]]
            for k in range(n):
                out[k] += c2 * p2[k]
            if order >= 3:
                for k in range(n):
                    p3[k] = 0.0
                for k in range(npairs):
                    p3[target[k]] += p2[left[k]] * d[right[k]]
                for k in range(n):
                    out[k] += c3 * p3[k]
    finally:
        free(buf)
