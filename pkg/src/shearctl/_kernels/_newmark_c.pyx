# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Newmark recurrence: the per-step solve dominates long runs."""

from libc.stdlib cimport free, malloc


def run_newmark(const double[::1] m_diag, const double[:, ::1] C, const double[:, ::1] L,
                const double[::1] coef, double[::1] x, double[::1] v, double[::1] a,
                const double[:, ::1] loads,
                double[:, ::1] out_x, double[:, ::1] out_v, double[:, ::1] out_a):
    """See shearctl._kernels._newmark_py.run_newmark for the contract."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t steps = loads.shape[0]
    cdef Py_ssize_t s, i, j
    cdef double c0 = coef[0], c1 = coef[1], c2 = coef[2], c3 = coef[3]
    cdef double c4 = coef[4], c5 = coef[5], c6 = coef[6], c7 = coef[7]
    cdef double acc, xn, an, vn
    cdef double *work = <double *> malloc(2 * n * sizeof(double))
    if work == NULL:
        raise MemoryError()
    cdef double *rhs = work + n

    try:
        for s in range(steps):
            for j in range(n):
                work[j] = c1 * x[j] + c4 * v[j] + c5 * a[j]
            for i in range(n):
                acc = loads[s, i] + m_diag[i] * (c0 * x[i] + c2 * v[i] + c3 * a[i])
                for j in range(n):
                    acc += C[i, j] * work[j]
                rhs[i] = acc
            # forward substitution: L y = rhs
            for i in range(n):
                acc = rhs[i]
                for j in range(i):
                    acc -= L[i, j] * rhs[j]
                rhs[i] = acc / L[i, i]
            # backward substitution: L^T xn = y
            for i in range(n - 1, -1, -1):
                acc = rhs[i]
                for j in range(i + 1, n):
                    acc -= L[j, i] * rhs[j]
                rhs[i] = acc / L[i, i]
            for i in range(n):
                xn = rhs[i]
                an = c0 * (xn - x[i]) - c2 * v[i] - c3 * a[i]
                vn = v[i] + c6 * a[i] + c7 * an
                x[i] = xn
                v[i] = vn
                a[i] = an
                out_x[s, i] = xn
                out_v[s, i] = vn
                out_a[s, i] = an
    finally:
        free(work)
