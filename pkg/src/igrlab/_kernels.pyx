# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: block Cholesky factor/solve for symmetric periodic
block-tridiagonal (2x2) systems and SIPG block assembly.  Pure-numpy/scipy counterparts live in ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef inline int chol2(double a00, double a10, double a11, double* r) noexcept nogil:
    """Lower Cholesky factor of a symmetric 2x2 block into r[0..2] = (r00, r10, r11)."""
    if a00 <= 0.0:
        return -1
    r[0] = sqrt(a00)
    r[1] = a10 / r[0]
    a11 = a11 - r[1] * r[1]
    if a11 <= 0.0:
        return -1
    r[2] = sqrt(a11)
    return 0


cdef inline void fwd2(double* r, double b0, double b1, double* out) noexcept nogil:
    # out = R^-1 b
    out[0] = b0 / r[0]
    out[1] = (b1 - r[1] * out[0]) / r[2]


cdef inline void bwd2(double* r, double b0, double b1, double* out) noexcept nogil:
    # out = R^-T b
    out[1] = b1 / r[2]
    out[0] = (b0 - r[1] * out[1]) / r[0]


def cbt_factor(double[:, :, ::1] lower, double[:, :, ::1] diag, double[:, :, ::1] upper):
    """Block Cholesky of a symmetric positive definite periodic block-tridiagonal matrix.

    Row i reads ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`` with
    indices modulo n and ``lower[i+1] == upper[i].T``.  The last cell is
    ordered as a border so the fill stays in one block column.  Returns a
    tuple consumed by :func:`cbt_solve`.
    """
    cdef Py_ssize_t n = diag.shape[0]
    if n < 4:
        raise ValueError("need at least 4 block rows")
    r_arr = np.zeros((n, 3))
    w_arr = np.zeros((n, 2, 2))
    z_arr = np.zeros((n, 2, 2))
    cdef double[:, ::1] r = r_arr
    cdef double[:, :, ::1] w = w_arr      # w[i] = R_i^-1 upper[i]
    cdef double[:, :, ::1] z = z_arr      # z[i] = R_i^-1 (coupling of cell i to the border)
    cdef double d00, d10, d11, c00, c01, c10, c11, l00, l10, l11
    cdef double tmp[2]
    cdef double* rp
    cdef Py_ssize_t i
    cdef int fail = -1
    with nogil:
        d00 = diag[0, 0, 0]
        d10 = diag[0, 1, 0]
        d11 = diag[0, 1, 1]
        # coupling of cell 0 to the border cell n-1 is upper[n-1].T
        c00 = upper[n - 1, 0, 0]
        c01 = upper[n - 1, 1, 0]
        c10 = upper[n - 1, 0, 1]
        c11 = upper[n - 1, 1, 1]
        l00 = diag[n - 1, 0, 0]
        l10 = diag[n - 1, 1, 0]
        l11 = diag[n - 1, 1, 1]
        for i in range(n - 1):
            rp = &r[i, 0]
            if chol2(d00, d10, d11, rp) != 0:
                fail = i
                break
            if i == n - 2:
                c00 = c00 + upper[i, 0, 0]
                c01 = c01 + upper[i, 0, 1]
                c10 = c10 + upper[i, 1, 0]
                c11 = c11 + upper[i, 1, 1]
            fwd2(rp, c00, c10, tmp)
            z[i, 0, 0] = tmp[0]
            z[i, 1, 0] = tmp[1]
            fwd2(rp, c01, c11, tmp)
            z[i, 0, 1] = tmp[0]
            z[i, 1, 1] = tmp[1]
            l00 = l00 - (z[i, 0, 0] * z[i, 0, 0] + z[i, 1, 0] * z[i, 1, 0])
            l10 = l10 - (z[i, 0, 1] * z[i, 0, 0] + z[i, 1, 1] * z[i, 1, 0])
            l11 = l11 - (z[i, 0, 1] * z[i, 0, 1] + z[i, 1, 1] * z[i, 1, 1])
            if i == n - 2:
                break
            fwd2(rp, upper[i, 0, 0], upper[i, 1, 0], tmp)
            w[i, 0, 0] = tmp[0]
            w[i, 1, 0] = tmp[1]
            fwd2(rp, upper[i, 0, 1], upper[i, 1, 1], tmp)
            w[i, 0, 1] = tmp[0]
            w[i, 1, 1] = tmp[1]
            d00 = diag[i + 1, 0, 0] - (w[i, 0, 0] * w[i, 0, 0] + w[i, 1, 0] * w[i, 1, 0])
            d10 = diag[i + 1, 1, 0] - (w[i, 0, 1] * w[i, 0, 0] + w[i, 1, 1] * w[i, 1, 0])
            d11 = diag[i + 1, 1, 1] - (w[i, 0, 1] * w[i, 0, 1] + w[i, 1, 1] * w[i, 1, 1])
            # border coupling of row i+1: -W_i^T Z_i
            c00 = -(w[i, 0, 0] * z[i, 0, 0] + w[i, 1, 0] * z[i, 1, 0])
            c01 = -(w[i, 0, 0] * z[i, 0, 1] + w[i, 1, 0] * z[i, 1, 1])
            c10 = -(w[i, 0, 1] * z[i, 0, 0] + w[i, 1, 1] * z[i, 1, 0])
            c11 = -(w[i, 0, 1] * z[i, 0, 1] + w[i, 1, 1] * z[i, 1, 1])
        if fail < 0:
            if chol2(l00, l10, l11, &r[n - 1, 0]) != 0:
                fail = n - 1
    if fail >= 0:
        raise ZeroDivisionError(f"matrix is not positive definite (pivot block {fail})")
    return (r_arr, w_arr, z_arr)


def cbt_solve(factors, double[:, :, ::1] rhs):
    """Solve with factors from :func:`cbt_factor`; ``rhs`` has shape (n, 2, k)."""
    cdef double[:, ::1] r = factors[0]
    cdef double[:, :, ::1] w = factors[1]
    cdef double[:, :, ::1] z = factors[2]
    cdef Py_ssize_t n = rhs.shape[0]
    cdef Py_ssize_t nk = rhs.shape[2]
    out_arr = np.empty((n, 2, nk))
    cdef double[:, :, ::1] x = out_arr
    cdef double[:, ::1] y = np.empty((n, 2))
    cdef double b0, b1, xl0, xl1
    cdef double tmp[2]
    cdef Py_ssize_t i, c
    with nogil:
        for c in range(nk):
            fwd2(&r[0, 0], rhs[0, 0, c], rhs[0, 1, c], tmp)
            y[0, 0] = tmp[0]
            y[0, 1] = tmp[1]
            for i in range(1, n - 1):
                b0 = rhs[i, 0, c] - (w[i - 1, 0, 0] * y[i - 1, 0] + w[i - 1, 1, 0] * y[i - 1, 1])
                b1 = rhs[i, 1, c] - (w[i - 1, 0, 1] * y[i - 1, 0] + w[i - 1, 1, 1] * y[i - 1, 1])
                fwd2(&r[i, 0], b0, b1, tmp)
                y[i, 0] = tmp[0]
                y[i, 1] = tmp[1]
            b0 = rhs[n - 1, 0, c]
            b1 = rhs[n - 1, 1, c]
            for i in range(n - 1):
                b0 = b0 - (z[i, 0, 0] * y[i, 0] + z[i, 1, 0] * y[i, 1])
                b1 = b1 - (z[i, 0, 1] * y[i, 0] + z[i, 1, 1] * y[i, 1])
            fwd2(&r[n - 1, 0], b0, b1, tmp)
            bwd2(&r[n - 1, 0], tmp[0], tmp[1], tmp)
            xl0 = tmp[0]
            xl1 = tmp[1]
            x[n - 1, 0, c] = xl0
            x[n - 1, 1, c] = xl1
            for i in range(n - 2, -1, -1):
                b0 = y[i, 0] - (z[i, 0, 0] * xl0 + z[i, 0, 1] * xl1)
                b1 = y[i, 1] - (z[i, 1, 0] * xl0 + z[i, 1, 1] * xl1)
                if i < n - 2:
                    b0 = b0 - (w[i, 0, 0] * x[i + 1, 0, c] + w[i, 0, 1] * x[i + 1, 1, c])
                    b1 = b1 - (w[i, 1, 0] * x[i + 1, 0, c] + w[i, 1, 1] * x[i + 1, 1, c])
                bwd2(&r[i, 0], b0, b1, tmp)
                x[i, 0, c] = tmp[0]
                x[i, 1, c] = tmp[1]
    return out_arr


def sipg_blocks(double[:, ::1] kq, double[::1] km, double[::1] kp,
                double alpha, double[::1] sigma_f, double h):
    """Compiled twin of ``_fallback.sipg_blocks``."""
    cdef Py_ssize_t n = kq.shape[0]
    lower_arr = np.zeros((n, 2, 2))
    diag_arr = np.zeros((n, 2, 2))
    upper_arr = np.zeros((n, 2, 2))
    cdef double[:, :, ::1] lower = lower_arr
    cdef double[:, :, ::1] diag = diag_arr
    cdef double[:, :, ::1] upper = upper_arr
    cdef double s = sqrt06
    cdef double w0 = 5.0 / 9.0, w1 = 8.0 / 9.0
    cdef double a, b, c, tot, first, second, al, ar, sigma
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            a = w0 * kq[i, 0]
            b = w1 * kq[i, 1]
            c = w0 * kq[i, 2]
            tot = a + b + c
            first = -s * a + s * c
            second = 0.6 * (a + c)
            diag[i, 0, 0] += 0.5 * h * tot
            diag[i, 0, 1] += 0.5 * h * first
            diag[i, 1, 0] += 0.5 * h * first
            diag[i, 1, 1] += 0.5 * h * second + alpha * (2.0 / h) * tot
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            al = km[i] / h
            ar = kp[i] / h
            sigma = sigma_f[i]
            # left-left: J = (1, 1), A = (0, al)
            diag[i, 0, 0] += alpha * sigma
            diag[i, 0, 1] += alpha * (sigma - al)
            diag[i, 1, 0] += alpha * (sigma - al)
            diag[i, 1, 1] += alpha * (sigma - 2.0 * al)
            # right-right: J = (-1, 1), A = (0, ar)
            diag[j, 0, 0] += alpha * sigma
            diag[j, 0, 1] += alpha * (ar - sigma)
            diag[j, 1, 0] += alpha * (ar - sigma)
            diag[j, 1, 1] += alpha * (sigma - 2.0 * ar)
            # left test, right trial
            upper[i, 0, 0] = -alpha * sigma
            upper[i, 0, 1] = alpha * (sigma - ar)
            upper[i, 1, 0] = alpha * (al - sigma)
            upper[i, 1, 1] = alpha * (sigma - ar - al)
            lower[j, 0, 0] = upper[i, 0, 0]
            lower[j, 0, 1] = upper[i, 1, 0]
            lower[j, 1, 0] = upper[i, 0, 1]
            lower[j, 1, 1] = upper[i, 1, 1]
    return lower_arr, diag_arr, upper_arr


cdef double sqrt06 = 0.7745966692414834
