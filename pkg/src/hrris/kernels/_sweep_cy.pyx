# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-ascent sweep; mirrors ``_sweep_py.sweep_impl`` exactly.

See the pure-Python module for the algorithm description and the shared
state convention.  The two implementations must stay in lockstep; the parity
test in tests/test_kernels.py compares them on random instances.
"""

import numpy as np

cimport cython
from libc.math cimport cos, sin, sqrt, log, fabs

cdef double LN2 = 0.6931471805599453
cdef double GOLDEN = 0.6180339887498949


cdef double _logdet_chol(double complex[:, ::1] a, double complex[:, ::1] scratch,
                         int n) noexcept:
    """log-determinant of a Hermitian positive-definite matrix via Cholesky."""
    cdef int i, j, k
    cdef double complex acc
    cdef double d, res
    for i in range(n):
        for j in range(n):
            scratch[i, j] = a[i, j]
    res = 0.0
    for j in range(n):
        d = scratch[j, j].real
        for k in range(j):
            d -= scratch[j, k].real * scratch[j, k].real \
                + scratch[j, k].imag * scratch[j, k].imag
        if d <= 0.0:
            return -1e300
        d = sqrt(d)
        scratch[j, j] = d
        res += log(d)
        for i in range(j + 1, n):
            acc = scratch[i, j]
            for k in range(j):
                acc -= scratch[i, k] * scratch[j, k].conjugate()
            scratch[i, j] = acc / d
    return 2.0 * res


cdef inline double _noise_weight(double alpha, double s_n, double sigma_r2,
                                 double sigma_si2) noexcept:
    cdef double a2 = alpha * alpha
    return a2 * (sigma_r2 + a2 * sigma_si2 * s_n) / (1.0 - a2 * sigma_si2)


cdef inline double _out_power(double alpha, double s_n, double sigma_r2,
                              double sigma_si2) noexcept:
    cdef double a2 = alpha * alpha
    return a2 * (s_n + sigma_r2) / (1.0 - a2 * sigma_si2)


cdef double _cand_se(double alpha, double theta, bint free,
                     double s_n, double sigma_r2, double sigma_si2,
                     double complex[:, ::1] t_base, double complex[:, ::1] c_base,
                     double complex[:, ::1] outer_tr, double complex[:, ::1] outer_uu,
                     double complex[:, ::1] tt, double complex[:, ::1] cc,
                     double complex[:, ::1] full, double complex[:, ::1] scratch,
                     int nr, int r) noexcept:
    cdef int i, j, k
    cdef double w = 0.0
    cdef double complex c = alpha * (cos(theta) + 1j * sin(theta))
    cdef double complex acc
    if free:
        w = _noise_weight(alpha, s_n, sigma_r2, sigma_si2)
    for i in range(nr):
        for j in range(r):
            tt[i, j] = t_base[i, j] + c * outer_tr[i, j]
        for j in range(nr):
            cc[i, j] = c_base[i, j] + w * outer_uu[i, j]
    for i in range(nr):
        for j in range(nr):
            acc = 0.0
            for k in range(r):
                acc += tt[i, k] * tt[j, k].conjugate()
            full[i, j] = cc[i, j] + acc
    return (_logdet_chol(full, scratch, nr) - _logdet_chol(cc, scratch, nr)) / LN2


def sweep_impl(double complex[:, ::1] uT,
               double complex[:, ::1] rows,
               double[::1] s,
               double[::1] alphas,
               double[::1] thetas,
               const unsigned char[::1] amp_free,
               double[::1] codebook,
               double sigma2,
               double sigma_r2,
               double sigma_si2,
               double budget,
               int amp_grid,
               int golden_iters=32):
    """Run one coordinate sweep in place; returns the SE (bits/s/Hz) after it."""
    cdef int n_el = uT.shape[0]
    cdef int nr = uT.shape[1]
    cdef int r = rows.shape[1]
    cdef int n_book = codebook.shape[0]

    cdef double complex[::1] coeffs = np.empty(n_el, dtype=complex)
    cdef double[::1] weights = np.zeros(n_el)
    cdef double[::1] powers = np.zeros(n_el)
    cdef double complex[:, ::1] t_mat = np.zeros((nr, r), dtype=complex)
    cdef double complex[:, ::1] c_mat = np.zeros((nr, nr), dtype=complex)
    cdef double complex[:, ::1] t_base = np.empty((nr, r), dtype=complex)
    cdef double complex[:, ::1] c_base = np.empty((nr, nr), dtype=complex)
    cdef double complex[:, ::1] outer_tr = np.empty((nr, r), dtype=complex)
    cdef double complex[:, ::1] outer_uu = np.empty((nr, nr), dtype=complex)
    cdef double complex[:, ::1] tt = np.empty((nr, r), dtype=complex)
    cdef double complex[:, ::1] cc = np.empty((nr, nr), dtype=complex)
    cdef double complex[:, ::1] full = np.empty((nr, nr), dtype=complex)
    cdef double complex[:, ::1] scratch = np.empty((nr, nr), dtype=complex)

    cdef int n, i, j, k, kk, best_k
    cdef double total = 0.0
    cdef double best_se, best_alpha, best_theta, se, theta
    cdef double residual, denom, a_max, step
    cdef double a, b, x1, x2, f1, f2, lo, hi
    cdef bint free

    for n in range(n_el):
        coeffs[n] = alphas[n] * (cos(thetas[n]) + 1j * sin(thetas[n]))
        if amp_free[n]:
            weights[n] = _noise_weight(alphas[n], s[n], sigma_r2, sigma_si2)
            powers[n] = _out_power(alphas[n], s[n], sigma_r2, sigma_si2)
            total += powers[n]

    for i in range(nr):
        c_mat[i, i] = sigma2
    for n in range(n_el):
        for i in range(nr):
            for j in range(r):
                t_mat[i, j] = t_mat[i, j] + coeffs[n] * uT[n, i] * rows[n, j]
            if amp_free[n] and weights[n] != 0.0:
                for j in range(nr):
                    c_mat[i, j] = c_mat[i, j] \
                        + weights[n] * uT[n, i] * uT[n, j].conjugate()

    for n in range(n_el):
        for i in range(nr):
            for j in range(r):
                outer_tr[i, j] = uT[n, i] * rows[n, j]
                t_base[i, j] = t_mat[i, j] - coeffs[n] * outer_tr[i, j]
            for j in range(nr):
                outer_uu[i, j] = uT[n, i] * uT[n, j].conjugate()
                c_base[i, j] = c_mat[i, j] - weights[n] * outer_uu[i, j]
        total -= powers[n]

        free = amp_free[n] != 0
        best_alpha = alphas[n]
        best_theta = thetas[n]
        best_se = _cand_se(best_alpha, best_theta, free, s[n], sigma_r2, sigma_si2,
                           t_base, c_base, outer_tr, outer_uu, tt, cc, full,
                           scratch, nr, r)

        if not free:
            for k in range(n_book):
                se = _cand_se(1.0, codebook[k], False, s[n], sigma_r2, sigma_si2,
                              t_base, c_base, outer_tr, outer_uu, tt, cc, full,
                              scratch, nr, r)
                if se > best_se:
                    best_se = se
                    best_alpha = 1.0
                    best_theta = codebook[k]
        else:
            residual = budget - total
            if residual < 0.0:
                residual = 0.0
            denom = s[n] + sigma_r2 + residual * sigma_si2
            a_max = sqrt(residual / denom) if denom > 0.0 else 0.0
            step = a_max / (amp_grid - 1) if amp_grid > 1 else 0.0
            for k in range(n_book):
                theta = codebook[k]
                best_k = 0
                f1 = -1e300
                for kk in range(amp_grid):
                    a = kk * step if kk < amp_grid - 1 else a_max
                    se = _cand_se(a, theta, True, s[n], sigma_r2, sigma_si2,
                                  t_base, c_base, outer_tr, outer_uu, tt, cc,
                                  full, scratch, nr, r)
                    if se > f1:
                        f1 = se
                        best_k = kk
                if f1 > best_se:
                    best_se = f1
                    best_alpha = (best_k * step if best_k < amp_grid - 1 else a_max)
                    best_theta = theta
                lo = (best_k - 1) * step if best_k - 1 > 0 else 0.0
                if best_k - 1 < 0:
                    lo = 0.0
                kk = best_k + 1
                if kk > amp_grid - 1:
                    kk = amp_grid - 1
                hi = kk * step if kk < amp_grid - 1 else a_max
                a = lo
                b = hi
                x1 = b - GOLDEN * (b - a)
                x2 = a + GOLDEN * (b - a)
                f1 = _cand_se(x1, theta, True, s[n], sigma_r2, sigma_si2,
                              t_base, c_base, outer_tr, outer_uu, tt, cc,
                              full, scratch, nr, r)
                f2 = _cand_se(x2, theta, True, s[n], sigma_r2, sigma_si2,
                              t_base, c_base, outer_tr, outer_uu, tt, cc,
                              full, scratch, nr, r)
                for kk in range(golden_iters):
                    if f1 >= f2:
                        b = x2
                        x2 = x1
                        f2 = f1
                        x1 = b - GOLDEN * (b - a)
                        f1 = _cand_se(x1, theta, True, s[n], sigma_r2, sigma_si2,
                                      t_base, c_base, outer_tr, outer_uu, tt, cc,
                                      full, scratch, nr, r)
                    else:
                        a = x1
                        x1 = x2
                        f1 = f2
                        x2 = a + GOLDEN * (b - a)
                        f2 = _cand_se(x2, theta, True, s[n], sigma_r2, sigma_si2,
                                      t_base, c_base, outer_tr, outer_uu, tt, cc,
                                      full, scratch, nr, r)
                if f1 > best_se:
                    best_se = f1
                    best_alpha = x1
                    best_theta = theta
                if f2 > best_se:
                    best_se = f2
                    best_alpha = x2
                    best_theta = theta

        alphas[n] = best_alpha
        thetas[n] = best_theta
        coeffs[n] = best_alpha * (cos(best_theta) + 1j * sin(best_theta))
        if free:
            weights[n] = _noise_weight(best_alpha, s[n], sigma_r2, sigma_si2)
            powers[n] = _out_power(best_alpha, s[n], sigma_r2, sigma_si2)
        for i in range(nr):
            for j in range(r):
                t_mat[i, j] = t_base[i, j] + coeffs[n] * outer_tr[i, j]
            for j in range(nr):
                c_mat[i, j] = c_base[i, j] + weights[n] * outer_uu[i, j]
        total += powers[n]

    cdef double complex acc
    for i in range(nr):
        for j in range(nr):
            acc = 0.0
            for k in range(r):
                acc += t_mat[i, k] * t_mat[j, k].conjugate()
            full[i, j] = c_mat[i, j] + acc
    return (_logdet_chol(full, scratch, nr) - _logdet_chol(c_mat, scratch, nr)) / LN2
