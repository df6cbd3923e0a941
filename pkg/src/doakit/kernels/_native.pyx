# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: grid scans, peak detection, diagonal sums and
simultaneous polynomial root iteration.

Signatures match :mod:`doakit.kernels._python`.
"""

import numpy as np

from libc.math cimport cos, sin, log, isfinite
from libc.float cimport DBL_EPSILON


cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double creal(double complex)


def diagonal_sums(B):
    cdef const double complex[:, :] b = np.ascontiguousarray(B, dtype=complex)
    cdef Py_ssize_t M = b.shape[0]
    out = np.zeros(2 * M - 1, dtype=complex)
    cdef double complex[::1] o = out
    cdef Py_ssize_t m, n
    with nogil:
        for m in range(M):
            for n in range(M):
                o[m - n + M - 1] += b[m, n]
    return out


def scan_quadratic(sums, psi):
    cdef const double complex[::1] c = np.ascontiguousarray(sums, dtype=complex)
    cdef const double[::1] ps = np.ascontiguousarray(psi, dtype=float)
    cdef Py_ssize_t P = ps.shape[0]
    cdef Py_ssize_t M = (c.shape[0] + 1) // 2
    out = np.empty(P, dtype=float)
    cdef double[::1] o = out
    cdef double zr[256]
    cdef double zi[256]
    cdef double ar[256]
    cdef double ai[256]
    cdef Py_ssize_t block = 256  # matches the scratch array length
    cdef Py_ssize_t start, stop, width, i, l
    cdef double cr, ci, tr, ti
    cdef double c0 = creal(c[M - 1])
    with nogil:
        # blocked so the lag loop runs over independent grid points
        start = 0
        while start < P:
            stop = start + block
            if stop > P:
                stop = P
            width = stop - start
            for i in range(width):
                zr[i] = cos(ps[start + i])
                zi[i] = sin(ps[start + i])
                ar[i] = 0.0
                ai[i] = 0.0
            for l in range(M - 1, 0, -1):
                cr = c[M - 1 + l].real
                ci = c[M - 1 + l].imag
                for i in range(width):
                    tr = ar[i] + cr
                    ti = ai[i] + ci
                    ar[i] = tr * zr[i] - ti * zi[i]
                    ai[i] = tr * zi[i] + ti * zr[i]
            for i in range(width):
                o[start + i] = c0 + 2.0 * ar[i]
            start = stop
    return out


def local_maxima(power):
    cdef const double[::1] p = np.ascontiguousarray(power, dtype=float)
    cdef Py_ssize_t P = p.shape[0]
    if P < 3:
        return np.empty(0, dtype=np.int64)
    idx = np.empty(P, dtype=np.int64)
    cdef long long[::1] ix = idx
    cdef Py_ssize_t i, k = 0
    with nogil:
        for i in range(1, P - 1):
            # branch-free: always write, advance only on a peak
            ix[k] = i
            k += (p[i] > p[i - 1]) & (p[i] >= p[i + 1])
    return idx[:k].copy()


cdef inline void _eval(const double complex[::1] c, double complex z,
                       double complex *inv_ratio, double *ap, double *bound,
                       double *logp) noexcept nogil:
    # p'/p with reversed evaluation outside the unit disc
    cdef Py_ssize_t n = c.shape[0] - 1
    cdef Py_ssize_t k
    cdef double az = cabs(z)
    cdef bint inside = az <= 1.0
    cdef double complex w, p = 0, dp = 0, ck
    cdef double aw, e = 0
    if inside:
        w = z
    else:
        w = 1.0 / z
    aw = cabs(w)
    for k in range(n + 1):
        if inside:
            ck = c[k]
        else:
            ck = c[n - k]
        dp = dp * w + p
        p = p * w + ck
        e = e * aw + cabs(ck)
    ap[0] = cabs(p)
    bound[0] = e
    if inside:
        inv_ratio[0] = dp / p
        logp[0] = log(cabs(p))
    else:
        inv_ratio[0] = (n * p - w * dp) / (z * p)
        logp[0] = log(cabs(p)) + n * log(az)


def aberth(coeffs, init, int max_iter=500):
    cdef const double complex[::1] c = np.ascontiguousarray(coeffs, dtype=complex)
    roots = np.array(init, dtype=complex)
    cdef double complex[::1] z = roots
    cdef Py_ssize_t n = z.shape[0]
    active_arr = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] active = active_arr
    cdef double tol = 4.0 * (n + 1) * DBL_EPSILON
    cdef Py_ssize_t i, j, n_active = n
    cdef int it = 0
    cdef double complex inv_ratio, s, step
    cdef double ap, e, logp
    with nogil:
        for it in range(1, max_iter + 1):
            n_active = 0
            for i in range(n):
                if not active[i]:
                    continue
                _eval(c, z[i], &inv_ratio, &ap, &e, &logp)
                if ap <= tol * e:
                    active[i] = 0
                    continue
                s = 0
                for j in range(n):
                    if j != i:
                        s = s + 1.0 / (z[i] - z[j])
                step = 1.0 / (inv_ratio - s)
                if not (isfinite(step.real) and isfinite(step.imag)):
                    continue
                z[i] = z[i] - step
                if cabs(step) <= 2.0 * DBL_EPSILON * cabs(z[i]):
                    active[i] = 0
                else:
                    n_active += 1
            if n_active == 0:
                break
    return roots, it, n_active == 0


def newton_step(coeffs, roots):
    cdef const double complex[::1] c = np.ascontiguousarray(coeffs, dtype=complex)
    out = np.array(roots, dtype=complex)
    cdef double complex[::1] z = out
    cdef Py_ssize_t i
    cdef double complex inv_ratio, cand, step, tmp
    cdef double ap, e, logp, logp_new
    with nogil:
        for i in range(z.shape[0]):
            _eval(c, z[i], &inv_ratio, &ap, &e, &logp)
            step = 1.0 / inv_ratio
            if not (isfinite(step.real) and isfinite(step.imag)):
                continue
            cand = z[i] - step
            _eval(c, cand, &tmp, &ap, &e, &logp_new)
            if logp_new <= logp:
                z[i] = cand
    return out
