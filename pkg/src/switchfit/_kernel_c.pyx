# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled filter kernel; same contract as _kernel_py.run_filter.

Row offsets mirror _layout.stat_layout -- keep the two in sync.
"""

import numpy as np

from libc.math cimport exp, log, isfinite

IS_COMPILED = True


def run_filter(double[:, ::1] S, const double[:, ::1] A, const double[:, ::1] coeffs,
               const double[::1] sigmas, double[::1] lag, const double[::1] emissions,
               double[::1] scales_out=None, double[:, ::1] q_trace=None):
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p = coeffs.shape[1] - 1
    cdef Py_ssize_t rows = S.shape[0]
    cdef Py_ssize_t steps = emissions.shape[0]

    cdef Py_ssize_t ntri = p * (p + 1) // 2
    cdef Py_ssize_t o_jump = 1
    cdef Py_ssize_t o_occ = o_jump + n * n
    cdef Py_ssize_t o_ta = o_occ + n
    cdef Py_ssize_t o_tb = o_ta + n * (p + 1)
    cdef Py_ssize_t o_tc = o_tb + n * ntri
    cdef Py_ssize_t o_td = o_tc + n

    cdef double[:, ::1] AT = np.asarray(A).T.copy()
    cdef double[::1] log_sigmas = np.log(np.asarray(sigmas))
    cdef double[::1] g = np.empty(n)
    cdef double[::1] u = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] fa = np.empty(p + 1)
    cdef Py_ssize_t[::1] tri_a = np.empty(ntri, dtype=np.intp)
    cdef Py_ssize_t[::1] tri_b = np.empty(ntri, dtype=np.intp)

    cdef Py_ssize_t t, i, j, k, r, s, row, base
    cdef double y, mu, z, lg, m, c, ur, scale, inv
    cdef double log_inc = 0.0

    k = 0
    for i in range(p):
        for j in range(i, p):
            tri_a[k] = i
            tri_b[k] = j
            k += 1

    for t in range(steps):
        y = emissions[t]

        # per-regime likelihood ratios against the standard-normal
        # reference, max-shifted in log space; the shift folds into scale
        m = -1e308
        for i in range(n):
            mu = coeffs[i, 0]
            for k in range(p):
                mu += coeffs[i, 1 + k] * lag[k]
            z = (y - mu) / sigmas[i]
            lg = -0.5 * z * z - log_sigmas[i] + 0.5 * y * y
            g[i] = lg
            if lg > m:
                m = lg
        for i in range(n):
            g[i] = exp(g[i] - m)
        for i in range(n):
            u[i] = g[i] * S[0, i]

        # propagate every row through the reweighted chain map
        for row in range(rows):
            for j in range(n):
                tmp[j] = g[j] * S[row, j]
            for i in range(n):
                S[row, i] = 0.0
            for j in range(n):
                c = tmp[j]
                if c != 0.0:
                    for i in range(n):
                        S[row, i] += c * AT[j, i]

        # injections weighted by the pre-update state filter
        for r in range(n):
            ur = u[r]
            base = o_jump + r * n
            for s in range(n):
                S[base + s, s] += ur * AT[r, s]
            row = o_occ + r
            for i in range(n):
                S[row, i] += ur * AT[r, i]

        fa[0] = y * y
        for j in range(p):
            fa[1 + j] = lag[j] * y
        for r in range(n):
            ur = u[r]
            base = o_ta + r * (p + 1)
            for k in range(p + 1):
                c = ur * fa[k]
                for i in range(n):
                    S[base + k, i] += c * AT[r, i]
            base = o_tb + r * ntri
            for k in range(ntri):
                c = ur * lag[tri_a[k]] * lag[tri_b[k]]
                for i in range(n):
                    S[base + k, i] += c * AT[r, i]
            row = o_tc + r
            c = ur * y
            for i in range(n):
                S[row, i] += c * AT[r, i]
            base = o_td + r * p
            for k in range(p):
                c = ur * lag[k]
                for i in range(n):
                    S[base + k, i] += c * AT[r, i]

        scale = 0.0
        for i in range(n):
            scale += S[0, i]
        if not (scale > 0.0 and isfinite(scale)):
            return log_inc, t
        inv = 1.0 / scale
        for row in range(rows):
            for i in range(n):
                S[row, i] *= inv
        log_inc += log(scale) + m

        if scales_out is not None:
            scales_out[t] = scale * exp(m)
        if q_trace is not None:
            for i in range(n):
                q_trace[t, i] = S[0, i]

        for k in range(p - 1, 0, -1):
            lag[k] = lag[k - 1]
        if p > 0:
            lag[0] = y

    return log_inc, -1
