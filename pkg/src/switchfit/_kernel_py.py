"""Pure numpy filter kernel; fallback when the compiled one is absent.

Both kernels implement the same contract:

    run_filter(S, A, coeffs, sigmas, lag, emissions,
               scales_out=None, q_trace=None) -> (log_scale_inc, status)

``S`` is the stacked (rows, N) state (see _layout), updated in place
along with ``lag``.  ``status`` is -1 on success, else the 0-based
offset of the emission whose normalization constant degenerated (the
state contents are unspecified after a failed step).  When given,
``scales_out`` receives each step's true normalization constant and
``q_trace`` each step's normalized state filter.
"""

from __future__ import annotations

import math

import numpy as np

from ._layout import stat_layout

IS_COMPILED = False


def run_filter(S, A, coeffs, sigmas, lag, emissions, scales_out=None, q_trace=None):
    n = A.shape[0]
    p = coeffs.shape[1] - 1
    lay = stat_layout(n, p)
    AT = np.ascontiguousarray(A.T)
    log_sigmas = np.log(sigmas)
    lag_coeffs = coeffs[:, 1:]
    intercepts = coeffs[:, 0]
    tri_i, tri_j = lay.tri_i, lay.tri_j
    fa = np.empty(p + 1)

    log_inc = 0.0
    for t in range(emissions.shape[0]):
        y = emissions[t]
        mu = intercepts + lag_coeffs @ lag if p else intercepts
        z = (y - mu) / sigmas
        logg = -0.5 * z * z - log_sigmas + 0.5 * y * y
        m = logg.max()
        g = np.exp(logg - m)
        u = g * S[0]

        S2 = (S * g) @ AT

        # statistic injections, all weighted by the pre-update state filter
        idx = np.arange(n)
        uAT = u[:, None] * AT
        S2[lay.jump : lay.occ].reshape(n, n, n)[:, idx, idx] += uAT
        S2[lay.occ : lay.ta] += uAT
        fa[0] = y * y
        if p:
            fa[1:] = lag * y
        S2[lay.ta : lay.tb].reshape(n, p + 1, n)[...] += fa[None, :, None] * uAT[:, None, :]
        if lay.ntri:
            ftri = lag[tri_i] * lag[tri_j]
            S2[lay.tb : lay.tc].reshape(n, lay.ntri, n)[...] += (
                ftri[None, :, None] * uAT[:, None, :]
            )
        S2[lay.tc : lay.td] += y * uAT
        if p:
            S2[lay.td : lay.rows].reshape(n, p, n)[...] += lag[None, :, None] * uAT[:, None, :]

        scale = S2[0].sum()
        if not (scale > 0.0 and math.isfinite(scale)):
            return log_inc, t
        S[...] = S2
        S /= scale
        log_inc += math.log(scale) + m
        if scales_out is not None:
            scales_out[t] = scale * math.exp(m)
        if q_trace is not None:
            q_trace[t] = S[0]
        if p:
            lag[1:] = lag[: p - 1].copy()
            lag[0] = y
    return log_inc, -1
