"""Independent E-step implementations used as cross-checks.

Two routes to the same conditional expectations:

- ``brute_force_posterior`` enumerates every hidden path, exact up to
  floating point but exponential in the series length;
- ``baum_welch_estep`` is the classic scaled forward-backward pass.

Both aggregate the identical statistics the forward-only filter
produces, so any two of the three can be diffed on small instances.
"""

from __future__ import annotations

import numpy as np

from .errors import InstanceTooLargeError, NumericalDegeneracyError
from .filters import GenericStat, finalize, log_likelihood, run_filter
from .model import ObservationSeries, SwitchingModel, design_arrays
from .stats import PosteriorStats, SufficientStats

MAX_ENUM_PATHS = 2**20
_CHUNK = 1 << 15


def _emission_log_densities(model: SwitchingModel, series: ObservationSeries) -> np.ndarray:
    """(N, T) log density of each emission under each driving regime."""
    w, z = design_arrays(series)
    coeffs = model.coeff_matrix
    sigmas = model.sigmas[:, None]
    mu = coeffs[:, :1] + coeffs[:, 1:] @ w.T
    resid = (z[None, :] - mu) / sigmas
    return -0.5 * resid**2 - np.log(sigmas) - 0.5 * np.log(2.0 * np.pi)


def stats_from_smoothed(
    smoothed: np.ndarray, pair_counts: np.ndarray, series: ObservationSeries
) -> SufficientStats:
    """Assemble the E-step statistics from per-time regime posteriors.

    Every cross-moment statistic is a data-weighted sum of the smoothed
    probabilities, so this single contraction serves both oracles.
    """
    w, z = design_arrays(series)
    p = series.conditioning_len
    t = series.t_emissions
    occ = smoothed.sum(axis=1)
    tc = smoothed @ z
    ta = np.empty((smoothed.shape[0], p + 1))
    ta[:, 0] = smoothed @ (z * z)
    if p:
        ta[:, 1:] = smoothed @ (w * z[:, None])
        tb = np.einsum("nt,ti,tj->nij", smoothed, w, w)
        td = smoothed @ w
    else:
        tb = np.zeros((smoothed.shape[0], 0, 0))
        td = np.zeros((smoothed.shape[0], 0))
    return SufficientStats(
        jump_hat=pair_counts,
        occ_hat=occ,
        ta_hat=ta,
        tb_hat=tb,
        tc_hat=tc,
        td_hat=td,
        t_emissions=t,
    )


def _decode_paths(codes: np.ndarray, n: int, length: int) -> np.ndarray:
    """Base-N digits of each code, most significant digit first."""
    out = np.empty((codes.shape[0], length), dtype=np.int64)
    rem = codes.copy()
    for pos in range(length - 1, -1, -1):
        out[:, pos] = rem % n
        rem //= n
    return out


def brute_force_posterior(
    model: SwitchingModel,
    series: ObservationSeries,
    synthetic: GenericStat | None = None,
) -> PosteriorStats:
    """Exact posterior statistics by exhaustive hidden-path summation.

    Enumerates the regime sequence driving every emission plus the one
    state after the last emission (whose transition the jump counts
    include).  Path weights are handled in log space with a global max
    shift.  Refuses instances with more than 2**20 driver paths.

    With ``synthetic``, also returns the conditional expectation of a
    generic accumulating statistic, evaluating its martingale-increment
    part path by path.
    """
    n = model.n_regimes
    t = series.t_emissions
    if float(n) ** t > MAX_ENUM_PATHS:
        raise InstanceTooLargeError(
            f"{n}^{t} hidden paths exceed the enumeration cap {MAX_ENUM_PATHS}"
        )
    total_paths = n ** (t + 1)
    logb = _emission_log_densities(model, series)
    with np.errstate(divide="ignore"):
        log_a = np.log(model.transition)
        log_pi = np.log(model.initial_dist)

    def chunk_logw(paths: np.ndarray) -> np.ndarray:
        lw = log_pi[paths[:, 0]].copy()
        for l in range(1, t + 1):
            lw += log_a[paths[:, l], paths[:, l - 1]]
        for l in range(t):
            lw += logb[paths[:, l], l]
        return lw

    max_lw = -np.inf
    for start in range(0, total_paths, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total_paths), dtype=np.int64)
        lw = chunk_logw(_decode_paths(codes, n, t + 1))
        max_lw = max(max_lw, float(lw.max()))
    if not np.isfinite(max_lw):
        raise NumericalDegeneracyError("all hidden paths have zero posterior weight")

    smoothed = np.zeros((n, t))
    pair = np.zeros((n, n))
    total_w = 0.0
    syn_acc = 0.0
    if synthetic is not None:
        alpha = np.asarray(synthetic.alpha, dtype=float)
        beta = np.asarray(synthetic.beta, dtype=float)
        delta = np.asarray(synthetic.delta, dtype=float)
        beta_drift = np.einsum("rk,kr->r", beta, model.transition)
        f_vals = np.array([synthetic.f(float(y)) for y in series.emissions])

    for start in range(0, total_paths, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total_paths), dtype=np.int64)
        paths = _decode_paths(codes, n, t + 1)
        w = np.exp(chunk_logw(paths) - max_lw)
        total_w += float(w.sum())
        for l in range(t):
            smoothed[:, l] += np.bincount(paths[:, l], weights=w, minlength=n)
        for l in range(1, t + 1):
            flat = paths[:, l - 1] * n + paths[:, l]
            pair += np.bincount(flat, weights=w, minlength=n * n).reshape(n, n)
        if synthetic is not None:
            h = np.zeros(w.shape[0])
            for l in range(t):
                cur = paths[:, l]
                h += alpha[cur] + delta[cur] * f_vals[l]
                h += beta[cur, paths[:, l + 1]] - beta_drift[cur]
            syn_acc += float(w @ h)

    smoothed /= total_w
    pair /= total_w
    loglik = max_lw + float(np.log(total_w))
    return PosteriorStats(
        stats=stats_from_smoothed(smoothed, pair, series),
        smoothed=smoothed,
        loglik=loglik,
        synthetic_hat=(syn_acc / total_w) if synthetic is not None else None,
    )


def baum_welch_estep(model: SwitchingModel, series: ObservationSeries) -> PosteriorStats:
    """Scaled forward-backward E-step over the driving-regime sequence.

    Emission probabilities are max-shifted per step before scaling, so
    long series neither underflow nor overflow.  The transition after
    the last emission carries no observation; its expected counts are
    the final smoothed probabilities pushed through the chain.
    """
    n = model.n_regimes
    t = series.t_emissions
    a = model.transition
    logb = _emission_log_densities(model, series)
    shifts = logb.max(axis=0)
    b = np.exp(logb - shifts[None, :])

    alpha = np.empty((t, n))
    scales = np.empty(t)
    vec = model.initial_dist * b[:, 0]
    scales[0] = vec.sum()
    if not (scales[0] > 0.0 and np.isfinite(scales[0])):
        raise NumericalDegeneracyError("forward pass degenerated at step 1", step=1)
    alpha[0] = vec / scales[0]
    for l in range(1, t):
        vec = b[:, l] * (a @ alpha[l - 1])
        scales[l] = vec.sum()
        if not (scales[l] > 0.0 and np.isfinite(scales[l])):
            raise NumericalDegeneracyError(
                f"forward pass degenerated at step {l + 1}", step=l + 1
            )
        alpha[l] = vec / scales[l]

    beta = np.empty((t, n))
    beta[t - 1] = 1.0
    for l in range(t - 2, -1, -1):
        beta[l] = a.T @ (b[:, l + 1] * beta[l + 1]) / scales[l + 1]

    smoothed = (alpha * beta).T
    smoothed /= smoothed.sum(axis=0, keepdims=True)

    pair = np.zeros((n, n))
    for l in range(1, t):
        # pair[r, s]: posterior mass of moving r -> s between emissions l and l+1
        pair += np.outer(alpha[l - 1], b[:, l] * beta[l]) * a.T / scales[l]
    pair += smoothed[:, t - 1][:, None] * a.T

    loglik = float(np.log(scales).sum() + shifts.sum())
    return PosteriorStats(
        stats=stats_from_smoothed(smoothed, pair, series),
        smoothed=smoothed,
        loglik=loglik,
    )


def _family_deviation(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def compare_esteps(model: SwitchingModel, series: ObservationSeries) -> dict:
    """Run both E-steps and report per-family relative deviations.

    The deviation of a statistic family is its maximum absolute
    difference divided by the family's largest baseline magnitude.
    """
    state = run_filter(model, series)
    forward = finalize(state)
    forward_ll = log_likelihood(state, series)
    bw = baum_welch_estep(model, series)
    fams = {}
    for name, arr in forward.families().items():
        fams[name] = _family_deviation(arr, bw.stats.families()[name])
    ll_dev = abs(forward_ll - bw.loglik) / (1.0 + abs(bw.loglik))
    return {
        "n_regimes": model.n_regimes,
        "ar_order": model.ar_order,
        "t_emissions": series.t_emissions,
        "families": fams,
        "max_relative_deviation": max(fams.values()),
        "loglik_forward": forward_ll,
        "loglik_baum_welch": bw.loglik,
        "loglik_deviation": ll_dev,
    }
