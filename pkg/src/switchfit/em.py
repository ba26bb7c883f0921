"""EM loop: forward-only E-step, closed-form M-step.

One EM iteration is a single forward filter pass (or, for the
baseline algorithm, a forward-backward pass) producing expected
transition counts, occupations and observation cross moments, followed
by exact maximizers: transition columns from normalized jump counts,
per-regime coefficients from weighted least-squares normal equations
assembled purely from the aggregated moments, and variances from the
weighted mean squared error.  The initial distribution is held at its
starting value throughout; with a single series it is weakly
identified and freezing it keeps the likelihood ascent intact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationDegenerateError, NumericalDegeneracyError
from .filters import finalize, log_likelihood, run_filter
from .model import (
    DEFAULT_SIGMA_FLOOR,
    ObservationSeries,
    RegimeParams,
    SwitchingModel,
    design_arrays,
)
from .rng import draw_normal, make_rng
from .stats import SufficientStats

ALGO_FORWARD_ONLY = "forward_only"
ALGO_BAUM_WELCH = "baum_welch"

_STARVE_TOL = 1e-10
_COND_LIMIT = 1e12
_MONOTONE_TOL = 1e-8


def _canonical_algo(algo: str) -> str:
    key = algo.replace("-", "_").lower()
    if key not in (ALGO_FORWARD_ONLY, ALGO_BAUM_WELCH):
        raise ValueError(f"unknown algo {algo!r}")
    return key


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 200
    rel_tol: float = 1e-8
    seed: int = 0
    sigma_floor: float = DEFAULT_SIGMA_FLOOR
    ridge_eps: float = 1e-10
    algo: str = ALGO_FORWARD_ONLY

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be > 0")
        if self.ridge_eps < 0:
            raise ValueError("ridge_eps must be >= 0")
        object.__setattr__(self, "algo", _canonical_algo(self.algo))


@dataclass
class FitReport:
    model: SwitchingModel
    loglik_trace: list[float]
    converged: bool
    iterations: int
    warnings: list[str] = field(default_factory=list)


def e_step(
    model: SwitchingModel, series: ObservationSeries
) -> tuple[SufficientStats, float]:
    """One forward filter pass: statistics plus the log-likelihood."""
    state = run_filter(model, series)
    return finalize(state), log_likelihood(state, series)


def m_step_transition(
    stats: SufficientStats,
    prev: np.ndarray | None = None,
    warnings: list[str] | None = None,
) -> np.ndarray:
    """Column-stochastic transition update from expected jump counts.

    Column r is the expected count of moves out of regime r, normalized
    by its total.  A regime with no expected departures keeps its
    previous column (warned); no mass anywhere is an error.
    """
    jump = stats.jump_hat
    n = jump.shape[0]
    row_mass = jump.sum(axis=1)
    if not np.any(row_mass > 0):
        raise EstimationDegenerateError("all expected jump counts are zero")
    new = np.empty((n, n))
    for r in range(n):
        if row_mass[r] > 0:
            new[:, r] = jump[r] / row_mass[r]
        else:
            if prev is None:
                raise EstimationDegenerateError(
                    f"regime {r} has zero jump mass and no previous column to keep"
                )
            new[:, r] = prev[:, r]
            if warnings is not None:
                warnings.append(
                    f"transition_column_kept: regime {r} has zero expected departures"
                )
    return new


def normal_equations(stats: SufficientStats, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Weighted least-squares system for one regime's coefficients.

    The Gram matrix and moment vector of the regression of each
    emission on (1, lags), weighted by the regime's smoothed
    probabilities, assembled from the aggregated statistics alone.
    """
    p = stats.ar_order
    R = np.empty((p + 1, p + 1))
    R[0, 0] = stats.occ_hat[r]
    if p:
        R[0, 1:] = stats.td_hat[r]
        R[1:, 0] = stats.td_hat[r]
        R[1:, 1:] = stats.tb_hat[r]
    c = np.empty(p + 1)
    c[0] = stats.tc_hat[r]
    if p:
        c[1:] = stats.ta_hat[r, 1:]
    return R, c


def m_step_regression(
    stats: SufficientStats,
    r: int,
    ridge_eps: float = 1e-10,
    prev: np.ndarray | None = None,
    warnings: list[str] | None = None,
) -> np.ndarray:
    """Coefficient update for one regime from the normal equations.

    Ill-conditioned systems (condition estimate above 1e12) are solved
    with a scaled ridge; systems singular even then keep the previous
    coefficients.  When previous coefficients are supplied, a solution
    with a larger weighted residual sum than theirs is rejected in
    their favor: an inexact solve must never push the likelihood
    downhill.  Every fallback is warned.
    """
    p = stats.ar_order
    if stats.occ_hat[r] <= _STARVE_TOL:
        if prev is None:
            raise EstimationDegenerateError(f"regime {r} is state-starved")
        if warnings is not None:
            warnings.append(f"regression_kept: regime {r} is state-starved")
        return np.asarray(prev, dtype=float).copy()
    R, c = normal_equations(stats, r)
    cond = np.linalg.cond(R)
    solve_mat = R
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        lam = ridge_eps * np.trace(R) / (p + 1)
        solve_mat = R + lam * np.eye(p + 1)
        if warnings is not None:
            warnings.append(
                f"ridge: regime {r} normal equations ill-conditioned "
                f"(cond {cond:.2e}), lambda {lam:.3e}"
            )
    try:
        theta = np.linalg.solve(solve_mat, c)
    except np.linalg.LinAlgError:
        theta = None
    if theta is None or not np.all(np.isfinite(theta)):
        if prev is None:
            raise EstimationDegenerateError(
                f"regime {r} normal equations are singular"
            )
        if warnings is not None:
            warnings.append(f"regression_kept: regime {r} normal equations singular")
        return np.asarray(prev, dtype=float).copy()
    if prev is not None:
        prev = np.asarray(prev, dtype=float)

        def weighted_sse(t):
            return float(t @ R @ t - 2.0 * t @ c)

        if weighted_sse(theta) > weighted_sse(prev):
            if warnings is not None:
                warnings.append(
                    f"regression_kept: regime {r} solve did not improve the fit"
                )
            return prev.copy()
    return theta


def m_step_variance(
    stats: SufficientStats,
    r: int,
    theta: np.ndarray,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    prev_sigma: float | None = None,
    warnings: list[str] | None = None,
) -> float:
    """Noise variance update for one regime (returns sigma squared).

    The weighted mean squared residual follows from the same aggregated
    moments via the quadratic expansion around the fitted coefficients;
    the result is clamped below at the squared floor.
    """
    occ = stats.occ_hat[r]
    if occ <= _STARVE_TOL:
        if prev_sigma is None:
            raise EstimationDegenerateError(f"regime {r} has no occupation mass")
        if warnings is not None:
            warnings.append(f"variance_kept: regime {r} has no occupation mass")
        return float(prev_sigma) ** 2
    R, c = normal_equations(stats, r)
    raw = (stats.ta_hat[r, 0] + theta @ R @ theta - 2.0 * theta @ c) / occ
    floor_sq = sigma_floor * sigma_floor
    if raw < floor_sq:
        if warnings is not None and raw < floor_sq - 1e-15:
            warnings.append(f"sigma_floor: regime {r} variance clamped to {floor_sq:.3e}")
        return floor_sq
    return float(raw)


def m_step(
    model: SwitchingModel,
    stats: SufficientStats,
    config: FitConfig,
    warnings: list[str] | None = None,
) -> SwitchingModel:
    """All closed-form parameter updates; initial distribution frozen."""
    new_transition = m_step_transition(stats, prev=model.transition, warnings=warnings)
    regimes = []
    for r in range(model.n_regimes):
        theta = m_step_regression(
            stats,
            r,
            ridge_eps=config.ridge_eps,
            prev=model.regimes[r].coeffs,
            warnings=warnings,
        )
        var = m_step_variance(
            stats,
            r,
            theta,
            sigma_floor=config.sigma_floor,
            prev_sigma=model.regimes[r].sigma,
            warnings=warnings,
        )
        regimes.append(RegimeParams(theta, math.sqrt(var)))
    return SwitchingModel(
        n_regimes=model.n_regimes,
        ar_order=model.ar_order,
        transition=new_transition,
        regimes=tuple(regimes),
        initial_dist=model.initial_dist,
        sigma_floor=config.sigma_floor,
    )


def init_params(
    series: ObservationSeries,
    n_regimes: int,
    ar_order: int,
    seed: int,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> SwitchingModel:
    """Deterministic seeded starting point.

    All regimes start from the global least-squares AR fit; with more
    than one regime the coefficients get Gaussian jitter of scale
    0.1 * (|coefficient| + 0.1) to break label symmetry, and the
    uniform transition columns a multiplicative perturbation of at
    most 5% before renormalization.  The initial distribution is
    uniform.  A single regime gets the exact least-squares fit.
    """
    if series.conditioning_len != ar_order:
        series = ObservationSeries(series.values, ar_order)
    w, z = design_arrays(series)
    x = np.column_stack([np.ones(z.shape[0]), w])
    theta, *_ = np.linalg.lstsq(x, z, rcond=None)
    with np.errstate(over="ignore"):
        resid = z - x @ theta
        mean_sq = float(np.mean(resid * resid))
    if not (math.isfinite(mean_sq) and np.all(np.isfinite(theta))):
        raise ValueError(
            "least-squares initialization overflowed; rescale the series"
        )
    scale = max(math.sqrt(mean_sq), sigma_floor)

    if n_regimes == 1:
        return SwitchingModel(
            n_regimes=1,
            ar_order=ar_order,
            transition=np.ones((1, 1)),
            regimes=(RegimeParams(theta, scale),),
            initial_dist=np.ones(1),
            sigma_floor=sigma_floor,
        )

    rng = make_rng(seed)
    regimes = []
    for _ in range(n_regimes):
        jitter = np.array([draw_normal(rng) for _ in range(ar_order + 1)])
        coeffs = theta + 0.1 * (np.abs(theta) + 0.1) * jitter
        regimes.append(RegimeParams(coeffs, scale))
    transition = np.empty((n_regimes, n_regimes))
    for j in range(n_regimes):
        for i in range(n_regimes):
            transition[i, j] = (1.0 + 0.05 * (2.0 * rng.random() - 1.0)) / n_regimes
        transition[:, j] /= transition[:, j].sum()
    return SwitchingModel(
        n_regimes=n_regimes,
        ar_order=ar_order,
        transition=transition,
        regimes=tuple(regimes),
        initial_dist=np.full(n_regimes, 1.0 / n_regimes),
        sigma_floor=sigma_floor,
    )


def sort_regimes(model: SwitchingModel) -> SwitchingModel:
    """Relabel regimes by increasing intercept (ties by sigma).

    Breaks the label permutation symmetry so repeated runs and
    different starts are comparable entry by entry.
    """
    intercepts = np.array([r.coeffs[0] for r in model.regimes])
    sigmas = model.sigmas
    order = np.lexsort((sigmas, intercepts))
    if np.array_equal(order, np.arange(model.n_regimes)):
        return model
    return SwitchingModel(
        n_regimes=model.n_regimes,
        ar_order=model.ar_order,
        transition=model.transition[np.ix_(order, order)],
        regimes=tuple(model.regimes[k] for k in order),
        initial_dist=model.initial_dist[order],
        sigma_floor=model.sigma_floor,
    )


def _e_step_for(algo: str):
    if algo == ALGO_FORWARD_ONLY:
        return e_step
    from .oracle import baum_welch_estep

    def bw(model, series):
        post = baum_welch_estep(model, series)
        return post.stats, post.loglik

    return bw


def fit(
    series: ObservationSeries,
    n_regimes: int,
    ar_order: int,
    config: FitConfig | None = None,
    initial_model: SwitchingModel | None = None,
) -> FitReport:
    """Maximum likelihood estimation by EM.

    Iterates E and M steps until the relative log-likelihood change
    drops below ``config.rel_tol`` or ``config.max_iter`` is reached.
    The trace records the log-likelihood of the model entering each
    iteration; when the loop stops without converging, one extra
    evaluation of the final model is appended so the trace tail always
    matches the reported model.  Regimes are relabeled by intercept in
    the returned report.

    Raises NumericalDegeneracyError or EstimationDegenerateError with
    the failing iteration and the partial trace attached.
    """
    config = config or FitConfig()
    if series.conditioning_len != ar_order:
        series = ObservationSeries(series.values, ar_order)
    estep = _e_step_for(config.algo)
    if initial_model is not None and (
        initial_model.n_regimes != n_regimes or initial_model.ar_order != ar_order
    ):
        raise ValueError("initial_model does not match the requested N and p")
    model = initial_model or init_params(
        series, n_regimes, ar_order, config.seed, config.sigma_floor
    )
    warnings: list[str] = []
    trace: list[float] = []
    converged = False
    iterations = 0
    prev_ll = None
    try:
        for k in range(1, config.max_iter + 1):
            stats, ll = estep(model, series)
            trace.append(ll)
            if prev_ll is not None:
                if ll < prev_ll - _MONOTONE_TOL:
                    warnings.append(
                        f"monotonicity: log-likelihood fell by {prev_ll - ll:.3e} "
                        f"at iteration {k}"
                    )
                if abs(ll - prev_ll) / (1.0 + abs(ll)) < config.rel_tol:
                    converged = True
                    iterations = k
                    break
            prev_ll = ll
            model = m_step(model, stats, config, warnings)
            iterations = k
        if not converged:
            _, ll = estep(model, series)
            trace.append(ll)
            if prev_ll is not None and ll < prev_ll - _MONOTONE_TOL:
                warnings.append(
                    f"monotonicity: log-likelihood fell by {prev_ll - ll:.3e} "
                    "at final evaluation"
                )
    except (NumericalDegeneracyError, EstimationDegenerateError) as exc:
        exc.iteration = iterations + 1
        exc.trace = trace
        raise
    return FitReport(
        model=sort_regimes(model),
        loglik_trace=trace,
        converged=converged,
        iterations=iterations,
        warnings=warnings,
    )
