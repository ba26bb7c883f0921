"""Forward-only filters for the E-step statistics.

The estimation problem is rewritten under a reference probability where
observations are i.i.d. standard normal; per-regime likelihood ratios
(``gamma_factor``) reweight that measure back to the model.  Every
E-step quantity then satisfies a forward recursion in the unnormalized
filtered vectors gamma_t(H_t X_t), so a single pass over the data,
with no backward sweep, delivers expected transition counts, occupations and
the observation cross moments that assemble the weighted least-squares
normal equations.

Raw recursions over- or underflow within a few hundred steps (the
likelihood ratios contain an exp(y^2/2) factor), so every step divides
all tracked vectors by the state filter's component sum and accumulates
the log of that constant.  All M-step quantities are ratios of these
vectors, hence invariant under the rescaling; the log-likelihood is
recovered from the accumulated constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from ._layout import StatLayout, stat_layout
from .errors import NumericalDegeneracyError
from .model import (
    LagWindow,
    ObservationSeries,
    SwitchingModel,
    gamma_factor,
    log_std_normal_pdf,
)
from .stats import SufficientStats


@dataclass
class FilterState:
    """Mutable state of one forward pass.

    ``data`` stacks the state filter and every tracked statistic as
    rows of a (rows, N) array (see _layout for the order); ``lag``
    holds the p most recent observations, most recent first.  Confine
    an instance to one thread at a time.
    """

    layout: StatLayout
    data: np.ndarray
    lag: np.ndarray
    log_scale: float = 0.0
    steps: int = 0

    @property
    def n_regimes(self) -> int:
        return self.layout.n

    @property
    def ar_order(self) -> int:
        return self.layout.p

    @property
    def q(self) -> np.ndarray:
        """Normalized filtered distribution of the current regime."""
        return self.data[0]

    @property
    def jump(self) -> np.ndarray:
        n = self.layout.n
        return self.data[self.layout.jump : self.layout.occ].reshape(n, n, n)

    @property
    def occ(self) -> np.ndarray:
        return self.data[self.layout.occ : self.layout.ta]

    @property
    def ta(self) -> np.ndarray:
        n, p = self.layout.n, self.layout.p
        return self.data[self.layout.ta : self.layout.tb].reshape(n, p + 1, n)

    @property
    def tb_triangle(self) -> np.ndarray:
        n = self.layout.n
        return self.data[self.layout.tb : self.layout.tc].reshape(n, self.layout.ntri, n)

    @property
    def tc(self) -> np.ndarray:
        return self.data[self.layout.tc : self.layout.td]

    @property
    def td(self) -> np.ndarray:
        n, p = self.layout.n, self.layout.p
        return self.data[self.layout.td : self.layout.rows].reshape(n, p, n)

    def tb_component(self, r: int, i: int, j: int) -> np.ndarray:
        """Symmetric lag-pair statistic; stored once, mirrored on read."""
        if i > j:
            i, j = j, i
        p = self.layout.p
        k = i * p - i * (i - 1) // 2 + (j - i)
        return self.tb_triangle[r, k]

    def window(self) -> LagWindow:
        return LagWindow(self.lag.copy())


def _check_model(state: FilterState, model: SwitchingModel) -> None:
    if model.n_regimes != state.layout.n or model.ar_order != state.layout.p:
        raise ValueError(
            f"filter built for N={state.layout.n}, p={state.layout.p}; "
            f"model has N={model.n_regimes}, p={model.ar_order}"
        )


def init_filter(model: SwitchingModel, conditioning_window: LagWindow) -> FilterState:
    """Fresh state: state filter at the initial distribution, all
    statistics zero, lag buffer from the conditioning window."""
    if len(conditioning_window) != model.ar_order:
        raise ValueError(
            f"conditioning window has {len(conditioning_window)} lags, "
            f"model order is {model.ar_order}"
        )
    lay = stat_layout(model.n_regimes, model.ar_order)
    data = np.zeros((lay.rows, lay.n))
    data[0] = model.initial_dist
    return FilterState(layout=lay, data=data, lag=conditioning_window.lags.copy())


def step_and_normalize(
    state: FilterState, model: SwitchingModel, y_next: float
) -> tuple[FilterState, float]:
    """Advance every tracked statistic by one emission and renormalize.

    Returns the mutated state together with the step's normalization
    constant.  Raises NumericalDegeneracyError (naming the 1-based step
    index) if the constant vanishes or goes non-finite.
    """
    _check_model(state, model)
    backend = kernels.get_backend()
    emissions = np.array([float(y_next)])
    scales = np.empty(1)
    log_inc, status = backend.run_filter(
        state.data,
        model.transition,
        model.coeff_matrix,
        model.sigmas,
        state.lag,
        emissions,
        scales,
        None,
    )
    if status >= 0:
        raise NumericalDegeneracyError(
            f"filter normalization degenerated at step {state.steps + 1}",
            step=state.steps + 1,
        )
    state.log_scale += log_inc
    state.steps += 1
    return state, float(scales[0])


def run_filter(
    model: SwitchingModel,
    series: ObservationSeries,
    collect_trace: bool = False,
) -> FilterState | tuple[FilterState, np.ndarray, np.ndarray]:
    """One forward pass over all emissions of ``series``.

    With ``collect_trace`` the per-step normalization constants (T,)
    and state-filter trajectory (T, N) are returned as well.
    """
    if series.conditioning_len != model.ar_order:
        raise ValueError(
            f"series conditions on {series.conditioning_len} values, "
            f"model order is {model.ar_order}"
        )
    state = init_filter(model, series.initial_window())
    emissions = np.ascontiguousarray(series.emissions)
    scales = np.empty(series.t_emissions) if collect_trace else None
    q_trace = np.empty((series.t_emissions, model.n_regimes)) if collect_trace else None
    backend = kernels.get_backend()
    log_inc, status = backend.run_filter(
        state.data,
        model.transition,
        model.coeff_matrix,
        model.sigmas,
        state.lag,
        emissions,
        scales,
        q_trace,
    )
    if status >= 0:
        raise NumericalDegeneracyError(
            f"filter normalization degenerated at step {status + 1}",
            step=status + 1,
        )
    state.log_scale += log_inc
    state.steps += len(emissions)
    if collect_trace:
        return state, scales, q_trace
    return state


def finalize(state: FilterState) -> SufficientStats:
    """Conditional expectations as ratios against the state filter mass.

    With per-step normalization the state filter sums to one, so each
    expectation is (up to rounding) the component sum of its vector.
    """
    if state.steps < 1:
        raise ValueError("finalize requires at least one processed emission")
    n, p = state.layout.n, state.layout.p
    total = float(state.q.sum())
    sums = state.data.sum(axis=1) / total
    lay = state.layout
    jump_hat = sums[lay.jump : lay.occ].reshape(n, n)
    occ_hat = sums[lay.occ : lay.ta].copy()
    ta_hat = sums[lay.ta : lay.tb].reshape(n, p + 1)
    tc_hat = sums[lay.tc : lay.td].copy()
    td_hat = sums[lay.td : lay.rows].reshape(n, p)
    tb_hat = np.zeros((n, p, p))
    tri = sums[lay.tb : lay.tc].reshape(n, lay.ntri)
    for k in range(lay.ntri):
        i, j = lay.tri_i[k], lay.tri_j[k]
        tb_hat[:, i, j] = tri[:, k]
        tb_hat[:, j, i] = tri[:, k]
    return SufficientStats(
        jump_hat=jump_hat,
        occ_hat=occ_hat,
        ta_hat=ta_hat.copy(),
        tb_hat=tb_hat,
        tc_hat=tc_hat,
        td_hat=td_hat.copy(),
        t_emissions=state.steps,
    )


def log_likelihood(state: FilterState, series: ObservationSeries) -> float:
    """Log-likelihood of the emissions, conditional on the first p values.

    The accumulated normalization constants measure the likelihood
    relative to the i.i.d. standard-normal reference, so adding the
    reference log-density of every emission recovers the model's own.
    """
    if state.steps != series.t_emissions:
        raise ValueError(
            f"state processed {state.steps} emissions, series has {series.t_emissions}"
        )
    return state.log_scale + float(np.sum(log_std_normal_pdf(series.emissions)))


def step_generic(
    state_vec: np.ndarray,
    gammas: np.ndarray,
    model: SwitchingModel,
    alpha_hat: np.ndarray | None = None,
    beta_hat: np.ndarray | None = None,
    delta_hat: np.ndarray | None = None,
    f_value: float = 0.0,
) -> np.ndarray:
    """One unnormalized update of a generic accumulating statistic.

    Supports any scalar process built from per-step increments with a
    drift part (``alpha``), a part proportional to a function of the
    incoming observation (``delta`` times f), and a part paired with
    the chain's one-step martingale increment (``beta``).  The inputs
    are the current filtered vector of the statistic and the filtered
    vectors of the increment pieces, each already multiplied by the
    regime indicator:

    - ``alpha_hat[i]``, ``delta_hat[i]``: filtered expectation of the
      increment coefficient restricted to current regime i,
    - ``beta_hat[i]``: the same for the N-vector coefficient paired
      with the martingale increment (shape (N, N), row per regime).

    ``gammas`` are the per-regime likelihood ratios of the incoming
    observation.  The update is linear in every input.
    """
    A = model.transition
    n = model.n_regimes
    v = np.zeros(n) if state_vec is None else np.asarray(state_vec, dtype=float)
    w = v.copy()
    if alpha_hat is not None:
        w = w + alpha_hat
    if delta_hat is not None:
        w = w + delta_hat * f_value
    out = A @ (w * gammas)
    if beta_hat is not None:
        B = np.asarray(beta_hat, dtype=float)
        P = A * B.T  # P[k, i] = A[k, i] * beta_hat[i, k]
        out = out + P @ gammas - A @ (gammas * P.sum(axis=0))
    return out


@dataclass(frozen=True)
class GenericStat:
    """Per-regime increment coefficients of a generic statistic.

    The statistic accumulates, at each step with current regime r and
    incoming observation y:  alpha[r] + beta[r] . (next unit vector -
    expected next unit vector) + delta[r] * f(y).
    """

    alpha: np.ndarray
    beta: np.ndarray  # (N, N): row r pairs with the martingale increment
    delta: np.ndarray
    f: Callable[[float], float] = field(default=lambda y: y)


def track_statistic(
    model: SwitchingModel, series: ObservationSeries, stat: GenericStat
) -> float:
    """Forward-filter a generic statistic and return its conditional
    expectation after the last emission.

    Runs the state filter alongside, normalizing the statistic's vector
    by the same per-step constants, so the final component sum is the
    expectation of the statistic given all observations.
    """
    state = init_filter(model, series.initial_window())
    vec = np.zeros(model.n_regimes)
    alpha = np.asarray(stat.alpha, dtype=float)
    beta = np.asarray(stat.beta, dtype=float)
    delta = np.asarray(stat.delta, dtype=float)
    for y in series.emissions:
        window = state.window()
        q = state.q.copy()
        gammas = np.array(
            [gamma_factor(i, model, float(y), window) for i in range(model.n_regimes)]
        )
        vec = step_generic(
            vec,
            gammas,
            model,
            alpha_hat=alpha * q,
            beta_hat=beta * q[:, None],
            delta_hat=delta * q,
            f_value=stat.f(float(y)),
        )
        _, scale = step_and_normalize(state, model, float(y))
        vec /= scale
    return float(vec.sum() / state.q.sum())
