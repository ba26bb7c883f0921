"""Model parameterization and per-regime emission quantities.

A switching autoregression couples a hidden N-state Markov chain with a
scalar AR(p) observation equation.  The regime active at time t selects
the AR coefficients and noise scale that produce the next observation:

    y[t+1] = a0(r) + a1(r)*y[t] + ... + ap(r)*y[t-p+1] + sigma(r)*eps[t+1]

with eps i.i.d. standard normal and r the regime index at time t.

The transition matrix is stored COLUMN-stochastic: ``transition[i, j]``
is the probability of moving to regime i given the chain is currently
in regime j, so every column sums to one.  This is the opposite of the
row-stochastic convention used by much HMM software; it is stated here
and in the JSON schema to prevent silent transposition bugs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

PROB_TOL = 1e-12
DEFAULT_SIGMA_FLOOR = 1e-6

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _as_float_vector(values, name: str) -> np.ndarray:
    # always copies: these vectors get frozen, which must not leak to the caller
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class RegimeParams:
    """AR coefficients and noise scale of one regime.

    ``coeffs`` holds the intercept first, then the lag coefficients
    (most recent lag first), so it has length p + 1 for an AR(p) regime.
    """

    coeffs: np.ndarray
    sigma: float

    def __post_init__(self):
        coeffs = _as_float_vector(self.coeffs, "coeffs")
        if coeffs.size < 1:
            raise ValueError("coeffs needs at least the intercept entry")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        sigma = float(self.sigma)
        if not math.isfinite(sigma) or sigma <= 0.0:
            raise ValueError(f"sigma must be strictly positive, got {sigma}")
        object.__setattr__(self, "sigma", sigma)

    @property
    def ar_order(self) -> int:
        return self.coeffs.size - 1


@dataclass(frozen=True)
class LagWindow:
    """The p most recent observations, most recent first."""

    lags: np.ndarray

    def __post_init__(self):
        lags = _as_float_vector(self.lags, "lags")
        lags.flags.writeable = False
        object.__setattr__(self, "lags", lags)

    def __len__(self) -> int:
        return self.lags.size


@dataclass(frozen=True)
class SwitchingModel:
    """Full parameter set of a Markov-switching AR(p) model.

    Parameters
    ----------
    n_regimes : int
        Number of hidden states N.
    ar_order : int
        Autoregressive order p (0 allowed).
    transition : array_like, shape (N, N)
        Column-stochastic transition matrix; column j is the
        distribution of the next regime given current regime j.
    regimes : sequence of RegimeParams
        One entry per regime, each with p + 1 coefficients.
    initial_dist : array_like, shape (N,)
        Distribution of the regime driving the first emission.
    sigma_floor : float
        Lower clamp applied to every regime's sigma at construction.
    """

    n_regimes: int
    ar_order: int
    transition: np.ndarray
    regimes: tuple[RegimeParams, ...]
    initial_dist: np.ndarray
    sigma_floor: float = field(default=DEFAULT_SIGMA_FLOOR)

    def __post_init__(self):
        n = int(self.n_regimes)
        p = int(self.ar_order)
        if n < 1:
            raise ValueError("n_regimes must be >= 1")
        if p < 0:
            raise ValueError("ar_order must be >= 0")
        object.__setattr__(self, "n_regimes", n)
        object.__setattr__(self, "ar_order", p)

        floor = float(self.sigma_floor)
        if not math.isfinite(floor) or floor <= 0.0:
            raise ValueError("sigma_floor must be strictly positive")
        object.__setattr__(self, "sigma_floor", floor)

        trans = np.asarray(self.transition, dtype=float)
        if trans.shape != (n, n):
            raise ValueError(f"transition must have shape ({n}, {n}), got {trans.shape}")
        if not np.all(np.isfinite(trans)):
            raise ValueError("transition contains non-finite entries")
        if np.any(trans < -PROB_TOL) or np.any(trans > 1.0 + PROB_TOL):
            raise ValueError("transition entries must lie in [0, 1]")
        col_sums = trans.sum(axis=0)
        if np.any(np.abs(col_sums - 1.0) > PROB_TOL):
            worst = float(np.max(np.abs(col_sums - 1.0)))
            raise ValueError(
                f"transition columns must sum to 1 (max deviation {worst:.3e}); "
                "note the column-stochastic convention"
            )
        trans = np.ascontiguousarray(np.clip(trans, 0.0, 1.0))
        trans.flags.writeable = False
        object.__setattr__(self, "transition", trans)

        pi = _as_float_vector(self.initial_dist, "initial_dist")
        if pi.size != n:
            raise ValueError(f"initial_dist must have length {n}, got {pi.size}")
        if np.any(pi < -PROB_TOL):
            raise ValueError("initial_dist entries must be nonnegative")
        if abs(pi.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"initial_dist must sum to 1, got {pi.sum()!r}")
        pi = np.clip(pi, 0.0, None)
        pi.flags.writeable = False
        object.__setattr__(self, "initial_dist", pi)

        regimes = tuple(self.regimes)
        if len(regimes) != n:
            raise ValueError(f"expected {n} regimes, got {len(regimes)}")
        floored = []
        for k, reg in enumerate(regimes):
            if not isinstance(reg, RegimeParams):
                reg = RegimeParams(np.asarray(reg[0], dtype=float), float(reg[1]))
            if reg.ar_order != p:
                raise ValueError(
                    f"regime {k} has {reg.coeffs.size} coefficients, expected {p + 1}"
                )
            if reg.sigma < floor:
                reg = RegimeParams(reg.coeffs, floor)
            floored.append(reg)
        object.__setattr__(self, "regimes", tuple(floored))

    @property
    def coeff_matrix(self) -> np.ndarray:
        """Regime coefficients stacked as an (N, p+1) array."""
        return np.stack([r.coeffs for r in self.regimes])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([r.sigma for r in self.regimes])


@dataclass(frozen=True)
class ObservationSeries:
    """A scalar series whose first ``conditioning_len`` values are the
    fixed window the likelihood conditions on; the rest are emissions."""

    values: np.ndarray
    conditioning_len: int

    def __post_init__(self):
        values = _as_float_vector(self.values, "values")
        p = int(self.conditioning_len)
        if p < 0:
            raise ValueError("conditioning_len must be >= 0")
        if values.size < p + 1:
            raise ValueError(
                f"series of length {values.size} leaves no emission after "
                f"the {p} conditioning values"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "conditioning_len", p)

    @property
    def t_emissions(self) -> int:
        return self.values.size - self.conditioning_len

    @property
    def emissions(self) -> np.ndarray:
        return self.values[self.conditioning_len :]

    def initial_window(self) -> LagWindow:
        """Conditioning values as a lag window (most recent first)."""
        p = self.conditioning_len
        return LagWindow(self.values[:p][::-1].copy())


def predict_mean(regime: RegimeParams, window: LagWindow) -> float:
    """Conditional mean of the next observation under one regime."""
    p = regime.ar_order
    if len(window) != p:
        raise ValueError(f"window has {len(window)} lags, regime expects {p}")
    if p == 0:
        return float(regime.coeffs[0])
    return float(regime.coeffs[0] + regime.coeffs[1:] @ window.lags)


def log_emission_density(
    regime_index: int, model: SwitchingModel, y_next: float, window: LagWindow
) -> float:
    """Log Gaussian density of the next observation under one regime."""
    reg = model.regimes[regime_index]
    z = (y_next - predict_mean(reg, window)) / reg.sigma
    return -0.5 * z * z - _LOG_SQRT_2PI - math.log(reg.sigma)


def log_gamma_factor(
    regime_index: int, model: SwitchingModel, y_next: float, window: LagWindow
) -> float:
    """Log of gamma_factor; preferred form for long recursions."""
    reg = model.regimes[regime_index]
    z = (y_next - predict_mean(reg, window)) / reg.sigma
    # emission log-density minus the standard-normal reference log-density
    return -0.5 * z * z - math.log(reg.sigma) + 0.5 * y_next * y_next


def gamma_factor(
    regime_index: int, model: SwitchingModel, y_next: float, window: LagWindow
) -> float:
    """Likelihood ratio reweighting one observation from the reference
    measure (i.i.d. standard normal) back to one regime's emission law.

    Equals the regime's Gaussian density at ``y_next`` divided by the
    standard normal density at ``y_next``; always strictly positive.
    """
    return math.exp(log_gamma_factor(regime_index, model, y_next, window))


def log_std_normal_pdf(y: np.ndarray | float):
    """Log standard-normal density; the reference-measure correction."""
    y = np.asarray(y, dtype=float)
    out = -0.5 * y * y - _LOG_SQRT_2PI
    return float(out) if out.ndim == 0 else out


def design_arrays(series: ObservationSeries) -> tuple[np.ndarray, np.ndarray]:
    """Regressor windows and targets for every emission.

    Returns ``(W, z)`` where row t of W holds the p lags of emission t
    (most recent first) and z[t] is the emission itself.
    """
    p = series.conditioning_len
    t = series.t_emissions
    z = series.emissions
    if p == 0:
        return np.zeros((t, 0)), z
    w = sliding_window_view(series.values, p)[:t, ::-1]
    return w, z
