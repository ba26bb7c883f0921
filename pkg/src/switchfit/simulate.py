"""Synthetic data generation for testing and recovery experiments.

The draw schedule is fixed so fixtures are bit-reproducible (see rng
for the pinned generator): at each of the T steps the regime is drawn
first (from the initial distribution at step one, then from the
current regime's transition column), then one standard normal for the
emission.  The regime drawn at step t drives emission t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LagWindow, ObservationSeries, SwitchingModel, predict_mean
from .rng import draw_index, draw_normal, make_rng


@dataclass(frozen=True)
class SimOutput:
    """Simulated series plus its ground truth.

    ``hidden_path`` holds 1-based regime indices, entry t naming the
    regime that drove emission t; the series itself starts with the p
    conditioning values (zeros unless an initial window was supplied).
    """

    series: ObservationSeries
    hidden_path: np.ndarray
    seed: int


def simulate(
    model: SwitchingModel,
    t_emissions: int,
    seed: int,
    init_window: LagWindow | None = None,
) -> SimOutput:
    """Draw one hidden path and observation series from the model.

    Parameters
    ----------
    model : SwitchingModel
        Generating parameters.
    t_emissions : int
        Number of emissions T (the series gets p + T values).
    seed : int
        Generator seed; identical seeds give identical output.
    init_window : LagWindow, optional
        The p values preceding the first emission, most recent first;
        zeros when omitted.
    """
    if t_emissions < 1:
        raise ValueError("t_emissions must be >= 1")
    p = model.ar_order
    if init_window is None:
        init_window = LagWindow(np.zeros(p))
    if len(init_window) != p:
        raise ValueError(
            f"init_window has {len(init_window)} lags, model order is {p}"
        )
    rng = make_rng(seed)
    values = np.empty(p + t_emissions)
    values[:p] = init_window.lags[::-1]
    lag = init_window.lags.copy()
    path = np.empty(t_emissions, dtype=np.int64)
    state = -1
    for t in range(t_emissions):
        if t == 0:
            state = draw_index(rng, model.initial_dist)
        else:
            state = draw_index(rng, model.transition[:, state])
        path[t] = state + 1
        regime = model.regimes[state]
        y = predict_mean(regime, LagWindow(lag)) + regime.sigma * draw_normal(rng)
        values[p + t] = y
        if p:
            lag[1:] = lag[: p - 1].copy()
            lag[0] = y
    return SimOutput(
        series=ObservationSeries(values, p),
        hidden_path=path,
        seed=int(seed),
    )
