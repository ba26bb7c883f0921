"""Containers for the conditional expectations the M-step consumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SufficientStats:
    """Normalized conditional expectations after a full E-step.

    Attributes
    ----------
    jump_hat : (N, N) array
        Expected number of regime transitions; entry [r, s] counts
        moves from r to s.
    occ_hat : (N,) array
        Expected number of emissions each regime drove; sums to the
        number of emissions.
    ta_hat : (N, p+1) array
        Column 0 is the regime-weighted sum of squared next values;
        column 1+j pairs lag j with the next value.
    tb_hat : (N, p, p) array
        Regime-weighted lag-lag moments, symmetric in the lag indices.
    tc_hat : (N,) array
        Regime-weighted sum of next values.
    td_hat : (N, p) array
        Regime-weighted sums of each lag.
    t_emissions : int
        Number of emissions the statistics cover.
    """

    jump_hat: np.ndarray
    occ_hat: np.ndarray
    ta_hat: np.ndarray
    tb_hat: np.ndarray
    tc_hat: np.ndarray
    td_hat: np.ndarray
    t_emissions: int

    @property
    def n_regimes(self) -> int:
        return self.occ_hat.shape[0]

    @property
    def ar_order(self) -> int:
        return self.td_hat.shape[1]

    def scaled(self, c: float) -> "SufficientStats":
        """All statistics multiplied by a common positive factor."""
        return SufficientStats(
            self.jump_hat * c,
            self.occ_hat * c,
            self.ta_hat * c,
            self.tb_hat * c,
            self.tc_hat * c,
            self.td_hat * c,
            self.t_emissions,
        )

    def families(self) -> dict[str, np.ndarray]:
        return {
            "jump": self.jump_hat,
            "occ": self.occ_hat,
            "ta": self.ta_hat,
            "tb": self.tb_hat,
            "tc": self.tc_hat,
            "td": self.td_hat,
        }


@dataclass(frozen=True)
class PosteriorStats:
    """Oracle E-step output: the statistics plus per-time posteriors.

    ``smoothed`` is an (N, T) matrix whose column t is the posterior
    probability of each regime driving emission t+1 given the whole
    series; columns sum to one.
    """

    stats: SufficientStats
    smoothed: np.ndarray
    loglik: float
    synthetic_hat: float | None = None
