"""Markov-switching autoregression estimation by EM.

The E-step runs forward only: a change of measure to an i.i.d.
standard-normal reference turns every required conditional expectation
into a recursive filter, so no backward pass is needed.  Exact
path-enumeration and forward-backward oracles are included for
validation, along with a simulator and a CLI.
"""

from .em import (
    FitConfig,
    FitReport,
    e_step,
    fit,
    init_params,
    m_step,
    m_step_regression,
    m_step_transition,
    m_step_variance,
    normal_equations,
    sort_regimes,
)
from .errors import (
    EstimationDegenerateError,
    InstanceTooLargeError,
    NumericalDegeneracyError,
    SwitchfitError,
)
from .filters import (
    FilterState,
    GenericStat,
    finalize,
    init_filter,
    log_likelihood,
    run_filter,
    step_and_normalize,
    step_generic,
    track_statistic,
)
from .model import (
    LagWindow,
    ObservationSeries,
    RegimeParams,
    SwitchingModel,
    gamma_factor,
    log_emission_density,
    predict_mean,
)
from .oracle import baum_welch_estep, brute_force_posterior, compare_esteps
from .simulate import SimOutput, simulate
from .stats import PosteriorStats, SufficientStats

__version__ = "0.1.0"

__all__ = [
    "EstimationDegenerateError",
    "FilterState",
    "FitConfig",
    "FitReport",
    "GenericStat",
    "InstanceTooLargeError",
    "LagWindow",
    "NumericalDegeneracyError",
    "ObservationSeries",
    "PosteriorStats",
    "RegimeParams",
    "SimOutput",
    "SufficientStats",
    "SwitchfitError",
    "SwitchingModel",
    "baum_welch_estep",
    "brute_force_posterior",
    "compare_esteps",
    "e_step",
    "finalize",
    "fit",
    "gamma_factor",
    "init_filter",
    "init_params",
    "log_emission_density",
    "log_likelihood",
    "m_step",
    "m_step_regression",
    "m_step_transition",
    "m_step_variance",
    "normal_equations",
    "predict_mean",
    "run_filter",
    "simulate",
    "sort_regimes",
    "step_and_normalize",
    "step_generic",
    "track_statistic",
]
