"""Cost comparison of the two E-step algorithms.

Reports analytic per-step multiply-accumulate counts (deterministic)
next to measured wall times.  Counting convention: one operation per
scalar multiply or multiply-add appearing in the per-step update
formulas, including the per-step normalizations; exponentials, adds
without a multiply, and one-off setup are excluded.  Both algorithms
share the per-regime emission-density work, counted identically.
"""

from __future__ import annotations

import time

import numpy as np

from .em import e_step
from .model import RegimeParams, SwitchingModel
from .oracle import baum_welch_estep
from .simulate import simulate


def tracked_rows(n: int, p: int) -> int:
    """Vectors updated per forward-only step (state filter included)."""
    ntri = p * (p + 1) // 2
    return 1 + n * n + n + n * (p + 1) + n * ntri + n + n * p


def forward_only_macs_per_step(n: int, p: int) -> int:
    """Forward-only filter cost: propagate every tracked vector through
    the reweighted chain map, inject, normalize."""
    rows = tracked_rows(n, p)
    ntri = p * (p + 1) // 2
    emission = n * (p + 3)
    propagate = rows * (n * n + n)
    inject = (
        n * n  # jump: one scaled entry per pair
        + n * n  # occupation: scaled column per regime
        + n * (p + 1) * (n + 2)  # next-value cross moments
        + n * ntri * (n + 2)  # lag-lag moments
        + n * (n + 1)  # plain next-value moment
        + n * p * (n + 1)  # plain lag moments
    )
    normalize = rows * n
    return emission + propagate + inject + normalize


def baum_welch_macs_per_step(n: int, p: int) -> int:
    """Forward-backward cost: two chain passes, smoothing, pairwise
    posteriors, and per-step statistic accumulation."""
    ntri = p * (p + 1) // 2
    emission = n * (p + 3)
    forward = n * n + 2 * n
    backward = n * n + 2 * n
    smoothed = 2 * n
    pairwise = 3 * n * n
    accumulate = n + n * (p + 1) + n * ntri + ntri + n * p + n
    return emission + forward + backward + smoothed + pairwise + accumulate


def _bench_model(n: int, p: int) -> SwitchingModel:
    """Deterministic well-separated model for timing runs."""
    transition = np.full((n, n), 0.2 / max(n - 1, 1))
    np.fill_diagonal(transition, 0.8 if n > 1 else 1.0)
    transition /= transition.sum(axis=0, keepdims=True)
    regimes = []
    for r in range(n):
        coeffs = np.zeros(p + 1)
        coeffs[0] = -1.0 + 2.0 * r / max(n - 1, 1)
        if p:
            coeffs[1] = 0.3
        regimes.append(RegimeParams(coeffs, 0.5))
    return SwitchingModel(
        n_regimes=n,
        ar_order=p,
        transition=transition,
        regimes=tuple(regimes),
        initial_dist=np.full(n, 1.0 / n),
    )


def _time(fn, *args) -> float:
    start = time.perf_counter()
    fn(*args)
    return time.perf_counter() - start


def run_bench(states: list[int], orders: list[int], length: int, seed: int = 0) -> list[dict]:
    """One row per (N, p) cell: analytic counts and measured times."""
    rows = []
    for n in states:
        for p in orders:
            model = _bench_model(n, p)
            series = simulate(model, length, seed).series
            wall_fo = _time(e_step, model, series)
            wall_fb = _time(baum_welch_estep, model, series)
            macs_fo = forward_only_macs_per_step(n, p)
            macs_fb = baum_welch_macs_per_step(n, p)
            rows.append(
                {
                    "n_regimes": n,
                    "ar_order": p,
                    "t_emissions": length,
                    "macs_forward_only": macs_fo,
                    "macs_baum_welch": macs_fb,
                    "mac_ratio": macs_fo / macs_fb,
                    "wall_forward_only": wall_fo,
                    "wall_baum_welch": wall_fb,
                    "wall_ratio": wall_fo / wall_fb if wall_fb > 0 else float("inf"),
                }
            )
    return rows


def format_table(rows: list[dict]) -> str:
    header = (
        f"{'N':>3} {'p':>3} {'T':>6} {'MACs fwd':>10} {'MACs f-b':>10} "
        f"{'MAC ratio':>10} {'wall fwd (s)':>13} {'wall f-b (s)':>13} {'ratio':>8}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['n_regimes']:>3} {row['ar_order']:>3} {row['t_emissions']:>6} "
            f"{row['macs_forward_only']:>10} {row['macs_baum_welch']:>10} "
            f"{row['mac_ratio']:>10.2f} {row['wall_forward_only']:>13.4f} "
            f"{row['wall_baum_welch']:>13.4f} {row['wall_ratio']:>8.2f}"
        )
    return "\n".join(lines)
