#!/usr/bin/env python3
"""Times the compiled filter kernel against the numpy fallback.

Usage:  python benchmarks/kernel_bench.py [--length 5000] [--repeats 3]

Both backends run the identical forward pass; the table reports the
best-of-N wall time per backend and the speedup of the compiled one.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import switchfit as sf
from switchfit import kernels
from switchfit.filters import init_filter

GRID = [(1, 1), (2, 1), (4, 1), (4, 3), (8, 1), (8, 3)]


def build_model(n: int, p: int) -> sf.SwitchingModel:
    transition = np.full((n, n), 0.2 / max(n - 1, 1))
    np.fill_diagonal(transition, 0.8 if n > 1 else 1.0)
    transition /= transition.sum(axis=0, keepdims=True)
    regimes = []
    for r in range(n):
        coeffs = np.zeros(p + 1)
        coeffs[0] = -1.0 + 2.0 * r / max(n - 1, 1)
        if p:
            coeffs[1] = 0.3
        regimes.append(sf.RegimeParams(coeffs, 0.5))
    return sf.SwitchingModel(
        n_regimes=n,
        ar_order=p,
        transition=transition,
        regimes=tuple(regimes),
        initial_dist=np.full(n, 1.0 / n),
    )


def time_backend(name: str, model, series, repeats: int) -> float:
    backend = kernels.get_backend(name)
    emissions = np.ascontiguousarray(series.emissions)
    best = float("inf")
    for _ in range(repeats):
        state = init_filter(model, series.initial_window())
        start = time.perf_counter()
        _, status = backend.run_filter(
            state.data,
            model.transition,
            model.coeff_matrix,
            model.sigmas,
            state.lag,
            emissions,
            None,
            None,
        )
        best = min(best, time.perf_counter() - start)
        assert status == -1
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--length", type=int, default=5000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    names = kernels.available_backends()
    if "c" not in names:
        print("compiled kernel not available; timing the numpy fallback only")

    header = f"{'N':>3} {'p':>3} {'T':>7}" + "".join(f" {n + ' (ms)':>12}" for n in names)
    if "c" in names:
        header += f" {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n, p in GRID:
        model = build_model(n, p)
        series = sf.simulate(model, args.length, seed=0).series
        times = {name: time_backend(name, model, series, args.repeats) for name in names}
        row = f"{n:>3} {p:>3} {args.length:>7}"
        for name in names:
            row += f" {times[name] * 1e3:>12.2f}"
        if "c" in names:
            row += f" {times['py'] / times['c']:>8.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
