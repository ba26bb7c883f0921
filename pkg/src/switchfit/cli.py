"""Command-line surface.

Exit codes are stable for scripting: 0 success, 2 input/schema error,
3 fit stopped at the iteration cap without converging (the report is
still written), 4 numerical or estimation degeneracy.  The environment
variable SWITCHFIT_LOG sets the log level and nothing else.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import io
from .bench import format_table, run_bench
from .em import FitConfig, fit
from .errors import EstimationDegenerateError, NumericalDegeneracyError
from .filters import log_likelihood, run_filter
from .oracle import compare_esteps
from .simulate import simulate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_DEGENERATE = 4

log = logging.getLogger("switchfit")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="switchfit",
        description="Estimate Markov-switching autoregressions by EM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw a synthetic series from a model file")
    sim.add_argument("--model", required=True, help="model JSON file")
    sim.add_argument("--length", required=True, type=int, help="number of emissions")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output CSV (truth sidecar written next to it)")

    fit_p = sub.add_parser("fit", help="fit a model to a series by EM")
    fit_p.add_argument("--data", required=True, help="series CSV")
    fit_p.add_argument("--states", required=True, type=int, help="number of regimes")
    fit_p.add_argument("--order", required=True, type=int, help="AR order")
    fit_p.add_argument(
        "--algo",
        choices=["forward-only", "baum-welch"],
        default="forward-only",
        help="E-step algorithm",
    )
    fit_p.add_argument("--max-iter", type=int, default=200)
    fit_p.add_argument("--tol", type=float, default=1e-8)
    fit_p.add_argument("--seed", type=int, default=0)
    fit_p.add_argument("--sigma-floor", type=float, default=1e-6)
    fit_p.add_argument("--ridge-eps", type=float, default=1e-10)
    fit_p.add_argument("--out", required=True, help="fit report JSON")

    ev = sub.add_parser("eval", help="log-likelihood of a model on a series")
    ev.add_argument("--data", required=True)
    ev.add_argument("--model", required=True)
    ev.add_argument("--trace", help="optional per-step CSV (step, scale, q_1..q_N)")

    cmp_p = sub.add_parser("compare", help="diff the two E-step implementations")
    cmp_p.add_argument("--data", required=True)
    cmp_p.add_argument("--model", required=True)
    cmp_p.add_argument("--out", help="also write the report JSON here")

    bench = sub.add_parser("bench", help="per-step cost of both E-steps over a grid")
    bench.add_argument("--states-grid", default="2,4,8", help="comma-separated regime counts")
    bench.add_argument("--order-grid", default="1", help="comma-separated AR orders")
    bench.add_argument("--length", type=int, default=2000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", help="also write rows as JSON here")
    return parser


def cmd_simulate(args) -> int:
    model = io.load_model(args.model)
    if args.length < 1:
        raise ValueError("--length must be >= 1")
    sim = simulate(model, args.length, args.seed)
    io.write_series_csv(sim.series, args.out)
    truth = io.write_truth(sim, model, args.out)
    log.info("wrote %s and %s", args.out, truth)
    return EXIT_OK


def cmd_fit(args) -> int:
    series = io.read_series_csv(args.data, args.order)
    if series.values.size < args.order + 2:
        raise ValueError(
            f"need at least {args.order + 2} rows for order {args.order}, "
            f"got {series.values.size}"
        )
    config = FitConfig(
        max_iter=args.max_iter,
        rel_tol=args.tol,
        seed=args.seed,
        sigma_floor=args.sigma_floor,
        ridge_eps=args.ridge_eps,
        algo=args.algo,
    )
    report = fit(series, args.states, args.order, config)
    io.dump_json(io.fit_report_to_dict(report), args.out)
    if not report.converged:
        log.warning("no convergence in %d iterations", report.iterations)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_eval(args) -> int:
    model = io.load_model(args.model)
    series = io.read_series_csv(args.data, model.ar_order)
    if args.trace:
        state, scales, q_trace = run_filter(model, series, collect_trace=True)
        lines = ["step,scale," + ",".join(f"q_{i + 1}" for i in range(model.n_regimes))]
        for t in range(series.t_emissions):
            q_txt = ",".join(repr(float(v)) for v in q_trace[t])
            lines.append(f"{t + 1},{repr(float(scales[t]))},{q_txt}")
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        state = run_filter(model, series)
    result = {
        "loglik": log_likelihood(state, series),
        "final_filter_probs": [float(v) for v in state.q],
    }
    sys.stdout.write(io.dump_json(result))
    return EXIT_OK


def cmd_compare(args) -> int:
    model = io.load_model(args.model)
    series = io.read_series_csv(args.data, model.ar_order)
    report = compare_esteps(model, series)
    text = io.dump_json(report, args.out if args.out else None)
    sys.stdout.write(text)
    return EXIT_OK


def _parse_grid(text: str, name: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"{name} must be comma-separated integers: {exc}") from exc
    if not values:
        raise ValueError(f"{name} is empty")
    return values


def cmd_bench(args) -> int:
    states = _parse_grid(args.states_grid, "--states-grid")
    orders = _parse_grid(args.order_grid, "--order-grid")
    rows = run_bench(states, orders, args.length, args.seed)
    sys.stdout.write(format_table(rows) + "\n")
    if args.out:
        io.dump_json({"rows": rows}, args.out)
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    level = os.environ.get("SWITCHFIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (NumericalDegeneracyError, EstimationDegenerateError) as exc:
        print(f"switchfit: degenerate estimation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, OSError) as exc:
        print(f"switchfit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
