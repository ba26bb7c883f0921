"""File formats: model JSON, series CSV, truth sidecars, fit reports.

The CSV format is deliberately rigid (single ``y`` column, UTF-8,
``\\n`` line endings, shortest round-trip decimal representation) so a
written file re-reads to bit-identical floats.  The model JSON schema
is documented in schemas/model.schema.json; note the transition matrix
is stored as a list of COLUMNS, each column the next-regime
distribution of one current regime.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .em import FitReport
from .model import ObservationSeries, RegimeParams, SwitchingModel
from .simulate import SimOutput


def model_to_dict(model: SwitchingModel) -> dict:
    return {
        "n_regimes": model.n_regimes,
        "ar_order": model.ar_order,
        "transition": [list(map(float, model.transition[:, j])) for j in range(model.n_regimes)],
        "regimes": [
            {"coeffs": list(map(float, r.coeffs)), "sigma": float(r.sigma)}
            for r in model.regimes
        ],
        "initial_dist": list(map(float, model.initial_dist)),
    }


def model_from_dict(data: dict, sigma_floor: float | None = None) -> SwitchingModel:
    if not isinstance(data, dict):
        raise ValueError("model document must be a JSON object")
    for key in ("n_regimes", "ar_order", "transition", "regimes", "initial_dist"):
        if key not in data:
            raise ValueError(f"model document is missing field {key!r}")
    n = data["n_regimes"]
    p = data["ar_order"]
    if not isinstance(n, int) or not isinstance(p, int):
        raise ValueError("n_regimes and ar_order must be integers")
    columns = data["transition"]
    if not isinstance(columns, list) or len(columns) != n:
        raise ValueError(f"transition must be a list of {n} columns")
    transition = np.array(columns, dtype=float).T
    regimes = []
    for k, entry in enumerate(data["regimes"]):
        if not isinstance(entry, dict) or "coeffs" not in entry or "sigma" not in entry:
            raise ValueError(f"regime {k} must be an object with coeffs and sigma")
        regimes.append(RegimeParams(np.array(entry["coeffs"], dtype=float), entry["sigma"]))
    kwargs = {}
    if sigma_floor is not None:
        kwargs["sigma_floor"] = sigma_floor
    return SwitchingModel(
        n_regimes=n,
        ar_order=p,
        transition=transition,
        regimes=tuple(regimes),
        initial_dist=np.array(data["initial_dist"], dtype=float),
        **kwargs,
    )


def dump_json(data: dict, path: str | Path | None = None) -> str:
    """Deterministic JSON text (sorted keys, stable float repr)."""
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_model(path: str | Path, sigma_floor: float | None = None) -> SwitchingModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return model_from_dict(data, sigma_floor=sigma_floor)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def save_model(model: SwitchingModel, path: str | Path) -> None:
    dump_json(model_to_dict(model), path)


def write_series_csv(series: ObservationSeries, path: str | Path) -> None:
    lines = ["y"]
    lines.extend(repr(float(v)) for v in series.values)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_series_csv(path: str | Path, conditioning_len: int) -> ObservationSeries:
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines or lines[0].strip() != "y":
        raise ValueError(f"{path}: expected single-column CSV with header 'y'")
    try:
        values = np.array([float(line) for line in lines[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric value: {exc}") from exc
    return ObservationSeries(values, conditioning_len)


def truth_path_for(data_path: str | Path) -> Path:
    path = Path(data_path)
    if path.suffix == ".csv":
        return path.with_suffix(".truth.json")
    return Path(str(path) + ".truth.json")


def write_truth(sim: SimOutput, model: SwitchingModel, data_path: str | Path) -> Path:
    path = truth_path_for(data_path)
    dump_json(
        {
            "seed": sim.seed,
            "hidden_path": [int(v) for v in sim.hidden_path],
            "model": model_to_dict(model),
        },
        path,
    )
    return path


def fit_report_to_dict(report: FitReport) -> dict:
    return {
        "model": model_to_dict(report.model),
        "loglik_trace": [float(v) for v in report.loglik_trace],
        "converged": bool(report.converged),
        "iterations": int(report.iterations),
        "warnings": list(report.warnings),
    }
