"""Experiment commands: strict YAML config ingestion and bit-stable CSV output.

One subcommand per experiment (sweep1d, robustness, slip2d, conservative,
thresholds).  Every experiment runs from built-in nominal defaults when no
config is given; configs may override a documented key set and any unknown
key aborts before computation.  CSV bytes are identical across repeated runs
of the same configuration (floats serialized in shortest round-trip form).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .core import (
    PARAM_BASED,
    STIFFNESS_AS_STATE,
    ParameterError,
    TaskParams1D,
    derive_constants,
    validate,
)
from .analysis import conservative_report, threshold_report
from .slip2d import NOMINAL_SLIP, SlipParams, slip_sweep, validate_slip
from .sweep import (
    DEFAULT_ROBUSTNESS_COMBOS,
    SweepConfig,
    UnderdeterminedFit,
    default_alpha_grid,
    robustness_study,
    run_sweep,
)

EXPERIMENTS = ("sweep1d", "robustness", "slip2d", "conservative", "thresholds")


class ConfigError(Exception):
    """Configuration rejected before any computation ran."""


class ParseError(ConfigError):
    """Config file is unreadable or not well-formed YAML."""


class UnknownKey(ConfigError):
    """Config contains a key outside the experiment's schema."""


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    output_dir: str
    source: str = "defaults"


# Nominal 1D task shared by sweep1d / robustness / conservative / thresholds.
_BASE_1D = {
    "m": 1.0,
    "g": 9.81,
    "l0": 0.5,
    "T": 0.3,
    "k_min": 50.0,
    "k_max": 500.0,
}
_GRID = {"alpha_min": 0.1, "alpha_max": 316.0, "grid_points": 36}

_SCHEMAS: dict[str, dict] = {
    "sweep1d": {**_BASE_1D, **_GRID, "v_td_ensemble": [1.5, 2.0, 2.5]},
    "thresholds": {**_BASE_1D, "v_td": 2.0, "alpha": 12.5},
    "conservative": {**_BASE_1D, **_GRID, "v_td": 2.0},
    "robustness": {
        "g": 9.81,
        "l0": 0.5,
        "v_td": 2.0,
        **_GRID,
        "combos": [
            {"m": c.m, "T": c.T, "k_min": c.k_min, "k_max": c.k_max}
            for c in DEFAULT_ROBUSTNESS_COMBOS
        ],
    },
    "slip2d": {
        "m": 1.0,
        "g": 9.81,
        "l0": 0.5,
        "k_min": 500.0,
        "k_max": 4000.0,
        "mu": 0.7,
        "v_forward": 1.0,
        "h_drop": 0.05,
        "T_nominal": 0.15,
        "angles_deg": [15.0, 20.0],
        "spot_checks": [
            {"angle_deg": 30.0, "alpha": 0.5},
            {"angle_deg": 30.0, "alpha": 1.0},
        ],
        **_GRID,
    },
}

_TOP_LEVEL_KEYS = {"experiment", "parameters", "output_dir"}


def _merge_parameters(experiment: str, supplied: dict) -> dict:
    schema = _SCHEMAS[experiment]
    unknown = set(supplied) - set(schema)
    if unknown:
        raise UnknownKey(
            f"unknown parameter key(s) for {experiment}: {sorted(unknown)}"
        )
    merged = {**schema, **supplied}
    if "combos" in merged:
        merged["combos"] = [_check_combo(c) for c in merged["combos"]]
    if "spot_checks" in merged:
        merged["spot_checks"] = [_check_spot(c) for c in merged["spot_checks"]]
    return merged


def _check_combo(entry: dict) -> dict:
    allowed = {"m", "T", "k_min", "k_max"}
    if not isinstance(entry, dict) or set(entry) - allowed:
        raise UnknownKey(f"robustness combo entries allow keys {sorted(allowed)}")
    missing = allowed - set(entry)
    if missing:
        raise ConfigError(f"robustness combo missing keys: {sorted(missing)}")
    return {k: float(v) for k, v in entry.items()}


def _check_spot(entry: dict) -> dict:
    allowed = {"angle_deg", "alpha"}
    if not isinstance(entry, dict) or set(entry) != allowed:
        raise UnknownKey(f"spot_checks entries require exactly keys {sorted(allowed)}")
    return {k: float(v) for k, v in entry.items()}


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file (strict schema)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed config: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("config must be a key-value document")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise UnknownKey(f"unknown top-level key(s): {sorted(unknown)}")
    experiment = doc.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}"
        )
    supplied = doc.get("parameters") or {}
    if not isinstance(supplied, dict):
        raise ParseError("parameters must be a mapping")
    cfg = ExperimentConfig(
        experiment=experiment,
        parameters=_merge_parameters(experiment, supplied),
        output_dir=str(doc.get("output_dir", "out")),
        source=str(path),
    )
    _resolve(cfg)  # surface validation errors before any computation
    return cfg


def default_config(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return ExperimentConfig(
        experiment=experiment,
        parameters=_merge_parameters(experiment, {}),
        output_dir="out",
    )


def _task_from(p: dict, v_td: float, omega_s: float = 1.0) -> TaskParams1D:
    return validate(
        TaskParams1D(
            m=float(p["m"]),
            g=float(p["g"]),
            l0=float(p["l0"]),
            v_td=float(v_td),
            T=float(p["T"]),
            k_min=float(p["k_min"]),
            k_max=float(p["k_max"]),
            omega_s=omega_s,
        )
    )


def _grid_from(p: dict) -> np.ndarray:
    lo, hi, n = float(p["alpha_min"]), float(p["alpha_max"]), int(p["grid_points"])
    if not (0.0 < lo < hi) or n < 2:
        raise ParameterError("need 0 < alpha_min < alpha_max and grid_points >= 2")
    return default_alpha_grid(n, lo, hi)


def _resolve(cfg: ExperimentConfig):
    """Build the validated domain objects a run will consume."""
    p = cfg.parameters
    if cfg.experiment == "sweep1d":
        base = _task_from(p, v_td=p["v_td_ensemble"][0])
        return SweepConfig(
            alpha_grid=_grid_from(p),
            v_td_ensemble=tuple(float(v) for v in p["v_td_ensemble"]),
            base=base,
        ).validated()
    if cfg.experiment == "thresholds":
        alpha = float(p["alpha"])
        if alpha <= 0:
            raise ParameterError("alpha must be > 0")
        return _task_from(p, v_td=p["v_td"]).with_alpha(alpha)
    if cfg.experiment == "conservative":
        return _task_from(p, v_td=p["v_td"]), _grid_from(p)
    if cfg.experiment == "robustness":
        combos = tuple(
            validate(
                TaskParams1D(
                    m=c["m"],
                    g=float(p["g"]),
                    l0=float(p["l0"]),
                    v_td=float(p["v_td"]),
                    T=c["T"],
                    k_min=c["k_min"],
                    k_max=c["k_max"],
                    omega_s=1.0 / c["T"],
                )
            )
            for c in p["combos"]
        )
        return combos, _grid_from(p)
    slip = validate_slip(
        SlipParams(
            m=float(p["m"]),
            g=float(p["g"]),
            l0=float(p["l0"]),
            k_min=float(p["k_min"]),
            k_max=float(p["k_max"]),
            mu=float(p["mu"]),
            v_forward=float(p["v_forward"]),
            alpha_td=math.radians(float(p["angles_deg"][0])),
            h_drop=float(p["h_drop"]),
            omega_s=1.0 / float(p["T_nominal"]),
            T_nominal=float(p["T_nominal"]),
        )
    )
    return slip, _grid_from(p)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return ""
    return repr(v)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _run_sweep1d(cfg: ExperimentConfig):
    sweep_cfg = _resolve(cfg)
    rows = run_sweep(sweep_cfg)
    csv_rows = [
        [r.alpha, r.v_td, r.controller, r.D_alpha, r.dT_alpha, r.J_over_Jideal]
        for r in rows
    ]
    warnings = sum(1 for r in rows if r.D_alpha is None)
    header = ["alpha", "v_td", "controller", "D_alpha", "dT_alpha", "J_over_Jideal"]
    return "sweep1d.csv", header, csv_rows, warnings, {
        "grid_points": sweep_cfg.alpha_grid.size,
        "rows": len(rows),
    }


def _run_robustness(cfg: ExperimentConfig):
    combos, grid = _resolve(cfg)
    study = robustness_study(combos, grid)
    reg = study.regression
    csv_rows = []
    for i, o in enumerate(study.outcomes):
        csv_rows.append(
            [
                float(i),
                o.params.m,
                o.params.T,
                o.params.k_min,
                o.params.k_max,
                o.params.v_td,
                o.alpha_crit,
                o.alpha_50,
                reg.slope,
                reg.intercept,
                reg.r_squared,
                reg.proportionality,
            ]
        )
    warnings = sum(1 for o in study.outcomes if o.alpha_50 is None)
    header = [
        "combo",
        "m",
        "T",
        "k_min",
        "k_max",
        "v_td",
        "alpha_crit",
        "alpha_50",
        "slope",
        "intercept",
        "r_squared",
        "proportionality",
    ]
    return "robustness.csv", header, csv_rows, warnings, {
        "grid_points": grid.size,
        "rows": len(csv_rows),
        "r_squared": reg.r_squared,
        "proportionality": reg.proportionality,
    }


def _run_slip2d(cfg: ExperimentConfig):
    slip, grid = _resolve(cfg)
    p = cfg.parameters
    rows = slip_sweep(
        slip,
        grid,
        angles_deg=tuple(float(a) for a in p["angles_deg"]),
        spot_checks=tuple((s["angle_deg"], s["alpha"]) for s in p["spot_checks"]),
    )
    csv_rows = [[r.angle_deg, r.alpha, r.D_2D, r.dT_2D, r.eta] for r in rows]
    warnings = sum(1 for r in rows if r.D_2D is None)
    header = ["angle_deg", "alpha", "D_2D", "dT_2D", "eta"]
    return "slip2d.csv", header, csv_rows, warnings, {
        "grid_points": grid.size,
        "rows": len(rows),
    }


def _run_conservative(cfg: ExperimentConfig):
    params, grid = _resolve(cfg)
    report = conservative_report(params, grid)
    labels = [PARAM_BASED.label, "conservative", STIFFNESS_AS_STATE.label]
    csv_rows = []
    warnings = 0
    for i, alpha in enumerate(report.alpha_grid):
        costs = [report.J_over_Jideal[lab][i] for lab in labels]
        # A missing cost is a failure only where the controller exists.
        warnings += sum(
            1
            for lab, c in zip(labels, costs)
            if math.isnan(c)
            and (lab != "conservative" or not math.isnan(report.k_max_prime[i]))
        )
        reach_flags = [
            1.0 if report.reach[lab][0] <= alpha <= report.reach[lab][1] else 0.0
            for lab in labels
        ]
        csv_rows.append(
            [
                alpha,
                report.A[i],
                report.k_max_prime[i],
                report.conservatism_ratio[i],
                *costs,
                *reach_flags,
                report.alpha_infeas,
                report.alpha_crit,
            ]
        )
    header = [
        "alpha",
        "A",
        "k_max_prime",
        "conservatism_ratio",
        "J_param_based",
        "J_conservative",
        "J_stiffness_as_state",
        "reach_param_based",
        "reach_conservative",
        "reach_stiffness_as_state",
        "alpha_infeas",
        "alpha_crit",
    ]
    return "conservative.csv", header, csv_rows, warnings, {
        "grid_points": grid.size,
        "rows": len(csv_rows),
        "alpha_infeas": report.alpha_infeas,
    }


def _run_thresholds(cfg: ExperimentConfig):
    params = _resolve(cfg)
    rep = threshold_report(params)
    csv_rows = [
        [
            params.alpha(),
            rep.D_simplified,
            rep.D_exact,
            rep.R,
            rep.rho,
            rep.alpha_crit,
            rep.saturation_gap,
            rep.verdict,
        ]
    ]
    header = [
        "alpha",
        "D_simplified",
        "D_exact",
        "R",
        "rho",
        "alpha_crit",
        "saturation_gap",
        "verdict",
    ]
    return "thresholds.csv", header, csv_rows, 0, {"rows": 1}


_RUNNERS = {
    "sweep1d": _run_sweep1d,
    "robustness": _run_robustness,
    "slip2d": _run_slip2d,
    "conservative": _run_conservative,
    "thresholds": _run_thresholds,
}


def run(
    cfg: ExperimentConfig,
    out_dir: Optional[str] = None,
    grid_points: Optional[int] = None,
    quiet: bool = False,
) -> list[Path]:
    """Execute the experiment; returns the paths written (CSV + manifest)."""
    if grid_points is not None:
        if "grid_points" not in cfg.parameters:
            raise ConfigError(f"{cfg.experiment} takes no grid override")
        cfg = replace(cfg, parameters={**cfg.parameters, "grid_points": grid_points})
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    name, header, rows, warnings, extras = _RUNNERS[cfg.experiment](cfg)
    wall = time.perf_counter() - started

    csv_path = out / name
    _write_csv(csv_path, header, rows)

    manifest = out / "manifest.txt"
    lines = [
        f"artifact: hopfeas {__version__}",
        f"experiment: {cfg.experiment}",
        f"config: {cfg.source}",
        f"output: {name}",
        f"warnings: {warnings}",
        f"wall_clock_s: {wall:.3f}",
    ]
    lines += [f"{key}: {extras[key]}" for key in sorted(extras)]
    lines += [
        f"param.{key}: {cfg.parameters[key]}" for key in sorted(cfg.parameters)
    ]
    manifest.write_text("\n".join(lines) + "\n")

    if not quiet:
        print(f"{cfg.experiment}: wrote {csv_path} ({len(rows)} rows, {warnings} warnings)")
    return [csv_path, manifest]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hopfeas",
        description="Stance-phase feasibility experiments for variable-stiffness hopping",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="YAML config path (defaults built in)")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--grid-points", type=int, help="alpha grid size override")
        sp.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        if args.config:
            cfg = load_config(args.config)
            if cfg.experiment != args.experiment:
                raise ConfigError(
                    f"config is for {cfg.experiment!r}, invoked as {args.experiment!r}"
                )
        else:
            cfg = default_config(args.experiment)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        run(cfg, out_dir=args.out, grid_points=args.grid_points, quiet=args.quiet)
    except (ParameterError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (UnderdeterminedFit, RuntimeError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
