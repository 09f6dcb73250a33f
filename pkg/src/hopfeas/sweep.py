"""Alpha sweeps, the 50%-deviation crossing, and the scaling-law regression.

A sweep evaluates every (alpha, touchdown velocity, controller) triple on a
logarithmic alpha grid, setting the actuator bandwidth through
omega_s = alpha/T for each grid point.  Rows are emitted in a fixed order
(alpha ascending, then v_td, then controller) so repeated runs serialize to
identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .core import (
    PARAM_BASED,
    STIFFNESS_AS_STATE,
    ControllerKind,
    TaskParams1D,
    derive_constants,
    validate,
)
from .hop1d import rollout
from .integrate import DEFAULT_SETTINGS, HorizonExceeded, IntegratorSettings, StepUnderflow


class NoCrossing(RuntimeError):
    """A deviation series never reaches the 50% level on the grid."""


class UnderdeterminedFit(RuntimeError):
    """Fewer than three valid points available for the regression."""


def default_alpha_grid(
    n: int = 36, lo: float = 0.1, hi: float = 316.0
) -> np.ndarray:
    """Logarithmic grid; 36 points over [0.1, 316] keeps >= 10 points per
    decade, bounding the crossing-interpolation error below the comparison
    slack used downstream."""
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass(frozen=True)
class SweepConfig:
    alpha_grid: np.ndarray
    v_td_ensemble: tuple[float, ...]
    base: TaskParams1D
    controllers: tuple[ControllerKind, ...] = (PARAM_BASED, STIFFNESS_AS_STATE)

    def validated(self) -> "SweepConfig":
        grid = np.asarray(self.alpha_grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
            raise ValueError("alpha_grid must be strictly increasing and > 0")
        if not self.v_td_ensemble:
            raise ValueError("v_td ensemble must be non-empty")
        validate(self.base)
        return self


@dataclass(frozen=True)
class SweepRow:
    """One (alpha, v_td, controller) evaluation; metrics are None when the
    rollout failed (the sweep never aborts on individual rows)."""

    alpha: float
    v_td: float
    controller: str
    D_alpha: Optional[float]
    dT_alpha: Optional[float]
    J_over_Jideal: Optional[float]


def run_sweep(
    config: SweepConfig, settings: IntegratorSettings = DEFAULT_SETTINGS
) -> list[SweepRow]:
    """Evaluate every grid point x ensemble member x controller."""
    cfg = config.validated()
    rows: list[SweepRow] = []
    for alpha in np.asarray(cfg.alpha_grid, dtype=float):
        for v_td in sorted(cfg.v_td_ensemble):
            params = replace(cfg.base, v_td=v_td).with_alpha(float(alpha))
            J_ideal = derive_constants(params).F_const ** 2 * params.T
            for kind in cfg.controllers:
                try:
                    res = rollout(params, kind, settings)
                    row = SweepRow(
                        alpha=float(alpha),
                        v_td=v_td,
                        controller=kind.label,
                        D_alpha=res.D_alpha,
                        dT_alpha=res.dT_alpha,
                        J_over_Jideal=res.J_realized / J_ideal,
                    )
                except (HorizonExceeded, StepUnderflow):
                    row = SweepRow(
                        alpha=float(alpha),
                        v_td=v_td,
                        controller=kind.label,
                        D_alpha=None,
                        dT_alpha=None,
                        J_over_Jideal=None,
                    )
                rows.append(row)
    return rows


def alpha_50(rows: Sequence[SweepRow], level: float = 0.5) -> float:
    """Alpha at which the deviation series crosses the given level.

    Expects rows from a single (v_td, controller) series.  Log-linear
    interpolation in (log alpha, D) between the bracketing grid points;
    with multiple crossings the largest-alpha crossing wins.
    """
    series = sorted(
        (r for r in rows if r.D_alpha is not None), key=lambda r: r.alpha
    )
    if len({(r.v_td, r.controller) for r in series}) > 1:
        raise ValueError("alpha_50 expects rows from a single series")
    alphas = np.array([r.alpha for r in series])
    devs = np.array([r.D_alpha for r in series])
    for i in range(len(series) - 2, -1, -1):
        d0, d1 = devs[i] - level, devs[i + 1] - level
        if d0 == 0.0:
            return float(alphas[i])
        if d1 == 0.0:
            return float(alphas[i + 1])
        if d0 * d1 < 0.0:
            la0, la1 = math.log(alphas[i]), math.log(alphas[i + 1])
            frac = d0 / (d0 - d1)
            return math.exp(la0 + frac * (la1 - la0))
    raise NoCrossing(f"deviation never crosses {level} on the grid")


@dataclass(frozen=True)
class RegressionResult:
    """Unconstrained log-log fit of alpha_50 against alpha_crit, plus the
    slope-1 proportionality constant exp(mean(log alpha_50 - log alpha_crit))."""

    slope: float
    intercept: float
    r_squared: float
    proportionality: float


@dataclass(frozen=True)
class ComboOutcome:
    params: TaskParams1D
    alpha_crit: float
    alpha_50: Optional[float]


@dataclass(frozen=True)
class RobustnessStudy:
    regression: RegressionResult
    outcomes: tuple[ComboOutcome, ...]


def _combo(m: float, T: float, k_min: float, k_max: float) -> TaskParams1D:
    # omega_s is a placeholder; sweeps set it per grid point via with_alpha.
    return TaskParams1D(
        m=m, g=9.81, l0=0.5, v_td=2.0, T=T, k_min=k_min, k_max=k_max, omega_s=1.0 / T
    )


# Fixed space-filling sample of the (m, T, k_min, k_max) ranges
# 0.5-2.0 kg, 0.20-0.40 s, 50-100 N/m, 300-800 N/m; the implied alpha_crit
# values span roughly 9.8 to 51.5.
DEFAULT_ROBUSTNESS_COMBOS: tuple[TaskParams1D, ...] = (
    _combo(1.75, 0.20, 50.0, 800.0),
    _combo(1.50, 0.25, 75.0, 600.0),
    _combo(0.50, 0.20, 50.0, 300.0),
    _combo(1.25, 0.35, 50.0, 350.0),
    _combo(1.00, 0.30, 50.0, 500.0),
    _combo(0.75, 0.30, 80.0, 450.0),
    _combo(1.00, 0.40, 100.0, 300.0),
    _combo(2.00, 0.40, 100.0, 800.0),
    _combo(0.50, 0.32, 60.0, 400.0),
    _combo(0.60, 0.35, 70.0, 420.0),
)


def robustness_study(
    combos: Sequence[TaskParams1D] = DEFAULT_ROBUSTNESS_COMBOS,
    alpha_grid: Optional[np.ndarray] = None,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> RobustnessStudy:
    """Empirical 50% crossing vs analytic threshold across parameter combos.

    Each combo gets a parameter-based deviation series over the alpha grid at
    its own touchdown velocity; combos whose series never crosses 50% are
    reported with alpha_50 = None and excluded from the fit.
    """
    if alpha_grid is None:
        alpha_grid = default_alpha_grid()
    outcomes: list[ComboOutcome] = []
    for combo in combos:
        validate(combo)
        cfg = SweepConfig(
            alpha_grid=alpha_grid,
            v_td_ensemble=(combo.v_td,),
            base=combo,
            controllers=(PARAM_BASED,),
        )
        rows = run_sweep(cfg, settings)
        a_crit = derive_constants(combo).alpha_crit
        try:
            a_50 = alpha_50(rows)
        except NoCrossing:
            a_50 = None
        outcomes.append(ComboOutcome(params=combo, alpha_crit=a_crit, alpha_50=a_50))

    valid = [(o.alpha_crit, o.alpha_50) for o in outcomes if o.alpha_50 is not None]
    if len(valid) < 3:
        raise UnderdeterminedFit(f"only {len(valid)} combos produced a crossing")
    x = np.log(np.array([v[0] for v in valid]))
    y = np.log(np.array([v[1] for v in valid]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(resid**2)) / ss_tot
    regression = RegressionResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        proportionality=float(np.exp(np.mean(y - x))),
    )
    return RobustnessStudy(regression=regression, outcomes=tuple(outcomes))
