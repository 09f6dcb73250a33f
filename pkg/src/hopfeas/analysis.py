"""Closed-form threshold algebra and the conservative-tuning analysis.

Two slew-demand variants coexist deliberately.  The simplified demand
k_max^2*T/(2m) (brisk-hop limit 2*v_td/T >> g) defines the realizability
threshold alpha_crit; the exact demand k_max^2*v_td/F_const drives the
conservative-restriction quadratic and its infeasibility floor alpha_infeas.
Keeping both explains why the conservatism curve saturates at full range
before alpha reaches alpha_crit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    PARAM_BASED,
    STIFFNESS_AS_STATE,
    DerivedConstants1D,
    TaskParams1D,
    conservative,
    derive_constants,
    validate,
)
from .hop1d import GRID_DT, k_ref, k_ref_rate, predict, rollout
from .integrate import DEFAULT_SETTINGS, HorizonExceeded, IntegratorSettings, StepUnderflow

REALIZABLE = "Realizable"
FALSELY_FEASIBLE = "FalselyFeasible"


def slew_demand_simplified(params: TaskParams1D) -> float:
    """Peak reference slew in the brisk-hop limit: k_max^2*T/(2m)."""
    return params.k_max**2 * params.T / (2.0 * params.m)


def slew_demand_exact(
    params: TaskParams1D, consts: Optional[DerivedConstants1D] = None
) -> float:
    """Peak reference slew from task physics alone: k_max^2*v_td/F_const."""
    if consts is None:
        consts = derive_constants(params)
    return params.k_max**2 * params.v_td / consts.F_const


def slew_capacity(params: TaskParams1D) -> float:
    """Largest realizable stiffness rate, omega_s*(k_max - k_min)."""
    return params.omega_s * (params.k_max - params.k_min)


def saturation_gap(params: TaskParams1D, alpha_crit: float) -> float:
    """(k_max - k_min)*(alpha_crit/alpha - 1); positive iff alpha < alpha_crit."""
    return (params.k_max - params.k_min) * (alpha_crit / params.alpha() - 1.0)


def alpha_infeasibility_floor(
    params: TaskParams1D, consts: Optional[DerivedConstants1D] = None
) -> float:
    """Floor 4*k_min*v_td*T/F_const below which no range restriction helps."""
    if consts is None:
        consts = derive_constants(params)
    return 4.0 * params.k_min * params.v_td * params.T / consts.F_const


def conservative_A(
    params: TaskParams1D, alpha: float, consts: Optional[DerivedConstants1D] = None
) -> float:
    """Coefficient A = omega_s*F_const/v_td of the restriction quadratic."""
    if consts is None:
        consts = derive_constants(params)
    return (alpha / params.T) * consts.F_const / params.v_td


def k_max_prime_from_A(A: float, k_min: float) -> Optional[float]:
    """Larger root of k'^2 - A*k' + A*k_min = 0, or None when complex.

    The tiny-negative discriminant case (A == 4*k_min up to rounding) is
    clamped to the double root A/2.
    """
    disc = 1.0 - 4.0 * k_min / A
    if disc < 0.0:
        if disc < -1e-12:
            return None
        disc = 0.0
    return 0.5 * A * (1.0 + math.sqrt(disc))


def subinterval_realizable(
    params: TaskParams1D, alpha: float, n_grid: int = 20
) -> bool:
    """Scan [k_min', k_max'] restrictions on an n_grid x n_grid lattice.

    Returns True if any non-degenerate subinterval of [k_min, k_max]
    satisfies the slew-feasibility condition
    (k_max')^2 * v_td / F_const <= omega_s * (k_max' - k_min').
    """
    p = validate(params)
    consts = derive_constants(p)
    omega_s = alpha / p.T
    ks = np.linspace(p.k_min, p.k_max, n_grid)
    for i, k_lo in enumerate(ks):
        for k_hi in ks[i + 1 :]:
            demand = k_hi**2 * p.v_td / consts.F_const
            if demand <= omega_s * (k_hi - k_lo):
                return True
    return False


@dataclass(frozen=True)
class RequiredCommandProfile:
    """Unclipped command required to reproduce the parameter-based optimum.

    Evaluated along the predicted trajectory as
    k_ref + (1/omega_s)*dk_ref/dt.  time_out_of_bounds counts only
    excursions spanning at least two consecutive dense-grid samples, so an
    isolated grid point never registers as positive measure.
    """

    times: np.ndarray
    k_cmd: np.ndarray
    out_of_bounds: np.ndarray
    k_cmd_min: float
    k_cmd_max: float
    time_out_of_bounds: float


def _positive_measure(times: np.ndarray, mask: np.ndarray) -> float:
    """Total duration of mask runs spanning >= 2 consecutive samples."""
    total = 0.0
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= 2:
                total += times[i - 1] - times[start]
            start = None
    if start is not None and len(mask) - start >= 2:
        total += times[-1] - times[start]
    return total


def required_command_profile(
    params: TaskParams1D, settings: IntegratorSettings = DEFAULT_SETTINGS
) -> RequiredCommandProfile:
    """Required command along the parameter-based prediction, with excursion stats."""
    p = validate(params)
    consts = derive_constants(p)
    pred = predict(p, PARAM_BASED, settings)
    k_cmd = np.array(
        [
            k_ref(z, consts, p.k_max)
            + k_ref_rate(z, zd, consts, p.k_max) / p.omega_s
            for z, zd in zip(pred.z, pred.z_dot)
        ]
    )
    oob = (k_cmd < p.k_min) | (k_cmd > p.k_max)
    return RequiredCommandProfile(
        times=pred.times,
        k_cmd=k_cmd,
        out_of_bounds=oob,
        k_cmd_min=float(k_cmd.min()),
        k_cmd_max=float(k_cmd.max()),
        time_out_of_bounds=_positive_measure(pred.times, oob),
    )


@dataclass(frozen=True)
class ThresholdReport:
    """Slew demand/capacity bookkeeping and the realizability verdict."""

    D_simplified: float
    D_exact: float
    R: float
    rho: float
    alpha_crit: float
    saturation_gap: float
    verdict: str


def threshold_report(
    params: TaskParams1D, settings: IntegratorSettings = DEFAULT_SETTINGS
) -> ThresholdReport:
    """Demand-to-capacity algebra plus the trajectory-level verdict.

    rho is the simplified demand over capacity, identically alpha_crit/alpha.
    The verdict is FalselyFeasible iff the required command exits
    [k_min, k_max] for a positive-measure stretch of the predicted stance.
    """
    p = validate(params)
    consts = derive_constants(p)
    D_s = slew_demand_simplified(p)
    R = slew_capacity(p)
    profile = required_command_profile(p, settings)
    verdict = FALSELY_FEASIBLE if profile.time_out_of_bounds > 0.0 else REALIZABLE
    return ThresholdReport(
        D_simplified=D_s,
        D_exact=slew_demand_exact(p, consts),
        R=R,
        rho=D_s / R,
        alpha_crit=consts.alpha_crit,
        saturation_gap=saturation_gap(p, consts.alpha_crit),
        verdict=verdict,
    )


@dataclass(frozen=True)
class ConservativeReport:
    """Minimum-conservatism restriction, costs, and reach across an alpha grid.

    Array fields align with alpha_grid; NaN encodes absence (no real
    restriction below alpha_infeas, no cost where a rollout is undefined).
    A is the per-alpha quadratic coefficient omega_s*F_const/v_td.
    reach maps controller label to its guaranteed-realizability interval.
    """

    alpha_grid: np.ndarray
    A: np.ndarray
    alpha_infeas: float
    alpha_crit: float
    k_max_prime: np.ndarray
    conservatism_ratio: np.ndarray
    J_over_Jideal: dict[str, np.ndarray]
    reach: dict[str, tuple[float, float]]


def conservative_report(
    params: TaskParams1D,
    alpha_grid,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    with_costs: bool = True,
) -> ConservativeReport:
    """Evaluate the conservative-tuning analysis on an alpha grid.

    k_max_prime is the largest restriction cap keeping slew demand within
    capacity (truncated at k_max); costs are realized squared-force integrals
    normalized by the ideal F_const^2*T, computed by rolling out each
    controller where it exists.
    """
    p = validate(params)
    consts = derive_constants(p)
    grid = np.asarray(alpha_grid, dtype=float)
    alpha_infeas = alpha_infeasibility_floor(p, consts)
    J_ideal = consts.F_const**2 * p.T

    A = np.array([conservative_A(p, a, consts) for a in grid])
    k_prime = np.full(grid.shape, np.nan)
    ratio = np.full(grid.shape, np.nan)
    costs = {
        PARAM_BASED.label: np.full(grid.shape, np.nan),
        "conservative": np.full(grid.shape, np.nan),
        STIFFNESS_AS_STATE.label: np.full(grid.shape, np.nan),
    }

    for i, alpha in enumerate(grid):
        root = k_max_prime_from_A(A[i], p.k_min)
        if root is not None:
            k_prime[i] = min(root, p.k_max)
            ratio[i] = (k_prime[i] - p.k_min) / (p.k_max - p.k_min)
        if not with_costs:
            continue
        pa = p.with_alpha(alpha)
        for label, kind in (
            (PARAM_BASED.label, PARAM_BASED),
            (STIFFNESS_AS_STATE.label, STIFFNESS_AS_STATE),
        ):
            try:
                costs[label][i] = rollout(pa, kind, settings).J_realized / J_ideal
            except (HorizonExceeded, StepUnderflow):
                pass
        if root is not None:
            try:
                res = rollout(pa, conservative(k_prime[i]), settings)
                costs["conservative"][i] = res.J_realized / J_ideal
            except (HorizonExceeded, StepUnderflow):
                pass

    reach = {
        STIFFNESS_AS_STATE.label: (float(grid[0]), float(grid[-1])),
        "conservative": (alpha_infeas, math.inf),
        PARAM_BASED.label: (consts.alpha_crit, math.inf),
    }
    return ConservativeReport(
        alpha_grid=grid,
        A=A,
        alpha_infeas=alpha_infeas,
        alpha_crit=consts.alpha_crit,
        k_max_prime=k_prime,
        conservatism_ratio=ratio,
        J_over_Jideal=costs,
        reach=reach,
    )
