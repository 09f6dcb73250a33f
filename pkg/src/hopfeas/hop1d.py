"""1D monoped stance: reference schedules, controller rollouts, and metrics.

Stance dynamics in compression coordinates:  m*z'' = m*g - k*z  from z(0)=0,
z'(0)=v_td, terminating when z returns to zero (liftoff).  The actuator
carries first-order lag  k' = omega_s*(k_cmd - k)  with both k and k_cmd
confined to [k_min, k_max].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    ControllerKind,
    DerivedConstants1D,
    TaskParams1D,
    derive_constants,
    validate,
    validate_controller,
)
from .integrate import DEFAULT_SETTINGS, IntegratorSettings, SampledSolution, solve

# Dense comparison grid shared by all deviation metrics.
GRID_DT = 1e-4

# Event arming: stance starts exactly on the liftoff surface (z = 0), so the
# event is armed only once compression clearly exceeds zero, or failing that
# shortly after touchdown.
EVENT_ARM_Z = 1e-6
EVENT_ARM_T = 1e-4


@dataclass(frozen=True)
class StanceTrajectory:
    """Time-sampled stance record on the dense grid plus the liftoff instant.

    F is the ground reaction force k*z pointwise; k_cmd is the command that
    was issued to the actuator (equal to k for instantaneous predictions).
    """

    times: np.ndarray
    z: np.ndarray
    z_dot: np.ndarray
    k: np.ndarray
    k_cmd: np.ndarray
    F: np.ndarray
    T_liftoff: float


@dataclass(frozen=True)
class RolloutResult:
    predicted: StanceTrajectory
    realized: StanceTrajectory
    D_alpha: float
    dT_alpha: float
    J_realized: float


def k_ref(z: float, consts: DerivedConstants1D, k_cap: float) -> float:
    """Stiffness reference min(k_cap, F_const/z); k_cap in the z -> 0 limit.

    The regime boundary returns the cap exactly (the two branches agree
    there up to rounding)."""
    z_sat = consts.F_const / k_cap
    if z <= z_sat:
        return k_cap
    return consts.F_const / z


def k_ref_rate(
    z: float, z_dot: float, consts: DerivedConstants1D, k_cap: float
) -> float:
    """Time derivative of the reference along a trajectory.

    Zero in the saturated regimes, -F_const*z_dot/z^2 in the force-regulated
    middle regime.  The regime boundary itself takes the middle-regime
    branch (limit from inside, where the slew demand peaks).
    """
    z_sat = consts.F_const / k_cap
    if z < z_sat:
        return 0.0
    return -consts.F_const * z_dot / z**2


def _cap_for(kind: ControllerKind, params: TaskParams1D) -> float:
    if kind.variant == "conservative":
        return kind.k_max_prime
    return params.k_max


def command_policy(
    kind: ControllerKind,
    state,
    params: TaskParams1D,
    consts: Optional[DerivedConstants1D] = None,
) -> float:
    """Commanded stiffness for the given controller at a stance state.

    The parameter-based variants issue the reference evaluated at the current
    compression.  The stiffness-as-state variant adds lag pre-compensation
    (1/omega_s)*dk_ref/dt.  Commands are clamped to the actuator-admissible
    range before being issued.
    """
    if consts is None:
        consts = derive_constants(params)
    z, z_dot = float(state[0]), float(state[1])
    cap = _cap_for(kind, params)
    raw = k_ref(z, consts, cap)
    if kind.variant == "stiffness_as_state":
        raw += k_ref_rate(z, z_dot, consts, cap) / params.omega_s
    return min(params.k_max, max(params.k_min, raw))


def integrate_stance(
    params: TaskParams1D,
    stiffness: Callable[[float, float], float],
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    grid_dt: float = GRID_DT,
) -> SampledSolution:
    """Integrate m*z'' = m*g - k(z, z_dot)*z until liftoff.

    The stiffness argument is an arbitrary state-feedback schedule; no
    parameter validation is applied here so degenerate diagnostics (constant
    k, zero gravity) can be run directly.
    """
    m, g = params.m, params.g

    def rhs(t, y):
        z, z_dot = y
        return [z_dot, g - stiffness(z, z_dot) * z / m]

    return solve(
        rhs,
        [0.0, params.v_td],
        settings,
        event=lambda t, y: y[0],
        event_guard=lambda t, y: y[0] > EVENT_ARM_Z or t > EVENT_ARM_T,
        grid_dt=grid_dt,
    )


def _augmented_solution(
    params: TaskParams1D,
    kind: ControllerKind,
    consts: DerivedConstants1D,
    settings: IntegratorSettings,
    grid_dt: float,
) -> SampledSolution:
    """Integrate the coupled stance + actuator system under command feedback."""
    m, g, omega_s = params.m, params.g, params.omega_s
    k0 = k_ref(0.0, consts, _cap_for(kind, params))

    def rhs(t, y):
        z, z_dot, k = y
        cmd = command_policy(kind, (z, z_dot), params, consts)
        return [z_dot, g - k * z / m, omega_s * (cmd - k)]

    return solve(
        rhs,
        [0.0, params.v_td, k0],
        settings,
        event=lambda t, y: y[0],
        event_guard=lambda t, y: y[0] > EVENT_ARM_Z or t > EVENT_ARM_T,
        grid_dt=grid_dt,
    )


def predict(
    params: TaskParams1D,
    kind: ControllerKind,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    grid_dt: float = GRID_DT,
) -> StanceTrajectory:
    """Stance trajectory as the controller's internal model sees it.

    Parameter-based variants apply the reference instantaneously (no actuator
    state); the stiffness-as-state variant integrates the augmented system
    under the clipped pre-compensation command, so its prediction already
    contains the lag.
    """
    validate(params)
    validate_controller(kind, params)
    consts = derive_constants(params)

    if kind.variant == "stiffness_as_state":
        sol = _augmented_solution(params, kind, consts, settings, grid_dt)
        return _trajectory_from_augmented(sol, params, kind, consts)

    cap = _cap_for(kind, params)
    sol = integrate_stance(
        params, lambda z, z_dot: k_ref(z, consts, cap), settings, grid_dt
    )
    z = sol.states[:, 0]
    z_dot = sol.states[:, 1]
    k = np.array([k_ref(zi, consts, cap) for zi in z])
    k_cmd = np.array(
        [
            command_policy(kind, (zi, zdi), params, consts)
            for zi, zdi in zip(z, z_dot)
        ]
    )
    return StanceTrajectory(
        times=sol.times,
        z=z,
        z_dot=z_dot,
        k=k,
        k_cmd=k_cmd,
        F=k * z,
        T_liftoff=sol.terminal_time,
    )


def _trajectory_from_augmented(
    sol: SampledSolution,
    params: TaskParams1D,
    kind: ControllerKind,
    consts: DerivedConstants1D,
) -> StanceTrajectory:
    z = sol.states[:, 0]
    z_dot = sol.states[:, 1]
    k = sol.states[:, 2]
    k_cmd = np.array(
        [
            command_policy(kind, (zi, zdi), params, consts)
            for zi, zdi in zip(z, z_dot)
        ]
    )
    return StanceTrajectory(
        times=sol.times,
        z=z,
        z_dot=z_dot,
        k=k,
        k_cmd=k_cmd,
        F=k * z,
        T_liftoff=sol.terminal_time,
    )


def realize(
    params: TaskParams1D,
    kind: ControllerKind,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    grid_dt: float = GRID_DT,
) -> StanceTrajectory:
    """Stance trajectory of the physical system under command feedback.

    The command policy is evaluated on the realized state and pushed through
    the first-order actuator; k(0) starts at the reference value for zero
    compression (the saturation cap).
    """
    validate(params)
    validate_controller(kind, params)
    consts = derive_constants(params)
    sol = _augmented_solution(params, kind, consts, settings, grid_dt)
    return _trajectory_from_augmented(sol, params, kind, consts)


def _on_common_grid(traj: StanceTrajectory, grid: np.ndarray) -> np.ndarray:
    """Compression resampled onto the comparison grid, zero past liftoff."""
    return np.interp(grid, traj.times, traj.z, right=0.0)


def deviation_metrics(
    predicted: StanceTrajectory, realized: StanceTrajectory
) -> tuple[float, float]:
    """Normalized L-infinity compression deviation and liftoff-time deviation.

    Trajectories are compared on the shared uniform grid spanning the longer
    of the two stances; compression is identically zero in flight, so the
    shorter record is zero-extended.
    """
    t_end = max(predicted.T_liftoff, realized.T_liftoff)
    grid = np.arange(int(np.floor(t_end / GRID_DT)) + 1) * GRID_DT
    z_p = _on_common_grid(predicted, grid)
    z_r = _on_common_grid(realized, grid)
    D = float(np.max(np.abs(z_p - z_r)) / np.max(predicted.z))
    dT = abs(predicted.T_liftoff - realized.T_liftoff) / predicted.T_liftoff
    return D, dT


def rollout(
    params: TaskParams1D,
    kind: ControllerKind,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
) -> RolloutResult:
    """Predicted and realized stance for one controller, with metrics.

    For the stiffness-as-state controller the prediction model contains the
    actuator dynamics, so prediction and realization are the same augmented
    rollout and the deviations vanish identically.
    """
    predicted = predict(params, kind, settings)
    realized_traj = realize(params, kind, settings)
    D, dT = deviation_metrics(predicted, realized_traj)
    J = float(np.trapezoid(realized_traj.F**2, realized_traj.times))
    return RolloutResult(
        predicted=predicted,
        realized=realized_traj,
        D_alpha=D,
        dT_alpha=dT,
        J_realized=J,
    )
