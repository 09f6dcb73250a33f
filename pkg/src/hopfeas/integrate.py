"""Adaptive Runge-Kutta integration with guarded terminal-event detection.

Embedded Dormand-Prince 5(4) pair with a quartic dense-output interpolant.
The solver is deterministic: identical inputs produce bit-identical outputs.
Event times are located by bisection on the dense interpolant, which keeps
liftoff-time metrics resolved far below the percent scale they are compared
at downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class HorizonExceeded(RuntimeError):
    """An event was requested but never fired before t_max."""


class StepUnderflow(RuntimeError):
    """Error control demanded a step below the machine-feasible size."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and horizon for a single solve.

    abs_tol sits far below the ~1e-2 m compression scale of the stance
    problems; event_refine_tol resolves liftoff times well under the 1%
    deviation scale of the timing metrics.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 5e-4
    event_refine_tol: float = 1e-10
    t_max: float = 5.0

    def validated(self) -> "IntegratorSettings":
        for name in ("rel_tol", "abs_tol", "max_step", "event_refine_tol", "t_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        return self


DEFAULT_SETTINGS = IntegratorSettings()


@dataclass(frozen=True)
class SampledSolution:
    """Dense-output samples of one solve.

    times : strictly increasing sample instants, a uniform grid plus the
            terminal instant
    states: state vectors at those instants, shape (len(times), dim)
    terminal_time: event time if an event fired, else None
    terminated_by_event: whether integration stopped on the event
    """

    times: np.ndarray
    states: np.ndarray
    terminal_time: Optional[float]
    terminated_by_event: bool


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the 5th- and 4th-order solutions (error estimate).
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic dense-output coefficients (continuous extension of the pair).
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _error_norm(diff: np.ndarray, scale: np.ndarray) -> float:
    return float(np.sqrt(np.mean((diff / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, settings: IntegratorSettings) -> float:
    """Hairer-style starting-step heuristic, capped at max_step."""
    scale = settings.abs_tol + settings.rel_tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(t0 + h0, y1), dtype=float)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, settings.max_step)


class _Segment:
    """One accepted step with its dense-output polynomial."""

    __slots__ = ("t0", "h", "y0", "Q")

    def __init__(self, t0: float, h: float, y0: np.ndarray, K: np.ndarray):
        self.t0 = t0
        self.h = h
        self.y0 = y0
        self.Q = K.T @ _P  # (dim, 4)

    def eval(self, t: float) -> np.ndarray:
        theta = (t - self.t0) / self.h
        powers = np.array([theta, theta**2, theta**3, theta**4])
        return self.y0 + self.h * (self.Q @ powers)


def solve(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    state0,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    event: Optional[Callable[[float, np.ndarray], float]] = None,
    event_guard: Optional[Callable[[float, np.ndarray], bool]] = None,
    grid_dt: float = 1e-4,
) -> SampledSolution:
    """Integrate y' = rhs(t, y) from t = 0 until the event fires or t_max.

    The event is a scalar function e(t, y); integration terminates at the
    first sign change of e along the solution, located by bisection on the
    bracketing step to within event_refine_tol.  event_guard gates arming:
    sign changes are ignored until the guard has returned True at some
    accepted step endpoint (needed when the initial state sits exactly on
    the event surface).  Without an event the solve runs to t_max.

    Raises HorizonExceeded if an event was given but never fired, and
    StepUnderflow if error control cannot proceed.
    """
    settings = settings.validated()
    y = np.asarray(state0, dtype=float).copy()
    t = 0.0
    f = np.asarray(rhs(t, y), dtype=float)
    h = _initial_step(rhs, t, y, f, settings)

    segments: list[_Segment] = []
    armed = False
    e_prev = event(t, y) if event is not None else 0.0
    terminal_time: Optional[float] = None

    K = np.empty((7, y.size))
    while settings.t_max - t > 1e-14 * max(1.0, settings.t_max):
        h = min(h, settings.max_step, settings.t_max - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepUnderflow(f"step size {h:g} at t={t:g}")

        K[0] = f
        for s in range(1, 7):
            y_stage = y + h * (_A[s] @ K[:s])
            K[s] = rhs(t + _C[s] * h, y_stage)
        y_new = y + h * (_B @ K)
        # FSAL: stage 7 is the derivative at the step end.
        K[6] = rhs(t + h, y_new)
        diff = h * (_E @ K)
        scale = settings.abs_tol + settings.rel_tol * np.maximum(
            np.abs(y), np.abs(y_new)
        )
        err = _error_norm(diff, scale)

        if not math.isfinite(err) or err > 1.0:
            shrink = _MIN_FACTOR if not math.isfinite(err) else max(
                _MIN_FACTOR, _SAFETY * err ** (-0.2)
            )
            h *= shrink
            continue

        seg = _Segment(t, h, y.copy(), K.copy())
        segments.append(seg)
        t_new = t + h
        f_new = K[6].copy()

        if event is not None:
            if not armed:
                armed = event_guard is None or bool(event_guard(t_new, y_new))
            e_new = event(t_new, y_new)
            crossed = armed and (
                (e_prev > 0.0 > e_new)
                or (e_prev < 0.0 < e_new)
                or (e_prev != 0.0 and e_new == 0.0)
            )
            if crossed:
                terminal_time = _bisect_event(event, seg, t, t_new, e_prev, settings)
                break
            e_prev = e_new

        t, y, f = t_new, y_new, f_new
        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, _SAFETY * err ** (-0.2))
        h *= factor

    if event is not None and terminal_time is None:
        raise HorizonExceeded(f"no event before t_max={settings.t_max}")

    t_end = terminal_time if terminal_time is not None else settings.t_max
    times, states = _sample(segments, t_end, grid_dt)
    return SampledSolution(
        times=times,
        states=states,
        terminal_time=terminal_time,
        terminated_by_event=terminal_time is not None,
    )


def _bisect_event(event, seg: _Segment, ta: float, tb: float, ea: float, settings) -> float:
    """Locate the sign change of the event inside seg to event_refine_tol."""
    while tb - ta > settings.event_refine_tol:
        tm = 0.5 * (ta + tb)
        em = event(tm, seg.eval(tm))
        if (em > 0.0) == (ea > 0.0) and em != 0.0:
            ta = tm
            ea = em
        else:
            tb = tm
    return 0.5 * (ta + tb)


def _sample(segments: list[_Segment], t_end: float, grid_dt: float):
    """Dense-output samples on the uniform grid, plus the terminal instant."""
    n_uniform = int(np.floor(t_end / grid_dt + 1e-9)) + 1
    grid = [i * grid_dt for i in range(n_uniform)]
    if t_end - grid[-1] > 1e-12:
        grid.append(t_end)
    else:
        grid[-1] = t_end
    times = np.array(grid)

    starts = np.array([s.t0 for s in segments])
    states = np.empty((times.size, segments[0].y0.size))
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(segments) - 1)
    for i, (ti, j) in enumerate(zip(times, idx)):
        states[i] = segments[j].eval(ti)
    return times, states
