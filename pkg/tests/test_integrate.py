"""Adaptive RK integrator against closed-form solutions.

Covers: exponential decay, ballistic event time, harmonic-oscillator
half-period with a guarded event, tolerance convergence, dense-output
accuracy, guard semantics at an on-surface start, determinism, and the
HorizonExceeded / StepUnderflow failure modes.
"""

import math

import numpy as np
import pytest

from hopfeas.integrate import (
    HorizonExceeded,
    IntegratorSettings,
    StepUnderflow,
    solve,
)


def _exp_rhs(t, y):
    return [-y[0]]


def test_exponential_decay():
    sol = solve(_exp_rhs, [1.0], IntegratorSettings(t_max=1.0))
    assert sol.terminated_by_event is False
    assert sol.terminal_time is None
    assert sol.times[-1] == pytest.approx(1.0, abs=1e-12)
    assert sol.states[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-7)


def test_ballistic_event_time():
    def rhs(t, y):
        return [y[1], -9.81]

    sol = solve(
        rhs, [1.0, 0.0], IntegratorSettings(t_max=2.0), event=lambda t, y: y[0]
    )
    assert sol.terminated_by_event
    assert sol.terminal_time == pytest.approx(math.sqrt(2.0 / 9.81), abs=1e-5)
    assert sol.times[-1] == sol.terminal_time


def test_harmonic_half_period_with_guard():
    def rhs(t, y):
        return [y[1], -y[0]]

    sol = solve(
        rhs,
        [0.0, 1.0],
        IntegratorSettings(t_max=5.0),
        event=lambda t, y: y[0],
        event_guard=lambda t, y: t > 0.1,
    )
    assert sol.terminal_time == pytest.approx(math.pi, abs=1e-6)


def test_guard_prevents_trigger_on_surface_start():
    # Projectile launched from the event surface: without arming, the
    # zero-valued start must not terminate the solve at t = 0.
    def rhs(t, y):
        return [y[1], -9.81]

    sol = solve(
        rhs,
        [0.0, 1.0],
        IntegratorSettings(t_max=1.0),
        event=lambda t, y: y[0],
        event_guard=lambda t, y: y[0] > 1e-6 or t > 1e-4,
    )
    assert sol.terminal_time == pytest.approx(2.0 / 9.81, abs=1e-6)


def test_convergence_monotone_in_rel_tol():
    tols = [1e-5, 5e-6, 2.5e-6, 1.25e-6, 1e-7, 5e-8]
    errors = []
    for tol in tols:
        s = IntegratorSettings(rel_tol=tol, abs_tol=1e-14, max_step=0.5, t_max=1.0)
        sol = solve(_exp_rhs, [1.0], s)
        errors.append(max(abs(sol.states[-1, 0] - math.exp(-1.0)), 1e-16))
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= 4.0 * coarse


def test_dense_output_accuracy():
    sol = solve(_exp_rhs, [1.0], IntegratorSettings(t_max=1.0))
    exact = np.exp(-sol.times)
    assert np.max(np.abs(sol.states[:, 0] - exact)) <= 10.0 * 1e-9


def test_dense_grid_structure():
    sol = solve(_exp_rhs, [1.0], IntegratorSettings(t_max=0.01234), grid_dt=1e-3)
    assert np.all(np.diff(sol.times) > 0.0)
    assert sol.times[0] == 0.0
    np.testing.assert_allclose(sol.times[:-1], np.arange(13) * 1e-3, atol=1e-15)
    assert sol.times[-1] == pytest.approx(0.01234, abs=1e-12)
    assert sol.states.shape == (sol.times.size, 1)


def test_deterministic_bitwise():
    def rhs(t, y):
        return [y[1], 9.81 - 500.0 * y[0]]

    a = solve(rhs, [0.0, 2.0], IntegratorSettings(t_max=0.2))
    b = solve(rhs, [0.0, 2.0], IntegratorSettings(t_max=0.2))
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)


def test_horizon_exceeded():
    with pytest.raises(HorizonExceeded):
        solve(
            _exp_rhs,
            [1.0],
            IntegratorSettings(t_max=1.0),
            event=lambda t, y: y[0] - 10.0,  # decaying state never reaches 10
        )


def test_step_underflow_near_singularity():
    def rhs(t, y):
        return [1.0 / (0.6 - t) ** 2]

    with pytest.raises((StepUnderflow, HorizonExceeded, OverflowError)):
        solve(rhs, [0.0], IntegratorSettings(t_max=1.0))


def test_max_step_honored():
    sol = solve(_exp_rhs, [1.0], IntegratorSettings(t_max=0.1, max_step=5e-4))
    # samples land on the dense grid; solution quality implies steps <= max
    assert sol.states[-1, 0] == pytest.approx(math.exp(-0.1), abs=1e-9)


def test_settings_validated():
    with pytest.raises(ValueError):
        solve(_exp_rhs, [1.0], IntegratorSettings(rel_tol=-1.0))
