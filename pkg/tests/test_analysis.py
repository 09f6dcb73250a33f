"""Threshold algebra, required-command realizability, conservative tuning.

Covers: demand/capacity hand values, rho = alpha_crit/alpha identity,
saturation gap (450 N/m at alpha = 12.5), the -400 N/m entry-command
algebra, positive-measure excursion bookkeeping, the restriction quadratic
(alpha_infeas = 5.185, double root at 2*k_min), root residuals,
monotonicity, the subinterval floor scan, and report assembly.
"""

import math

import numpy as np
import pytest

from hopfeas.analysis import (
    FALSELY_FEASIBLE,
    REALIZABLE,
    alpha_infeasibility_floor,
    conservative_A,
    conservative_report,
    k_max_prime_from_A,
    required_command_profile,
    saturation_gap,
    slew_capacity,
    slew_demand_exact,
    slew_demand_simplified,
    subinterval_realizable,
    threshold_report,
    _positive_measure,
)
from hopfeas.core import NOMINAL_1D, derive_constants
from hopfeas.hop1d import rollout
from hopfeas.core import PARAM_BASED

CONSTS = derive_constants(NOMINAL_1D)


# ---------------------------------------------------------------- demand algebra


def test_demand_hand_values():
    p = NOMINAL_1D
    assert slew_demand_simplified(p) == pytest.approx(500.0**2 * 0.3 / 2.0, rel=1e-15)
    assert slew_demand_exact(p) == pytest.approx(
        500.0**2 * 2.0 / CONSTS.F_const, rel=1e-15
    )
    assert slew_capacity(p.with_alpha(12.5)) == pytest.approx(
        (12.5 / 0.3) * 450.0, rel=1e-14
    )


@pytest.mark.parametrize("alpha", [0.5, 3.0, 12.5, 25.0, 100.0])
def test_rho_equals_alpha_crit_over_alpha(alpha):
    p = NOMINAL_1D.with_alpha(alpha)
    rho = slew_demand_simplified(p) / slew_capacity(p)
    assert rho == pytest.approx(CONSTS.alpha_crit / alpha, rel=1e-12)


def test_saturation_gap_hand_value():
    p = NOMINAL_1D.with_alpha(12.5)
    # (k_max - k_min) * (alpha_crit/alpha - 1) = 450 * (2 - 1)
    assert saturation_gap(p, CONSTS.alpha_crit) == pytest.approx(450.0, abs=1e-9)


def test_saturation_gap_sign_flips_at_threshold():
    assert saturation_gap(NOMINAL_1D.with_alpha(24.0), 25.0) > 0.0
    assert saturation_gap(NOMINAL_1D.with_alpha(26.0), 25.0) < 0.0


# ---------------------------------------------------------------- required command


def test_entry_command_algebra_low_alpha():
    # Simplified-demand correction at alpha = 12.5 is 900 N/m, pushing the
    # required entry command to k_max - 900 = -400 N/m, far below k_min.
    p = NOMINAL_1D.with_alpha(12.5)
    correction = slew_demand_simplified(p) / p.omega_s
    assert correction == pytest.approx(900.0, abs=1e-9)
    assert p.k_max - correction == pytest.approx(-400.0, abs=1e-9)


def test_entry_command_algebra_above_threshold():
    # At alpha >= alpha_crit the simplified correction fits inside the range.
    for alpha in (25.0, 50.0, 316.0):
        p = NOMINAL_1D.with_alpha(alpha)
        assert slew_demand_simplified(p) / p.omega_s <= (p.k_max - p.k_min) * (
            1.0 + 1e-12
        )


def test_profile_excursions_low_alpha():
    prof = required_command_profile(NOMINAL_1D.with_alpha(12.5))
    assert prof.time_out_of_bounds > 0.0
    assert prof.k_cmd_min < NOMINAL_1D.k_min  # entry side undershoots
    assert prof.k_cmd_max > NOMINAL_1D.k_max  # exit side overshoots


def test_profile_exit_overshoot_any_finite_alpha():
    # Near middle-regime exit the reference sits at k_max while its rate is
    # positive, so the required command exceeds k_max for any finite lag.
    prof = required_command_profile(NOMINAL_1D.with_alpha(100.0))
    assert prof.k_cmd_max > NOMINAL_1D.k_max


def test_positive_measure_rules():
    times = np.arange(10) * 1e-4
    single = np.zeros(10, dtype=bool)
    single[4] = True
    assert _positive_measure(times, single) == 0.0  # isolated point: measure 0
    run = np.zeros(10, dtype=bool)
    run[3:6] = True
    assert _positive_measure(times, run) == pytest.approx(2e-4, rel=1e-12)
    tail = np.zeros(10, dtype=bool)
    tail[8:] = True
    assert _positive_measure(times, tail) == pytest.approx(1e-4, rel=1e-12)


def test_threshold_report_fields_and_verdict():
    rep = threshold_report(NOMINAL_1D.with_alpha(12.5))
    assert rep.alpha_crit == pytest.approx(25.0, abs=1e-12)
    assert rep.rho == pytest.approx(2.0, rel=1e-12)
    assert rep.saturation_gap == pytest.approx(450.0, abs=1e-9)
    assert rep.verdict == FALSELY_FEASIBLE


def test_verdict_implies_positive_rollout_deviation():
    for alpha in (3.0, 12.5, 24.0):
        p = NOMINAL_1D.with_alpha(alpha)
        if threshold_report(p).verdict == FALSELY_FEASIBLE:
            assert rollout(p, PARAM_BASED).D_alpha > 0.0


# ---------------------------------------------------------------- conservative quadratic


def test_alpha_infeas_hand_value():
    floor = alpha_infeasibility_floor(NOMINAL_1D)
    assert floor == pytest.approx(4.0 * 50.0 * 2.0 * 0.3 / CONSTS.F_const, rel=1e-15)
    assert floor == pytest.approx(5.185, abs=0.01)
    assert CONSTS.alpha_crit / floor == pytest.approx(4.82, abs=0.05)


def test_double_root_at_discriminant_zero():
    k_prime = k_max_prime_from_A(4.0 * 50.0, 50.0)
    assert k_prime == 100.0  # exactly 2*k_min
    ratio = (k_prime - 50.0) / 450.0
    assert ratio == pytest.approx(50.0 / 450.0, abs=1e-6)


def test_no_real_root_below_floor():
    assert k_max_prime_from_A(4.0 * 50.0 * 0.99, 50.0) is None


def test_k_max_prime_at_floor_via_alpha():
    floor = alpha_infeasibility_floor(NOMINAL_1D)
    A = conservative_A(NOMINAL_1D, floor)
    assert A == pytest.approx(200.0, rel=1e-12)
    assert k_max_prime_from_A(A, 50.0) == pytest.approx(100.0, rel=1e-9)


def test_quadratic_root_residual():
    grid = np.logspace(math.log10(5.2), math.log10(14.0), 12)
    for alpha in grid:
        A = conservative_A(NOMINAL_1D, float(alpha))
        root = k_max_prime_from_A(A, 50.0)
        assert root is not None
        residual = root**2 - A * root + A * 50.0
        assert abs(residual) < 1e-9 * A**2


def test_k_max_prime_monotone_and_truncated():
    report = conservative_report(
        NOMINAL_1D, np.logspace(-1, math.log10(316.0), 24), with_costs=False
    )
    kp = report.k_max_prime
    defined = ~np.isnan(kp)
    assert not defined[report.alpha_grid < report.alpha_infeas].any()
    vals = kp[defined]
    assert np.all(np.diff(vals) >= -1e-9)
    ratios = report.conservatism_ratio[defined]
    assert np.all(np.diff(ratios) >= -1e-12)
    assert vals.max() == 500.0  # truncated at k_max for large alpha
    assert ratios.max() == pytest.approx(1.0, rel=1e-12)
    assert 0.0 < ratios.min() <= 1.0


def test_subinterval_floor_scan():
    floor = alpha_infeasibility_floor(NOMINAL_1D)
    assert not subinterval_realizable(NOMINAL_1D, 0.9 * floor)
    assert subinterval_realizable(NOMINAL_1D, 12.5)


def test_conservative_report_costs_and_reach():
    grid = np.array([2.0, 8.0, 25.0])
    report = conservative_report(NOMINAL_1D, grid)
    assert math.isnan(report.k_max_prime[0])  # below the floor
    assert not math.isnan(report.k_max_prime[1])
    costs = report.J_over_Jideal
    assert math.isnan(costs["conservative"][0])
    for label in ("param_based", "stiffness_as_state"):
        assert np.all(np.isfinite(costs[label]))
    assert np.isfinite(costs["conservative"][1:]).all()
    lo, hi = report.reach["conservative"]
    assert lo == pytest.approx(report.alpha_infeas)
    assert math.isinf(hi)
    assert report.reach["param_based"][0] == pytest.approx(25.0)
    assert report.reach["stiffness_as_state"] == (2.0, 25.0)
    # interior cost sanity: all three lie within a factor ~2 of the ideal
    row = [costs[l][2] for l in ("param_based", "conservative", "stiffness_as_state")]
    assert all(0.3 < c < 3.0 for c in row)
