"""Sweep orchestration, crossing detection, and the scaling regression.

Covers: grid construction, row ordering/determinism, the step-series
crossing oracle (geometric bracket midpoint), largest-crossing selection,
NoCrossing / UnderdeterminedFit errors, and the study machinery on a
reduced combo set.
"""

import numpy as np
import pytest

from hopfeas.core import NOMINAL_1D, PARAM_BASED, STIFFNESS_AS_STATE
from hopfeas.sweep import (
    DEFAULT_ROBUSTNESS_COMBOS,
    NoCrossing,
    SweepConfig,
    SweepRow,
    UnderdeterminedFit,
    alpha_50,
    default_alpha_grid,
    robustness_study,
    run_sweep,
)


def test_default_grid_shape():
    grid = default_alpha_grid()
    assert grid.size == 36
    assert grid[0] == pytest.approx(0.1, rel=1e-12)
    assert grid[-1] == pytest.approx(316.0, rel=1e-12)
    assert np.all(np.diff(np.log(grid)) > 0)
    # log-spacing keeps at least 10 points per decade
    assert grid.size / np.log10(grid[-1] / grid[0]) >= 10.0


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(np.array([1.0, 0.5]), (2.0,), NOMINAL_1D).validated()
    with pytest.raises(ValueError):
        SweepConfig(np.array([1.0, 2.0]), (), NOMINAL_1D).validated()


def test_run_sweep_rows_and_order():
    grid = np.array([0.5, 5.0, 50.0])
    cfg = SweepConfig(grid, (2.5, 1.5), NOMINAL_1D)
    rows = run_sweep(cfg)
    assert len(rows) == 3 * 2 * 2
    key = [(r.alpha, r.v_td, r.controller) for r in rows]
    assert key == sorted(key, key=lambda k: (k[0], k[1], k[2]))
    assert {r.controller for r in rows} == {"param_based", "stiffness_as_state"}
    for r in rows:
        assert r.D_alpha is not None
        if r.controller == "stiffness_as_state":
            assert r.D_alpha <= 1e-6


def test_run_sweep_deterministic():
    grid = np.array([1.0, 10.0])
    cfg = SweepConfig(grid, (2.0,), NOMINAL_1D, controllers=(PARAM_BASED,))
    assert run_sweep(cfg) == run_sweep(cfg)


def _series(alphas, devs, v_td=2.0, controller="param_based"):
    return [
        SweepRow(a, v_td, controller, d, 0.0, 1.0) for a, d in zip(alphas, devs)
    ]


def test_alpha_50_step_series_geometric_midpoint():
    # Step series around alpha = 1 with a symmetric bracket: the log-linear
    # interpolant lands exactly on the geometric midpoint sqrt(0.5*2) = 1.
    rows = _series([0.5, 2.0], [1.0, 0.0])
    assert alpha_50(rows) == pytest.approx(1.0, rel=1e-12)


def test_alpha_50_exact_grid_hit():
    rows = _series([1.0, 4.0, 16.0], [0.9, 0.5, 0.1])
    assert alpha_50(rows) == 4.0


def test_alpha_50_largest_crossing_wins():
    rows = _series([1.0, 2.0, 4.0, 8.0], [0.9, 0.3, 0.7, 0.2])
    a50 = alpha_50(rows)
    assert 4.0 < a50 < 8.0


def test_alpha_50_no_crossing():
    with pytest.raises(NoCrossing):
        alpha_50(_series([1.0, 10.0, 100.0], [0.0, 0.0, 0.0]))


def test_alpha_50_rejects_mixed_series():
    rows = _series([1.0, 2.0], [0.9, 0.1]) + _series(
        [1.0, 2.0], [0.9, 0.1], v_td=1.5
    )
    with pytest.raises(ValueError):
        alpha_50(rows)


def test_robustness_combos_cover_stated_ranges():
    assert len(DEFAULT_ROBUSTNESS_COMBOS) == 10
    for c in DEFAULT_ROBUSTNESS_COMBOS:
        assert 0.5 <= c.m <= 2.0
        assert 0.20 <= c.T <= 0.40
        assert 50.0 <= c.k_min <= 100.0
        assert 300.0 <= c.k_max <= 800.0


def test_underdetermined_fit():
    with pytest.raises(UnderdeterminedFit):
        robustness_study(
            DEFAULT_ROBUSTNESS_COMBOS[:2], alpha_grid=np.array([1.0, 30.0, 100.0])
        )


def test_robustness_study_reduced():
    # Three combos on a coarse grid: exercises the fit plumbing; the full
    # ten-combo bands are asserted in the acceptance suite.
    study = robustness_study(
        DEFAULT_ROBUSTNESS_COMBOS[:3], alpha_grid=default_alpha_grid(14)
    )
    assert len(study.outcomes) == 3
    for o in study.outcomes:
        assert o.alpha_50 is not None
        assert o.alpha_50 < o.alpha_crit
    assert np.isfinite(study.regression.slope)
    assert 0.0 <= study.regression.r_squared <= 1.0
    assert study.regression.proportionality < 1.0
