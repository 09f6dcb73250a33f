"""Desk-scale simulator and analysis toolkit for variable-stiffness stance
control: 1D monoped and planar SLIP rollouts under first-order actuator lag,
closed-form realizability thresholds, and reproducible experiment sweeps."""

__version__ = "0.1.0"

from .core import (
    NOMINAL_1D,
    PARAM_BASED,
    STIFFNESS_AS_STATE,
    ControllerKind,
    DegenerateRange,
    DerivedConstants1D,
    NonPositive,
    ParameterError,
    TaskParams1D,
    conservative,
    derive_constants,
    validate,
)
from .integrate import (
    DEFAULT_SETTINGS,
    HorizonExceeded,
    IntegratorSettings,
    SampledSolution,
    StepUnderflow,
    solve,
)

__all__ = [
    "NOMINAL_1D",
    "PARAM_BASED",
    "STIFFNESS_AS_STATE",
    "ControllerKind",
    "DegenerateRange",
    "DerivedConstants1D",
    "NonPositive",
    "ParameterError",
    "TaskParams1D",
    "conservative",
    "derive_constants",
    "validate",
    "DEFAULT_SETTINGS",
    "HorizonExceeded",
    "IntegratorSettings",
    "SampledSolution",
    "StepUnderflow",
    "solve",
    "__version__",
]
