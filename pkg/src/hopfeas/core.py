"""Task parameters, validation, and closed-form derived constants.

Everything downstream (stance rollouts, threshold algebra, sweeps) consumes
the immutable records defined here.  SI units throughout: kg, m, s, N, rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """Base class for task-parameter validation failures."""


class NonPositive(ParameterError):
    """A quantity that must be strictly positive is zero or negative."""


class DegenerateRange(ParameterError):
    """Stiffness range is empty or inverted (k_min >= k_max)."""


@dataclass(frozen=True)
class TaskParams1D:
    """Physical description of a single vertical stance task.

    m        : point mass at the hip [kg]
    g        : gravitational acceleration [m/s^2]
    l0       : leg natural length [m] (carried for interface symmetry with
               the planar model; the vertical stance dynamics are written in
               compression coordinates and do not use it)
    v_td     : vertical touchdown velocity [m/s]
    T        : nominal stance duration [s]
    k_min    : lower stiffness bound [N/m]
    k_max    : upper stiffness bound [N/m]
    omega_s  : actuator bandwidth [rad/s]
    """

    m: float
    g: float
    l0: float
    v_td: float
    T: float
    k_min: float
    k_max: float
    omega_s: float

    def alpha(self) -> float:
        """Dimensionless bandwidth-times-timescale product omega_s * T."""
        return self.omega_s * self.T

    def with_alpha(self, alpha: float) -> "TaskParams1D":
        """Copy with the bandwidth set through omega_s = alpha / T."""
        return replace(self, omega_s=alpha / self.T)


# Reference operating point used by the 1D experiments (omega_s corresponds
# to alpha = 12.5, half the analytic realizability threshold).
NOMINAL_1D = TaskParams1D(
    m=1.0,
    g=9.81,
    l0=0.5,
    v_td=2.0,
    T=0.3,
    k_min=50.0,
    k_max=500.0,
    omega_s=12.5 / 0.3,
)


@dataclass(frozen=True)
class DerivedConstants1D:
    """Closed-form quantities implied by a validated TaskParams1D.

    F_const    : constant-force minimizer of the squared-force stance cost
                 under the periodic impulse balance, m*(2*v_td/T + g) [N]
    z_crit     : compression at which the stiffness reference transitions
                 between saturation and force regulation, F_const/k_max [m]
    K_task     : dimensionless task constant k_max^2*T^2/(2*m*(k_max-k_min))
    alpha_crit : realizability threshold; equals K_task (slew demand equals
                 slew capacity at alpha = alpha_crit)
    """

    F_const: float
    z_crit: float
    K_task: float
    alpha_crit: float


@dataclass(frozen=True)
class ControllerKind:
    """Which controller formulation drives a rollout.

    variant is one of:
      "param_based"        stiffness treated as an instantaneous decision
                           variable; actuator lag absent from the prediction
      "stiffness_as_state" actuator lag embedded in the prediction state;
                           command found by clipped lag pre-compensation
      "conservative"       param_based with the reference saturation lowered
                           to k_max_prime <= k_max
    """

    variant: str
    k_max_prime: float | None = None

    def __post_init__(self) -> None:
        if self.variant not in ("param_based", "stiffness_as_state", "conservative"):
            raise ValueError(f"unknown controller variant: {self.variant!r}")
        if self.variant == "conservative" and self.k_max_prime is None:
            raise ValueError("conservative controller requires k_max_prime")
        if self.variant != "conservative" and self.k_max_prime is not None:
            raise ValueError("k_max_prime only applies to the conservative variant")

    @property
    def label(self) -> str:
        return self.variant


PARAM_BASED = ControllerKind("param_based")
STIFFNESS_AS_STATE = ControllerKind("stiffness_as_state")


def conservative(k_max_prime: float) -> ControllerKind:
    return ControllerKind("conservative", k_max_prime=k_max_prime)


def validate(params: TaskParams1D) -> TaskParams1D:
    """Check all invariants; return params unchanged if they hold.

    Raises NonPositive for sign violations and DegenerateRange for an empty
    stiffness interval (a non-degenerate range is a precondition of every
    threshold statement downstream).
    """
    for name in ("m", "g", "l0", "v_td", "T", "omega_s", "k_min"):
        value = getattr(params, name)
        if not value > 0.0:
            raise NonPositive(f"{name} must be > 0, got {value}")
    if not params.k_min < params.k_max:
        raise DegenerateRange(
            f"need k_min < k_max, got [{params.k_min}, {params.k_max}]"
        )
    return params


def validate_controller(kind: ControllerKind, params: TaskParams1D) -> ControllerKind:
    """Check controller-specific bounds against the task's stiffness range."""
    if kind.variant == "conservative":
        kp = kind.k_max_prime
        if not (params.k_min <= kp <= params.k_max):
            raise ParameterError(
                f"k_max_prime={kp} outside [{params.k_min}, {params.k_max}]"
            )
    return kind


def derive_constants(params: TaskParams1D) -> DerivedConstants1D:
    """Evaluate the closed-form task constants (no integration involved)."""
    p = validate(params)
    F_const = p.m * (2.0 * p.v_td / p.T + p.g)
    z_crit = F_const / p.k_max
    K_task = p.k_max**2 * p.T**2 / (2.0 * p.m * (p.k_max - p.k_min))
    return DerivedConstants1D(
        F_const=F_const, z_crit=z_crit, K_task=K_task, alpha_crit=K_task
    )
