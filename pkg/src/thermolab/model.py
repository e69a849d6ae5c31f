"""Physical constants, the constitutive law and admissibility arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EqualStates, ImaginarySpeed

__all__ = [
    "PhysParams",
    "WaveSpec",
    "InitialData",
    "ConditionResult",
    "ValidationReport",
    "stress",
    "stress_slope",
    "rankine_hugoniot_speed",
    "validate_params",
]


@dataclass(frozen=True)
class PhysParams:
    """Viscosity, capillarity, conductivity, coupling and reference temperature."""

    epsilon: float
    delta: float
    kappa: float
    gamma: float
    theta0: float

    def __post_init__(self):
        for name in ("epsilon", "delta", "kappa", "gamma", "theta0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite number, got {value!r}")

    @property
    def is_valid(self) -> bool:
        return validate_params(self).passed

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "theta0": self.theta0,
        }


@dataclass(frozen=True)
class WaveSpec:
    """Asymptotic strains of the background and its signed speed.

    Equal end strains describe a constant background; the speed is then
    stored as 0.
    """

    u_minus: float
    u_plus: float
    s: float = 0.0

    def __post_init__(self):
        if self.u_minus == self.u_plus and self.s != 0.0:
            object.__setattr__(self, "s", 0.0)

    @property
    def is_constant(self) -> bool:
        return self.u_minus == self.u_plus

    @classmethod
    def constant(cls, u: float) -> "WaveSpec":
        return cls(u, u, 0.0)

    @classmethod
    def from_end_states(cls, u_minus: float, u_plus: float, sign: int = 1) -> "WaveSpec":
        if u_minus == u_plus:
            return cls.constant(u_minus)
        speed = rankine_hugoniot_speed(u_minus, u_plus)
        return cls(u_minus, u_plus, math.copysign(speed, sign))


@dataclass
class InitialData:
    """Initial perturbation fields on the interior nodes of a grid."""

    rho0: np.ndarray
    rho0_t: np.ndarray
    phi: np.ndarray

    def check(self, theta0: float, far_field_tol: float = 1e-8) -> list[str]:
        """Return the list of violated invariants (empty when valid)."""
        problems = []
        for name in ("rho0", "rho0_t", "phi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                problems.append(f"{name} contains non-finite values")
                continue
            edge = max(abs(arr[0]), abs(arr[-1]))
            if edge > far_field_tol:
                problems.append(
                    f"{name} does not decay at the domain boundary "
                    f"(|value| = {edge:.3g} > {far_field_tol:.3g})"
                )
        phi = np.asarray(self.phi, dtype=float)
        if np.any(phi <= -theta0):
            problems.append(f"phi must stay above -theta0 = {-theta0:g} (min {phi.min():.6g})")
        return problems


def stress(w, theta, p: PhysParams):
    """Cubic Ginzburg-Landau stress ``w - w**3 - gamma*(theta - theta0)``."""
    return w - w**3 - p.gamma * (theta - p.theta0)


def stress_slope(w):
    """Isothermal derivative d(stress)/dw = 1 - 3 w**2."""
    return 1.0 - 3.0 * w**2


def _iso_stress(w: float) -> float:
    return w - w**3


def rankine_hugoniot_speed(u_minus: float, u_plus: float) -> float:
    """Magnitude of the wave speed from the isothermal stress secant.

    The sign is left to the caller.
    """
    if u_minus == u_plus:
        raise EqualStates(f"end strains coincide ({u_minus!r}); no wave speed is defined")
    s2 = (_iso_stress(u_plus) - _iso_stress(u_minus)) / (u_plus - u_minus)
    if s2 < 0.0:
        raise ImaginarySpeed(
            f"secant slope of the stress between {u_minus:g} and {u_plus:g} is "
            f"{s2:.6g} < 0; no real-speed wave"
        )
    return math.sqrt(s2)


@dataclass
class ConditionResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class ValidationReport:
    conditions: list[ConditionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failures(self) -> list[ConditionResult]:
        return [c for c in self.conditions if not c.passed]

    def lines(self) -> list[str]:
        out = []
        for c in self.conditions:
            flag = "PASS" if c.passed else "FAIL"
            out.append(f"{flag} {c.name}: margin {c.margin:+.6g} ({c.detail})")
        return out


def validate_params(p: PhysParams) -> ValidationReport:
    """Positivity plus the three coupling conditions, each with its margin.

    Margins are ``bound - value`` so that a negative margin is a failure and
    sweep tooling can sort by closeness to the boundary.
    """
    conds = []
    smallest = min(p.epsilon, p.delta, p.kappa, p.gamma, p.theta0)
    conds.append(ConditionResult("positivity", smallest > 0, smallest, "min of epsilon, delta, kappa, gamma, theta0 > 0"))

    ge2 = p.gamma * p.epsilon**2
    conds.append(ConditionResult("gamma*epsilon^2 <= 4", ge2 <= 4.0, 4.0 - ge2, f"gamma*epsilon^2 = {ge2:.6g}"))

    half = p.kappa * p.epsilon / 2.0
    conds.append(ConditionResult("gamma <= kappa*epsilon/2", p.gamma <= half, half - p.gamma, f"kappa*epsilon/2 = {half:.6g}"))

    conds.append(ConditionResult("gamma <= 1", p.gamma <= 1.0, 1.0 - p.gamma, f"gamma = {p.gamma:.6g}"))
    return ValidationReport(conds)
