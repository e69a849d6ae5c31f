"""Energy functionals of the perturbation in exponentially rescaled variables.

The mechanical perturbation is monitored through ``v = exp(-t/eps) * rho``.
Exponential weights are handled in log space; a record whose growth factor
leaves the float range is saturated and flagged instead of turning into
``inf``/``nan``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InsufficientWindow, OverflowGuard
from .grid import Grid, integrate, quadrature_norm, spatial_derivative
from .integrator import State
from .model import PhysParams
from .wave import Background

__all__ = [
    "VState",
    "EnergyRecord",
    "SERIES_COLUMNS",
    "to_v",
    "to_rho",
    "compute_record",
    "inequality_residual",
]

LOG_MAX = math.log(sys.float_info.max)

SERIES_COLUMNS = (
    "t", "E1", "E2", "calE", "calF", "calG", "D", "l2_theta_sq", "l1_theta",
    "l1_v", "min_abs_temp", "coercive_a", "coercive_b", "dt_used", "overflow_flag",
)


@dataclass(frozen=True)
class VState:
    v: np.ndarray
    v_t: np.ndarray
    t: float


@dataclass
class EnergyRecord:
    t: float
    E1: float
    E2: float
    calE: float
    calF: float
    calG: float
    D: float
    l2_theta_sq: float
    l1_theta: float
    l1_v: float
    min_abs_temp: float
    coercive_a: float
    coercive_b: float
    dt_used: float
    overflow_flag: int = 0
    # components kept for the inequality audit; not part of the series file
    vt_sq: float = 0.0
    vtx_sq: float = 0.0
    theta_x_sq: float = 0.0
    log_E2: float = 0.0
    step: int = 0

    def row(self) -> list:
        return [getattr(self, c) for c in SERIES_COLUMNS]

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def to_v(state: State, p: PhysParams) -> VState:
    w = math.exp(-state.t / p.epsilon)
    return VState(w * state.rho, w * (state.rho_t - state.rho / p.epsilon), state.t)


def to_rho(vs: VState, p: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    g = math.exp(vs.t / p.epsilon)
    rho = g * vs.v
    return rho, g * vs.v_t + rho / p.epsilon


def _weighted_quartic(vx: np.ndarray, log_weight: float, grid: Grid) -> tuple[float, bool]:
    """``integral of exp(log_weight) * vx**4`` without spurious overflow."""
    with np.errstate(divide="ignore"):
        logs = log_weight + 4.0 * np.log(np.abs(vx))
    capped = bool(np.any(logs > LOG_MAX - 30.0))
    terms = np.exp(np.minimum(logs, LOG_MAX - 30.0))
    total = integrate(terms, grid)
    if not math.isfinite(total):
        return sys.float_info.max, True
    return total, capped


def compute_record(
    state: State,
    vstate: VState,
    bg: Background,
    p: PhysParams,
    grid: Grid,
    M_U: float = 0.0,
    dt_used: float = 0.0,
) -> EnergyRecord:
    v, vt, th = vstate.v, vstate.v_t, state.theta_pert
    t, eps = state.t, p.epsilon
    d = lambda f, k: spatial_derivative(f, k, grid)  # noqa: E731
    vx, vxx = d(v, 1), d(v, 2)
    vtx = d(vt, 1)
    thx = d(th, 1)
    u2 = bg.uprime**2

    quartic, flag = _weighted_quartic(vx, 2.0 * t / eps, grid)
    E1 = (
        integrate(v * v / (2 * eps * eps) + vt * vt / 2 + 1.5 * u2 * vx * vx + p.delta / 2 * vxx * vxx, grid)
        + quartic / 4
    )
    log_E2 = math.log((1.0 + 3.0 * M_U) / (2.0 * eps)) + 2.0 * t / eps
    if log_E2 > LOG_MAX:
        E2, flag = sys.float_info.max, True
    else:
        E2 = math.exp(log_E2)

    th_sq = quadrature_norm(th, 2, grid) ** 2
    vt_sq = integrate(vt * vt, grid)
    vtx_sq = integrate(vtx * vtx, grid)
    thx_sq = integrate(thx * thx, grid)
    calF = vtx_sq + p.delta * integrate(d(v, 3) ** 2, grid) + thx_sq
    calG = integrate(d(vt, 2) ** 2, grid) + p.delta * integrate(d(v, 4) ** 2, grid) + integrate(d(th, 2) ** 2, grid)

    return EnergyRecord(
        t=t,
        E1=E1,
        E2=E2,
        calE=E1 + 0.5 * th_sq,
        calF=calF,
        calG=calG,
        D=vt_sq + vtx_sq + thx_sq,
        l2_theta_sq=th_sq,
        l1_theta=quadrature_norm(th, 1, grid),
        l1_v=quadrature_norm(v, 1, grid),
        min_abs_temp=float(np.min(p.theta0 + th)),
        coercive_a=integrate(1.5 * u2 * vx * vx, grid),
        coercive_b=integrate(0.5 * (1.0 - 3.0 * u2) * vx * vx, grid),
        dt_used=dt_used,
        overflow_flag=int(flag),
        vt_sq=vt_sq,
        vtx_sq=vtx_sq,
        theta_x_sq=thx_sq,
        log_E2=log_E2,
        step=state.step,
    )


def _product_log(log_a: float, b: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(b > 0, np.exp(np.minimum(log_a + np.log(np.where(b > 0, b, 1.0)), LOG_MAX)), 0.0)
    return out


def inequality_residual(records, p: PhysParams, C: float = 0.0, K: float | None = None, strict: bool = False) -> dict:
    """Margins of the mechanical and coupled energy inequalities.

    Time derivatives are central differences over the (uniform) recording
    interval, evaluated at the interior records.  A positive margin means the
    inequality holds there.  ``K`` defaults to the smallest non-negative
    constant that makes the coupled inequality hold on the window.
    """
    recs = list(records)
    if len(recs) < 3:
        raise InsufficientWindow(f"need at least 3 records, got {len(recs)}")
    t = np.array([r.t for r in recs])
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ValueError("records must be uniformly spaced in time")
    if strict and any(r.overflow_flag for r in recs):
        raise OverflowGuard("window contains saturated records")

    E1 = np.array([r.E1 for r in recs])
    calE = np.array([r.calE for r in recs])
    inner = slice(1, -1)
    dE1 = (E1[2:] - E1[:-2]) / (t[2:] - t[:-2])
    dcalE = (calE[2:] - calE[:-2]) / (t[2:] - t[:-2])

    logE2 = np.array([r.log_E2 for r in recs])[inner]
    E2E1 = np.array([_product_log(le, np.array([e]))[0] for le, e in zip(logE2, E1[inner])])
    E2calE = np.array([_product_log(le, np.array([e]))[0] for le, e in zip(logE2, calE[inner])])

    vt = np.array([r.vt_sq for r in recs])[inner]
    vtx = np.array([r.vtx_sq for r in recs])[inner]
    thx = np.array([r.theta_x_sq for r in recs])[inner]

    lhs = dE1 + vt / p.epsilon + 0.5 * p.epsilon * vtx
    rhs = E2E1 + p.gamma / p.epsilon * thx
    mech = rhs - lhs

    excess = dcalE - (E2calE + C * calE[inner])
    K_fit = float(max(0.0, excess.max())) if K is None else K
    energy = E2calE + C * calE[inner] + K_fit - dcalE
    return {
        "t": t[inner],
        "mechanical": mech,
        "mechanical_lhs": lhs,
        "mechanical_rhs": rhs,
        "energy": energy,
        "C": C,
        "K": K_fit,
    }
