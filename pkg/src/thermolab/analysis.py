"""Post-processing of energy series: decay fits, Bernoulli slope, bounds, and
the difference functional between two runs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonPositiveValues, TooFewPoints
from .model import PhysParams

__all__ = [
    "DecayFit",
    "BernoulliFit",
    "BoundCheck",
    "DiffRecord",
    "fit_power_decay",
    "bernoulli_alpha",
    "theta_bound_check",
    "lambda_functional",
    "lambda_difference",
    "analyze_series",
    "DEFAULT_T_START",
]

DEFAULT_T_START = 1.0


@dataclass
class DecayFit:
    exponent: float
    C16_hat: float
    r2: float
    fit_window: tuple[float, float]
    alpha_hat: float | None = None


@dataclass
class BernoulliFit:
    alpha_hat: float
    min_dpsi_dt: float
    n_points: int


@dataclass
class BoundCheck:
    passed: bool
    worst_margin: float


@dataclass
class DiffRecord:
    t: float
    lam: float


def _window(t, values, window):
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window if window is not None else (-np.inf, np.inf)
    mask = (t >= lo) & (t <= hi)
    return t[mask], values[mask]


def fit_power_decay(t, values, window=(DEFAULT_T_START, math.inf), min_points: int = 10) -> DecayFit:
    """Least-squares slope of ``log(value)`` against ``log(1 + t)``.

    ``C16_hat`` is the empirical supremum of ``value * (1 + t)`` on the
    window, not the regression intercept.
    """
    tw, vw = _window(t, values, window)
    if tw.size < min_points:
        raise TooFewPoints(f"{tw.size} points in window {window}, need {min_points}")
    if np.any(vw <= 0) or not np.all(np.isfinite(vw)):
        raise NonPositiveValues("power-law fit needs strictly positive finite values")
    X = np.log1p(tw)
    Y = np.log(vw)
    slope, intercept = np.polyfit(X, Y, 1)
    pred = slope * X + intercept
    ss_res = float(np.sum((Y - pred) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    c16 = float(np.max(vw * (1.0 + tw)))
    return DecayFit(float(slope), c16, r2, (float(tw[0]), float(tw[-1])))


def bernoulli_alpha(t, calE, window=(DEFAULT_T_START, math.inf), min_points: int = 3) -> BernoulliFit:
    """Slope of ``psi = 1/calE`` in time and the smallest discrete ``dpsi/dt``.

    Records with ``calE <= 0`` are dropped before fitting.
    """
    tw, ew = _window(t, calE, window)
    keep = ew > 0
    tw, ew = tw[keep], ew[keep]
    if tw.size < min_points:
        raise TooFewPoints(f"{tw.size} positive-energy points in window, need {min_points}")
    psi = 1.0 / ew
    alpha = float(np.polyfit(tw, psi, 1)[0])
    dpsi = np.gradient(psi, tw, edge_order=2)
    return BernoulliFit(alpha, float(dpsi.min()), int(tw.size))


def theta_bound_check(t, l2_theta_sq, C16_hat: float, window=(DEFAULT_T_START, math.inf), rtol: float = 1e-12) -> BoundCheck:
    """Check ``||Theta||^2 <= 2*C16/(1+t)`` and report the smallest relative slack."""
    tw, vw = _window(t, l2_theta_sq, window)
    if tw.size == 0:
        return BoundCheck(True, math.inf)
    bound = 2.0 * C16_hat / (1.0 + tw)
    with np.errstate(divide="ignore", invalid="ignore"):
        slack = np.where(bound > 0, (bound - vw) / bound, np.where(vw <= 0, 1.0, -np.inf))
    worst = float(slack.min())
    return BoundCheck(worst >= -rtol, worst)


def _dx_edge(f: np.ndarray, dx: float) -> np.ndarray:
    return np.gradient(f, dx, edge_order=1)


def _dxx_edge(f: np.ndarray, dx: float) -> np.ndarray:
    inner = np.diff(f, 2) / dx**2
    return np.concatenate([inner[:1], inner, inner[-1:]])


def lambda_functional(w, w_t, phi, dx: float, M_U: float, p: PhysParams) -> float:
    """Difference energy of two solutions from their nodal differences.

    Derivatives use one-sided end stencils (no zero ghost), so a spatially
    constant difference in ``rho`` carries no strain energy.
    """
    wx = _dx_edge(w, dx)
    wxx = _dxx_edge(w, dx)
    q = lambda f: float(dx * np.sum(f * f))  # noqa: E731
    return 0.5 * q(w_t) + 0.5 * (1.0 - 3.0 * M_U**2) * q(wx) + 0.5 * p.delta * q(wxx) + 0.5 * q(phi)


def lambda_difference(run_a, run_b, M_U: float, p: PhysParams, grid) -> list[DiffRecord]:
    """``Lambda(t)`` between two snapshot sequences on the same grid and times."""
    run_a, run_b = list(run_a), list(run_b)
    if len(run_a) != len(run_b):
        raise GridMismatch(f"runs have {len(run_a)} and {len(run_b)} snapshots")
    out = []
    for sa, sb in zip(run_a, run_b):
        if sa.rho.shape != sb.rho.shape or sa.rho.size != grid.n:
            raise GridMismatch(f"snapshot shapes {sa.rho.shape} and {sb.rho.shape} do not match n = {grid.n}")
        if sa.t != sb.t:
            raise GridMismatch(f"snapshot times {sa.t!r} and {sb.t!r} differ")
        lam = lambda_functional(sa.rho - sb.rho, sa.rho_t - sb.rho_t, sa.theta_pert - sb.theta_pert, grid.dx, M_U, p)
        out.append(DiffRecord(sa.t, lam))
    return out


def analyze_series(t, l2_theta_sq, calE, window=(DEFAULT_T_START, math.inf)) -> dict:
    """Decay report with keys exponent, c16, alpha, r2, theta_bound_pass, bernoulli_positive."""
    t = np.asarray(t, dtype=float)
    l2 = np.asarray(l2_theta_sq, dtype=float)
    calE = np.asarray(calE, dtype=float)
    report = {"exponent": None, "c16": None, "alpha": None, "r2": None, "theta_bound_pass": None, "bernoulli_positive": None}

    try:
        theta_fit = fit_power_decay(t, l2, window)
        report["exponent"] = theta_fit.exponent
        report["r2"] = theta_fit.r2
    except (TooFewPoints, NonPositiveValues):
        theta_fit = None

    try:
        c16 = fit_power_decay(t, calE, window).C16_hat
    except (TooFewPoints, NonPositiveValues):
        if theta_fit is not None:
            c16 = theta_fit.C16_hat / 2.0
        else:
            _, vw = _window(t, l2, window)
            c16 = 0.0 if vw.size and not vw.any() else None
    report["c16"] = c16
    # without a fitted constant the bound is undetermined, not violated
    if c16 is not None:
        report["theta_bound_pass"] = theta_bound_check(t, l2, c16, window).passed

    try:
        bern = bernoulli_alpha(t, calE, window)
        report["alpha"] = bern.alpha_hat
        report["bernoulli_positive"] = bern.min_dpsi_dt > 0
    except TooFewPoints:
        pass
    return report
