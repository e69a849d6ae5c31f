"""Independent oracles for the solver.

* closed-form heat evolution of a Gaussian,
* manufactured solutions with symbolically derived forcing,
* grid-refinement convergence studies and the difference functional between
  consecutive resolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .analysis import lambda_functional
from .config import RunConfig
from .errors import NonMonotoneErrors
from .grid import Grid, quadrature_norm
from .integrator import Forcing, ImexStepper, State, background_sampler
from .model import PhysParams, WaveSpec
from .simulation import build_background, simulate
from .wave import Background, WaveProfile, build_profile

__all__ = [
    "heat_oracle",
    "ManufacturedPair",
    "sech2_pair",
    "zero_pair",
    "ConvergenceRow",
    "mms_convergence",
    "run_manufactured",
    "prolong",
    "UniquenessStudy",
    "refinement_uniqueness",
]


def heat_oracle(amplitude: float, sigma: float, kappa: float, t) -> np.ndarray | float:
    """``||Theta(t)||^2`` on the line for ``Theta(0) = A exp(-x^2 / (2 sigma^2))``.

    The solution stays Gaussian with variance ``sigma^2 + 2 kappa t`` and
    amplitude ``A sigma / sqrt(sigma^2 + 2 kappa t)``.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = amplitude**2 * sigma**2 * math.sqrt(math.pi) / np.sqrt(sigma**2 + 2.0 * kappa * t)
    return float(out) if out.ndim == 0 else out


_X, _T = sp.symbols("x t", real=True)


def _vectorize(expr):
    f = sp.lambdify((_X, _T), expr, modules="numpy")
    return lambda x, t: np.broadcast_to(np.asarray(f(x, t), dtype=float), np.shape(x)).copy()


@dataclass(frozen=True)
class ManufacturedPair:
    """Exact ``(rho*, Theta*)`` as sympy expressions in ``x`` and ``t``."""

    name: str
    rho: sp.Expr
    theta: sp.Expr

    @cached_property
    def _funcs(self):
        r, th = self.rho, self.theta
        d = sp.diff
        exprs = {
            "rho": r,
            "rho_t": d(r, _T),
            "rho_x": d(r, _X),
            "rho_xx": d(r, _X, 2),
            "rho_tt": d(r, _T, 2),
            "rho_xt": d(r, _X, _T),
            "rho_xxt": d(r, _X, 2, _T),
            "rho_xxxx": d(r, _X, 4),
            "theta": th,
            "theta_t": d(th, _T),
            "theta_x": d(th, _X),
            "theta_xx": d(th, _X, 2),
        }
        return {k: _vectorize(sp.simplify(v)) for k, v in exprs.items()}

    def field(self, name: str, x, t: float) -> np.ndarray:
        return self._funcs[name](np.asarray(x, dtype=float), t)

    def exact(self, grid: Grid, t: float, step: int = 0) -> State:
        x = grid.x
        return State(t, self.field("rho", x, t), self.field("rho_t", x, t), self.field("theta", x, t), step)

    def forcing(self, p: PhysParams) -> Forcing:
        """Residual sources that make this pair an exact solution.

        The stress divergence is expanded with the background's ``U'`` and
        ``U''``, so the same forcing is valid on traveling backgrounds.
        """
        f = self.field

        def mech(x, t, bg: Background):
            u, us = bg.uprime, bg.usecond
            rx, rxx = f("rho_x", x, t), f("rho_xx", x, t)
            div = (
                (1.0 - 3.0 * u * u) * rxx
                - 6.0 * u * us * rx
                - 3.0 * rx * rx * rxx
                - 3.0 * us * rx * rx
                - 6.0 * u * rx * rxx
                - p.gamma * f("theta_x", x, t)
            )
            return f("rho_tt", x, t) - div - p.epsilon * f("rho_xxt", x, t) + p.delta * f("rho_xxxx", x, t)

        def thermal(x, t, bg: Background):
            a = f("rho_xt", x, t)
            source = p.epsilon * a * a - p.gamma * p.theta0 * a + 2.0 * p.epsilon * bg.W * a + bg.S0
            return f("theta_t", x, t) - p.kappa * f("theta_xx", x, t) - source

        return Forcing(mech=mech, thermal=thermal)


def sech2_pair() -> ManufacturedPair:
    g = sp.exp(-_T) * sp.sech(_X) ** 2
    return ManufacturedPair("sech2", g, g)


def zero_pair() -> ManufacturedPair:
    return ManufacturedPair("zero", sp.Integer(0), sp.Integer(0))


@dataclass
class ConvergenceRow:
    level: int
    dx: float
    dt: float
    err_rho: float
    err_theta: float
    order_rho: float | None = None
    order_theta: float | None = None


def run_manufactured(pair: ManufacturedPair, p: PhysParams, grid: Grid, dt: float, t_end: float, profile: WaveProfile) -> State:
    """Integrate from the exact initial state to ``t_end`` with the pair's forcing."""
    n = round(t_end / dt)
    if not math.isclose(n * dt, t_end, rel_tol=1e-9):
        raise ValueError(f"t_end = {t_end} is not a multiple of dt = {dt}")
    stepper = ImexStepper(grid, p, dt, background_sampler(profile, grid), pair.forcing(p))
    state = pair.exact(grid, 0.0)
    for _ in range(n):
        state = stepper.step(state)
    return state


def _order(prev: float, cur: float, ratio: float) -> float | None:
    if prev == 0.0 and cur == 0.0:
        return math.inf
    if prev <= 0.0 or cur <= 0.0:
        return None
    return math.log(prev / cur) / math.log(ratio)


def mms_convergence(
    pair: ManufacturedPair,
    p: PhysParams,
    levels: int = 3,
    mode: str = "space",
    L: float = 12.0,
    n0: int = 199,
    t_end: float = 0.5,
    dt0: float | None = None,
    n_time: int = 3199,
    dt_time0: float = 0.05,
    profile: WaveProfile | None = None,
) -> list[ConvergenceRow]:
    """Observed orders under dx-halving (``mode="space"``) or dt-halving (``"time"``).

    Space: grids ``n0, 2*n0+1, ...`` with ``dt`` halved alongside ``dx``
    (starting near ``dt0``, default ``dx``); errors are discrete L2 norms at
    ``t_end`` against the pair sampled on the grid.

    Time: fixed grid of ``n_time`` nodes, ``dt`` halved from ``dt_time0``.
    The spatial error on that grid is far larger than the temporal one, so
    errors are measured against a run on the same grid with ``dt`` sixteen
    times smaller than the finest level; this cancels the spatial part
    exactly and leaves the time-stepping error.
    """
    if levels < 3:
        raise ValueError(f"a convergence study needs at least 3 levels, got {levels}")
    if mode not in ("space", "time"):
        raise ValueError(f"mode must be 'space' or 'time', got {mode!r}")
    profile = profile or build_profile(WaveSpec.constant(0.0), p)

    if mode == "space":
        grid = Grid(L, n0)
        steps = max(1, math.ceil(t_end / (dt0 if dt0 is not None else grid.dx)))
        reference = None
    else:
        grid = Grid(L, n_time)
        steps = max(1, round(t_end / dt_time0))
        fine = steps * 2 ** (levels - 1) * 16
        reference = run_manufactured(pair, p, grid, t_end / fine, t_end, profile)

    rows: list[ConvergenceRow] = []
    for level in range(levels):
        dt = t_end / steps
        state = run_manufactured(pair, p, grid, dt, t_end, profile)
        ref = reference if reference is not None else pair.exact(grid, t_end)
        err_r = quadrature_norm(state.rho - ref.rho, 2, grid)
        err_t = quadrature_norm(state.theta_pert - ref.theta_pert, 2, grid)
        row = ConvergenceRow(level, grid.dx, dt, err_r, err_t)
        if rows:
            prev = rows[-1]
            for name in ("rho", "theta"):
                e_prev, e_cur = getattr(prev, f"err_{name}"), getattr(row, f"err_{name}")
                if e_prev > 0 and e_cur >= e_prev:
                    raise NonMonotoneErrors(
                        f"{name} error did not decrease from level {prev.level} to {level}: {e_prev:.3e} -> {e_cur:.3e}"
                    )
            ratio = prev.dx / row.dx if mode == "space" else prev.dt / row.dt
            row.order_rho = _order(prev.err_rho, err_r, ratio)
            row.order_theta = _order(prev.err_theta, err_t, ratio)
        rows.append(row)
        if mode == "space":
            grid = grid.refined()
        steps *= 2
    return rows


def prolong(values: np.ndarray, coarse: Grid, fine: Grid) -> np.ndarray:
    """Cubic-spline transfer of nodal values using the zero boundary data at ``+-L``."""
    x = np.concatenate([[-coarse.L], coarse.x, [coarse.L]])
    y = np.concatenate([[0.0], values, [0.0]])
    return CubicSpline(x, y)(fine.x)


@dataclass
class UniquenessStudy:
    grids: list[Grid]
    lam: list[float]  # Lambda between level k (prolonged) and level k+1
    ratios: list[float]
    finals: list[State]


def refinement_uniqueness(config: RunConfig, levels: int = 3, profile: WaveProfile | None = None) -> UniquenessStudy:
    """Final-time difference functional between consecutive resolutions.

    Each level samples the configured initial shapes on its own grid and
    takes its own CFL step, so the step schedules differ between levels.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    profile = profile or build_background(config)
    grids = [config.grid]
    for _ in range(levels - 1):
        grids.append(grids[-1].refined())
    finals = [simulate(replace(config, grid=g), profile=profile).final for g in grids]

    lam = []
    for (gc, sc), (gf, sf) in zip(zip(grids, finals), zip(grids[1:], finals[1:])):
        w = prolong(sc.rho, gc, gf) - sf.rho
        wt = prolong(sc.rho_t, gc, gf) - sf.rho_t
        ph = prolong(sc.theta_pert, gc, gf) - sf.theta_pert
        lam.append(lambda_functional(w, wt, ph, gf.dx, profile.M_U, config.params))
    ratios = [a / b if b > 0 else math.inf for a, b in zip(lam, lam[1:])]
    return UniquenessStudy(grids, lam, ratios, finals)
