"""IMEX time stepping of the mechanical/thermal perturbation system.

Unknowns are ``rho``, ``q = rho_t`` and the temperature perturbation
``theta``.  Viscosity, capillarity and conduction are implicit; the stress
bracket (linear wave part, nonlinearities, thermal coupling) is explicit.

The scheme is the two-stage, second-order additive Runge-Kutta pair
ARS(2,2,2): an L-stable SDIRK for the stiff part so that high-frequency
capillary/viscous modes are damped rather than reflected at amplitude one
the way Crank-Nicolson would.  Both implicit stages share one matrix, so the
pentadiagonal (rho, q) solve and the tridiagonal heat solve are factored
once per ``dt``.  Thermal sources depend only on ``q`` and are placed on the
implicit tableau, which means each thermal stage sees the freshly solved
``q`` of the same stage (Gauss-Seidel coupling) at no extra cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .errors import BlowUp, LinearSolveFailure
from .grid import Grid, face_average, face_gradient, flux_divergence, spatial_derivative
from .model import PhysParams
from .wave import Background, WaveProfile, sample_background

__all__ = [
    "State",
    "Forcing",
    "mech_flux",
    "mech_rhs",
    "thermal_source",
    "thermal_rhs",
    "stable_dt",
    "ImexStepper",
    "imex_step",
    "background_sampler",
]

ARS_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
ARS_DELTA = 1.0 - 1.0 / (2.0 * ARS_GAMMA)


@dataclass(frozen=True)
class State:
    t: float
    rho: np.ndarray
    rho_t: np.ndarray
    theta_pert: np.ndarray
    step: int = 0

    def copy(self) -> "State":
        return replace(self, rho=self.rho.copy(), rho_t=self.rho_t.copy(), theta_pert=self.theta_pert.copy())

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "State":
        return cls(t, grid.zeros(), grid.zeros(), grid.zeros())


@dataclass
class Forcing:
    """Additive sources ``(x, t, background) -> array`` for manufactured-solution runs."""

    mech: Callable | None = None
    thermal: Callable | None = None


def background_sampler(profile: WaveProfile, grid: Grid) -> Callable[[float], Background]:
    if profile.is_constant:
        frozen = sample_background(profile, grid, 0.0)
        return lambda t: frozen
    return lambda t: sample_background(profile, grid, t)


def mech_flux(rho, theta, bg: Background, p: PhysParams, grid: Grid) -> np.ndarray:
    """Perturbation stress on the faces between nodes."""
    rx = face_gradient(rho, grid)
    u = bg.uprime_faces
    return (1.0 - 3.0 * u * u) * rx - rx**3 - 3.0 * u * rx * rx - p.gamma * face_average(theta)


def mech_rhs(state: State, bg: Background, p: PhysParams, grid: Grid) -> np.ndarray:
    """Full acceleration ``rho_tt`` of the momentum perturbation equation."""
    div = flux_divergence(mech_flux(state.rho, state.theta_pert, bg, p, grid), grid)
    return (
        div
        + p.epsilon * spatial_derivative(state.rho_t, 2, grid)
        - p.delta * spatial_derivative(state.rho, 4, grid)
    )


def thermal_source(rho_t, bg: Background, p: PhysParams, grid: Grid) -> np.ndarray:
    a = spatial_derivative(rho_t, 1, grid)
    return p.epsilon * a * a - p.gamma * p.theta0 * a + 2.0 * p.epsilon * bg.W * a + bg.S0


def thermal_rhs(state: State, bg: Background, p: PhysParams, grid: Grid) -> np.ndarray:
    return p.kappa * spatial_derivative(state.theta_pert, 2, grid) + thermal_source(state.rho_t, bg, p, grid)


def stable_dt(grid: Grid, p: PhysParams, safety: float = 0.5, M_U: float = 0.0, amplitude_margin: float = 0.1) -> float:
    """Hyperbolic CFL bound for the explicit stress bracket.

    The implicit part removes all ``dx**-2`` and ``dx**-4`` restrictions, so
    only the frozen-coefficient wave speed ``sqrt(1 + 3*M_U**2 + margin)``
    limits the step.
    """
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    c_max = math.sqrt(1.0 + 3.0 * M_U**2 + amplitude_margin)
    return safety * grid.dx / c_max


def _banded_upper(diagonals: list[np.ndarray]) -> np.ndarray:
    """Upper banded storage for ``cholesky_banded`` from [main, super1, super2...]."""
    n = diagonals[0].size
    u = len(diagonals) - 1
    ab = np.zeros((u + 1, n))
    for k, d in enumerate(diagonals):
        ab[u - k, k:] = d
    return ab


class ImexStepper:
    """Fixed-``dt`` ARS(2,2,2) stepper with cached banded Cholesky factors."""

    def __init__(
        self,
        grid: Grid,
        p: PhysParams,
        dt: float,
        background: Callable[[float], Background],
        forcing: Forcing | None = None,
        amplitude_cap: float = 1e6,
    ):
        self.grid = grid
        self.p = p
        self.dt = float(dt)
        self.background = background
        self.forcing = forcing or Forcing()
        self.amplitude_cap = amplitude_cap
        self._factor()

    def _factor(self):
        n, dx, p = self.grid.n, self.grid.dx, self.p
        h = ARS_GAMMA * self.dt
        c2 = h * p.epsilon / dx**2
        c4 = h * h * p.delta / dx**4
        main = 1.0 + 2.0 * c2 + 6.0 * c4 * np.ones(n)
        main[0] -= c4
        main[-1] -= c4
        mech = _banded_upper([main, np.full(n - 1, -c2 - 4.0 * c4), np.full(n - 2, c4)])
        k2 = h * p.kappa / dx**2
        heat = _banded_upper([np.full(n, 1.0 + 2.0 * k2), np.full(n - 1, -k2)])
        try:
            self._mech_factor = cholesky_banded(mech)
            self._heat_factor = cholesky_banded(heat)
        except LinAlgError as exc:
            raise LinearSolveFailure(f"implicit operator is singular for dt = {self.dt:g}: {exc}") from exc

    def _d2(self, f):
        return spatial_derivative(f, 2, self.grid)

    def _d4(self, f):
        return spatial_derivative(f, 4, self.grid)

    def _explicit_mech(self, rho, theta, t, bg):
        out = flux_divergence(mech_flux(rho, theta, bg, self.p, self.grid), self.grid)
        if self.forcing.mech is not None:
            out = out + self.forcing.mech(self.grid.x, t, bg)
        return out

    def _thermal_source(self, q, t, bg):
        out = thermal_source(q, bg, self.p, self.grid)
        if self.forcing.thermal is not None:
            out = out + self.forcing.thermal(self.grid.x, t, bg)
        return out

    def _solve_mech(self, r_rho, r_q):
        h = ARS_GAMMA * self.dt
        rhs = r_q - h * self.p.delta * self._d4(r_rho)
        q = cho_solve_banded((self._mech_factor, False), rhs)
        return r_rho + h * q, q

    def _solve_heat(self, rhs):
        return cho_solve_banded((self._heat_factor, False), rhs)

    def step(self, state: State) -> State:
        p, dt, a, d = self.p, self.dt, ARS_GAMMA, ARS_DELTA
        t = state.t
        rho, q, th = state.rho, state.rho_t, state.theta_pert

        bg1 = self.background(t)
        n1 = self._explicit_mech(rho, th, t, bg1)

        t2 = t + a * dt
        bg2 = self.background(t2)
        rho2, q2 = self._solve_mech(rho, q + a * dt * n1)
        s2 = self._thermal_source(q2, t2, bg2)
        th2 = self._solve_heat(th + a * dt * s2)

        n2 = self._explicit_mech(rho2, th2, t2, bg2)
        lq2 = p.epsilon * self._d2(q2) - p.delta * self._d4(rho2)
        lt2 = p.kappa * self._d2(th2)

        step = state.step + 1
        t3 = step * dt if state.step * dt == t else t + dt
        bg3 = self.background(t3)
        rho3, q3 = self._solve_mech(
            rho + (1.0 - a) * dt * q2,
            q + dt * (d * n1 + (1.0 - d) * n2) + (1.0 - a) * dt * lq2,
        )
        s3 = self._thermal_source(q3, t3, bg3)
        th3 = self._solve_heat(th + (1.0 - a) * dt * (lt2 + s2) + a * dt * s3)

        new = State(t3, rho3, q3, th3, step)
        self._guard(new)
        return new

    def _guard(self, s: State):
        for name in ("rho", "rho_t", "theta_pert"):
            arr = getattr(s, name)
            peak = np.max(np.abs(arr))
            if not np.isfinite(peak) or peak > self.amplitude_cap:
                raise BlowUp(f"{name} reached {peak:.3g} at t = {s.t:.6g} (cap {self.amplitude_cap:g})")


def imex_step(state: State, dt: float, background, p: PhysParams, grid: Grid, forcing: Forcing | None = None) -> State:
    """One ARS(2,2,2) step; ``background`` is a profile or a ``t -> Background`` callable."""
    if isinstance(background, WaveProfile):
        background = background_sampler(background, grid)
    return ImexStepper(grid, p, dt, background, forcing).step(state)
