"""Isothermal traveling-wave profiles and the background fields they induce.

A profile ``w(xi) = U'(xi)`` solves the once-integrated traveling-wave ODE

    delta*w'' + epsilon*s*w' = g(w),
    g(w) = tau(w) - tau(u_minus) - s**2 * (w - u_minus),

which is the reduction of the isothermal momentum equation written in the
same sign convention as the perturbation system integrated by
:mod:`thermolab.integrator`.  Connections are built by shooting along the
one-dimensional unstable (or stable) manifold of whichever end state is a
saddle of this planar system.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import InadmissibleProfile, NoClosedForm, NoConnection
from .grid import Grid
from .model import PhysParams, WaveSpec, rankine_hugoniot_speed

log = logging.getLogger(__name__)

__all__ = [
    "WaveProfile",
    "Background",
    "profile_rhs",
    "reduced_cubic",
    "build_profile",
    "profile_residual",
    "profile_hamiltonian",
    "tanh_compatibility",
    "tanh_reference",
    "sample_background",
    "shoot_manifold",
]

TAIL_TOL = 1e-10


def _tau(w):
    return w - w**3


def reduced_cubic(w, spec: WaveSpec):
    s2 = spec.s**2
    return _tau(w) - _tau(spec.u_minus) - s2 * (w - spec.u_minus)


def _reduced_cubic_slope(w, spec: WaveSpec):
    return 1.0 - 3.0 * w**2 - spec.s**2


def profile_rhs(w, w_prime, spec: WaveSpec, p: PhysParams):
    """Second derivative ``w''`` of the profile at ``(w, w')``."""
    return (reduced_cubic(w, spec) - p.epsilon * spec.s * w_prime) / p.delta


def _primitive(w, spec: WaveSpec):
    # antiderivative of reduced_cubic in w
    s2 = spec.s**2
    um = spec.u_minus
    return w**2 / 2 - w**4 / 4 - _tau(um) * w - s2 * (w**2 / 2 - um * w)


def profile_hamiltonian(w, w_prime, spec: WaveSpec, p: PhysParams):
    """``delta*w'**2/2 - G(w)``; its xi-derivative is ``-epsilon*s*w'**2``."""
    return 0.5 * p.delta * np.asarray(w_prime) ** 2 - (_primitive(np.asarray(w), spec) - _primitive(spec.u_minus, spec))


@dataclass(frozen=True)
class WaveProfile:
    xi: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    spec: WaveSpec
    params: PhysParams
    M_U: float
    K_W: float
    K_S0: float
    residual: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def is_constant(self) -> bool:
        return self.spec.is_constant

    @property
    def half_width(self) -> float:
        return float(self.xi[-1])

    @property
    def admissible(self) -> bool:
        return 3.0 * self.M_U**2 < 1.0

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.xi, self.w, extrapolate=False), PchipInterpolator(self.xi, self.w_prime, extrapolate=False)

    def evaluate(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """``(U', U'')`` at profile coordinates, with constant tails outside the table."""
        xi = np.asarray(xi, dtype=float)
        if self.is_constant:
            return np.full(xi.shape, self.spec.u_minus), np.zeros(xi.shape)
        fw, fwp = self._interp
        w = fw(xi)
        wp = fwp(xi)
        left = xi < self.xi[0]
        right = xi > self.xi[-1]
        if left.any() or right.any():
            log.debug("profile evaluated outside [%g, %g]; using asymptotic tails", self.xi[0], self.xi[-1])
            w[left] = self.spec.u_minus
            w[right] = self.spec.u_plus
            wp[left | right] = 0.0
        return w, wp


def _constant_profile(spec: WaveSpec, p: PhysParams) -> WaveProfile:
    c = spec.u_minus
    return WaveProfile(
        xi=np.array([0.0]),
        w=np.array([c]),
        w_prime=np.array([0.0]),
        spec=spec,
        params=p,
        M_U=abs(c),
        K_W=0.0,
        K_S0=0.0,
    )


def _eigen(slope: float, p: PhysParams, s: float):
    """Roots of delta*lam**2 + epsilon*s*lam - slope = 0 (complex allowed)."""
    a, b, c = p.delta, p.epsilon * s, -slope
    disc = complex(b * b - 4 * a * c)
    r = np.sqrt(disc)
    return (-b + r) / (2 * a), (-b - r) / (2 * a)


def shoot_manifold(start, target_scale, spec: WaveSpec, p: PhysParams, length: float, direction: int = 1, rtol: float = 1e-12, atol: float = 1e-14):
    """Integrate the profile ODE from ``start`` over ``length`` in ``direction``.

    Stops early if the orbit leaves a box of size ``target_scale`` around the
    origin (escape to infinity).  Returns the dense ``solve_ivp`` solution.
    """

    def rhs(_, y):
        return [y[1], profile_rhs(y[0], y[1], spec, p)]

    def escape(_, y):
        return target_scale - abs(y[0])

    escape.terminal = True
    return solve_ivp(
        rhs,
        (0.0, direction * length),
        list(start),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=escape,
    )


def build_profile(
    spec: WaveSpec,
    p: PhysParams,
    tol: float = 1e-10,
    L_w: float | None = None,
    check_admissible: bool = True,
    step: float = 0.01,
    eta: float | None = None,
    residual_tol: float = 1e-6,
) -> WaveProfile:
    """Tabulate the heteroclinic from ``u_minus`` to ``u_plus``.

    Raises :class:`NoConnection` when the end states do not support an orbit
    of the profile ODE and :class:`InadmissibleProfile` when the constructed
    profile violates ``3*M_U**2 < 1`` (only if ``check_admissible``).
    """
    if spec.is_constant:
        return _constant_profile(spec, p)

    um, up, s = spec.u_minus, spec.u_plus, spec.s
    secant = rankine_hugoniot_speed(um, up) ** 2
    if abs(s * s - secant) > max(1e-9, 10 * tol) * max(1.0, secant):
        raise NoConnection(f"s**2 = {s * s:.12g} violates the Rankine-Hugoniot secant {secant:.12g}")
    du = up - um
    eta = 1e-6 * abs(du) if eta is None else eta
    eps_s = p.epsilon * s
    slope_m = _reduced_cubic_slope(um, spec)
    slope_p = _reduced_cubic_slope(up, spec)

    if slope_m > 0:
        saddle, target, direction = um, up, 1
        lam_u = _eigen(slope_m, p, s)[0].real
        if eps_s <= 0:
            raise NoConnection(
                f"u_minus = {um:g} is a saddle but u_plus = {up:g} does not attract the flow for epsilon*s = {eps_s:g} <= 0"
            )
        lam_start = lam_u
        tail_rates = (lam_u, -max(r.real for r in _eigen(slope_p, p, s)))
    elif slope_p > 0:
        saddle, target, direction = up, um, -1
        lam_s = _eigen(slope_p, p, s)[1].real
        if eps_s >= 0:
            raise NoConnection(
                f"u_plus = {up:g} is a saddle but u_minus = {um:g} does not repel the flow for epsilon*s = {eps_s:g} >= 0"
            )
        lam_start = lam_s
        tail_rates = (min(r.real for r in _eigen(slope_m, p, s)), -lam_s)
    else:
        raise NoConnection(
            f"neither end state is a saddle of the profile ODE (g'(u-) = {slope_m:.6g}, g'(u+) = {slope_p:.6g}); "
            "the energy delta*w'^2/2 - G(w) is strictly monotone for epsilon*s != 0, so no orbit joins "
            f"{um:g} to {up:g}"
        )

    if min(tail_rates) <= 0:
        raise NoConnection("end state is not hyperbolic; tails would not decay exponentially")
    if L_w is None:
        L_w = max(math.log(10.0 * abs(du) / TAIL_TOL) / r for r in tail_rates) + 2.0

    sgn = math.copysign(1.0, target - saddle)
    y0 = (saddle + sgn * eta, sgn * eta * lam_start)
    run_in = math.log(abs(du) / eta) / abs(lam_start) + 10.0
    scale = 10.0 * max(abs(um), abs(up), 1.0)
    sol = shoot_manifold(y0, scale, spec, p, run_in + L_w + 5.0, direction)
    if sol.status == 1 and sol.t_events[0].size:
        raise NoConnection(f"shooting orbit escaped to |w| = {scale:g} before reaching {target:g}")
    end = sol.y[:, -1]
    landing = abs(end[0] - target) + abs(end[1])
    if not sol.success or landing > tol:
        raise NoConnection(f"shooting did not land on {target:g} (distance {landing:.3g} > tol {tol:.3g})")

    # phase condition: w = midpoint at xi = 0, first crossing along the orbit
    mid = 0.5 * (um + up)
    ts = sol.t
    vals = sol.y[0] - mid
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        raise NoConnection("orbit never crossed the midpoint strain")
    i = idx[0]
    tau_c = brentq(lambda tt: sol.sol(tt)[0] - mid, ts[i], ts[i + 1], xtol=1e-15, rtol=1e-15)

    xi = np.arange(-round(L_w / step), round(L_w / step) + 1) * step
    # orbit coordinate shifted so that the crossing sits at xi = 0
    tau = tau_c + xi
    w = np.empty_like(xi)
    wp = np.empty_like(xi)
    inside = direction * tau >= 0.0
    if (inside & (np.abs(tau) > abs(ts[-1]))).any():
        raise NoConnection("integration horizon shorter than the requested tabulation half-width")
    yy = sol.sol(tau[inside])
    w[inside], wp[inside] = yy[0], yy[1]
    # before the shooting start the orbit is the linear manifold through the saddle
    e = np.exp(lam_start * tau[~inside])
    w[~inside] = saddle + sgn * eta * e
    wp[~inside] = sgn * eta * lam_start * e

    tail = max(abs(w[0] - um), abs(w[-1] - up), abs(wp[0]), abs(wp[-1]))
    if tail > 100 * TAIL_TOL:
        log.warning("profile tails %.3g exceed %.1g at L_w = %g", tail, TAIL_TOL, L_w)

    res = float(np.max(np.abs(profile_residual(xi, w, wp, spec, p))))
    if res > residual_tol:
        raise NoConnection(f"tabulated profile residual {res:.3g} exceeds {residual_tol:.3g}")

    M_U = _refined_max(xi, w, wp, spec, p)
    upp = wp
    K_W = abs(s) * float(np.max(np.abs(upp)))
    l4 = (step * np.sum(upp**4)) ** 0.5
    l2 = (step * np.sum(upp**2)) ** 0.5
    K_S0 = p.epsilon * s * s * l4 + p.gamma * p.theta0 * abs(s) * l2

    prof = WaveProfile(
        xi=xi,
        w=w,
        w_prime=wp,
        spec=spec,
        params=p,
        M_U=M_U,
        K_W=K_W,
        K_S0=K_S0,
        residual=res,
        meta={"eta": eta, "L_w": float(xi[-1]), "step": step, "tail": tail, "landing": landing},
    )
    if check_admissible and not prof.admissible:
        raise InadmissibleProfile(f"3*M_U**2 = {3 * M_U**2:.6g} >= 1 (M_U = {M_U:.6g})")
    return prof


def _refined_max(xi, w, wp, spec, p) -> float:
    """Max |U'| with one Newton step on U'' = 0 near an interior discrete maximum."""
    a = np.abs(w)
    i = int(np.argmax(a))
    if 0 < i < len(w) - 1 and np.sign(wp[i - 1]) != np.sign(wp[i + 1]):
        wpp = profile_rhs(w[i], wp[i], spec, p)
        if wpp != 0.0:
            d = -wp[i] / wpp
            return float(abs(w[i] + wp[i] * d + 0.5 * wpp * d * d))
    return float(a[i])


def profile_residual(xi, w, wp, spec: WaveSpec, p: PhysParams) -> np.ndarray:
    """Pointwise residual of the tabulated profile in the integrated ODE.

    ``w''`` comes from a fourth-order finite difference of the tabulated
    ``w'`` column, so the check does not reuse the integrator.  The first
    column is also checked against the derivative of ``w``.
    """
    h = xi[1] - xi[0]
    d = lambda f: (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)  # noqa: E731
    wpp = d(wp)
    inner = slice(2, -2)
    r_ode = p.delta * wpp + p.epsilon * spec.s * wp[inner] - reduced_cubic(w[inner], spec)
    r_first = d(w) - wp[inner]
    return np.maximum(np.abs(r_ode), np.abs(r_first))


def tanh_compatibility(delta: float, u_plus: float) -> tuple[float, float]:
    """Width ``k**2`` and ``epsilon*s`` forced by ``w = u_plus*tanh(k*xi)``.

    Matching powers of ``w`` after substitution into the integrated ODE
    with symmetric end states ``-a, a`` gives ``2*delta*k**2/a**2 = -1``
    (cubic term), ``epsilon*s*k = 0`` (quadratic term) and
    ``-2*delta*k**2 = 1 - s**2 = a**2`` (linear term).
    """
    a = u_plus
    return -(a * a) / (2.0 * delta), 0.0


def tanh_reference(p: PhysParams, u_minus: float, u_plus: float):
    """Closed-form ``u_plus*tanh(k*xi)`` profile, if the ansatz admits a real width."""
    if u_minus != -u_plus:
        raise ValueError("tanh reference needs symmetric end strains u_plus = -u_minus")
    k2, eps_s = tanh_compatibility(p.delta, u_plus)
    if not k2 > 0:
        raise NoClosedForm(
            f"tanh ansatz requires k**2 = {k2:.6g} <= 0 (with epsilon*s = {eps_s:g}); "
            "the cubic coefficient of the reduced stress has the wrong sign for a real width"
        )
    k = math.sqrt(k2)
    s = eps_s / p.epsilon
    return WaveSpec(u_minus, u_plus, s), (lambda xi: u_plus * np.tanh(k * np.asarray(xi)))


@dataclass(frozen=True)
class Background:
    """Background fields on the nodes (and ``U'`` on the faces) at one time."""

    t: float
    uprime: np.ndarray
    usecond: np.ndarray
    W: np.ndarray
    S0: np.ndarray
    uprime_faces: np.ndarray


def sample_background(profile: WaveProfile, grid: Grid, t: float) -> Background:
    s = profile.spec.s
    p = profile.params
    w, wp = profile.evaluate(grid.x - s * t)
    wf, _ = profile.evaluate(grid.x_faces - s * t)
    W = -s * wp
    S0 = p.epsilon * s * s * wp**2 + p.gamma * p.theta0 * s * wp
    return Background(t=t, uprime=w, usecond=wp, W=W, S0=S0, uprime_faces=wf)
