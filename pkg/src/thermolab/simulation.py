"""Run orchestration: background, initial data, time loop, records, snapshots."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .energy import EnergyRecord, compute_record, to_v
from .errors import ConfigError, DomainTooSmall, PositivityViolation, ThermolabError
from .grid import Grid
from .integrator import Forcing, ImexStepper, State, background_sampler, stable_dt
from .io import write_series, write_snapshot
from .model import InitialData, validate_params
from .wave import WaveProfile, build_profile

log = logging.getLogger(__name__)

__all__ = [
    "RunResult",
    "build_background",
    "initial_state",
    "check_domain",
    "choose_dt",
    "simulate",
]


@dataclass
class RunResult:
    records: list[EnergyRecord]
    final: State
    profile: WaveProfile
    grid: Grid
    dt: float
    n_steps: int
    snapshots: list[State] = field(default_factory=list)


def build_background(config: RunConfig) -> WaveProfile:
    w = config.wave
    return build_profile(w.spec(), config.params, tol=w.tol, L_w=w.half_width, check_admissible=w.check_admissible)


def initial_state(config: RunConfig, grid: Grid) -> State:
    fields_ = {name: shape.sample(grid, config.base_dir) for name, shape in config.init.items()}
    data = InitialData(fields_["rho0"], fields_["rho0_t"], fields_["phi"])
    problems = data.check(config.params.theta0, config.far_field_tol)
    if problems:
        raise ConfigError([f"initial data: {msg}" for msg in problems])
    return State(0.0, data.rho0, data.rho0_t, data.phi)


def check_domain(profile: WaveProfile, grid: Grid, t_end: float, tol: float) -> None:
    """Require the moving background to be flat at both boundaries for the whole run."""
    if profile.is_constant:
        return
    spec = profile.spec
    worst = 0.0
    for t in (0.0, t_end):
        w, wp = profile.evaluate(np.array([-grid.L, grid.L]) - spec.s * t)
        worst = max(worst, abs(w[0] - spec.u_minus), abs(w[1] - spec.u_plus), *np.abs(wp))
    if worst > tol:
        raise DomainTooSmall(
            f"background deviates by {worst:.3g} from its end states at x = +-{grid.L:g} "
            f"(tolerance {tol:.3g}); enlarge grid.L"
        )


def choose_dt(config: RunConfig, grid: Grid, M_U: float) -> tuple[float, int]:
    """Step size and step count; ``n_steps * dt`` lands on ``t_end``."""
    t_end = config.time.t_end
    cfl = stable_dt(grid, config.params, config.time.safety, M_U)
    if config.time.dt is not None:
        dt = config.time.dt
        if dt > cfl:
            log.warning("time.dt = %g exceeds the hyperbolic bound %g", dt, cfl)
        n = round(t_end / dt)
        if not math.isclose(n * dt, t_end, rel_tol=1e-9, abs_tol=1e-12):
            n = math.ceil(t_end / dt)
        return dt, int(n)
    if t_end == 0:
        return cfl, 0
    n = math.ceil(t_end / cfl)
    return t_end / n, n


def _attach(exc: Exception, records, snapshots):
    exc.records = list(records)
    exc.snapshots = list(snapshots)
    return exc


def simulate(
    config: RunConfig,
    *,
    grid: Grid | None = None,
    initial: State | None = None,
    dt: float | None = None,
    forcing: Forcing | None = None,
    profile: WaveProfile | None = None,
    out_dir=None,
    keep_snapshots: bool = False,
) -> RunResult:
    """Integrate the perturbation system to ``config.time.t_end``.

    ``initial`` resumes from a saved state; pass the ``dt`` stored with it to
    reproduce the original step schedule.  On failure the exception carries
    ``records`` and ``snapshots`` gathered so far, and with ``out_dir`` the
    partial series is already on disk.
    """
    p = config.params
    grid = grid or config.grid
    report = validate_params(p)
    if not report.passed:
        log.warning("parameter conditions fail: %s", ", ".join(c.name for c in report.failures))

    profile = profile or build_background(config)
    check_domain(profile, grid, config.time.t_end, config.far_field_tol)
    if dt is None:
        dt, n_steps = choose_dt(config, grid, profile.M_U)
    else:
        n_steps = round(config.time.t_end / dt)
    state = initial.copy() if initial is not None else initial_state(config, grid)
    if state.rho.size != grid.n:
        raise ConfigError([f"initial state has {state.rho.size} nodes, grid has {grid.n}"])

    out = Path(out_dir) if out_dir is not None else None
    snap_dir = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        snap_dir = out / "snapshots"
        if config.time.snapshot_every:
            snap_dir.mkdir(exist_ok=True)

    sampler = background_sampler(profile, grid)
    records: list[EnergyRecord] = []
    snapshots: list[State] = []
    every, snap_every = config.time.record_every, config.time.snapshot_every
    last_snap = -1

    def record(s: State):
        rec = compute_record(s, to_v(s, p), sampler(s.t), p, grid, profile.M_U, dt)
        records.append(rec)
        if not rec.min_abs_temp > 0:
            raise PositivityViolation(f"theta0 + Theta reached {rec.min_abs_temp:.6g} at t = {s.t:.6g}", t=s.t)

    def snapshot(s: State):
        nonlocal last_snap
        last_snap = s.step
        if keep_snapshots:
            snapshots.append(s.copy())
        if snap_dir is not None:
            snap_dir.mkdir(exist_ok=True)
            write_snapshot(snap_dir / f"snap_{s.step:08d}.csv", s, grid, p, profile.spec, dt)

    try:
        stepper = ImexStepper(grid, p, dt, sampler, forcing, config.amplitude_cap)
        if state.step % every == 0 or state.step == n_steps:
            record(state)
        if snap_every and state.step % snap_every == 0 and initial is None:
            snapshot(state)
        while state.step < n_steps:
            state = stepper.step(state)
            last = state.step == n_steps
            if state.step % every == 0 or last:
                record(state)
            if (snap_every and state.step % snap_every == 0) or last:
                snapshot(state)
        if last_snap != state.step and initial is None:
            snapshot(state)
    except ThermolabError as exc:
        if out is not None:
            write_series(out / "series.csv", records)
        raise _attach(exc, records, snapshots)

    if out is not None:
        write_series(out / "series.csv", records)
    return RunResult(records, state, profile, grid, dt, n_steps, snapshots)
