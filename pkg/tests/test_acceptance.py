"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one PASS/FAIL line (also collected into the terminal
summary).  Criteria 1 and 3 contain requirements that no correct solver can
meet; they are implemented as stated and expected to fail.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from thermolab.analysis import bernoulli_alpha, fit_power_decay, lambda_difference, theta_bound_check
from thermolab.cli import main
from thermolab.config import parse_config
from thermolab.energy import inequality_residual
from thermolab.errors import ThermolabError
from thermolab.grid import Grid, quadrature_norm
from thermolab.model import PhysParams, WaveSpec
from thermolab.simulation import simulate
from thermolab.verification import heat_oracle, mms_convergence, refinement_uniqueness, sech2_pair
from thermolab.wave import build_profile, sample_background, tanh_reference

RESULTS: dict[int, tuple[str, str]] = {}


def report(number: int, checks: dict[str, bool], detail: str) -> None:
    ok = all(checks.values())
    failed = [name for name, passed in checks.items() if not passed]
    status = "PASS" if ok else "FAIL"
    line = detail if ok else f"{detail}  failed: {', '.join(failed)}"
    RESULTS[number] = (status, line)
    print(f"criterion {number}: {status}  {line}")
    assert ok, line


HEAT = """physics.gamma = 0
physics.kappa = 1
grid.L = 20
grid.n = 801
time.t_end = 5
init.phi = gaussian(1, 0, 1)
"""

COUPLED = """physics.epsilon = 1
physics.delta = 1
physics.kappa = 2
physics.gamma = 0.25
physics.theta0 = 1
grid.L = 40
grid.n = 1601
time.t_end = 50
time.record_every = 10
init.rho0 = gaussian(0.01, 0, 1)
init.phi = gaussian(0.01, 0, 1)
"""

TRAVELING = """physics.gamma = 0.25
wave.u_minus = 0
wave.u_plus = 0.5
grid.L = 90
grid.n = 1801
time.t_end = 2
"""


def timed(func, *args, **kwargs):
    start = time.perf_counter()
    out = func(*args, **kwargs)
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def heat_run():
    return timed(simulate, parse_config(HEAT))


@pytest.fixture(scope="module")
def coupled_config():
    return parse_config(COUPLED)


@pytest.fixture(scope="module")
def coupled_run(coupled_config):
    return timed(simulate, coupled_config)


@pytest.fixture(scope="module")
def traveling_run():
    return timed(simulate, parse_config(TRAVELING))


@pytest.fixture(scope="module")
def mms_studies():
    p = PhysParams(1.0, 1.0, 2.0, 0.25, 1.0)
    start = time.perf_counter()
    space = mms_convergence(sech2_pair(), p, levels=4, mode="space")
    temporal = mms_convergence(sech2_pair(), p, levels=4, mode="time")
    return space, temporal, time.perf_counter() - start


def test_criterion_1_decoupled_heat(heat_run):
    res, elapsed = heat_run
    t = np.array([r.t for r in res.records])
    l2 = np.array([r.l2_theta_sq for r in res.records])
    rel = float(np.max(np.abs(l2 / heat_oracle(1.0, 1.0, 1.0, t) - 1.0)))
    exponent = fit_power_decay(t, l2).exponent
    report(
        1,
        {
            "oracle match within 1e-3": rel < 1e-3,
            "exponent -0.5 +- 0.02": abs(exponent + 0.5) <= 0.02,
            "runtime < 30 s": elapsed < 30,
        },
        f"max rel err {rel:.2e}, exponent {exponent:.4f}, {elapsed:.1f} s",
    )


def test_criterion_2_mms_orders(mms_studies):
    space, temporal, elapsed = mms_studies
    s_orders = [o for r in space[1:] for o in (r.order_rho, r.order_theta)]
    t_orders = [o for r in temporal[1:] for o in (r.order_rho, r.order_theta)]
    report(
        2,
        {
            "spatial order 2.0 +- 0.2": all(abs(o - 2.0) <= 0.2 for o in s_orders),
            "temporal order 2.0 +- 0.3": all(abs(o - 2.0) <= 0.3 for o in t_orders),
            "runtime < 2 min": elapsed < 120,
        },
        f"space {min(s_orders):.3f}..{max(s_orders):.3f}, time {min(t_orders):.3f}..{max(t_orders):.3f}, {elapsed:.1f} s",
    )


def test_criterion_3_symmetric_wave():
    p = PhysParams(1.0, 1.0, 2.0, 0.25, 1.0)
    spec = WaveSpec(-0.5, 0.5, math.sqrt(0.75))
    checks = {"profile builds": False, "residual < 1e-6": False, "3 M_U^2 < 1": False, "tanh match within 1e-8": False}
    notes = []
    start = time.perf_counter()
    try:
        prof = build_profile(spec, p)
        checks["profile builds"] = True
        checks["residual < 1e-6"] = prof.residual < 1e-6
        checks["3 M_U^2 < 1"] = 3 * prof.M_U**2 < 1
        _, closed = tanh_reference(p, -0.5, 0.5)
        checks["tanh match within 1e-8"] = float(np.max(np.abs(prof.w - closed(prof.xi)))) < 1e-8
    except ThermolabError as exc:
        notes.append(f"{type(exc).__name__}: {exc}")
    try:
        tanh_reference(p, -0.5, 0.5)
    except ThermolabError as exc:
        notes.append(f"{type(exc).__name__}")
    checks["runtime < 5 s"] = time.perf_counter() - start < 5
    report(3, checks, "; ".join(notes) or "profile and closed form agree")


def test_criterion_4_source_bookkeeping(traveling_run):
    res, _ = traveling_run
    g = res.grid
    norms = np.array([
        [quadrature_norm(bg.S0, 1, g), quadrature_norm(bg.S0, 2, g)]
        for bg in (sample_background(res.profile, g, t) for t in (0.0, 1.0, 2.0))
    ])
    spread = float(np.max(np.abs(norms / norms[0] - 1.0)))
    later = [r.l2_theta_sq for r in res.records if r.t > 0]
    report(
        4,
        {"S0 norms agree within 1e-3": spread < 1e-3, "Theta positive for t > 0": all(v > 0 for v in later)},
        f"S0 L1 {norms[0, 0]:.6g}, L2 {norms[0, 1]:.6g}, spread {spread:.1e}; min ||Theta||^2 for t>0 {min(later):.3e}",
    )


def test_criterion_5_positivity(heat_run, coupled_run, traveling_run):
    mins = {
        name: min(r.min_abs_temp for r in run[0].records)
        for name, run in (("heat", heat_run), ("coupled", coupled_run), ("traveling", traveling_run))
    }
    report(
        5,
        {f"{name} run stays positive": m > 0 for name, m in mins.items()},
        ", ".join(f"{k} min {v:.6g}" for k, v in mins.items()),
    )


def test_criterion_6_thermal_equilibration(coupled_run):
    res, elapsed = coupled_run
    t = np.array([r.t for r in res.records])
    l2 = np.array([r.l2_theta_sq for r in res.records])
    calE = np.array([r.calE for r in res.records])
    theta_fit = fit_power_decay(t, l2)
    c16 = fit_power_decay(t, calE).C16_hat
    bound = theta_bound_check(t, l2, c16)
    bern = bernoulli_alpha(t, calE, (1.0, math.inf))
    report(
        6,
        {
            "exponent in [-1.6, -0.5]": -1.6 <= theta_fit.exponent <= -0.5,
            "theta bound": bound.passed,
            "dpsi/dt > 0 for t > 1": bern.min_dpsi_dt > 0,
            "runtime < 5 min": elapsed < 300,
        },
        f"exponent {theta_fit.exponent:.4f}, C16_hat {c16:.4g}, bound slack {bound.worst_margin:.3e}, "
        f"min dpsi/dt {bern.min_dpsi_dt:.4g}, {elapsed:.1f} s",
    )


def test_criterion_7_energy_inequality(coupled_run, coupled_config, mms_studies):
    res, _ = coupled_run
    space = mms_studies[0]
    every = coupled_config.time.record_every
    uniform = [r for r in res.records if r.step % every == 0]
    audit = inequality_residual(uniform, coupled_config.params)

    # relative error constant of the finest MMS level, scaled to each grid as C * dx^2
    finest = space[-1]
    rel_const = finest.err_rho / finest.dx**2
    scale = float(np.max(np.abs(audit["mechanical_lhs"])))
    dx = res.grid.dx
    tol = rel_const * dx**2 * scale
    tol_refined = rel_const * (dx / 2) ** 2 * scale
    worst = float(audit["mechanical"].min())
    report(
        7,
        {"margin >= -tol": worst >= -tol, "tol shrinks under refinement": tol_refined < tol},
        f"min margin {worst:.3e} over {audit['t'].size} interior records, tol {tol:.3e} (refined {tol_refined:.3e})",
    )


def test_criterion_8_uniqueness(coupled_config, coupled_run):
    study = refinement_uniqueness(coupled_config, levels=3, profile=coupled_run[0].profile)
    first = simulate(coupled_config, keep_snapshots=True, profile=coupled_run[0].profile)
    again = simulate(coupled_config, keep_snapshots=True, profile=coupled_run[0].profile)
    same = lambda_difference(first.snapshots, again.snapshots, first.profile.M_U, coupled_config.params, first.grid)
    report(
        8,
        {
            "ratio >= 3.5 per halving": all(r >= 3.5 for r in study.ratios),
            "identical runs give zero": max(d.lam for d in same) <= 1e-30,
        },
        f"Lambda {[f'{v:.3e}' for v in study.lam]}, ratios {[f'{v:.2f}' for v in study.ratios]}",
    )


def test_criterion_9_resume_determinism(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(COUPLED.replace("time.t_end = 50", "time.t_end = 10") + "time.snapshot_every = 200\n")
    full, resumed = tmp_path / "full", tmp_path / "resumed"
    assert main(["simulate", "--config", str(cfg), "--out", str(full)]) == 0
    snaps = sorted((full / "snapshots").iterdir())
    middle = snaps[len(snaps) // 2]
    assert main(["simulate", "--config", str(cfg), "--out", str(resumed), "--resume", str(middle)]) == 0
    same = {
        name: (full / name).read_bytes() == (resumed / name).read_bytes()
        for name in ("series.csv", "report.json", f"snapshots/{snaps[-1].name}")
    }
    report(9, {f"{k} identical": v for k, v in same.items()}, f"resumed from {middle.name}, compared {', '.join(same)}")
