"""Command-line front end.

Exit codes: 0 success, 1 domain failure (no wave, inadmissible profile,
violated bound, solver failure), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .analysis import DEFAULT_T_START, analyze_series
from .config import RunConfig, load_config, parse_window
from .errors import ConfigError, ThermolabError
from .io import (
    read_series,
    read_snapshot,
    write_convergence,
    write_manifest,
    write_profile,
    write_report,
)
from .model import validate_params
from .simulation import build_background, simulate
from .verification import mms_convergence, sech2_pair, zero_pair

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _out_dir(args, config: RunConfig | None) -> Path:
    if args.out:
        return Path(args.out)
    if config is not None:
        return Path(config.output_dir)
    return Path("out")


def _config_text(args) -> str | None:
    try:
        return Path(args.config).read_text()
    except (OSError, TypeError):
        return None


def cmd_validate_params(args) -> int:
    config = load_config(args.config)
    report = validate_params(config.params)
    for line in report.lines():
        print(line)
    if report.passed:
        print("all conditions pass")
        return EXIT_OK
    print("failed: " + ", ".join(c.name for c in report.failures))
    return EXIT_DOMAIN


def cmd_make_wave(args) -> int:
    config = load_config(args.config)
    profile = build_background(config)
    out = Path(args.out) if args.out else Path(config.output_dir) / "profile.csv"
    if out.suffix.lower() != ".csv":
        out = out / "profile.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_profile(out, profile)
    verdict = "admissible" if profile.admissible else "inadmissible"
    print(f"s = {profile.spec.s:.12g}")
    print(f"M_U = {profile.M_U:.12g}  3*M_U^2 = {3 * profile.M_U**2:.6g}  ({verdict})")
    print(f"K_W = {profile.K_W:.6g}  K_S0 = {profile.K_S0:.6g}")
    if not profile.is_constant:
        print(f"residual = {profile.residual:.3g}  half-width = {profile.half_width:.6g}")
    print(f"wrote {out}")
    return EXIT_OK


def _prior_series_lines(snapshot: Path, t_resume: float) -> list[str]:
    """Series rows recorded before the resume point by the run that wrote ``snapshot``."""
    for candidate in (snapshot.parent.parent / "series.csv", snapshot.parent / "series.csv"):
        if candidate.is_file():
            lines = [ln for ln in candidate.read_text().splitlines() if ln.strip()]
            return [ln for ln in lines[1:] if float(ln.split(",", 1)[0]) < t_resume]
    return []


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    out = _out_dir(args, config)
    initial, dt, prior = None, None, []
    if args.resume:
        snap = Path(args.resume)
        try:
            initial, meta = read_snapshot(snap)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot resume from {snap}: {exc}") from exc
        if meta["n"] != config.grid.n or meta["L"] != config.grid.L:
            raise UsageError(f"snapshot grid (L={meta['L']:g}, n={meta['n']}) differs from config grid")
        dt = meta["dt"]
        prior = _prior_series_lines(snap, initial.t)

    try:
        result = simulate(config, initial=initial, dt=dt, out_dir=out)
    except ThermolabError as exc:
        if prior:
            _prepend(out / "series.csv", prior)
        print(f"error: {exc}", file=sys.stderr)
        print(f"partial series ({len(getattr(exc, 'records', []))} records) written to {out / 'series.csv'}", file=sys.stderr)
        return EXIT_DOMAIN
    if prior:
        _prepend(out / "series.csv", prior)

    series = read_series(out / "series.csv")
    report = analyze_series(series["t"], series["l2_theta_sq"], series["calE"], config.window)
    write_report(out / "report.json", report)
    files = [p.relative_to(out) for p in out.rglob("*.csv")] + [Path("report.json")]
    write_manifest(
        out / "manifest.json",
        "simulate",
        _config_text(args),
        files,
        {"dt": result.dt, "n_steps": result.n_steps, "resumed_from": str(args.resume) if args.resume else None},
    )
    for key, value in report.items():
        print(f"{key} = {value}")
    return EXIT_DOMAIN if report["theta_bound_pass"] is False else EXIT_OK


def _prepend(path: Path, lines: list[str]) -> None:
    current = path.read_text().splitlines()
    path.write_text("\n".join([current[0], *lines, *current[1:]]) + "\n")


def cmd_mms(args) -> int:
    config = load_config(args.config)
    levels = args.levels if args.levels is not None else config.mms.levels
    if levels < 3:
        raise UsageError(f"--levels must be at least 3, got {levels}")
    m = config.mms
    pair = sech2_pair() if m.pair == "sech2" else zero_pair()
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    profile = build_background(config)
    studies = ["space", "time"] if m.study == "both" else [m.study]
    written = []
    for mode in studies:
        rows = mms_convergence(
            pair, config.params, levels, mode,
            L=m.L, n0=m.n0, t_end=m.t_end, dt0=m.dt0, n_time=m.time_n, dt_time0=m.time_dt0, profile=profile,
        )
        name = "convergence.csv" if mode == "space" else "convergence_time.csv"
        write_convergence(out / name, rows)
        written.append(Path(name))
        for r in rows:
            print(f"{mode} level {r.level}: dx={r.dx:.4g} dt={r.dt:.4g} err_rho={r.err_rho:.3e} err_theta={r.err_theta:.3e} "
                  f"order_rho={_fmt_order(r.order_rho)} order_theta={_fmt_order(r.order_theta)}")
    write_manifest(out / "manifest.json", "mms", _config_text(args), written, {"levels": levels})
    return EXIT_OK


def _fmt_order(v) -> str:
    if v is None:
        return "-"
    return "exact" if v == float("inf") else f"{v:.3f}"


def cmd_analyze(args) -> int:
    config = load_config(args.config) if args.config else None
    if args.series:
        series_path = Path(args.series)
    else:
        series_path = _out_dir(args, config) / "series.csv"
    try:
        series = read_series(series_path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read series: {exc}") from exc
    if args.window:
        try:
            window = parse_window(args.window)
        except ValueError as exc:
            raise UsageError(f"bad --window {args.window!r}: expected T0:T1") from exc
    else:
        window = config.window if config else (DEFAULT_T_START, float("inf"))
    report = analyze_series(series["t"], series["l2_theta_sq"], series["calE"], window)
    out = Path(args.out) if args.out else series_path.parent
    out.mkdir(parents=True, exist_ok=True)
    write_report(out / "report.json", report)
    for key, value in report.items():
        print(f"{key} = {value}")
    return EXIT_DOMAIN if report["theta_bound_pass"] is False else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermolab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config_required=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=config_required, help="run configuration file")
        p.add_argument("--out", help="output directory (or profile CSV path for make-wave)")
        p.set_defaults(func=func)
        return p

    add("validate-params", cmd_validate_params, "check positivity and the coupling conditions")
    add("make-wave", cmd_make_wave, "build the background profile and write it as CSV")
    p = add("simulate", cmd_simulate, "run the perturbation solver and write series, snapshots and report")
    p.add_argument("--resume", metavar="SNAPSHOT", help="continue from a snapshot file")
    p = add("mms", cmd_mms, "manufactured-solution convergence study")
    p.add_argument("--levels", type=int, help="number of refinement levels (>= 3)")
    p = add("analyze", cmd_analyze, "re-run the decay analysis on an existing series.csv", config_required=False)
    p.add_argument("--series", help="series CSV (default: <out>/series.csv)")
    p.add_argument("--window", metavar="T0:T1", help="fit window")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ThermolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
