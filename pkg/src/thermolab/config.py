"""Flat ``section.key = value`` run configuration.

Example::

    physics.epsilon = 1.0
    physics.gamma = 0.25
    wave.u_minus = 0.0
    wave.u_plus = 0.0
    grid.L = 40
    grid.n = 1601
    time.t_end = 50
    init.rho0 = gaussian(0.01, 0.0, 1.0)
    init.phi = gaussian(amplitude=0.01, center=0, width=1)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .model import PhysParams, WaveSpec

__all__ = [
    "FieldShape",
    "WaveSettings",
    "TimeSettings",
    "MmsSettings",
    "RunConfig",
    "parse_config",
    "load_config",
]


@dataclass(frozen=True)
class FieldShape:
    kind: str = "zero"  # zero | gaussian | file
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    path: str | None = None

    def sample(self, grid: Grid, base_dir: Path | None = None) -> np.ndarray:
        if self.kind == "zero":
            return grid.zeros()
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-((grid.x - self.center) ** 2) / (2.0 * self.width**2))
        path = Path(self.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        values = data[:, -1]
        if values.size != grid.n:
            raise ConfigError([f"{path}: expected {grid.n} values, found {values.size}"])
        return values.astype(float)


@dataclass
class WaveSettings:
    u_minus: float = 0.0
    u_plus: float = 0.0
    s: float | None = None
    sign: int = 1
    half_width: float | None = None
    tol: float = 1e-10
    check_admissible: bool = True

    def spec(self) -> WaveSpec:
        if self.u_minus == self.u_plus:
            return WaveSpec.constant(self.u_minus)
        if self.s is not None:
            return WaveSpec(self.u_minus, self.u_plus, self.s)
        return WaveSpec.from_end_states(self.u_minus, self.u_plus, self.sign)


@dataclass
class TimeSettings:
    t_end: float = 1.0
    safety: float = 0.5
    dt: float | None = None
    record_every: int = 1
    snapshot_every: int = 0


@dataclass
class MmsSettings:
    levels: int = 3
    n0: int = 199
    L: float = 12.0
    t_end: float = 0.5
    dt0: float | None = None
    time_dt0: float = 0.05
    time_n: int = 799
    study: str = "both"
    pair: str = "sech2"


@dataclass
class RunConfig:
    params: PhysParams
    wave: WaveSettings = field(default_factory=WaveSettings)
    grid: Grid = field(default_factory=lambda: Grid(20.0, 401))
    time: TimeSettings = field(default_factory=TimeSettings)
    init: dict = field(default_factory=lambda: {"rho0": FieldShape(), "rho0_t": FieldShape(), "phi": FieldShape()})
    output_dir: str = "out"
    window: tuple[float, float] = (1.0, math.inf)
    amplitude_cap: float = 1e6
    far_field_tol: float = 1e-8
    mms: MmsSettings = field(default_factory=MmsSettings)
    base_dir: Path | None = None


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if text.strip().lower() in ("none", "auto", "") else float(text)


def parse_window(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return (float(lo) if lo.strip() else 1.0, float(hi) if hi.strip() else math.inf)


_SHAPE = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


def parse_shape(text: str) -> FieldShape:
    m = _SHAPE.match(text)
    if not m:
        raise ValueError(f"cannot parse field shape {text!r}")
    kind, args = m.group(1).lower(), (m.group(2) or "").strip()
    if kind == "zero":
        return FieldShape()
    if kind == "file":
        if not args:
            raise ValueError("file(...) needs a path")
        return FieldShape(kind="file", path=args.strip("'\""))
    if kind != "gaussian":
        raise ValueError(f"unknown field shape {kind!r}")
    names = ["amplitude", "center", "width"]
    values = {}
    parts = [a.strip() for a in args.split(",") if a.strip()]
    for i, part in enumerate(parts):
        if "=" in part:
            k, v = (s.strip() for s in part.split("=", 1))
            if k not in names:
                raise ValueError(f"unknown gaussian argument {k!r}")
            values[k] = float(v)
        else:
            if i >= len(names):
                raise ValueError("gaussian takes at most three arguments")
            values[names[i]] = float(part)
    if "amplitude" not in values:
        raise ValueError("gaussian needs an amplitude")
    if values.get("width", 1.0) <= 0:
        raise ValueError("gaussian width must be positive")
    return FieldShape(kind="gaussian", **values)


# key -> value converter
_KEYS = {
    "physics.epsilon": float, "physics.delta": float, "physics.kappa": float,
    "physics.gamma": float, "physics.theta0": float,
    "wave.u_minus": float, "wave.u_plus": float, "wave.s": _opt_float, "wave.sign": int,
    "wave.half_width": _opt_float, "wave.tol": float, "wave.check_admissible": _bool,
    "grid.l": float, "grid.n": int,
    "time.t_end": float, "time.safety": float, "time.dt": _opt_float,
    "time.record_every": int, "time.snapshot_every": int,
    "init.rho0": parse_shape, "init.rho0_t": parse_shape, "init.phi": parse_shape,
    "output.dir": str,
    "analysis.window": parse_window, "analysis.t_start": float, "analysis.t_end": float,
    "numerics.amplitude_cap": float, "numerics.far_field_tol": float,
    "mms.levels": int, "mms.n0": int, "mms.l": float, "mms.t_end": float, "mms.dt0": _opt_float,
    "mms.time_dt0": float, "mms.time_n": int, "mms.study": str, "mms.pair": str,
}

_PHYS_DEFAULTS = {"epsilon": 1.0, "delta": 1.0, "kappa": 1.0, "gamma": 0.0, "theta0": 1.0}


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse config text; every problem is reported as ``line N: message``."""
    errors: list[str] = []
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        lkey = key.lower()
        conv = _KEYS.get(lkey)
        if conv is None:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if lkey in values:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {lines[lkey]})")
            continue
        try:
            values[lkey] = conv(val.strip())
            lines[lkey] = lineno
        except (ValueError, TypeError) as exc:
            errors.append(f"line {lineno}: bad value for {key}: {exc}")
    if errors:
        raise ConfigError(errors)

    def where(key):
        return f"line {lines[key]}" if key in lines else "default"

    phys = {k: values.get(f"physics.{k}", d) for k, d in _PHYS_DEFAULTS.items()}
    for k in ("epsilon", "delta", "kappa", "theta0"):
        if not phys[k] > 0:
            errors.append(f"{where('physics.' + k)}: physics.{k} must be > 0")
    if phys["gamma"] < 0:
        errors.append(f"{where('physics.gamma')}: physics.gamma must be >= 0")

    wave = WaveSettings()
    for name in ("u_minus", "u_plus", "s", "sign", "half_width", "tol", "check_admissible"):
        key = f"wave.{name}"
        if key in values:
            setattr(wave, name, values[key])
    if wave.sign not in (1, -1):
        errors.append(f"{where('wave.sign')}: wave.sign must be +1 or -1")

    L = values.get("grid.l", 20.0)
    n = values.get("grid.n", 401)
    if not L > 0:
        errors.append(f"{where('grid.l')}: grid.L must be > 0")
    if n < 16:
        errors.append(f"{where('grid.n')}: grid.n must be >= 16")

    time = TimeSettings()
    for name in ("t_end", "safety", "dt", "record_every", "snapshot_every"):
        key = f"time.{name}"
        if key in values:
            setattr(time, name, values[key])
    if time.t_end < 0:
        errors.append(f"{where('time.t_end')}: time.t_end must be >= 0")
    if not 0 < time.safety <= 1:
        errors.append(f"{where('time.safety')}: time.safety must lie in (0, 1]")
    if time.dt is not None and not time.dt > 0:
        errors.append(f"{where('time.dt')}: time.dt must be > 0")
    if time.record_every < 1:
        errors.append(f"{where('time.record_every')}: time.record_every must be >= 1")
    if time.snapshot_every < 0:
        errors.append(f"{where('time.snapshot_every')}: time.snapshot_every must be >= 0")

    init = {name: values.get(f"init.{name}", FieldShape()) for name in ("rho0", "rho0_t", "phi")}
    phi = init["phi"]
    if phi.kind == "gaussian" and phi.amplitude <= -phys["theta0"]:
        errors.append(f"{where('init.phi')}: phi amplitude {phi.amplitude:g} violates phi > -theta0")

    window = values.get("analysis.window", (1.0, math.inf))
    window = (values.get("analysis.t_start", window[0]), values.get("analysis.t_end", window[1]))

    mms = MmsSettings()
    for name in ("levels", "n0", "l", "t_end", "dt0", "time_dt0", "time_n", "study", "pair"):
        key = f"mms.{name}"
        if key in values:
            setattr(mms, "L" if name == "l" else name, values[key])
    if mms.study not in ("space", "time", "both"):
        errors.append(f"{where('mms.study')}: mms.study must be space, time or both")
    if mms.pair not in ("sech2", "zero"):
        errors.append(f"{where('mms.pair')}: mms.pair must be sech2 or zero")

    if errors:
        raise ConfigError(errors)

    return RunConfig(
        params=PhysParams(**phys),
        wave=wave,
        grid=Grid(float(L), int(n)),
        time=time,
        init=init,
        output_dir=values.get("output.dir", "out"),
        window=window,
        amplitude_cap=values.get("numerics.amplitude_cap", 1e6),
        far_field_tol=values.get("numerics.far_field_tol", 1e-8),
        mms=mms,
        base_dir=base_dir,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
    return parse_config(text, base_dir=path.parent)
