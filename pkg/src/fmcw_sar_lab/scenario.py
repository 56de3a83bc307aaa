"""Scenario files: INI-style ``key = value`` text with one section per component.

Schema (``*`` marks required keys; everything else has a default)::

    [chirp]
    bandwidth_hz*   chirp bandwidth W (Hz)
    duration_s*     chirp duration T (s)
    amplitude       transmit amplitude A                      (1.0)

    [adc]
    high_rate_hz    full-rate clock                           (2 * W)
    low_rate_hz     beat ADC rate; must divide high_rate_hz   (lowest legal rate)

    [scene]
    targets         one "x_m, y_m[, reflectivity]" per line   (none)

    [trajectory]
    center_x_m, center_y_m                                    (0, 0)
    radius_m                                                  (10)
    n_positions                                               (180)

    [grid]
    x_min_m, x_max_m, y_min_m, y_max_m                        (-5, 5, -5, 5)
    nx, ny                                                    (256, 256)

    [experiment]
    snr_db          comma-separated SNR_in list (dB)          (0, -10, -20, -30)
    architectures   subset of stretch, matched, proposed      (proposed, stretch)
    trials                                                    (20)
    seed                                                      (0)
    exclusion_cells noise-floor exclusion radius in range cells (10)
    domain          auto | image | profile                    (auto)

``domain = auto`` measures output SNR on the backprojected image, except for a
single-position trajectory where the range profile itself is used.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .errors import FmcwSarError, ScenarioParseError, ScenarioValidationError
from .receivers import ARCHITECTURES, BEAT_GUARD, AdcConfig
from .sar import ImageGrid, Trajectory, max_delay_for
from .signal_core import ChirpParams, PointTarget, Scene

DOMAINS = ("auto", "image", "profile")

_SCHEMA = {
    "chirp": {"bandwidth_hz", "duration_s", "amplitude"},
    "adc": {"high_rate_hz", "low_rate_hz"},
    "scene": {"targets"},
    "trajectory": {"center_x_m", "center_y_m", "radius_m", "n_positions"},
    "grid": {"x_min_m", "x_max_m", "y_min_m", "y_max_m", "nx", "ny"},
    "experiment": {"snr_db", "architectures", "trials", "seed", "exclusion_cells", "domain"},
}


@dataclass(frozen=True)
class Scenario:
    chirp: ChirpParams
    adc: AdcConfig
    scene: Scene
    trajectory: Trajectory
    grid: ImageGrid
    snr_list_db: tuple[float, ...] = (0.0, -10.0, -20.0, -30.0)
    architectures: tuple[str, ...] = ("proposed", "stretch")
    trials: int = 20
    seed: int = 0
    exclusion_cells: float = 10.0
    domain: str = "auto"

    @property
    def measurement_domain(self) -> str:
        if self.domain == "auto":
            return "profile" if self.trajectory.n_positions == 1 else "image"
        return self.domain

    def with_overrides(self, **changes) -> "Scenario":
        return replace(self, **changes)

    def digest(self) -> str:
        return hashlib.sha256(serialize_scenario(self).encode()).hexdigest()[:16]


def bundled_scenarios() -> list[str]:
    root = resources.files("fmcw_sar_lab") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def _resolve(path: str | Path) -> tuple[str, str]:
    p = Path(path)
    if p.is_file():
        return p.read_text(), str(p)
    name = str(path)
    if name in bundled_scenarios():
        return (resources.files("fmcw_sar_lab") / "scenarios" / f"{name}.ini").read_text(), name
    raise FileNotFoundError(f"scenario file not found: {path}")


def parse_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a file, or a bundled scenario by name (e.g. ``paper_baseline``)."""
    text, source = _resolve(path)
    return loads_scenario(text, source)


def _number(cfg, section, key, default, kind=float):
    field = f"{section}.{key}"
    if not cfg.has_option(section, key):
        if default is None:
            raise ScenarioValidationError(field, "required key is missing")
        return default
    raw = cfg.get(section, key).strip()
    try:
        value = kind(raw)
    except ValueError:
        raise ScenarioValidationError(field, f"cannot read {raw!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(value):
        raise ScenarioValidationError(field, "must be finite")
    return value


def _positive(value, field):
    if not value > 0:
        raise ScenarioValidationError(field, f"must be > 0, got {value!r}")
    return value


def _targets(cfg) -> Scene:
    if not cfg.has_option("scene", "targets"):
        return Scene()
    targets = []
    for i, line in enumerate(l for l in cfg.get("scene", "targets").splitlines() if l.strip()):
        parts = [p.strip() for p in line.split(",")]
        field = f"scene.targets[{i}]"
        if len(parts) not in (2, 3):
            raise ScenarioValidationError(field, f"expected 'x, y[, reflectivity]', got {line!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
            rho = complex(parts[2].replace(" ", "")) if len(parts) == 3 else 1.0
        except ValueError:
            raise ScenarioValidationError(field, f"cannot parse {line!r}") from None
        if isinstance(rho, complex) and rho.imag == 0:
            rho = rho.real
        targets.append(PointTarget(x, y, rho))
    return Scene(tuple(targets))


def _list(cfg, key, default, kind):
    if not cfg.has_option("experiment", key):
        return default
    items = [s.strip() for s in cfg.get("experiment", key).split(",") if s.strip()]
    try:
        return tuple(kind(s) for s in items)
    except ValueError:
        raise ScenarioValidationError(f"experiment.{key}", "malformed list") from None


def _default_low_rate(chirp: ChirpParams, high: float, max_delay: float) -> float:
    n_high = chirp.n_samples(high)
    needed = 2.0 * chirp.chirp_rate * max_delay * BEAT_GUARD
    for factor in range(n_high, 0, -1):
        if n_high % factor == 0 and high / factor >= needed:
            return high / factor
    return high


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    if not text.strip():
        raise ScenarioParseError(f"{source}: scenario file is empty")
    cfg = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cfg.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioParseError(f"{source}: {exc}") from None
    if not cfg.sections():
        raise ScenarioParseError(f"{source}: no [sections] found")
    for section in cfg.sections():
        if section not in _SCHEMA:
            raise ScenarioValidationError(section, "unknown section")
        for key in cfg.options(section):
            if key not in _SCHEMA[section]:
                raise ScenarioValidationError(f"{section}.{key}", "unknown key")
    if not cfg.has_section("chirp"):
        raise ScenarioValidationError("chirp", "required section is missing")
    for section in _SCHEMA:
        if not cfg.has_section(section):
            cfg.add_section(section)

    w = _positive(_number(cfg, "chirp", "bandwidth_hz", None), "chirp.bandwidth_hz")
    t = _positive(_number(cfg, "chirp", "duration_s", None), "chirp.duration_s")
    a = _positive(_number(cfg, "chirp", "amplitude", 1.0), "chirp.amplitude")
    chirp = ChirpParams(w, t, a)

    scene = _targets(cfg)
    try:
        trajectory = Trajectory(
            (_number(cfg, "trajectory", "center_x_m", 0.0), _number(cfg, "trajectory", "center_y_m", 0.0)),
            _positive(_number(cfg, "trajectory", "radius_m", 10.0), "trajectory.radius_m"),
            _positive(_number(cfg, "trajectory", "n_positions", 180, int), "trajectory.n_positions"),
        )
    except FmcwSarError as exc:
        if isinstance(exc, ScenarioValidationError):
            raise
        raise ScenarioValidationError("trajectory", str(exc)) from None

    g = {k: _number(cfg, "grid", k, d) for k, d in
         (("x_min_m", -5.0), ("x_max_m", 5.0), ("y_min_m", -5.0), ("y_max_m", 5.0))}
    nx = _number(cfg, "grid", "nx", 256, int)
    ny = _number(cfg, "grid", "ny", 256, int)
    try:
        grid = ImageGrid(g["x_min_m"], g["x_max_m"], g["y_min_m"], g["y_max_m"], nx, ny)
        grid.check_sampling(chirp)
    except FmcwSarError as exc:
        raise ScenarioValidationError("grid", str(exc)) from None

    max_delay = max_delay_for(trajectory, grid, scene)
    if max_delay >= t:
        raise ScenarioValidationError(
            "trajectory.radius_m", f"round-trip delay {max_delay:g} s reaches the chirp duration"
        )
    high = _positive(_number(cfg, "adc", "high_rate_hz", 2.0 * w), "adc.high_rate_hz")
    low = _number(cfg, "adc", "low_rate_hz", 0.0)
    if not cfg.has_option("adc", "low_rate_hz"):
        low = _default_low_rate(chirp, high, max_delay)
    _positive(low, "adc.low_rate_hz")
    try:
        adc = AdcConfig(low, high)
        adc.validate(chirp, max_delay)
    except FmcwSarError as exc:
        raise ScenarioValidationError("adc.low_rate_hz", str(exc)) from None

    snrs = _list(cfg, "snr_db", (0.0, -10.0, -20.0, -30.0), float)
    if not snrs:
        raise ScenarioValidationError("experiment.snr_db", "list must not be empty")
    archs = _list(cfg, "architectures", ("proposed", "stretch"), str)
    if not archs:
        raise ScenarioValidationError("experiment.architectures", "list must not be empty")
    for arch in archs:
        if arch not in ARCHITECTURES:
            raise ScenarioValidationError(
                "experiment.architectures", f"{arch!r} is not one of {', '.join(ARCHITECTURES)}"
            )
    trials = _positive(_number(cfg, "experiment", "trials", 20, int), "experiment.trials")
    seed = _number(cfg, "experiment", "seed", 0, int)
    if seed < 0:
        raise ScenarioValidationError("experiment.seed", "must be >= 0")
    exclusion = _positive(_number(cfg, "experiment", "exclusion_cells", 10.0), "experiment.exclusion_cells")
    domain = cfg.get("experiment", "domain", fallback="auto").strip()
    if domain not in DOMAINS:
        raise ScenarioValidationError("experiment.domain", f"must be one of {', '.join(DOMAINS)}")

    return Scenario(chirp, adc, scene, trajectory, grid, snrs, archs, trials, seed, exclusion, domain)


def _fmt_reflectivity(rho) -> str:
    rho = complex(rho)
    if rho.imag == 0:
        return repr(rho.real)
    return repr(rho).strip("()")


def serialize_scenario(s: Scenario) -> str:
    """Canonical text form; ``loads_scenario(serialize_scenario(s)) == s``."""
    lines = [
        "[chirp]",
        f"bandwidth_hz = {s.chirp.bandwidth_hz!r}",
        f"duration_s = {s.chirp.duration_s!r}",
        f"amplitude = {s.chirp.amplitude!r}",
        "",
        "[adc]",
        f"high_rate_hz = {s.adc.high_rate_hz!r}",
        f"low_rate_hz = {s.adc.low_rate_hz!r}",
        "",
        "[scene]",
    ]
    if s.scene.targets:
        lines.append("targets =")
        lines += [f"    {t.x_m!r}, {t.y_m!r}, {_fmt_reflectivity(t.reflectivity)}" for t in s.scene.targets]
    lines += [
        "",
        "[trajectory]",
        f"center_x_m = {s.trajectory.center[0]!r}",
        f"center_y_m = {s.trajectory.center[1]!r}",
        f"radius_m = {s.trajectory.radius_m!r}",
        f"n_positions = {s.trajectory.n_positions}",
        "",
        "[grid]",
        f"x_min_m = {s.grid.x_min!r}",
        f"x_max_m = {s.grid.x_max!r}",
        f"y_min_m = {s.grid.y_min!r}",
        f"y_max_m = {s.grid.y_max!r}",
        f"nx = {s.grid.nx}",
        f"ny = {s.grid.ny}",
        "",
        "[experiment]",
        "snr_db = " + ", ".join(repr(float(v)) for v in s.snr_list_db),
        "architectures = " + ", ".join(s.architectures),
        f"trials = {s.trials}",
        f"seed = {s.seed}",
        f"exclusion_cells = {float(s.exclusion_cells)!r}",
        f"domain = {s.domain}",
    ]
    return "\n".join(lines) + "\n"
