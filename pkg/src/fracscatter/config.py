"""Flat key-value experiment configuration: parsing, defaults, validation,
lossless serialization, and the parameter hash used in output filenames.

Config format: UTF-8 text, one `key = value` per line, `#` comments and blank
lines ignored.  Unknown keys are rejected.  The keys rho, gamma and lambda
accept comma-separated lists, but only for kind = sweep.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .grid import ConfigError, PhysicsParams, SpatialGrid, WaveField, build_wavepacket, make_grid
from .propagate import TimeSchedule, geometric_schedule, validate_no_wrap

KINDS = (
    "cauchy",
    "dollard_cauchy",
    "weaklimit",
    "cook",
    "modifier_rl",
    "sweep",
    "selftest",
)

# Kinds whose diagnostic window conventionally starts near t = 1 rather than
# inside the asymptotic regime.
_EARLY_T0_KINDS = ("cook", "modifier_rl")

_FLOAT_KEYS = ("epsilon", "half_length", "xi_width", "dt", "t0", "ratio", "t_max")
_INT_KEYS = ("dim", "n_points", "seed")
_LIST_KEYS = ("rho", "gamma", "lambda")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; rho/gamma/lam are singletons unless sweep."""

    kind: str
    rho: tuple[float, ...]
    gamma: tuple[float, ...]
    lam: tuple[float, ...]
    epsilon: float
    dim: int
    n_points: int
    half_length: float
    xi_center: tuple[float, ...]
    xi_width: float
    dt: float
    t0: float
    ratio: float
    t_max: float
    seed: int
    out_dir: str

    def physics(self) -> PhysicsParams:
        if len(self.rho) != 1 or len(self.gamma) != 1 or len(self.lam) != 1:
            raise ConfigError("config holds sweep lists; use combos() instead")
        return PhysicsParams(rho=self.rho[0], gamma=self.gamma[0],
                             lam=self.lam[0], epsilon=self.epsilon)

    def combos(self) -> list[PhysicsParams]:
        return [
            PhysicsParams(rho=r, gamma=g, lam=l, epsilon=self.epsilon)
            for r in self.rho for g in self.gamma for l in self.lam
        ]

    def grid(self) -> SpatialGrid:
        return make_grid(self.dim, self.n_points, self.half_length)

    def schedule(self) -> TimeSchedule:
        return geometric_schedule(self.dt, self.t0, self.ratio, self.t_max)

    def packet(self, grid: SpatialGrid | None = None,
               params: PhysicsParams | None = None) -> WaveField:
        grid = grid if grid is not None else self.grid()
        if params is None:
            params = PhysicsParams(rho=self.rho[0], gamma=self.gamma[0],
                                   lam=self.lam[0], epsilon=self.epsilon)
        return build_wavepacket(grid, params, np.array(self.xi_center), self.xi_width)


def default_t0(kind: str) -> float:
    return 1.0 if kind in _EARLY_T0_KINDS else 50.0


def _defaults(kind: str) -> dict:
    return {
        "kind": kind,
        "rho": (0.75,),
        "gamma": (1.0,),
        "lambda": (1.0,),
        "epsilon": 0.5,
        "dim": 1,
        "n_points": 2**17,
        "half_length": 1500.0,
        "xi_center": (1.0,),
        "xi_width": 0.1,
        "dt": 0.05,
        "t0": default_t0(kind),
        "ratio": 2.0 ** 0.25,
        "t_max": 800.0,
        "seed": 0,
        "out_dir": ".",
    }


def _parse_float(key: str, raw: str) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise ConfigError(f"key {key}: cannot parse {raw!r} as a number") from None
    if not math.isfinite(val):
        raise ConfigError(f"key {key}: value must be finite, got {raw!r}")
    return val


def _parse_lines(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = raw
    return entries


def parse_config(text: str, kind: str | None = None) -> ExperimentConfig:
    """Parse and validate a flat key-value config.

    `kind` (from the CLI subcommand) overrides any kind key in the text; one
    of the two must be present.
    """
    entries = _parse_lines(text)

    known = set(_FLOAT_KEYS) | set(_INT_KEYS) | set(_LIST_KEYS) | {
        "kind", "xi_center", "out_dir"}
    unknown = sorted(set(entries) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    cfg_kind = kind or entries.get("kind")
    if cfg_kind is None:
        raise ConfigError("missing required key: kind")
    if cfg_kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {cfg_kind!r}")

    values = _defaults(cfg_kind)
    values["kind"] = cfg_kind

    for key in _LIST_KEYS:
        if key in entries:
            parts = [p.strip() for p in entries[key].split(",") if p.strip()]
            if not parts:
                raise ConfigError(f"key {key}: empty value")
            values[key] = tuple(_parse_float(key, p) for p in parts)
    for key in _FLOAT_KEYS:
        if key in entries:
            values[key] = _parse_float(key, entries[key])
    for key in _INT_KEYS:
        if key in entries:
            raw = entries[key]
            try:
                values[key] = int(raw)
            except ValueError:
                raise ConfigError(f"key {key}: cannot parse {raw!r} as an integer") from None
    if "xi_center" in entries:
        parts = [p.strip() for p in entries["xi_center"].split(",") if p.strip()]
        values["xi_center"] = tuple(_parse_float("xi_center", p) for p in parts)
    if "out_dir" in entries:
        values["out_dir"] = entries["out_dir"]

    cfg = ExperimentConfig(
        kind=values["kind"],
        rho=values["rho"],
        gamma=values["gamma"],
        lam=values["lambda"],
        epsilon=values["epsilon"],
        dim=values["dim"],
        n_points=values["n_points"],
        half_length=values["half_length"],
        xi_center=values["xi_center"],
        xi_width=values["xi_width"],
        dt=values["dt"],
        t0=values["t0"],
        ratio=values["ratio"],
        t_max=values["t_max"],
        seed=values["seed"],
        out_dir=values["out_dir"],
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.kind != "sweep":
        for key, vals in (("rho", cfg.rho), ("gamma", cfg.gamma), ("lambda", cfg.lam)):
            if len(vals) != 1:
                raise ConfigError(
                    f"key {key}: comma lists are only allowed for kind = sweep")
    for r in cfg.rho:
        if not 0.5 <= r <= 1.0:
            raise ConfigError(f"key rho: value {r} outside [0.5, 1]")
    for g in cfg.gamma:
        if not g > 0:
            raise ConfigError(f"key gamma: value {g} must be positive")
    if not cfg.epsilon > 0:
        raise ConfigError(f"key epsilon: value {cfg.epsilon} must be positive")
    if cfg.dim not in (1, 2):
        raise ConfigError(f"key dim: must be 1 or 2, got {cfg.dim}")
    n = cfg.n_points
    if n < 8 or n & (n - 1):
        raise ConfigError(f"key n_points: must be a power of two >= 8, got {n}")
    if not cfg.half_length > 0:
        raise ConfigError(f"key half_length: must be positive, got {cfg.half_length}")
    if len(cfg.xi_center) != cfg.dim:
        raise ConfigError(
            f"key xi_center: needs {cfg.dim} components for dim = {cfg.dim}, "
            f"got {len(cfg.xi_center)}")
    if not cfg.xi_width > 0:
        raise ConfigError(f"key xi_width: must be positive, got {cfg.xi_width}")
    if not cfg.dt > 0:
        raise ConfigError(f"key dt: must be positive, got {cfg.dt}")
    if cfg.t0 < cfg.dt:
        raise ConfigError(f"key t0: must be at least dt = {cfg.dt}, got {cfg.t0}")
    if not cfg.ratio > 1:
        raise ConfigError(f"key ratio: must exceed 1, got {cfg.ratio}")
    if cfg.t_max < cfg.t0:
        raise ConfigError(f"key t_max: {cfg.t_max} is below t0 = {cfg.t0}")
    grid = cfg.grid()
    for params in cfg.combos():
        validate_no_wrap(grid, params, cfg.t_max, np.array(cfg.xi_center), cfg.xi_width)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render a config as flat key-value text; parse_config round-trips it."""
    lines = [
        f"kind = {cfg.kind}",
        f"rho = {','.join(_fmt(v) for v in cfg.rho)}",
        f"gamma = {','.join(_fmt(v) for v in cfg.gamma)}",
        f"lambda = {','.join(_fmt(v) for v in cfg.lam)}",
        f"epsilon = {_fmt(cfg.epsilon)}",
        f"dim = {cfg.dim}",
        f"n_points = {cfg.n_points}",
        f"half_length = {_fmt(cfg.half_length)}",
        f"xi_center = {','.join(_fmt(v) for v in cfg.xi_center)}",
        f"xi_width = {_fmt(cfg.xi_width)}",
        f"dt = {_fmt(cfg.dt)}",
        f"t0 = {_fmt(cfg.t0)}",
        f"ratio = {_fmt(cfg.ratio)}",
        f"t_max = {_fmt(cfg.t_max)}",
        f"seed = {cfg.seed}",
        f"out_dir = {cfg.out_dir}",
    ]
    return "\n".join(lines) + "\n"


def params_hash(cfg: ExperimentConfig) -> str:
    """Stable 12-hex digest of the physics content (kind and out_dir excluded)."""
    text = serialize_config(replace(cfg, kind="selftest", out_dir="."))
    body = "\n".join(
        line for line in text.splitlines()
        if not line.startswith(("kind =", "out_dir ="))
    )
    return hashlib.sha256(body.encode()).hexdigest()[:12]


def load_config(path: str, kind: str | None = None) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), kind=kind)
