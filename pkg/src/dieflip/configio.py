"""Flat key=value configuration files for the plate kernel and run settings.

Lines look like ``roll_annulus_mean = 25.0``; blank lines and ``#`` comments
are ignored.  Solenoid positions are the seven keys ``solenoid_0`` ..
``solenoid_6`` with ``x,y`` values.  Any key not listed below is rejected.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

from .simulator import PlateConfig, default_config


class ConfigError(ValueError):
    """Invalid configuration file content."""


_PLATE_SCALARS = {
    "corral_inradius": float,
    "corral_rotation_deg": float,
    "wall_restitution": float,
    "center_authority_scale": float,
    "roll_annulus_mean": float,
    "roll_annulus_sd": float,
    "far_authority_floor": float,
    "direction_noise_sd": float,
    "strike_twist_step_deg": float,
    "translation_scale": float,
    "translation_decay": float,
    "double_roll_prob": float,
    "leaner_prob": float,
    "obs_noise_xy": float,
    "obs_noise_theta": float,
    "wall_align_rate": float,
    "wall_align_band_mm": float,
    "floor_align_rate": float,
    "floor_grain_deg": float,
}


@dataclass
class RunConfig:
    """Runtime settings shared by the CLI subcommands."""

    radius: float = 8.0
    w: float = 1.0
    angle_mode: str = "wrapped"
    min_support: int = 3
    policy: str = "greedy"
    task: str = "target"
    n_trials: int = 60000
    n_goals: int = 2000
    max_impulses: int = 10
    rollout_cap: int = 50
    seed: int = 0


_RUN_TYPES = {
    "radius": float,
    "w": float,
    "angle_mode": str,
    "min_support": int,
    "policy": str,
    "task": str,
    "n_trials": int,
    "n_goals": int,
    "max_impulses": int,
    "rollout_cap": int,
    "seed": int,
}


def serialize_plate_config(config: PlateConfig) -> str:
    lines = []
    for i, (x, y) in enumerate(config.solenoid_xy):
        lines.append(f"solenoid_{i} = {x!r},{y!r}")
    for name in _PLATE_SCALARS:
        lines.append(f"{name} = {getattr(config, name)!r}")
    return "\n".join(lines) + "\n"


def config_digest(config: PlateConfig) -> str:
    """Short stable digest of the kernel parameters, used for provenance."""
    return hashlib.sha256(serialize_plate_config(config).encode()).hexdigest()[:12]


def _parse_lines(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def parse_config_text(text: str) -> tuple[PlateConfig, RunConfig]:
    """Parse a config file into plate and run settings, starting from
    defaults.  Raises ConfigError on unknown keys or bad values."""
    entries = _parse_lines(text)
    plate_kwargs = {f.name: getattr(default_config(), f.name) for f in fields(PlateConfig)}
    solenoids = list(plate_kwargs["solenoid_xy"])
    run = RunConfig()

    for key, value in entries.items():
        try:
            if key.startswith("solenoid_"):
                idx = int(key.removeprefix("solenoid_"))
                if not 0 <= idx < 7:
                    raise ConfigError(f"invalid config key: {key!r}")
                xs, ys = value.split(",")
                solenoids[idx] = (float(xs), float(ys))
            elif key in _PLATE_SCALARS:
                plate_kwargs[key] = _PLATE_SCALARS[key](value)
            elif key in _RUN_TYPES:
                setattr(run, key, _RUN_TYPES[key](value))
            else:
                raise ConfigError(f"invalid config key: {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc

    plate_kwargs["solenoid_xy"] = tuple(solenoids)
    try:
        plate = PlateConfig(**plate_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return plate, run


def read_config(path) -> tuple[PlateConfig, RunConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def write_config(config: PlateConfig, path, run: RunConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_plate_config(config))
        if run is not None:
            for name in _RUN_TYPES:
                fh.write(f"{name} = {getattr(run, name)}\n")
