"""Run configuration: defaults, key=value files, and the config digest."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .spectrum import AMU, SolverSettings, TrapConfig

FORMATS = ("csv", "csv+svg")

# key -> (attribute, parser); dashes and underscores are interchangeable
_KEYS = {
    "n": ("n_particles", int),
    "mass_amu": ("mass_amu", float),
    "omega_hz": ("omega_hz", float),
    "lambda": ("lam", float),
    "z1": ("z1", float),
    "levels": ("levels", int),
    "out_dir": ("out_dir", Path),
    "format": ("fmt", str),
    "m1": ("m1", int),
    "m2": ("m2", int),
    "cache_dir": ("cache_dir", Path),
    "temperature": ("temperature", float),
    "t_over_tc0": ("t_over_tc0", float),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``start, start + step, ..., stop`` (inclusive)."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not (self.step > 0 and self.stop > self.start):
            raise ConfigError(f"grid must be nonempty and increasing: {self}")

    def values(self) -> np.ndarray:
        k = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        # rounding keeps 0.1-type steps from drifting in the last bits
        return np.round(self.start + self.step * np.arange(k + 1), 12)

    def __len__(self) -> int:
        return len(self.values())


@dataclass(frozen=True)
class RunConfig:
    n_particles: int = 10_000
    mass_amu: float = 23.0
    omega_hz: float = 21.0
    lam: float = 32.0
    z1: float = 0.0
    levels: int | None = None
    m1: int = 512
    m2: int = 8192
    z1_grid: Grid = Grid(0.0, 8.0, 0.1)
    t_grid: Grid = Grid(0.02, 1.5, 0.02)
    z_grid: Grid = Grid(-6.0, 6.0, 0.01)
    fig2_positions: tuple[float, ...] = (0.0, 1.0)
    fig5_lam: float = 3.6
    fig5_z1: float = 1.0
    temperature: float | None = None
    t_over_tc0: float | None = None
    out_dir: Path = Path("out")
    cache_dir: Path | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if self.n_particles < 2:
            raise ConfigError("n must be >= 2")
        if not (self.mass_amu > 0 and self.omega_hz > 0):
            raise ConfigError("mass and frequency must be positive")
        if self.m1 < 1 or self.m2 < self.m1:
            raise ConfigError("need 1 <= m1 <= m2")
        if self.levels is not None and self.levels < 1:
            raise ConfigError("levels must be >= 1")

    @property
    def trap(self) -> TrapConfig:
        return TrapConfig(mass=self.mass_amu * AMU, omega=2.0 * math.pi * self.omega_hz,
                          n_particles=self.n_particles)

    @property
    def solver(self) -> SolverSettings:
        return SolverSettings(exact_levels=self.m1, perturbative_levels=self.m2)

    @property
    def level_count(self) -> int:
        return self.levels if self.levels is not None else self.m2

    @property
    def svg(self) -> bool:
        return self.fmt == "csv+svg"

    @property
    def cache_path(self) -> Path:
        return self.cache_dir if self.cache_dir is not None else self.out_dir / "cache"

    def physics(self) -> dict:
        """Everything that affects numbers in the output, in canonical form."""
        def h(x):
            return float(x).hex()

        return {
            "n": self.n_particles, "mass_amu": h(self.mass_amu), "omega_hz": h(self.omega_hz),
            "lambda": h(self.lam), "z1": h(self.z1), "levels": self.level_count,
            "solver": self.solver.digest(),
            "z1_grid": [h(v) for v in (self.z1_grid.start, self.z1_grid.stop, self.z1_grid.step)],
            "t_grid": [h(v) for v in (self.t_grid.start, self.t_grid.stop, self.t_grid.step)],
            "z_grid": [h(v) for v in (self.z_grid.start, self.z_grid.stop, self.z_grid.step)],
            "fig2_positions": [h(v) for v in self.fig2_positions],
            "fig5": [h(self.fig5_lam), h(self.fig5_z1)],
        }

    def digest(self) -> str:
        blob = json.dumps(self.physics(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return replace(self, **kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """``key=value`` lines to RunConfig field overrides; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        name = _normalize_key(key)
        if name not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        attr, conv = _KEYS[name]
        try:
            out[attr] = conv(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {value!r} for {key!r}") from None
    return out


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config_text(text, str(path))
