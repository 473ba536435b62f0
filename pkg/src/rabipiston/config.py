"""Dimensionless unit system and run parameters.

Units: length ell, energy eps = hbar^2/(m ell^2), time tau = m ell^2/hbar and
pressure rho = N hbar^2/(m ell^3). The condensate wavefunction is normalised
to one, so the particle number N is absorbed into the couplings: ``g_s`` here
is g_s N/(eps ell) and pressures/energies are per-condensate quantities.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    """Malformed or invalid configuration. ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class SystemParams:
    g_s: float = 5.0
    g_c: float = 0.0
    delta: float = 5.0
    mass_ratio: float = 1000.0
    spring_k: float = 1.05
    v_left: float = 100.0
    v_piston: float = 10.0
    slope_s: float = 0.1
    domain: tuple[float, float] = (-2.0, 6.0)
    n_points: int = 2048
    dt_real: float = 2.5e-4
    dt_imag: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))
        object.__setattr__(self, "n_points", int(self.n_points))
        validate(self)

    @property
    def omega(self) -> float:
        """Bare spring frequency sqrt(k/M) in units 1/tau."""
        return math.sqrt(self.spring_k / self.mass_ratio)

    @property
    def dx(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.n_points

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def validate(p: SystemParams) -> None:
    """Raise ConfigError for the first violated invariant."""
    for key in ("g_s", "g_c", "delta"):
        if not getattr(p, key) >= 0:
            raise ConfigError(key, "must be >= 0")
    for key in ("mass_ratio", "spring_k", "slope_s", "dt_real", "dt_imag", "v_piston"):
        if not getattr(p, key) > 0:
            raise ConfigError(key, "must be > 0")
    if not p.v_left > p.v_piston:
        raise ConfigError("v_left", "must exceed v_piston")
    x0, x1 = p.domain
    if not x1 > x0:
        raise ConfigError("domain", "x_max must exceed x_min")
    n = p.n_points
    if n < 16 or n & (n - 1):
        raise ConfigError("n_points", "must be a power of two >= 16")
    if p.slope_s < 4 * (x1 - x0) / n:
        raise ConfigError("slope_s", "wall ramp must span at least 4 grid points")
    for key in (f.name for f in fields(p) if f.name != "domain"):
        if not math.isfinite(getattr(p, key)):
            raise ConfigError(key, "must be finite")


_FIELD_TYPES = {f.name: f.type for f in fields(SystemParams)}


def _parse_value(key: str, text: str):
    text = text.strip()
    try:
        if key == "domain":
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError
            return (float(parts[0]), float(parts[1]))
        if key == "n_points":
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse value {text!r}") from None


def parse_overrides(pairs, base: SystemParams | None = None) -> SystemParams:
    """Apply ``key=value`` strings (or ``(key, value)`` tuples) to ``base``."""
    changes = {}
    for item in pairs:
        if isinstance(item, str):
            if "=" not in item:
                raise ConfigError(item, "expected key=value")
            key, value = item.split("=", 1)
        else:
            key, value = item
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown parameter")
        changes[key] = _parse_value(key, str(value))
    base = base or SystemParams()
    try:
        return dataclasses.replace(base, **changes)
    except TypeError as exc:  # pragma: no cover - guarded by the key check
        raise ConfigError("?", str(exc)) from None


def loads_config(text: str) -> SystemParams:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value))
    return parse_overrides(pairs)


def load_config(path) -> SystemParams:
    """Read a ``key = value`` config file; missing keys keep their defaults."""
    return loads_config(Path(path).read_text())


def dumps_config(p: SystemParams) -> str:
    lines = []
    for f in fields(p):
        value = getattr(p, f.name)
        if f.name == "domain":
            lines.append(f"domain = {value[0]!r}, {value[1]!r}")
        else:
            lines.append(f"{f.name} = {value!r}")
    return "\n".join(lines) + "\n"


def save_config(p: SystemParams, path) -> None:
    Path(path).write_text(dumps_config(p))
