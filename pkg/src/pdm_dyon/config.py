"""Scenario configuration: ``key = value`` files with ``#`` comments.

Half-integers are written as fractions (``m = 13/2``) and parsed exactly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .pdm_core import ORDERINGS, MappingParams
from .specfun import HalfInt
from .target_system import ALPHA_FS, QuantumNumbers


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


def _parse_real(text: str) -> float:
    return float(Fraction(text.strip()))


def _parse_int(text: str) -> int:
    value = Fraction(text.strip())
    if value.denominator != 1:
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _parse_sign(text: str) -> int:
    value = _parse_int(text)
    if value not in (1, -1):
        raise ValueError(f"expected +1 or -1, got {text!r}")
    return value


def _parse_ordering(text: str) -> str:
    key = text.strip().lower()
    if key not in ORDERINGS:
        raise ValueError(f"unknown ordering {text!r}; choose from {', '.join(ORDERINGS)}")
    return key


def _parse_optional_real(text: str) -> float | None:
    if text.strip().lower() in ("none", "off", ""):
        return None
    return _parse_real(text)


@dataclass(frozen=True)
class ScenarioConfig:
    mu: HalfInt = HalfInt(14)
    m: HalfInt = HalfInt(13)
    j: HalfInt | None = None
    N: int = 0
    n: int = -1800
    alpha_fs: float = ALPHA_FS
    m0: float = 1.0
    theta0_deg: float = 30.0
    r_i: float = 0.20
    M_i: float = 1.0
    dM_i: float = 0.0
    r_min: float = 0.01
    r_max: float = 0.50
    ordering: str = "zhu-kroemer"
    sigma_r_eigenvalue: int = 1
    radial_sign: int = -1
    rel_tol: float = 1e-10
    abs_tol: float = 1e-16
    blowup_threshold: float = 1e6
    mass_floor: float | None = 1e-8
    crossing_threshold: float = 10.0
    agreement_lo: float = 0.25
    agreement_tol: float = 0.05
    grid_points: int = 500
    residual_samples: int = 200
    fd_step: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu", HalfInt.of(self.mu))
        object.__setattr__(self, "m", HalfInt.of(self.m))
        j = self.mu - HalfInt(1) if self.j is None else HalfInt.of(self.j)
        object.__setattr__(self, "j", j)
        problems = []
        if j != self.mu - HalfInt(1):
            problems.append(f"j must equal mu - 1/2 (= {self.mu - HalfInt(1)}), got {j}")
        if not self.r_min < self.r_i < self.r_max:
            problems.append(f"need r_min < r_i < r_max, got {self.r_min}, {self.r_i}, {self.r_max}")
        if self.r_min <= 0:
            problems.append("r_min must be positive")
        if not 0.0 < self.theta0_deg < 180.0:
            problems.append(f"theta0_deg must lie in (0, 180), got {self.theta0_deg}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            problems.append("tolerances must be positive")
        if self.mass_floor is not None and self.M_i <= self.mass_floor:
            problems.append("M_i must exceed mass_floor")
        if self.grid_points < 2 or self.residual_samples < 1:
            problems.append("grid_points >= 2 and residual_samples >= 1 required")
        if problems:
            raise ConfigError("; ".join(problems))
        try:
            self.quantum_numbers()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def theta0(self) -> float:
        return math.radians(self.theta0_deg)

    def quantum_numbers(self, **changes) -> QuantumNumbers:
        base = dict(mu=self.mu, m=self.m, N=self.N, n=self.n, alpha_fs=self.alpha_fs,
                    m0=self.m0, j=self.j)
        base.update(changes)
        return QuantumNumbers(**base)

    def mapping_params(self, **changes) -> MappingParams:
        return MappingParams(self.quantum_numbers(**changes), self.theta0,
                             ORDERINGS[self.ordering], self.sigma_r_eigenvalue, self.radial_sign)

    def replace(self, **changes) -> "ScenarioConfig":
        if "mu" in changes and "j" not in changes:
            changes["j"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = str(value) if isinstance(value, HalfInt) else value
        return out

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key} = {'none' if value is None else value}")
        return "\n".join(lines) + "\n"


_PARSERS = {
    "mu": HalfInt.of,
    "m": HalfInt.of,
    "j": HalfInt.of,
    "N": _parse_int,
    "n": _parse_int,
    "alpha_fs": _parse_real,
    "m0": _parse_real,
    "theta0_deg": _parse_real,
    "r_i": _parse_real,
    "M_i": _parse_real,
    "dM_i": _parse_real,
    "r_min": _parse_real,
    "r_max": _parse_real,
    "ordering": _parse_ordering,
    "sigma_r_eigenvalue": _parse_sign,
    "radial_sign": _parse_sign,
    "rel_tol": _parse_real,
    "abs_tol": _parse_real,
    "blowup_threshold": _parse_real,
    "mass_floor": _parse_optional_real,
    "crossing_threshold": _parse_real,
    "agreement_lo": _parse_real,
    "agreement_tol": _parse_real,
    "grid_points": _parse_int,
    "residual_samples": _parse_int,
    "fd_step": _parse_real,
    "seed": _parse_int,
}


def parse_assignment(text: str, line: int | None = None, source: str | None = None):
    """Parse one ``key = value`` (or ``key=value``) into (key, typed value)."""
    if "=" not in text:
        raise ConfigError(f"expected 'key = value', got {text.strip()!r}", line, source)
    key, _, raw = text.partition("=")
    key = key.strip()
    if key not in _PARSERS:
        raise ConfigError(f"unknown key {key!r}", line, source)
    try:
        return key, _PARSERS[key](raw)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}", line, source) from None


def parse_config_text(text: str, source: str | None = None) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, value = parse_assignment(body, lineno, source)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        values[key] = value
    return values


def load_config(path: str | Path | None = None, overrides: list[str] = ()) -> ScenarioConfig:
    values = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        values.update(parse_config_text(text, str(path)))
    for item in overrides:
        key, value = parse_assignment(item, source="--set")
        values[key] = value
    return ScenarioConfig(**values)
