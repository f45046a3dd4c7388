"""Run configuration: one JSON document, sections per concern."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dynamics import DEFAULT_TOL, TrapConfig
from .errors import ConfigError

# sections each command cannot run without
REQUIRED = {
    "stability": ("sweep",),
    "evolve": ("trap", "integration"),
    "uncertainty": ("trap", "integration"),
    "duality": ("trap", "integration", "oracle"),
    "verify": ("oracle",),
}


def parse_complex(value) -> complex:
    """Accept ``1.5``, ``[re, im]``, ``{"re": .., "im": ..}`` or ``"0.5+0.5j"``."""
    try:
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, dict):
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return complex(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {value!r} as a complex number") from exc


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def _pair(name, value):
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{name} must be a two-element list")
    lo, hi = float(value[0]), float(value[1])
    if not lo <= hi:
        raise ConfigError(f"{name} must be increasing")
    return lo, hi


@dataclass(frozen=True)
class IntegrationConfig:
    t_end: float
    tol: float = DEFAULT_TOL
    samples: int = 201

    @classmethod
    def from_dict(cls, data: dict, trap: TrapConfig | None) -> "IntegrationConfig":
        data = dict(data)
        if "periods" in data:
            if trap is None:
                raise ConfigError("integration.periods needs a trap section")
            data["t_end"] = trap.t0 + float(data.pop("periods")) * trap.period
        if "t_end" not in data:
            raise ConfigError("integration.t_end (or integration.periods) is required")
        tol = _positive("integration.tol", data.get("tol", DEFAULT_TOL))
        samples = int(data.get("samples", 201))
        if samples < 2:
            raise ConfigError("integration.samples must be at least 2")
        return cls(float(data["t_end"]), tol, samples)


@dataclass(frozen=True)
class StateConfig:
    z0: float = 0.0
    p0: float = 0.0
    alpha: complex = 1.0 + 0.0j

    @classmethod
    def from_dict(cls, data: dict) -> "StateConfig":
        return cls(float(data.get("z0", 0.0)), float(data.get("p0", 0.0)),
                   parse_complex(data.get("alpha", 1.0)))


@dataclass(frozen=True)
class GridConfig:
    span_sigmas: float = 12.0
    points_per_sigma: float = 16.0

    @classmethod
    def from_dict(cls, data: dict) -> "GridConfig":
        return cls(_positive("grid.span_sigmas", data.get("span_sigmas", 12.0)),
                   _positive("grid.points_per_sigma", data.get("points_per_sigma", 16.0)))


@dataclass(frozen=True)
class OracleConfig:
    N: int = 60
    # None: each command's own default
    tolerance: float | None = None
    r: float | None = None
    theta: float = 0.0

    @classmethod
    def from_dict(cls, data: dict) -> "OracleConfig":
        N = int(data.get("N", 60))
        if N < 2:
            raise ConfigError("oracle.N must be at least 2")
        r = data.get("r")
        if r is not None and not (math.isfinite(r) and r >= 0):
            raise ConfigError("oracle.r must be non-negative")
        tol = data.get("tolerance")
        return cls(N, None if tol is None else _positive("oracle.tolerance", tol),
                   None if r is None else float(r), float(data.get("theta", 0.0)))


@dataclass(frozen=True)
class SweepConfig:
    a_range: tuple[float, float]
    q_range: tuple[float, float]
    resolution: tuple[int, int]
    omega: float = 2.0
    tol: float = DEFAULT_TOL

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        res = data.get("resolution", 21)
        na, nq = (res, res) if isinstance(res, int) else tuple(res)
        a_range = _pair("sweep.a_range", data.get("a_range", (-2.0, 2.0)))
        q_range = _pair("sweep.q_range", data.get("q_range", (0.0, 2.0)))
        # a degenerate range is a single column
        na = 1 if a_range[0] == a_range[1] else int(na)
        nq = 1 if q_range[0] == q_range[1] else int(nq)
        if min(na, nq) < 1 or (na < 2 and a_range[0] != a_range[1]) or (nq < 2 and q_range[0] != q_range[1]):
            raise ConfigError("sweep.resolution must be at least 2 along a non-degenerate range")
        return cls(a_range, q_range, (na, nq), _positive("sweep.omega", data.get("omega", 2.0)),
                   _positive("sweep.tol", data.get("tol", DEFAULT_TOL)))


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "OutputConfig":
        fmt = str(data.get("format", "csv")).lower()
        if fmt not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {fmt!r}")
        return cls(fmt, data.get("path"))


@dataclass(frozen=True)
class RunConfig:
    trap: TrapConfig | None = None
    integration: IntegrationConfig | None = None
    state: StateConfig = field(default_factory=StateConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    oracle: OracleConfig | None = None
    sweep: SweepConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"trap", "integration", "state", "grid", "oracle", "sweep", "output"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        try:
            trap = TrapConfig.from_dict(data["trap"]) if "trap" in data else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"trap: {exc}") from exc
        try:
            return cls(
                trap=trap,
                integration=(IntegrationConfig.from_dict(data["integration"], trap)
                             if "integration" in data else None),
                state=StateConfig.from_dict(data.get("state", {})),
                grid=GridConfig.from_dict(data.get("grid", {})),
                oracle=OracleConfig.from_dict(data["oracle"]) if "oracle" in data else None,
                sweep=SweepConfig.from_dict(data["sweep"]) if "sweep" in data else None,
                output=OutputConfig.from_dict(data.get("output", {})),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(str(exc)) from exc

    def require(self, command: str) -> "RunConfig":
        missing = [s for s in REQUIRED[command] if getattr(self, s) is None]
        if missing:
            raise ConfigError(f"{command} needs config section(s): {', '.join(missing)}")
        return self

    def to_dict(self) -> dict:
        out = {}
        for name in ("trap", "integration", "state", "grid", "oracle", "sweep", "output"):
            part = getattr(self, name)
            if part is None:
                continue
            d = part.to_dict() if hasattr(part, "to_dict") else asdict(part)
            if name == "state":
                d["alpha"] = [d["alpha"].real, d["alpha"].imag]
            out[name] = d
        return out


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``section.key=value`` overrides; values are parsed as JSON when possible."""
    data = json.loads(json.dumps(data))
    for item in overrides:
        key, sep, raw = item.partition("=")
        parts = key.strip().split(".")
        if not sep or len(parts) != 2 or not all(parts):
            raise ConfigError(f"override {item!r} must look like section.key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        data.setdefault(parts[0], {})[parts[1]] = value
    return data


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(apply_overrides(data, overrides or []))
