"""Trap drive profiles, the complex mode equation and Mathieu stability.

All quantities are dimensionless (hbar = m = 1, e/r0^2 absorbed into the
drive amplitudes).  The mode function ``eps`` solves

    eps'' + Omega(t) eps = 0,   eps eps'* - eps' eps* = -2i,

and generates both the classical trajectories and the time-dependent ladder
operators built in :mod:`qtrap.ladder`.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ComplexLeak,
    NonCanonicalInitialConditions,
    OutOfInterval,
    StepFailure,
    ZeroCrossing,
)

CANONICAL_WRONSKIAN = -2j
DEFAULT_TOL = 1e-10
ZERO_GUARD = 1e-8
# Per-step tolerance relative to the requested one: local errors accumulate over
# many drive periods, and tol/10 keeps the global error below tol for ~10 periods.
STEP_SAFETY = 0.1


class Axis(str, enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


def _axis(value) -> Axis:
    return value if isinstance(value, Axis) else Axis(str(value).upper())


@dataclass(frozen=True)
class TrapConfig:
    """Drive parameters for one trap axis.

    ``Omega_z(t) = -2 (v_dc - v_ac cos w(t - t0))`` and the transverse axes
    carry ``+(v_dc - v_ac cos w(t - t0))`` so the three coefficients sum to zero.
    """

    v_dc: float = 0.0
    v_ac: float = 0.0
    omega: float = 1.0
    t0: float = 0.0
    axis: Axis = Axis.Z

    def __post_init__(self):
        object.__setattr__(self, "axis", _axis(self.axis))
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        for name in ("v_dc", "v_ac", "t0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_dict(cls, data: dict) -> "TrapConfig":
        if {"a", "q"} <= data.keys():
            return cls.from_mathieu(
                data["a"], data["q"], data.get("omega", 2.0),
                axis=data.get("axis", "Z"), t0=data.get("t0", 0.0),
            )
        known = {"v_dc", "v_ac", "omega", "t0", "axis"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown trap fields: {sorted(unknown)}")
        return cls(**{k: (v if k == "axis" else float(v)) for k, v in data.items()})

    def to_dict(self) -> dict:
        return {"v_dc": self.v_dc, "v_ac": self.v_ac, "omega": self.omega,
                "t0": self.t0, "axis": self.axis.value}

    @classmethod
    def from_mathieu(cls, a: float, q: float, omega: float, axis="Z", t0: float = 0.0):
        """Inverse of :func:`mathieu_params`."""
        axis = _axis(axis)
        w2 = omega * omega
        if axis is Axis.Z:
            return cls(v_dc=-a * w2 / 8.0, v_ac=-q * w2 / 4.0, omega=omega, t0=t0, axis=axis)
        return cls(v_dc=a * w2 / 4.0, v_ac=q * w2 / 2.0, omega=omega, t0=t0, axis=axis)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


def drive(cfg: TrapConfig, t):
    """Applied ring/end-cap potential ``v_dc - v_ac cos w(t - t0)``."""
    return cfg.v_dc - cfg.v_ac * np.cos(cfg.omega * (np.asarray(t) - cfg.t0))


def omega_profile(cfg: TrapConfig, t):
    """Spring coefficient Omega(t) of the requested axis (Omega = 2 f)."""
    v = drive(cfg, t)
    out = -2.0 * v if cfg.axis is Axis.Z else v
    return float(out) if np.ndim(out) == 0 else out


def mathieu_params(cfg: TrapConfig) -> tuple[float, float]:
    """Mathieu ``(a, q)`` with ``Omega(t) = (w^2/4)(a - 2q cos w(t - t0))``."""
    w2 = cfg.omega ** 2
    if cfg.axis is Axis.Z:
        return -8.0 * cfg.v_dc / w2, -4.0 * cfg.v_ac / w2
    return 4.0 * cfg.v_dc / w2, 2.0 * cfg.v_ac / w2


def profile_for(cfg: TrapConfig) -> Callable[[float], float]:
    """Closure ``t -> Omega(t)`` suitable for :func:`integrate_epsilon`."""
    c = -2.0 if cfg.axis is Axis.Z else 1.0
    v_dc, v_ac, w, t0 = cfg.v_dc, cfg.v_ac, cfg.omega, cfg.t0

    def profile(t):
        return c * (v_dc - v_ac * math.cos(w * (t - t0)))

    return profile


def mathieu_profile(a: float, q: float, omega: float, t0: float = 0.0):
    quarter = omega * omega / 4.0

    def profile(t):
        return quarter * (a - 2.0 * q * math.cos(omega * (t - t0)))

    return profile


def constant_profile(value: float):
    def profile(t):
        return value

    return profile


def _wronskian(eps, deps):
    return eps * np.conj(deps) - deps * np.conj(eps)


@dataclass(frozen=True, eq=False)
class ModeSolution:
    """Integrated complex mode pair on ``[t0, t1]``.

    ``t``, ``eps`` and ``deps`` hold the accepted integrator steps; calling the
    object evaluates the dense interpolant at arbitrary times.
    """

    t0: float
    t1: float
    eps0: complex
    deps0: complex
    tol: float
    t: np.ndarray
    eps: np.ndarray
    deps: np.ndarray
    profile: Callable[[float], float] = field(repr=False)
    _dense: object = field(repr=False)

    def contains(self, t) -> bool:
        slack = 1e-12 * max(1.0, abs(self.t0), abs(self.t1))
        t = np.asarray(t)
        return bool(np.all((t >= self.t0 - slack) & (t <= self.t1 + slack)))

    def __call__(self, t):
        """Return ``(eps(t), deps(t))``; vectorised over ``t``."""
        if not self.contains(t):
            raise OutOfInterval(f"t={t!r} outside [{self.t0}, {self.t1}]")
        y = self._dense(np.clip(np.asarray(t, dtype=float), self.t0, self.t1))
        eps = y[0] + 1j * y[1]
        deps = y[2] + 1j * y[3]
        if np.ndim(t) == 0:
            return complex(eps), complex(deps)
        return eps, deps

    @property
    def wronskian_error(self) -> np.ndarray:
        """``|W + 2i|`` at the stored samples."""
        return np.abs(_wronskian(self.eps, self.deps) - CANONICAL_WRONSKIAN)


def _mode_rhs(profile):
    def rhs(t, y):
        w = profile(t)
        if not math.isfinite(w):
            # a nan drive would make the step controller shrink forever
            raise StepFailure(f"drive is not finite at t={t}")
        return [y[2], y[3], -w * y[0], -w * y[1]]

    return rhs


def integrate_epsilon(
    profile: Callable[[float], float],
    t0: float,
    t1: float,
    eps0: complex = 1.0,
    deps0: complex = 1j,
    tol: float = DEFAULT_TOL,
    *,
    wronskian_tol: float = 1e-12,
    max_step: float = np.inf,
) -> ModeSolution:
    """Integrate ``eps'' + Omega(t) eps = 0`` from ``t0`` to ``t1``.

    The initial pair must be Wronskian-canonical (``W = -2i``); the default
    ``(1, i)`` reduces to ``exp(it)`` for the static oscillator.

    Raises
    ------
    NonCanonicalInitialConditions
        ``|W(eps0, deps0) + 2i| > wronskian_tol``.
    ZeroCrossing
        ``|eps|`` fell below ``1e-8`` at an accepted step.
    StepFailure
        The adaptive integrator could not meet ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    eps0, deps0 = complex(eps0), complex(deps0)
    w0 = _wronskian(eps0, deps0)
    if abs(w0 - CANONICAL_WRONSKIAN) > wronskian_tol:
        raise NonCanonicalInitialConditions(f"Wronskian of initial data is {w0}, expected -2i")

    y0 = [eps0.real, eps0.imag, deps0.real, deps0.imag]
    res = solve_ivp(
        _mode_rhs(profile), (t0, t1), y0, method="DOP853",
        rtol=tol * STEP_SAFETY, atol=tol * STEP_SAFETY, dense_output=True, max_step=max_step,
    )
    if res.status != 0 or not np.all(np.isfinite(res.y)):
        raise StepFailure(res.message)
    eps = res.y[0] + 1j * res.y[1]
    deps = res.y[2] + 1j * res.y[3]
    small = np.abs(eps) < ZERO_GUARD
    if np.any(small):
        raise ZeroCrossing(f"|eps| < {ZERO_GUARD} at t={res.t[np.argmax(small)]}")
    for arr in (res.t, eps, deps):
        arr.setflags(write=False)
    return ModeSolution(t0=float(t0), t1=float(t1), eps0=eps0, deps0=deps0, tol=tol,
                        t=res.t, eps=eps, deps=deps, profile=profile, _dense=res.sol)


def extend(sol: ModeSolution, t2: float, tol: float | None = None) -> ModeSolution:
    """Restart integration from the end of ``sol`` and carry it on to ``t2``.

    The restart data have already drifted, so the Wronskian check uses the
    drift bound instead of the strict 1e-12 test applied to fresh data.
    """
    tol = sol.tol if tol is None else tol
    bound = 50 * sol.tol * (1 + abs(sol.t1 - sol.t0))
    return integrate_epsilon(sol.profile, sol.t1, t2, sol.eps[-1], sol.deps[-1], tol,
                             wronskian_tol=max(bound, 1e-12))


def wronskian(sol: ModeSolution, t):
    eps, deps = sol(t)
    return _wronskian(eps, deps)


def _real_or_leak(value, what):
    value = np.asarray(value)
    leak = np.abs(value.imag) > 1e-9 * (1 + np.abs(value.real))
    if np.any(leak):
        raise ComplexLeak(f"{what} has imaginary part {np.max(np.abs(value.imag)):.3e}")
    re = value.real
    return float(re) if re.ndim == 0 else re


def classical_trajectory(sol: ModeSolution, z0: float, p0: float, t):
    """Classical ``(z_cl(t), p_cl(t))`` assembled from the mode function."""
    e0, de0 = sol.eps0, sol.deps0
    eps, deps = sol(t)
    ec, dec = np.conj(eps), np.conj(deps)
    z = 0.5j * ((ec * e0 - eps * np.conj(e0)) * p0 + (eps * np.conj(de0) - ec * de0) * z0)
    p = 0.5j * ((dec * e0 - deps * np.conj(e0)) * p0 + (deps * np.conj(de0) - dec * de0) * z0)
    return _real_or_leak(z, "z_cl"), _real_or_leak(p, "p_cl")


@dataclass(frozen=True)
class StabilityVerdict:
    """Floquet classification of one Mathieu point.

    ``determinant`` is the product of the sub-period propagator determinants,
    which equals ``det(monodromy)`` without the cancellation a direct 2x2
    determinant suffers when the entries are large.
    """

    a_param: float
    q_param: float
    monodromy_trace: float
    stable: bool
    growth_exponent: float
    marginal: bool = False
    determinant: float = 1.0
    monodromy: tuple = ()


def _propagator(a, q, omega, t_start, t_end, tol):
    quarter = omega * omega / 4.0

    def rhs(t, y):
        w = quarter * (a - 2.0 * q * math.cos(omega * t))
        return [y[1], -w * y[0], y[3], -w * y[2]]

    res = solve_ivp(rhs, (t_start, t_end), [1.0, 0.0, 0.0, 1.0], method="DOP853",
                    rtol=tol, atol=tol * 1e-2)
    if res.status != 0 or not np.all(np.isfinite(res.y)):
        raise StepFailure(res.message)
    y = res.y[:, -1]
    return np.array([[y[0], y[2]], [y[1], y[3]]])


def floquet_stability(
    a_param: float,
    q_param: float,
    omega: float = 2.0,
    tol: float = DEFAULT_TOL,
    *,
    pieces: int = 8,
    marginal_tol: float = 1e-7,
    coexistence_tol: float = 1e-6,
) -> StabilityVerdict:
    """Classify ``y'' + (w^2/4)(a - 2q cos wt) y = 0`` by its monodromy trace.

    ``|trace| < 2`` is stable.  Within ``marginal_tol`` of ``|trace| = 2`` the
    point is marginal and reported unstable with zero growth, except when the
    monodromy is ``+-I`` (coexistence: every solution is periodic, so bounded).
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    period = 2.0 * math.pi / omega
    edges = np.linspace(0.0, period, pieces + 1)
    mono = np.eye(2)
    det = 1.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece = _propagator(a_param, q_param, omega, lo, hi, tol)
        det *= piece[0, 0] * piece[1, 1] - piece[0, 1] * piece[1, 0]
        mono = piece @ mono
    trace = float(mono[0, 0] + mono[1, 1])
    half = abs(trace) / 2.0
    marginal = abs(abs(trace) - 2.0) <= marginal_tol
    if marginal:
        sign = math.copysign(1.0, trace)
        stable = bool(np.max(np.abs(mono - sign * np.eye(2))) <= coexistence_tol)
        growth = 0.0
    elif half < 1.0:
        stable, growth = True, 0.0
    else:
        stable, growth = False, math.acosh(half)
    return StabilityVerdict(
        a_param=float(a_param), q_param=float(q_param), monodromy_trace=trace,
        stable=stable, growth_exponent=growth, marginal=marginal and not stable,
        determinant=float(det), monodromy=tuple(map(tuple, mono.tolist())),
    )


def stability_sweep(
    a_values: Sequence[float],
    q_values: Sequence[float],
    omega: float = 2.0,
    tol: float = DEFAULT_TOL,
    threads: int | None = None,
) -> list:
    """Row-major sweep (``q`` outer, ``a`` inner); failed points come back as exceptions."""
    points = [(a, q) for q in q_values for a in a_values]

    def one(point):
        try:
            return floquet_stability(point[0], point[1], omega, tol)
        except StepFailure as exc:
            return exc

    if threads == 1:
        return [one(p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, points))


def sample_times(t0: float, t1: float, n: int) -> np.ndarray:
    return np.linspace(t0, t1, n)


def solve_config(cfg: TrapConfig, t_end: float, tol: float = DEFAULT_TOL) -> ModeSolution:
    """Canonical-IC mode solution for a trap config from ``cfg.t0`` to ``t_end``."""
    return integrate_epsilon(profile_for(cfg), cfg.t0, t_end, 1.0, 1j, tol)


def iter_rows(sol: ModeSolution, times: Iterable[float]):
    """Rows ``(t, re_eps, im_eps, re_deps, im_deps, wronskian_err)``."""
    for t in times:
        e, d = sol(float(t))
        yield (float(t), e.real, e.imag, d.real, d.imag, abs(_wronskian(e, d) - CANONICAL_WRONSKIAN))
