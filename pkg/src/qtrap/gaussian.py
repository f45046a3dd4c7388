"""Gaussian coherent states of the driven oscillator and their moments.

The coherent state of ``A(t)`` is

    Psi(z, t) ~ exp[-w (z - z_cl)^2 / 2 + i z p_cl],   w = -i eps'/eps,

with ``w = (1 - i phi'/2) / phi`` and ``phi = |eps|^2``.  It is a minimum
uncertainty state for ``(Z, P)`` but, read in ``(z, p)``, a squeezed state whose
complex squeeze factor is ``B = 1/w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dynamics import ZERO_GUARD, ModeSolution, classical_trajectory
from .errors import DegenerateMoments, GridTooCoarse, ZeroCrossing
from .ladder import quadratures_from_mode


@dataclass(frozen=True)
class GaussianState:
    z_cl: float
    p_cl: float
    width: complex
    phi: float
    phi_dot: float
    t: float = 0.0

    def __post_init__(self):
        if not (self.phi > 0 and self.width.real > 0):
            raise ValueError("state is not normalisable: need phi > 0 and Re(width) > 0")

    @classmethod
    def from_width(cls, z_cl, p_cl, width: complex, t: float = 0.0) -> "GaussianState":
        """Build from ``w`` alone, recovering ``phi = 1/Re w`` and ``phi' = -2 Im w / Re w``."""
        width = complex(width)
        return cls(float(z_cl), float(p_cl), width, 1.0 / width.real,
                   -2.0 * width.imag / width.real, float(t))

    @property
    def sigma_z(self) -> float:
        return math.sqrt(self.phi / 2.0)

    @property
    def sigma_p(self) -> float:
        return math.sqrt((1.0 + self.phi_dot ** 2 / 4.0) / (2.0 * self.phi))


def coherent_state(sol: ModeSolution, t: float, z0: float = 0.0, p0: float = 0.0) -> GaussianState:
    eps, deps = sol(t)
    if abs(eps) < ZERO_GUARD:
        raise ZeroCrossing(f"|eps({t})| = {abs(eps):.3e}")
    z_cl, p_cl = classical_trajectory(sol, z0, p0, t)
    phi = abs(eps) ** 2
    phi_dot = 2.0 * (eps.conjugate() * deps).real
    return GaussianState(z_cl, p_cl, -1j * deps / eps, phi, phi_dot, float(t))


@dataclass(frozen=True)
class MomentSet:
    mean_z: float
    mean_p: float
    var_z: float
    var_p: float
    cov_zp: float

    @property
    def schrodinger_gap(self) -> float:
        """``var_z var_p - cov^2 - 1/4``; never negative for a physical state."""
        return self.var_z * self.var_p - self.cov_zp ** 2 - 0.25

    def to_dict(self) -> dict:
        return {"mean_z": self.mean_z, "mean_p": self.mean_p, "var_z": self.var_z,
                "var_p": self.var_p, "cov_zp": self.cov_zp}


def moments(state: GaussianState) -> MomentSet:
    phi, dphi = state.phi, state.phi_dot
    return MomentSet(
        mean_z=state.z_cl,
        mean_p=state.p_cl,
        var_z=phi / 2.0,
        var_p=(1.0 + dphi * dphi / 4.0) / (2.0 * phi),
        cov_zp=dphi / 4.0,
    )


def quadrature_variances(state: GaussianState, m: MomentSet | None = None) -> tuple[float, float, float]:
    """``(var_Z, var_P, cov_ZP)`` of the ``A(t)`` quadratures in this state.

    The mode function is rebuilt in the gauge ``eps = sqrt(phi)`` (real); the
    global phase of ``eps`` only rotates ``Z`` into ``P``.
    """
    m = moments(state) if m is None else m
    eps = complex(math.sqrt(state.phi))
    qc = quadratures_from_mode(eps, 1j * state.width * eps)
    zz, zp, pz, pp = qc.z_z.real, qc.z_p.real, qc.p_z.real, qc.p_p.real
    var_Z = zz * zz * m.var_z + zp * zp * m.var_p + 2 * zz * zp * m.cov_zp
    var_P = pz * pz * m.var_z + pp * pp * m.var_p + 2 * pz * pp * m.cov_zp
    cov = zz * pz * m.var_z + zp * pp * m.var_p + (zz * pp + zp * pz) * m.cov_zp
    return var_Z, var_P, cov


@dataclass(frozen=True)
class Uncertainty:
    heisenberg_zp: float
    schrodinger_lhs: float
    schrodinger_rhs: float
    heisenberg_ZP: float


def uncertainty_products(state: GaussianState) -> Uncertainty:
    m = moments(state)
    var_Z, var_P, _ = quadrature_variances(state, m)
    product = m.var_z * m.var_p
    return Uncertainty(
        heisenberg_zp=product,
        schrodinger_lhs=product,
        schrodinger_rhs=0.25 * (1.0 + 0.25 * state.phi_dot ** 2),
        heisenberg_ZP=var_Z * var_P,
    )


def squeeze_factor(state: GaussianState, m: MomentSet | None = None) -> complex:
    """Complex squeeze factor ``B = i var_z / <z^ p^>`` of the (z, p) pair."""
    m = moments(state) if m is None else m
    zp = complex(m.cov_zp, 0.5)
    if abs(zp) < 1e-14:
        raise DegenerateMoments("<z^ p^> vanishes")
    B = 1j * m.var_z / zp
    ratio = m.var_z / m.var_p
    if abs(abs(B) ** 2 - ratio) > 1e-10 * max(1.0, ratio):
        raise DegenerateMoments(f"|B|^2 = {abs(B) ** 2} disagrees with var ratio {ratio}")
    return B


# ---------------------------------------------------------------- grid tools

def make_grid(state: GaussianState, span_sigmas: float = 8.0, points_per_sigma: float = 16.0,
              resolve_momentum: bool = False) -> np.ndarray:
    """Uniform grid of ``+-span_sigmas`` standard deviations around ``z_cl``.

    With ``resolve_momentum`` the step is also small enough for the FFT band to
    cover ``|p_cl| + 12 sigma_p``, which derivative-based checks need.
    """
    sz = state.sigma_z
    h = sz / points_per_sigma
    if resolve_momentum:
        h = min(h, math.pi / (abs(state.p_cl) + 12.0 * state.sigma_p))
    half = span_sigmas * sz
    n = 2 * int(math.ceil(half / h)) + 1
    return np.linspace(state.z_cl - half, state.z_cl + half, n)


def _check_grid(state: GaussianState, grid: np.ndarray, span_sigmas=8.0, points_per_sigma=16.0):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise GridTooCoarse("grid must be a 1-D array with at least 3 points")
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise GridTooCoarse("grid must be uniform")
    sz = state.sigma_z
    reach = min(state.z_cl - grid[0], grid[-1] - state.z_cl)
    slack = 1e-9 * sz
    if reach < span_sigmas * sz - slack or h[0] > sz / points_per_sigma + slack:
        raise GridTooCoarse(
            f"grid must span {span_sigmas} sigma each side with {points_per_sigma} points per sigma")
    return grid, float(h[0])


def evaluate_wavefunction(state: GaussianState, grid) -> np.ndarray:
    """Normalised samples of the coherent state; ``arg Psi(z_cl) = z_cl p_cl``."""
    grid, h = _check_grid(state, grid)
    x = grid - state.z_cl
    norm = (state.width.real / math.pi) ** 0.25
    psi = norm * np.exp(-0.5 * state.width * x * x + 1j * grid * state.p_cl)
    total = trapezoid(np.abs(psi) ** 2, dx=h)
    if abs(total - 1.0) > 1e-8:
        raise GridTooCoarse(f"trapezoid norm {total} differs from 1")
    return psi


def spectral_derivative(samples: np.ndarray, h: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(samples.size, d=h)
    return np.fft.ifft(1j * k * np.fft.fft(samples))


def quadrature_moments(state: GaussianState, grid) -> MomentSet:
    """Moments measured directly from the sampled wave function.

    Independent of the closed forms in :func:`moments`: position moments by the
    trapezoid rule, momentum moments through ``-i d/dz`` applied spectrally.
    """
    grid, h = _check_grid(state, grid)
    psi = evaluate_wavefunction(state, grid)
    dens = np.abs(psi) ** 2
    norm = trapezoid(dens, dx=h)
    mean_z = trapezoid(grid * dens, dx=h) / norm
    var_z = trapezoid((grid - mean_z) ** 2 * dens, dx=h) / norm
    ppsi = -1j * spectral_derivative(psi, h)
    mean_p = trapezoid(np.conj(psi) * ppsi, dx=h).real / norm
    var_p = trapezoid(np.abs(ppsi - mean_p * psi) ** 2, dx=h) / norm
    cov = trapezoid(np.conj(psi) * (grid - mean_z) * (ppsi - mean_p * psi), dx=h).real / norm
    return MomentSet(float(mean_z), float(mean_p), float(var_z), float(var_p), float(cov))


def _muss_residual_on(state: GaussianState, B: complex, grid: np.ndarray) -> float:
    h = grid[1] - grid[0]
    x = grid - state.z_cl
    psi = np.exp(-0.5 * state.width * x * x + 1j * grid * state.p_cl)
    ppsi = -1j * spectral_derivative(psi, h)
    C = state.z_cl + 1j * B * state.p_cl
    defect = grid * psi + 1j * B * ppsi - C * psi
    return math.sqrt(np.sum(np.abs(defect) ** 2) / np.sum(np.abs(psi) ** 2))


def muss_residual(state: GaussianState, B: complex, span_sigmas: float = 12.0,
                  points_per_sigma: float = 16.0) -> float:
    """Normalised residual ``||[z + iB p - C] Psi|| / ||Psi||`` on a sampled grid.

    Zero iff ``Psi`` is an exact ``B``-squeezed state of ``(z, p)``.  The grid is
    halved once; disagreement beyond round-off means it was too coarse.
    """
    B = complex(B)
    grid = make_grid(state, span_sigmas, points_per_sigma, resolve_momentum=True)
    fine = np.linspace(grid[0], grid[-1], 2 * grid.size - 1)
    coarse_res = _muss_residual_on(state, B, grid)
    fine_res = _muss_residual_on(state, B, fine)
    if abs(coarse_res - fine_res) > 1e-9 * (1.0 + abs(B)) + 1e-6 * fine_res:
        raise GridTooCoarse(f"residual moved from {coarse_res:.3e} to {fine_res:.3e} on halving")
    return fine_res
