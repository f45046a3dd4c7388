"""Time-dependent ladder operators as coefficient pairs.

``A(t) = mu a + nu a^dagger`` with ``mu = (eps - i eps')/2`` and
``nu = (-eps - i eps')/2``.  The Wronskian pins ``|mu|^2 - |nu|^2 = 1``, so
``A`` is a Bogoliubov image of ``a``: ``A = e^{i phi} S^{-1} a S`` for a squeeze
``S`` with parameters from :func:`bogoliubov_decompose`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ModeSolution
from .errors import NonCanonical

CANONICAL_TOL = 1e-10
SQRT2 = math.sqrt(2.0)


def _wrap(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def _check_canonical(mu: complex, nu: complex, tol: float = CANONICAL_TOL, what="(mu, nu)"):
    gap = abs(mu) ** 2 - abs(nu) ** 2 - 1.0
    if abs(gap) > tol * (1.0 + abs(mu) ** 2):
        raise NonCanonical(f"{what}: |.|^2 - |.|^2 = 1 violated by {gap:.3e}")


@dataclass(frozen=True)
class LadderCoeffs:
    """``A = mu a + nu a^dagger`` and its inverse ``a = rho A + sigma A^dagger``."""

    mu: complex
    nu: complex
    rho: complex
    sigma: complex
    t: float = 0.0

    @classmethod
    def from_pair(cls, mu: complex, nu: complex, t: float = 0.0) -> "LadderCoeffs":
        mu, nu = complex(mu), complex(nu)
        # a = mu* A - nu A^dagger
        return cls(mu=mu, nu=nu, rho=mu.conjugate(), sigma=-nu, t=float(t))

    @property
    def canonical_gap(self) -> float:
        return abs(self.mu) ** 2 - abs(self.nu) ** 2 - 1.0

    def compose(self) -> np.ndarray:
        """Matrix of ``(a, a^dagger) -> (A, A^dagger) -> (a, a^dagger)``; identity if consistent."""
        forward = np.array([[self.mu, self.nu], [self.nu.conjugate(), self.mu.conjugate()]])
        back = np.array([[self.rho, self.sigma], [self.sigma.conjugate(), self.rho.conjugate()]])
        return back @ forward


def ladder_coeffs(sol: ModeSolution, t: float) -> LadderCoeffs:
    eps, deps = sol(t)
    return LadderCoeffs.from_pair(0.5 * (eps - 1j * deps), 0.5 * (-eps - 1j * deps), t)


@dataclass(frozen=True)
class QuadratureCoeffs:
    """``Z``, ``P`` as linear forms.

    ``Z = z_z z + z_p p = z_a a + z_ad a^dagger`` and likewise for ``P``.
    """

    z_z: complex
    z_p: complex
    z_a: complex
    z_ad: complex
    p_z: complex
    p_p: complex
    p_a: complex
    p_ad: complex

    def commutator_zp(self) -> complex:
        """``[Z, P]`` from the (z, p) forms using ``[z, p] = i``."""
        return 1j * (self.z_z * self.p_p - self.z_p * self.p_z)

    def commutator_aad(self) -> complex:
        """``[Z, P]`` from the (a, a^dagger) forms using ``[a, a^dagger] = 1``."""
        return self.z_a * self.p_ad - self.z_ad * self.p_a


def quadrature_coeffs(sol: ModeSolution, t: float) -> QuadratureCoeffs:
    eps, deps = sol(t)
    return quadratures_from_mode(eps, deps)


def quadratures_from_mode(eps: complex, deps: complex) -> QuadratureCoeffs:
    ec, dc = eps.conjugate(), deps.conjugate()
    # Z = (i/2){(eps - eps*) p - (eps' - eps'*) z},  P = (1/2){(eps + eps*) p - (eps' + eps'*) z}
    z_p = 0.5j * (eps - ec)
    z_z = -0.5j * (deps - dc)
    p_p = 0.5 * (eps + ec)
    p_z = -0.5 * (deps + dc)
    # z = (a + a^dagger)/sqrt2,  p = (a - a^dagger)/(i sqrt2)
    z_a = (z_z - 1j * z_p) / SQRT2
    z_ad = (z_z + 1j * z_p) / SQRT2
    p_a = (p_z - 1j * p_p) / SQRT2
    p_ad = (p_z + 1j * p_p) / SQRT2
    return QuadratureCoeffs(z_z, z_p, z_a, z_ad, p_z, p_p, p_a, p_ad)


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze magnitude/phase plus the phase offset left over from ``mu``.

    Reconstruction: ``mu = e^{i phase_offset} cosh r`` and
    ``nu = e^{i(theta + phase_offset)} sinh r``.  With this convention
    ``S(r, theta) A S^{-1} = e^{i phase_offset} a``.
    """

    r: float
    theta: float
    phase_offset: float

    @property
    def lam(self) -> complex:
        return self.r * cmath.exp(1j * self.theta)

    def reconstruct(self) -> tuple[complex, complex]:
        mu = cmath.exp(1j * self.phase_offset) * math.cosh(self.r)
        nu = cmath.exp(1j * (self.theta + self.phase_offset)) * math.sinh(self.r)
        return mu, nu


def bogoliubov_decompose(lc: LadderCoeffs, tol: float = CANONICAL_TOL) -> SqueezeParams:
    """Split ``(mu, nu)`` into ``(r, theta, phase_offset)``; ``theta = 0`` when ``r = 0``."""
    _check_canonical(lc.mu, lc.nu, tol)
    r = math.asinh(abs(lc.nu))
    phase = cmath.phase(lc.mu)
    theta = _wrap(cmath.phase(lc.nu) - phase) if lc.nu != 0 else 0.0
    return SqueezeParams(r=r, theta=theta, phase_offset=_wrap(phase))


def bch_gamma(r: float, theta: float) -> tuple[complex, float, complex]:
    """Normal-ordered factors ``(gamma_+, gamma_3, gamma_-)`` of ``S(r e^{i theta})``."""
    if r < 0:
        raise ValueError("r must be non-negative")
    th = math.tanh(r)
    return cmath.exp(1j * theta) * th, -math.log(math.cosh(r)), -cmath.exp(-1j * theta) * th


def transform_uv(sp: SqueezeParams | tuple, lc: LadderCoeffs) -> tuple[complex, complex]:
    """Coefficients of ``S A S^{-1} = v a + u a^dagger``."""
    r, theta = (sp.r, sp.theta) if isinstance(sp, SqueezeParams) else sp
    _check_canonical(lc.mu, lc.nu)
    c, s = math.cosh(r), math.sinh(r)
    u = lc.nu * c - lc.mu * cmath.exp(1j * theta) * s
    v = lc.mu * c - lc.nu * cmath.exp(-1j * theta) * s
    _check_canonical(v, u, what="(v, u)")
    return u, v


def displacement_map(alpha: complex, u: complex, v: complex, tol: float = CANONICAL_TOL) -> complex:
    """``beta`` with ``S D_A(alpha) S^{-1} = D_a(beta)``."""
    _check_canonical(v, u, tol, what="(v, u)")
    alpha = complex(alpha)
    return alpha * v.conjugate() - alpha.conjugate() * u
