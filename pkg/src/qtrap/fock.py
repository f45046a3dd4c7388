"""Truncated Fock-space oracle for the operator identities.

Every identity is checked by direct matrix arithmetic on ``N x N``
truncations.  Truncation corrupts the high-index rows and columns, so every check is
evaluated at ``N`` and ``N + 10`` and residuals are measured on the leading
*trusted block* where the truncation-sensitive side agrees between the two
(see :func:`select_block`).  The residual must also not grow from ``N`` to
``N + 10``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Overflow, TruncationTooSmall
from .ladder import (
    LadderCoeffs,
    bch_gamma,
    bogoliubov_decompose,
    displacement_map,
    transform_uv,
)

CONVERGENCE_FACTOR = 10.0
# Residuals below this are round-off; their N vs N+10 ratio carries no information.
RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class FockMatrix:
    dim: int
    entries: np.ndarray
    label: str = ""

    def __matmul__(self, other: "FockMatrix") -> "FockMatrix":
        return FockMatrix(self.dim, self.entries @ other.entries, f"{self.label}*{other.label}")

    @property
    def dag(self) -> "FockMatrix":
        return FockMatrix(self.dim, self.entries.conj().T, f"{self.label}^dag")

    def block(self, k: int) -> np.ndarray:
        return self.entries[:k, :k]


def build_ladder(N: int) -> tuple[FockMatrix, FockMatrix]:
    if N < 2:
        raise ValueError("N must be at least 2")
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    return FockMatrix(N, a, "a"), FockMatrix(N, a.conj().T.copy(), "a^dag")


def matrix_exp(M: FockMatrix | np.ndarray, tol: float = 1e-16) -> FockMatrix:
    """Scaling-and-squaring exponential with a Taylor core.

    The matrix is halved until its 1-norm is at most 1/2, the Taylor series is
    summed until the next term is below ``tol`` relative to the partial sum, and
    the result is squared back.
    """
    wrapped = isinstance(M, FockMatrix)
    X = np.asarray(M.entries if wrapped else M, dtype=complex)
    if not np.all(np.isfinite(X)):
        raise Overflow("matrix has non-finite entries")
    norm = np.abs(X).sum(axis=0).max() if X.size else 0.0
    # exp(norm) must stay representable for the squaring phase to be meaningful
    if norm > 700.0:
        raise Overflow(f"1-norm {norm:.3g} too large for a float64 exponential")
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    Xs = X / (2.0 ** s)
    result = np.eye(X.shape[0], dtype=complex)
    term = result.copy()
    for k in range(1, 60):
        term = term @ Xs / k
        result = result + term
        if np.abs(term).max() <= tol * np.abs(result).max():
            break
    for _ in range(s):
        result = result @ result
    return FockMatrix(X.shape[0], result, f"exp({M.label})" if wrapped else "exp")


def squeeze_guard(r: float, N: int) -> None:
    """Refuse squeezes whose vacuum spreads past the truncation (``e^{2r} > N/8``)."""
    if math.exp(2.0 * abs(r)) > N / 8.0:
        raise TruncationTooSmall(f"r={r:.3g} needs N >= {math.ceil(8 * math.exp(2 * abs(r)))}, got N={N}")


def displacement(beta: complex, N: int) -> FockMatrix:
    """``D(beta) = exp(beta a^dag - beta* a)``; refuses ``|beta|^2 > N/9``."""
    if abs(beta) ** 2 > N / 9.0:
        raise TruncationTooSmall(f"|beta|^2 = {abs(beta) ** 2:.3g} exceeds N/9 for N={N}")
    a, ad = build_ladder(N)
    D = matrix_exp(beta * ad.entries - np.conj(beta) * a.entries)
    return FockMatrix(N, D.entries, f"D({beta})")


def squeeze_generator(r: float, theta: float, N: int) -> np.ndarray:
    a, ad = build_ladder(N)
    lam = r * cmath.exp(1j * theta)
    return 0.5 * lam * ad.entries @ ad.entries - 0.5 * np.conj(lam) * a.entries @ a.entries


def squeeze(r: float, theta: float, N: int) -> FockMatrix:
    """``S(lambda) = exp(lambda a^dag^2/2 - lambda* a^2/2)``, ``lambda = r e^{i theta}``."""
    squeeze_guard(r, N)
    S = matrix_exp(squeeze_generator(r, theta, N))
    return FockMatrix(N, S.entries, f"S({r},{theta})")


@dataclass
class VerificationReport:
    identity: str
    params: dict
    N: int
    residual: float
    residual_at_N_plus_10: float
    passed: bool
    tolerance: float
    block: int = 0
    details: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        """Adding 10 states must not make the residual grow by 10x or more.

        A residual that shrinks with N is converging; one that grows means the
        value at N was flattered by the truncation.
        """
        at_n = max(self.residual, RESIDUAL_FLOOR)
        at_n10 = max(self.residual_at_N_plus_10, RESIDUAL_FLOOR)
        return at_n10 / at_n < CONVERGENCE_FACTOR

    def to_dict(self) -> dict:
        out = {
            "identity": self.identity,
            "params": self.params,
            "N": self.N,
            "residual": self.residual,
            "residual_at_N_plus_10": self.residual_at_N_plus_10,
            "pass": self.passed,
            "block": self.block,
        }
        out.update(self.details)
        return out


def _prefix_drift(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``out[k-1]`` = drift of the leading k (x k) block.

    Max-entry for matrices; prefix 2-norm for vectors, the metric their
    residuals use.
    """
    n = x.shape[0]
    d = np.abs(x - (y[:n, :n] if x.ndim == 2 else y[:n]))
    if d.ndim == 1:
        return np.sqrt(np.cumsum(d * d))
    edge = np.maximum(np.tril(d).max(axis=1), np.triu(d).max(axis=0))
    return np.maximum.accumulate(edge)


def select_block(probes: list, probes_n10: list, threshold: float, minimum: int = 2) -> int:
    """Largest leading block on which every probe agrees between N and N + 10.

    Probes are the truncation-sensitive sides of an identity (matrix products,
    states); the other side plays no part, so a wrong identity still fails.
    """
    N = probes[0].shape[0]
    drift = np.zeros(N)
    for x, y in zip(probes, probes_n10):
        drift = np.maximum(drift, _prefix_drift(x, y))
    ok = np.nonzero(drift[: N // 2] <= threshold)[0]
    k = 0
    if ok.size:
        # leading run only: the prefix drift is monotone, so this is ok[-1] + 1
        k = int(ok[-1]) + 1
    if k < minimum:
        raise TruncationTooSmall(
            f"N={N}: truncation error exceeds {threshold:.1e} beyond the leading {k} state(s);"
            " increase N")
    return k


def run_check(identity: str, params: dict, N: int, tolerance: float, build) -> VerificationReport:
    """Evaluate ``build(N)`` and ``build(N + 10)`` and compare on a common trusted block.

    ``build(n)`` returns ``(probes, residual)`` where ``residual(k)`` measures the
    identity on the leading ``k`` states.
    """
    probes, residual = build(N)
    probes10, residual10 = build(N + 10)
    k = select_block(probes, probes10, tolerance / 2.0)
    rep = VerificationReport(identity, params, N, float(residual(k)), float(residual10(k)),
                             False, tolerance, k)
    rep.passed = bool(rep.residual < tolerance and rep.residual_at_N_plus_10 < tolerance
                      and rep.converged)
    return rep


def _maxabs(x: np.ndarray) -> float:
    return float(np.abs(x).max()) if x.size else 0.0


def _block_residual(lhs: np.ndarray, rhs: np.ndarray):
    return lambda k: _maxabs((lhs - rhs)[:k, :k])


def bch_sides(r: float, theta: float, N: int, gamma3_shift: float = 0.0):
    """``exp`` of the squeeze generator and its normal-ordered factorisation.

    The factorised side is exact in truncation (each factor only raises,
    only lowers, or is diagonal).  ``gamma3_shift`` perturbs ``gamma_3`` so the
    check can be shown to bite.
    """
    a, ad = build_ladder(N)
    gp, g3, gm = bch_gamma(r, theta)
    g3 += gamma3_shift
    n = np.arange(N)
    lhs = matrix_exp(squeeze_generator(r, theta, N)).entries
    rhs = (matrix_exp(0.5 * gp * ad.entries @ ad.entries).entries
           @ np.diag(np.exp(g3 * (n + 0.5)))
           @ matrix_exp(0.5 * gm * a.entries @ a.entries).entries)
    return lhs, rhs


def verify_bch(r: float, theta: float, N: int = 60, tolerance: float = 1e-8,
               gamma3_shift: float = 0.0) -> VerificationReport:
    squeeze_guard(r, N)

    def build(n):
        lhs, rhs = bch_sides(r, theta, n, gamma3_shift)
        return [lhs], _block_residual(lhs, rhs)

    params = {"r": r, "theta": theta}
    if gamma3_shift:
        params["gamma3_shift"] = gamma3_shift
    return run_check("bch", params, N, tolerance, build)


def similarity_sides(X: np.ndarray, Y: np.ndarray):
    """``exp(X) exp(Y) exp(-X)`` and ``exp(e^X Y e^-X)``."""
    X = np.asarray(getattr(X, "entries", X))
    Y = np.asarray(getattr(Y, "entries", Y))
    eX = matrix_exp(X).entries
    emX = matrix_exp(-X).entries
    return eX @ matrix_exp(Y).entries @ emX, matrix_exp(eX @ Y @ emX).entries


def _rotation_case(p, a, ad):
    return 1j * p["t"] * ad @ a, a


def _squeeze_case(p, a, ad):
    lam = p["r"] * cmath.exp(1j * p.get("theta", 0.0))
    return 0.5 * lam * ad @ ad - 0.5 * np.conj(lam) * a @ a, a


SIMILARITY_CASES = {"rotation": _rotation_case, "squeeze": _squeeze_case}


def verify_similarity(case: str, params: dict, N: int = 60, tolerance: float = 1e-8) -> VerificationReport:
    """Check ``exp[X] exp[Y] exp[-X] = exp[e^X Y e^-X]`` for a named ``(X, Y)`` pair.

    ``rotation``: ``X = i t a^dag a``, ``Y = a``.  ``squeeze``: ``X`` the squeeze
    generator with ``r`` (and optional ``theta``), ``Y = a``.
    """
    if "r" in params:
        squeeze_guard(params["r"], N)

    def build(n):
        a, ad = build_ladder(n)
        X, Y = SIMILARITY_CASES[case](params, a.entries, ad.entries)
        lhs, rhs = similarity_sides(X, Y)
        return [lhs, rhs], _block_residual(lhs, rhs)

    return run_check(f"similarity:{case}", dict(params), N, tolerance, build)


def sas_sides(r: float, theta: float, N: int):
    """Squeeze conjugations of ``a`` and ``z`` with their closed forms."""
    a, ad = build_ladder(N)
    S = matrix_exp(squeeze_generator(r, theta, N)).entries
    Sinv = S.conj().T
    c, s = math.cosh(r), math.sinh(r)
    z = (a.entries + ad.entries) / math.sqrt(2.0)
    lhs_a = Sinv @ a.entries @ S
    rhs_a = c * a.entries + cmath.exp(1j * theta) * s * ad.entries
    lhs_z = Sinv @ z @ S
    rhs_z = ((c + cmath.exp(-1j * theta) * s) * a.entries
             + (c + cmath.exp(1j * theta) * s) * ad.entries) / math.sqrt(2.0)
    return (lhs_a, rhs_a), (lhs_z, rhs_z)


def verify_sas(r: float, theta: float, N: int = 60, tolerance: float = 1e-8) -> list[VerificationReport]:
    squeeze_guard(r, N)
    params = {"r": r, "theta": theta}

    def build(which):
        def inner(n):
            lhs, rhs = sas_sides(r, theta, n)[which]
            return [lhs], _block_residual(lhs, rhs)
        return inner

    return [run_check("sas:a", params, N, tolerance, build(0)),
            run_check("sas:z", params, N, tolerance, build(1))]


def extremal_state(lc: LadderCoeffs, N: int) -> np.ndarray:
    """Normalised Fock amplitudes of the state annihilated by ``A = mu a + nu a^dag``.

    Built from the recursion ``mu sqrt(n+1) c_{n+1} + nu sqrt(n) c_{n-1} = 0``,
    independently of any squeeze matrix.
    """
    c = np.zeros(N, dtype=complex)
    c[0] = 1.0
    ratio = -lc.nu / lc.mu
    for n in range(1, N - 1, 2):
        c[n + 1] = ratio * math.sqrt(n / (n + 1.0)) * c[n - 1]
    return c / np.linalg.norm(c)


def coherent_to_squeezed_sides(alpha: complex, lc: LadderCoeffs, N: int) -> dict:
    """Matrices and states of the coherent-to-squeezed chain at truncation ``N``."""
    sp = bogoliubov_decompose(lc)
    u, v = transform_uv(sp, lc)
    beta = displacement_map(alpha, u, v)
    a, ad = build_ladder(N)
    A = lc.mu * a.entries + lc.nu * ad.entries
    S = matrix_exp(squeeze_generator(sp.r, sp.theta, N)).entries
    Sinv = S.conj().T
    target = v * a.entries + u * ad.entries
    DA = matrix_exp(alpha * A.conj().T - np.conj(alpha) * A).entries
    Da = matrix_exp(beta * ad.entries - np.conj(beta) * a.entries).entries
    psi = Da @ (S @ extremal_state(lc, N))
    return {"SAS": S @ A @ Sinv, "target": target, "SDS": S @ DA @ Sinv, "Da": Da,
            "psi": psi, "alpha": complex(alpha), "squeeze": sp, "u": u, "v": v, "beta": beta}


def verify_coherent_to_squeezed(alpha: complex, lc: LadderCoeffs, N: int = 60,
                                tolerance: float = 1e-7) -> list[VerificationReport]:
    """The three checks of the coherent-to-squeezed chain, each with N+10 convergence.

    ``S A S^-1 = v a + u a^dag``; ``S D_A(alpha) S^-1 = D_a(beta)``; and
    ``D_a(beta) S |0;t>`` is an eigenvector of ``v a + u a^dag`` with eigenvalue
    ``alpha``, where ``|0;t>`` comes from :func:`extremal_state`.
    """
    sp = bogoliubov_decompose(lc)
    squeeze_guard(sp.r, N)
    cache = {}

    def sides(n):
        if n not in cache:
            cache[n] = coherent_to_squeezed_sides(alpha, lc, n)
        return cache[n]

    def build_sas(n):
        c = sides(n)
        return [c["SAS"]], _block_residual(c["SAS"], c["target"])

    def build_doa(n):
        c = sides(n)
        return [c["SDS"], c["Da"]], _block_residual(c["SDS"], c["Da"])

    def build_t3(n):
        c = sides(n)
        psi = c["psi"]
        image = c["target"] @ psi
        defect = image - c["alpha"] * psi
        return [psi, image], lambda k: float(np.linalg.norm(defect[:k]) / np.linalg.norm(psi))

    params = {"alpha": complex(alpha), "mu": lc.mu, "nu": lc.nu}
    reports = [
        run_check("coherent_to_squeezed:sas", params, N, tolerance, build_sas),
        run_check("coherent_to_squeezed:doa", params, N, tolerance, build_doa),
        run_check("coherent_to_squeezed:t3", params, N, tolerance, build_t3),
    ]
    c = sides(N)
    extra = {"r": sp.r, "theta": sp.theta, "u": c["u"], "v": c["v"], "beta": c["beta"]}
    for rep in reports:
        rep.details.update(extra)
    return reports


def verify_reverse(eta: complex, lc: LadderCoeffs, N: int = 60, tolerance: float = 1e-7) -> VerificationReport:
    """Reverse direction: an ``a``-coherent state mapped by ``S^-1`` is an ``A`` eigenstate.

    ``A S^-1 D_a(eta)|0> = eta e^{i phi} S^-1 D_a(eta)|0>``, ``phi`` the phase
    offset of ``(mu, nu)``.
    """
    sp = bogoliubov_decompose(lc)
    squeeze_guard(sp.r, N)
    eig = complex(eta) * cmath.exp(1j * sp.phase_offset)

    def build(n):
        a, ad = build_ladder(n)
        A = lc.mu * a.entries + lc.nu * ad.entries
        S = matrix_exp(squeeze_generator(sp.r, sp.theta, n)).entries
        psi = S.conj().T @ matrix_exp(eta * ad.entries - np.conj(eta) * a.entries).entries[:, 0]
        image = A @ psi
        defect = image - eig * psi
        return [psi, image], lambda k: float(np.linalg.norm(defect[:k]) / np.linalg.norm(psi))

    return run_check("reverse", {"eta": complex(eta), "mu": lc.mu, "nu": lc.nu}, N, tolerance, build)
