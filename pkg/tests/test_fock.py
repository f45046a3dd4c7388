import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qtrap.dynamics import integrate_epsilon, mathieu_profile
from qtrap.errors import Overflow, TruncationTooSmall
from qtrap.fock import (
    VerificationReport,
    bch_sides,
    build_ladder,
    displacement,
    extremal_state,
    matrix_exp,
    select_block,
    squeeze,
    verify_bch,
    verify_coherent_to_squeezed,
    verify_reverse,
    verify_sas,
    verify_similarity,
)
from qtrap.ladder import LadderCoeffs, bogoliubov_decompose, ladder_coeffs


def low_block_unitarity(U, k):
    return np.abs((U.conj().T @ U)[:k, :k] - np.eye(k)).max()


# ---------------------------------------------------------------- ladder matrices

def test_ladder_n2():
    a, ad = build_ladder(2)
    np.testing.assert_array_equal(a.entries, [[0, 1], [0, 0]])
    np.testing.assert_array_equal(ad.entries, a.entries.conj().T)


def test_ladder_n4():
    a, _ = build_ladder(4)
    assert (a.entries[0, 1], a.entries[1, 2], a.entries[2, 3]) == pytest.approx((1, math.sqrt(2), math.sqrt(3)))
    assert np.count_nonzero(a.entries) == 3


def test_commutator_truncation_artifact():
    a, ad = build_ladder(40)
    c = a.entries @ ad.entries - ad.entries @ a.entries - np.eye(40)
    # sqrt(n)^2 recovers n only to round-off
    assert np.abs(c[:39, :39]).max() < 1e-12
    assert c[39, 39] == pytest.approx(-40)


def test_ladder_rejects_tiny_n():
    with pytest.raises(ValueError):
        build_ladder(1)


def test_fock_matrix_ops():
    a, ad = build_ladder(5)
    n = ad @ a
    np.testing.assert_allclose(np.diag(n.entries).real, np.arange(5))
    np.testing.assert_array_equal(a.dag.entries, ad.entries)
    assert n.block(2).shape == (2, 2)


# ---------------------------------------------------------------- matrix exponential

def test_exp_zero_is_identity():
    np.testing.assert_array_equal(matrix_exp(np.zeros((6, 6))).entries, np.eye(6))


def test_exp_diagonal_phase():
    phases = np.linspace(-3, 7, 9)
    E = matrix_exp(np.diag(1j * phases)).entries
    np.testing.assert_allclose(np.diag(E), np.exp(1j * phases), atol=1e-14)
    assert np.abs(E - np.diag(np.diag(E))).max() == 0


@pytest.mark.parametrize("seed, scale", [(0, 0.1), (1, 1.0), (2, 5.0), (3, 20.0)])
def test_exp_matches_scipy(seed, scale):
    rng = np.random.default_rng(seed)
    M = scale * (rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))) / 12
    ref = expm(M)
    assert np.abs(matrix_exp(M).entries - ref).max() < 1e-12 * max(1.0, np.abs(ref).max())


def test_exp_derivative_spot_check():
    a, ad = build_ladder(20)
    M = 0.3 * (ad.entries - a.entries) + 0.1j * ad.entries @ a.entries
    s, h = 0.7, 1e-5
    fd = (matrix_exp((s + h) * M).entries - matrix_exp((s - h) * M).entries) / (2 * h)
    assert np.abs(fd - M @ matrix_exp(s * M).entries).max() < 1e-8


def test_exp_truncation_convergence():
    blocks = []
    for N in (60, 70):
        a, ad = build_ladder(N)
        blocks.append(matrix_exp(a.entries - ad.entries).entries[:40, :40])
    assert np.abs(blocks[0] - blocks[1]).max() < 1e-10


def test_exp_overflow():
    with pytest.raises(Overflow):
        matrix_exp(np.array([[800.0]]))
    with pytest.raises(Overflow):
        matrix_exp(np.array([[np.nan]]))


def test_exp_keeps_label():
    a, _ = build_ladder(3)
    assert matrix_exp(a).label == "exp(a)"


# ---------------------------------------------------------------- displacement and squeeze

def test_displacement_zero_is_identity():
    np.testing.assert_allclose(displacement(0.0, 20).entries, np.eye(20), atol=1e-15)


def test_displacement_vacuum_amplitude():
    D = displacement(1.0, 40).entries
    assert D[0, 0] == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert D[0, 0].real == pytest.approx(0.606531, abs=1e-6)


def test_displacement_coherent_column():
    beta = 0.8 - 0.6j
    col = displacement(beta, 40).entries[:, 0]
    n = np.arange(20)
    ref = np.exp(-abs(beta) ** 2 / 2) * beta ** n / np.sqrt([math.factorial(k) for k in n])
    np.testing.assert_allclose(col[:20], ref, atol=1e-12)


def test_displacement_inverse():
    N = 40
    prod = displacement(1.2 + 0.4j, N).entries @ displacement(-1.2 - 0.4j, N).entries
    assert np.abs(prod[:N // 2, :N // 2] - np.eye(N // 2)).max() < 1e-9


def test_displacement_guard():
    with pytest.raises(TruncationTooSmall):
        displacement(3.0, 60)  # |beta|^2 = 9 > 60/9


def test_squeeze_zero_is_identity():
    np.testing.assert_allclose(squeeze(0.0, 1.0, 20).entries, np.eye(20), atol=1e-15)


def test_squeeze_inverse():
    N = 60
    for r in (0.3, 0.7, 1.0):
        prod = squeeze(r, 0.4, N).entries @ squeeze(r, 0.4 + math.pi, N).entries
        assert np.abs(prod[:12, :12] - np.eye(12)).max() < 1e-8


def test_squeezed_vacuum_parity():
    col = squeeze(0.9, -0.7, 60).entries[:, 0]
    assert np.abs(col[1::2]).max() == 0


def test_squeezed_vacuum_closed_form():
    r, theta = 0.6, 1.1
    col = squeeze(r, theta, 60).entries[:, 0]
    m = np.arange(10)
    # <2m|S|0> = (e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r))
    ref = ((cmath.exp(1j * theta) * math.tanh(r)) ** m
           * np.sqrt([math.factorial(2 * k) for k in m]) / (2.0 ** m * np.array([math.factorial(k) for k in m]))
           / math.sqrt(math.cosh(r)))
    np.testing.assert_allclose(col[::2][:10], ref, atol=1e-12)


def test_squeeze_guard():
    with pytest.raises(TruncationTooSmall):
        squeeze(3.0, 0.0, 40)
    squeeze(1.0, 0.0, 60)  # e^2 = 7.39 <= 60/8


@pytest.mark.parametrize("N", [40, 60, 100])
def test_unitarity_on_low_block(N):
    beta = 0.999 * math.sqrt(N / 9) * cmath.exp(0.3j)
    r = 0.999 * 0.5 * math.log(N / 8)
    assert low_block_unitarity(displacement(beta, N).entries, N // 2) < 1e-9
    assert low_block_unitarity(squeeze(r, 0.4, N).entries, N // 2) < 1e-9


# ---------------------------------------------------------------- BCH

def test_bch_r0():
    rep = verify_bch(0.0, 0.0)
    assert rep.residual == 0.0 and rep.passed


@pytest.mark.parametrize("r, theta, tol", [(1.0, 0.0, 1e-8), (0.5, 2.0, 1e-9)])
def test_bch_examples(r, theta, tol):
    rep = verify_bch(r, theta, 60, tolerance=tol)
    assert rep.residual < tol and rep.converged and rep.passed


def test_bch_printed_sign_fails():
    # flipping gamma_3 to +ln cosh r breaks the factorisation by O(1)
    r = 0.8
    rep = verify_bch(r, 0.3, gamma3_shift=2 * math.log(math.cosh(r)))
    assert not rep.passed and rep.residual > 1e-2


def test_bch_canary():
    rep = verify_bch(0.5, 1.0, gamma3_shift=1e-3)
    assert not rep.passed and rep.residual > 1e-4


def test_bch_factorised_side_exact_in_truncation():
    # raising x diagonal x lowering never reaches past row i, so the factorised
    # side needs no tail; only round-off in the far corner differs with N
    _, rhs60 = bch_sides(0.7, 0.2, 60)
    _, rhs70 = bch_sides(0.7, 0.2, 70)
    assert np.abs(rhs60 - rhs70[:60, :60])[:30, :30].max() < 1e-13


def test_bch_guard():
    with pytest.raises(TruncationTooSmall):
        verify_bch(3.0, 0.0, 40)


# ---------------------------------------------------------------- similarity

def test_similarity_zero_generator():
    rep = verify_similarity("rotation", {"t": 0.0}, 30)
    assert rep.residual == 0.0


def test_similarity_rotation():
    rep = verify_similarity("rotation", {"t": 0.7}, 40, tolerance=1e-9)
    assert rep.residual < 1e-9 and rep.passed


def test_similarity_squeeze():
    rep = verify_similarity("squeeze", {"r": 0.5}, 60)
    assert rep.residual < 1e-8 and rep.passed


def test_rotation_conjugation_closed_form():
    a, ad = build_ladder(30)
    X = 1j * 0.7 * ad.entries @ a.entries
    conj = matrix_exp(X).entries @ a.entries @ matrix_exp(-X).entries
    assert np.abs(conj - cmath.exp(-0.7j) * a.entries).max() < 1e-13


# ---------------------------------------------------------------- squeeze conjugation

def test_sas_r0():
    assert all(rep.residual == 0.0 for rep in verify_sas(0.0, 0.0))


def test_sas_example():
    reps = verify_sas(0.8, 1.3, 60)
    assert [rep.identity for rep in reps] == ["sas:a", "sas:z"]
    assert all(rep.residual < 1e-8 and rep.passed for rep in reps)


def test_sas_real_squeeze_scales_z():
    # theta = 0: S^-1 z S = e^r z
    r, N = 0.5, 60
    a, ad = build_ladder(N)
    S = squeeze(r, 0.0, N).entries
    z = (a.entries + ad.entries) / math.sqrt(2)
    assert np.abs((S.conj().T @ z @ S - math.exp(r) * z)[:6, :6]).max() < 1e-9
    assert all(rep.passed for rep in verify_sas(r, 0.0, N))


def test_sas_refuses_when_tail_is_too_heavy():
    with pytest.raises(TruncationTooSmall):
        verify_sas(0.95, 0.0, 60)
    assert all(rep.passed for rep in verify_sas(0.95, 0.0, 100))


# ---------------------------------------------------------------- block selection

def test_select_block_threshold():
    x = np.zeros((10, 10))
    y = np.zeros((20, 20))
    y[6, 2] = 1.0
    assert select_block([x], [y], 0.5) == 5  # prefix 7 contains the disagreement
    with pytest.raises(TruncationTooSmall):
        y[1, 0] = 1.0
        select_block([x], [y], 0.5)


def test_report_convergence_rule():
    rep = VerificationReport("x", {}, 60, 1e-9, 5e-9, True, 1e-8)
    assert rep.converged
    assert not VerificationReport("x", {}, 60, 1e-10, 5e-9, True, 1e-8).converged
    # shrinking residuals converge; round-off-level ones are exempt
    assert VerificationReport("x", {}, 60, 1e-8, 1e-12, True, 1e-8).converged
    assert VerificationReport("x", {}, 60, 1e-16, 1e-13, True, 1e-8).converged


def test_report_json_keys():
    d = verify_bch(0.3, 0.1).to_dict()
    assert {"identity", "params", "N", "residual", "residual_at_N_plus_10", "pass"} <= d.keys()
    json.dumps(d)


# ---------------------------------------------------------------- coherent -> squeezed chain

def test_extremal_state_is_annihilated():
    lc = LadderCoeffs.from_pair(1 + 1j, -1j)
    psi = extremal_state(lc, 80)
    a, ad = build_ladder(80)
    A = lc.mu * a.entries + lc.nu * ad.entries
    assert np.linalg.norm((A @ psi)[:40]) < 1e-10
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)


def test_chain_static():
    reps = verify_coherent_to_squeezed(1.0, LadderCoeffs.from_pair(1.0, 0.0), 60, tolerance=1e-9)
    assert all(rep.residual < 1e-9 and rep.passed for rep in reps)
    assert reps[0].details["r"] == 0.0 and reps[0].details["beta"] == pytest.approx(1.0)


def test_chain_free_particle():
    reps = verify_coherent_to_squeezed(1.0, LadderCoeffs.from_pair(1 + 1j, -1j), 60)
    assert [rep.identity.split(":")[1] for rep in reps] == ["sas", "doa", "t3"]
    assert all(rep.residual < 1e-7 and rep.passed for rep in reps)
    assert reps[0].details["r"] == pytest.approx(0.881374, abs=1e-6)


def test_chain_mathieu_one_period():
    sol = integrate_epsilon(mathieu_profile(0.0, 0.4, 2.0), 0.0, math.pi)
    reps = verify_coherent_to_squeezed(0.5 + 0.5j, ladder_coeffs(sol, math.pi), 60)
    assert all(rep.residual < 1e-7 and rep.passed for rep in reps)


def test_free_particle_decomposition_oracle():
    # the squeeze from bogoliubov_decompose conjugates A into a pure phase times a
    lc = LadderCoeffs.from_pair(1 + 1j, -1j)
    sp = bogoliubov_decompose(lc)
    rep = verify_coherent_to_squeezed(0.0, lc, 60)[0]
    assert rep.residual < 1e-7
    assert abs(rep.details["u"]) < 1e-12
    assert rep.details["v"] == pytest.approx(cmath.exp(1j * sp.phase_offset))


@pytest.mark.parametrize("lc", [LadderCoeffs.from_pair(1 + 1j, -1j),
                                LadderCoeffs.from_pair(math.cosh(0.5), cmath.exp(2j) * math.sinh(0.5))])
def test_reverse_direction(lc):
    rep = verify_reverse(0.7 - 0.2j, lc, 60)
    assert rep.residual < 1e-7 and rep.passed


@settings(max_examples=15)
@given(st.floats(0.0, 1.0), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi),
       st.floats(0.0, 2.0), st.floats(-math.pi, math.pi))
def test_consistency_with_oracle(r, a, b, amp, arg):
    lc = LadderCoeffs.from_pair(cmath.exp(1j * a) * math.cosh(r), cmath.exp(1j * b) * math.sinh(r))
    try:
        reps = verify_coherent_to_squeezed(amp * cmath.exp(1j * arg), lc, 60)
    except TruncationTooSmall:
        # only heavy squeezes may be refused at N = 60, and a larger N must then succeed
        assert r > 0.6
        reps = verify_coherent_to_squeezed(amp * cmath.exp(1j * arg), lc, 120)
    assert all(rep.residual < 1e-7 and rep.passed for rep in reps)
