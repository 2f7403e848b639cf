import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from ptsym import spectral as sp
from ptsym.closed_forms import zeta_closed

Fam = sp.HamiltonianFamily


@pytest.fixture(scope="module")
def harmonic():
    return sp.solve(Fam.epsilon(0.0), 80)


@pytest.fixture(scope="module")
def cubic_axis():
    return sp.solve(Fam.epsilon(1.0), 200)


# --- matrix assembly ----------------------------------------------------------


def test_harmonic_matrix_is_diagonal():
    H = sp.build_matrix(Fam.epsilon(0.0), 30)
    assert np.max(np.abs(H - np.diag(2.0 * np.arange(30) + 1))) < 1e-12


def test_odd_part_couples_opposite_parity():
    H = sp.build_matrix(Fam.epsilon(1.0), 10)
    assert abs(H[0, 1].real) < 1e-14 and abs(H[0, 1].imag) > 0.1
    assert abs(H[0, 2].imag) < 1e-14


def test_matrix_element_against_direct_integral():
    # unit-frequency basis so the oracle is a plain quadrature on the real line
    H = sp.build_matrix(Fam.epsilon(0.6), 8, frequency=1.0)
    psi = lambda k, x: sp.hermite_functions(k + 1, np.array([x]))[k, 0]
    V = lambda x: abs(x) ** 2.6 * np.exp(0.3j * math.pi * np.sign(x))
    for m, n in [(0, 0), (0, 1), (2, 5), (3, 3)]:
        f = lambda x, part: getattr(psi(m, x) * psi(n, x) * V(x), part)
        re = sum(scipy.integrate.quad(f, a, b, args=("real",), limit=200)[0] for a, b in [(-12, 0), (0, 12)])
        im = sum(scipy.integrate.quad(f, a, b, args=("imag",), limit=200)[0] for a, b in [(-12, 0), (0, 12)])
        want = re + 1j * im
        # subtract the x^2 part that the matrix replaces with the kinetic term
        x2 = sp._x_squared(8)[m, n]
        got = H[m, n] - ((2 * m + 1) if m == n else 0) + x2
        assert abs(got - want) < 1e-9, (m, n)


def test_dvr_and_exact_agree_for_smooth_case():
    fam = Fam.cubic(0.3)
    assert np.allclose(sp.build_matrix(fam, 20), sp.build_matrix(fam, 20, method="dvr"))


@pytest.mark.parametrize("eps", [2.0, 2.5, -1.0])
def test_contour_errors(eps):
    with pytest.raises(sp.ContourError):
        Fam.epsilon(eps)


def test_small_basis_rejected():
    with pytest.raises(ValueError):
        sp.build_matrix(Fam.cubic(0.1), 3)
    with pytest.raises(ValueError):
        Fam.quartic(-1.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.9, 1.95), st.integers(4, 40))
def test_graded_form_is_real_and_parity_transposed(eps, N):
    H = sp.build_matrix(Fam.epsilon(eps), N)
    assert np.array_equal(H, H.T)
    B = sp.graded_real_form(H)
    P = np.diag((-1.0) ** np.arange(N))
    assert np.allclose(P @ B @ P, B.T, atol=1e-12 * max(1, np.max(np.abs(B))))


def test_graded_form_rejects_broken_symmetry():
    H = np.eye(4, dtype=complex)
    H[0, 2] = H[2, 0] = 1j
    with pytest.raises(sp.NumericError):
        sp.graded_real_form(H)


# --- spectra ------------------------------------------------------------------


def test_harmonic_levels():
    r = sp.solve(Fam.epsilon(0.0), 200)
    assert np.max(np.abs(r.eigenvalues[:21] - (2 * np.arange(21) + 1))) < 1e-8
    for n in range(21):
        assert sp.pt_norm(r, n) == ((-1) ** n, pytest.approx(1.0))


def test_ground_state_of_ix3(cubic_axis):
    assert cubic_axis.eigenvalues[0].real == pytest.approx(1.15627, abs=1e-5)


def test_cauchy_in_basis_size():
    fam = Fam.epsilon(1.0)
    # the ground state hits rounding level by N = 50, so follow a higher level
    E = [sp.solve(fam, N, check=False).all_eigenvalues[8] for N in (40, 60, 90, 135)]
    diffs = [abs(b - a) for a, b in zip(E, E[1:])]
    assert all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))


@pytest.mark.parametrize("eps", [0.5, 1.0])
def test_pt_norm_signs_alternate(eps):
    r = sp.solve(Fam.epsilon(eps), 200)
    k = min(11, r.n_retained)
    assert k >= 6
    assert list(r.pt_norm_signs[:k]) == [(-1) ** n for n in range(k)]


@settings(max_examples=12, deadline=None)
@given(st.floats(0.0, 1.9))
def test_real_positive_spectrum(eps):
    r = sp.solve(Fam.epsilon(eps), 200, reference_size=400)
    if eps <= 1.5:
        assert r.n_retained > 0
    E = r.eigenvalues
    assert np.all(np.abs(E.imag) < 1e-8 * np.maximum(1, np.abs(E.real)))
    assert np.all(E.real > 0)
    assert list(r.pt_norm_signs) == [(-1) ** n for n in range(r.n_retained)]


def test_negative_eps_single_real_level():
    r = sp.solve(Fam.epsilon(-0.7), 100)
    assert r.family.is_qualitative
    assert r.n_retained >= 5
    assert list(r.reality_flags).count(True) == 1 and r.reality_flags[0]
    with pytest.raises(sp.BrokenPhaseError):
        sp.pt_norm(r, 1)


@settings(max_examples=8, deadline=None)
@given(st.floats(-0.9, -0.1))
def test_negative_eps_conjugate_pairs(eps):
    r = sp.solve(Fam.epsilon(eps), 100)
    E = r.eigenvalues
    for z in E[~r.reality_flags]:
        assert np.min(np.abs(E - np.conj(z))) < 1e-6 * abs(z)


def test_pt_norm_index_check(cubic_axis):
    with pytest.raises(IndexError):
        sp.pt_norm(cubic_axis, cubic_axis.n_retained)


# --- completeness and reconstructions ------------------------------------------


def test_harmonic_completeness(harmonic):
    assert sp.completeness_residual(harmonic, 60) < 1e-6


@pytest.mark.parametrize("M", [4, 10, 40])
def test_projection_of_basis_state(harmonic, M):
    f = lambda x: sp.hermite_functions(4, x)[3]
    assert sp.completeness_residual(harmonic, M, f) < 1e-12


def test_harmonic_reconstructions(harmonic):
    rep = sp.reconstruct_operators(harmonic, 40)
    assert max(rep.parity_squared, rep.hamiltonian, rep.green, rep.green_symmetry) < 1e-10


def test_harmonic_c_is_parity(harmonic):
    rep = sp.numeric_c_matrix(harmonic, harmonic.basis_size)
    assert np.max(np.abs(rep.matrix - np.diag((-1.0) ** np.arange(harmonic.basis_size)))) < 1e-10
    assert rep.min_cpt_norm == pytest.approx(1.0)


def test_cpt_positive_on_low_span(cubic_axis):
    rep = sp.numeric_c_matrix(cubic_axis, 10, n_random=500, seed=3)
    assert rep.min_cpt_norm > 0
    assert rep.commutator < 1e-5


@pytest.mark.xfail(strict=True, reason="eigenvector sums past ten levels are ill-conditioned; see decisions ledger")
def test_cpt_positive_on_twenty_states(cubic_axis):
    assert sp.numeric_c_matrix(cubic_axis, 20, n_random=500).min_cpt_norm > 0


def test_c_matrix_seed_determinism(cubic_axis):
    a = sp.numeric_c_matrix(cubic_axis, 10, seed=7).min_cpt_norm
    assert a == sp.numeric_c_matrix(cubic_axis, 10, seed=7).min_cpt_norm


# --- zeta and perturbative fit -----------------------------------------------------


@pytest.mark.parametrize("eps", [0.5, 1.0])
def test_zeta_matches_corrected_closed_form(eps):
    z = sp.zeta_numeric(eps, 400)
    assert z.converged
    want = zeta_closed(eps, "corrected")
    assert abs(z.value - want) <= max(z.tail_error, 1e-3 * want)


def test_zeta_flags_divergent_limit():
    tails = []
    for eps in (0.2, 0.05, 0.02):
        z = sp.zeta_numeric(eps, 200)
        tails.append(z.tail / z.head)
    assert not z.converged
    assert tails[0] < tails[1] < tails[2]


def test_zeta_domain():
    with pytest.raises(ValueError):
        sp.zeta_numeric(0.0)


def test_wkb_constants_at_harmonic_point():
    # eps = 0 gives E_n = 2n + 1 = 2 (n + 1/2)
    assert sp.wkb_exponent(0.0) == 1.0
    assert sp.wkb_prefactor(0.0) == pytest.approx(2.0)


@pytest.mark.parametrize("level,target", [(0, 11 / 8), (1, 71 / 8)])
def test_perturbative_fit(level, target):
    fit = sp.perturbative_match(level)
    assert abs(fit.linear) < 1e-6
    assert fit.quadratic == pytest.approx(target, rel=1e-2)


def test_perturbative_fit_needs_three_points():
    with pytest.raises(ValueError):
        sp.perturbative_match(0, (0.01, 0.02))
