import math
from fractions import Fraction as F

import mpmath
import numpy as np
from numpy.polynomial import Polynomial
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptsym import closed_forms as cf
from ptsym import spectral as sp


def _zeta_mp(eps, den):
    """High-precision reference for the closed form with a given denominator angle."""
    with mpmath.workdps(30):
        e = mpmath.mpf(eps)
        d = 4 + e
        pre = 1 + mpmath.cos(3 * e * mpmath.pi / (2 * e + 8)) * mpmath.sin(mpmath.pi / d) / (
            mpmath.cos(den(e)) * mpmath.sin(3 * mpmath.pi / d)
        )
        g = mpmath.gamma(1 / d) * mpmath.gamma(2 / d) * mpmath.gamma(e / d)
        return float(pre * g / (d ** ((4 + 2 * e) / d) * mpmath.gamma((1 + e) / d) * mpmath.gamma((2 + e) / d)))


PRINTED = lambda e: e * mpmath.pi / (4 + 2 * e)
CORRECTED = lambda e: e * mpmath.pi / (2 * e + 8)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10))
def test_zeta_matches_high_precision(eps):
    assert cf.zeta_closed(eps) == pytest.approx(_zeta_mp(eps, PRINTED), rel=1e-12)
    assert cf.zeta_closed(eps, "corrected") == pytest.approx(_zeta_mp(eps, CORRECTED), rel=1e-12)


@pytest.mark.parametrize("n", range(1, 13))
def test_gamma_factorials(n):
    assert math.gamma(n) == pytest.approx(math.factorial(n - 1), rel=1e-12)


def test_gamma_reflection():
    for z in np.linspace(0.01, 0.99, 99):
        assert math.gamma(z) * math.gamma(1 - z) * math.sin(math.pi * z) == pytest.approx(math.pi, rel=1e-10)


def test_zeta_at_one_is_finite_and_positive():
    v = cf.zeta_closed(1.0)
    assert math.isfinite(v) and v > 0


def test_zeta_sweep_is_smooth():
    eps = np.linspace(0.2, 4.0, 200)
    vals = np.array([cf.zeta_closed(e, "corrected") for e in eps])
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    assert np.all(np.diff(vals) < 0)
    # no kinks: second differences of the logarithm stay small on this grid
    assert np.max(np.abs(np.diff(np.log(vals), 2))) < 1e-2


def test_zeta_diverges_at_zero():
    assert cf.zeta_closed(1e-3) > cf.zeta_closed(1e-2) > cf.zeta_closed(1e-1)
    assert cf.zeta_closed(1e-320) == math.inf


@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_zeta_domain(eps):
    with pytest.raises(cf.DomainError):
        cf.zeta_closed(eps)


def test_zeta_variant_check():
    with pytest.raises(ValueError):
        cf.zeta_closed(1.0, "other")


def test_variants_differ():
    assert abs(cf.zeta_closed(1.0) / cf.zeta_closed(1.0, "corrected") - 1) > 1e-3


# --- anharmonic expansions ---------------------------------------------------


def test_ground_state_unperturbed():
    assert cf.anharmonic_energy(cf.AnharmonicParams(1.7, 0.0), 0) == pytest.approx(0.85)


@settings(max_examples=50)
@given(st.floats(0.1, 5), st.floats(0, 1))
def test_gap_is_renormalized_mass(m, g):
    p = cf.AnharmonicParams(m, g)
    for model in ("pt", "conventional"):
        gap = cf.anharmonic_energy(p, 1, model=model) - cf.anharmonic_energy(p, 0, model=model)
        assert gap == pytest.approx(cf.renormalized_mass(p, model), rel=1e-12)


def test_first_order_example():
    p = cf.AnharmonicParams(1.0, 0.04)
    assert p.nu == pytest.approx(0.01)
    assert cf.anharmonic_energy(p, 2) == pytest.approx(2.5975)


def _quartic_level(k, g):
    r = sp.solve(sp.HamiltonianFamily.quartic(g, 1.0), 80)
    return float(r.eigenvalues[k].real)


def test_second_order_matches_diagonalization():
    p = cf.AnharmonicParams(1.0, 0.04)
    for k in range(4):
        approx = cf.anharmonic_energy(p, k, order=2)
        assert abs(approx - _quartic_level(k, 0.04)) < 2e-4 * (k + 1) ** 3


def test_second_order_coefficients_from_fit():
    # independent oracle: a polynomial fit of the numeric levels in nu
    g = np.linspace(0.002, 0.02, 6)
    for k in range(3):
        E = np.array([_quartic_level(k, x) for x in g])
        coef = Polynomial.fit(g / 4, E, 4).convert().coef
        c0, c1, c2 = cf.energy_coefficients(k)
        assert coef[0] == pytest.approx(float(c0), abs=1e-7)
        assert coef[1] == pytest.approx(float(c1), rel=1e-4)
        assert coef[2] == pytest.approx(float(c2), rel=2e-2)


@pytest.mark.xfail(strict=True, reason="first-order value is off by about 6.7e-3 at nu = 0.01; see decisions ledger")
def test_first_order_example_within_stated_tolerance():
    p = cf.AnharmonicParams(1.0, 0.04)
    assert abs(cf.anharmonic_energy(p, 2) - _quartic_level(2, 0.04)) < 5e-3


def test_binding_examples():
    p = cf.AnharmonicParams(1.0, 0.04)
    assert cf.binding_coefficient(2) == -3
    assert cf.binding_coefficient(3) == -9
    assert cf.binding_coefficient(2, "conventional") == 3
    assert cf.binding_energy(p, 2) == pytest.approx(-3 * p.nu)
    # conventional: B_2 - 2M = m(2 + 9 nu) - 2m(1 + 3 nu) = 3 m nu
    b2 = cf.excitation_energy(p, 2)
    M = cf.renormalized_mass(p)
    assert b2 - 2 * M == pytest.approx(3 * p.m * p.nu)


@given(st.integers(2, 50))
def test_binding_sign_flip(k):
    assert cf.binding_coefficient(k, "pt") == -cf.binding_coefficient(k, "conventional")
    assert cf.binding_coefficient(k) == -F(3 * k * (k - 1), 2)


@settings(max_examples=50)
@given(st.integers(2, 10), st.floats(0.1, 3), st.floats(0, 0.02))
def test_binding_matches_definition_to_first_order(k, m, nu):
    p = cf.AnharmonicParams(m, 4 * m**3 * nu)
    for model in ("pt", "conventional"):
        B = cf.excitation_energy(p, k, model)
        M = cf.renormalized_mass(p, model)
        exact = (B - k * M) / M
        # difference is second order in nu
        assert abs(exact - cf.binding_energy(p, k, model)) <= 10 * k * k * p.nu**2 + 1e-12


def test_errors():
    with pytest.raises(cf.DomainError):
        cf.AnharmonicParams(0.0, 1.0)
    with pytest.raises(cf.DomainError):
        cf.AnharmonicParams(1.0, -1.0)
    with pytest.raises(cf.DomainError):
        cf.binding_coefficient(1)
    with pytest.raises(ValueError):
        cf.anharmonic_energy(cf.AnharmonicParams(1, 1), 0, order=3)
    with pytest.raises(ValueError):
        cf.renormalized_mass(cf.AnharmonicParams(1, 1), "neither")
