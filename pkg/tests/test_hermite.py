from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ptsym.hermite import (
    ArityError,
    DifferentialOperator,
    GaussianRational,
    HermiteSeries,
    I,
    apply,
    differentiate,
    from_monomials,
    gaussian_inner_product,
    multiply_by_x,
    multiply_by_x3,
    normal_order,
    parse_operator,
    to_monomials,
)

H = HermiteSeries.basis


def series(arity, terms):
    return HermiteSeries(arity, terms)


# --- independent oracle: sympy's Hermite polynomials ------------------------

X, Y, Z = sympy.symbols("x y z")
SYMS = (X, Y, Z)


def as_sympy(s: HermiteSeries):
    out = 0
    for idx, c in s.items():
        term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator
        )
        for sym, k in zip(SYMS, idx):
            term *= sympy.hermite(k, sym)
        out += term
    return sympy.expand(out)


coeffs = st.builds(
    GaussianRational,
    st.fractions(min_value=-5, max_value=5, max_denominator=7),
    st.fractions(min_value=-5, max_value=5, max_denominator=7),
)


@st.composite
def random_series(draw, max_degree=12, arity=None):
    a = arity or draw(st.integers(1, 3))
    n = draw(st.integers(0, 4))
    terms = {}
    for _ in range(n):
        idx = tuple(draw(st.integers(0, max_degree // a)) for _ in range(a))
        terms[idx] = draw(coeffs)
    return HermiteSeries(a, terms)


# --- examples -----------------------------------------------------------------


def test_multiply_by_x_examples():
    assert multiply_by_x(H(0)) == series(1, {(1,): F(1, 2)})
    assert multiply_by_x(H(1)) == series(1, {(2,): F(1, 2), (0,): 1})
    assert multiply_by_x(H(3)) == series(1, {(4,): F(1, 2), (2,): 3})


def test_multiply_by_x3_examples():
    assert multiply_by_x3(H(1)) == series(1, {(4,): F(1, 8), (2,): F(3, 2), (0,): F(3, 2)})
    assert multiply_by_x3(H(0)) == series(1, {(3,): F(1, 8), (1,): F(3, 4)})
    assert multiply_by_x3(H(2)) == series(1, {(5,): F(1, 8), (3,): F(9, 4), (1,): 6})


def test_differentiate_examples():
    assert differentiate(H(3)) == series(1, {(2,): 6})
    assert differentiate(H(0)).is_zero()
    s = multiply_by_x3(H(1))
    assert as_sympy(differentiate(s)) == sympy.expand(sympy.diff(as_sympy(s), X))


def test_monomial_examples():
    assert to_monomials(H(2)) == {(2,): 4, (0,): -2}
    assert from_monomials({(3,): 1}) == series(1, {(3,): F(1, 8), (1,): F(3, 4)})


def test_normal_order_examples():
    assert normal_order([(1, ["x", "Dx"])]) == parse_operator("x*Dx")
    assert normal_order([(1, ["Dx", "x"])]) == parse_operator("1 + x*Dx")
    assert normal_order([(2, ["x", "Dx", "x"])]) == parse_operator("2*x + 2*x^2*Dx")


def test_apply_examples():
    delta = parse_operator("2/3*Dx^3 - x^2*Dx - x")
    assert apply(delta, H(0)) == series(1, {(3,): F(1, 24), (1,): F(3, 4)})
    assert apply(delta, H(1)) == series(1, {(4,): F(1, 24), (2,): F(3, 2), (0,): F(-3, 2)})
    assert apply(DifferentialOperator(1), H(4)).is_zero()


def test_inner_product_examples():
    assert gaussian_inner_product(H(2), H(2)).coefficient == 8
    assert gaussian_inner_product(H(2), H(2)).pi_half_power == 1
    assert not gaussian_inner_product(H(1), H(2)).coefficient
    ip0 = series(1, {(3,): F(1, 24), (1,): F(3, 4)})
    # real coefficients give a positive square; see the decisions ledger
    assert gaussian_inner_product(ip0, ip0).coefficient == F(29, 24)
    P0 = ip0 * (-I)
    assert gaussian_inner_product(P0, P0).coefficient == F(-29, 24)


def test_arity_errors():
    with pytest.raises(ArityError):
        multiply_by_x(H(1), axis=1)
    with pytest.raises(ArityError):
        gaussian_inner_product(H(1), H(1, 0))
    with pytest.raises(ValueError):
        HermiteSeries(1, {(-1,): 1})


def test_sympy_oracle_for_products():
    s = series(2, {(2, 1): F(1, 3), (0, 3): GaussianRational(0, 2)})
    assert as_sympy(multiply_by_x(s, 1)) == sympy.expand(Y * as_sympy(s))


# --- properties -------------------------------------------------------------


@pytest.mark.parametrize("n", range(31))
def test_recurrence_consistency(n):
    two_x_hn = {(e + 1,): 2 * c for (e,), c in to_monomials(H(n)).items()}
    want = H(n + 1) + (H(n - 1) * (2 * n) if n else HermiteSeries(1))
    assert from_monomials(two_x_hn) == want


@settings(max_examples=200, deadline=None)
@given(random_series(), st.integers(0, 2))
def test_x3_equals_three_x(s, axis):
    axis = axis % s.arity
    triple = multiply_by_x(multiply_by_x(multiply_by_x(s, axis), axis), axis)
    assert multiply_by_x3(s, axis) == triple


@settings(max_examples=100, deadline=None)
@given(random_series(max_degree=8))
def test_monomial_round_trip(s):
    assert from_monomials(to_monomials(s), s.arity) == s


@settings(max_examples=50, deadline=None)
@given(random_series(max_degree=8, arity=1))
def test_monomials_match_sympy(s):
    poly = sum(
        (sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator))
        * X ** e[0]
        for e, c in to_monomials(s).items()
    )
    assert sympy.expand(poly - as_sympy(s)) == 0


factor_words = st.lists(
    st.sampled_from(["x", "Dx", "x^2", "Dx^2", "y", "Dy", F(2), I]), min_size=1, max_size=5
)


@settings(max_examples=100, deadline=None)
@given(factor_words, st.lists(random_series(max_degree=6, arity=2), min_size=1, max_size=20))
def test_normal_order_preserves_action(word, tests):
    op = normal_order([(1, word)], arity=2)
    for s in tests:
        # act factor by factor, rightmost first
        expected = s
        for f in reversed(word):
            expected = normal_order([(1, [f])], arity=2).act(expected)
        assert op.act(s) == expected


@settings(max_examples=100, deadline=None)
@given(random_series(max_degree=6, arity=2), random_series(max_degree=6, arity=2), coeffs)
def test_inner_product_symmetric_bilinear(a, b, c):
    ab = gaussian_inner_product(a, b).coefficient
    assert ab == gaussian_inner_product(b, a).coefficient
    assert gaussian_inner_product(a * c, b).coefficient == ab * c


@settings(max_examples=25, deadline=None)
@given(random_series(max_degree=6, arity=1))
def test_apply_matches_sympy(s):
    op = parse_operator("2/3*Dx^3 - x^2*Dx - x")
    g = sympy.exp(-X**2 / 2) * as_sympy(s)
    direct = sympy.powsimp(
        sympy.expand(
            sympy.exp(X**2 / 2)
            * (sympy.Rational(2, 3) * sympy.diff(g, X, 3) - X**2 * sympy.diff(g, X) - X * g)
        )
    )
    assert sympy.expand(direct - as_sympy(apply(op, s))) == 0


def test_json_round_trip():
    s = series(3, {(1, 0, 2): GaussianRational(F(1, 3), -2)})
    assert HermiteSeries.from_json(s.to_json()) == s
    op = parse_operator("4/3*Dx^3 - 2*x*Dx*x")
    assert DifferentialOperator.from_json(op.to_json()) == op
    assert s.to_json() == {"arity": 3, "terms": [{"idx": [1, 0, 2], "re": "1/3", "im": "-2"}]}
