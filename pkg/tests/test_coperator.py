from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptsym.coperator import (
    CapabilityError,
    apply_c,
    build_c,
    compose_c,
    cp_pc_relation,
    eigen_residual,
    flip,
    kernel_from_partner_text,
    kernel_matrix,
    operator_matrix,
    real_imag_split_ok,
    sum_over_states,
)
from ptsym.hermite import I, parse_operator
from ptsym.perturbation import first_order_state, level_indices, second_order_state_ix3, wavefunction_orders

MODELS = ["ix3", "ix2y", "ixyz"]


def test_cubic_first_order_kernel():
    k = build_c("ix3", 1)
    assert k.corrections[0] == parse_operator("4/3*Dx^3 - 2*x*Dx*x") * (-I)
    assert k.to_text() == "1 - i*eps*(4/3*Dx^3 - 2*x^2*Dx - 2*x)"


def test_cubic_second_order_kernel():
    k = build_c("ix3", 2)
    # eps^2 term with p = -i d/dx and the partner coordinate written as X
    printed = kernel_from_partner_text("-8/9*Dx^6 - 8/3*x*X*Dx^4 - 2*x^2*X^2*Dx^2 + 12*Dx^2", 1)
    assert k.corrections[1] == printed


def test_exponential_form():
    L1, L2 = build_c("ix3", 2).corrections
    assert (L1 @ L1) / 2 == L2
    # the exponent in p = -i d/dx reads -(4/3 p^3 + 2 x p x)
    p = parse_operator("Dx") * (-I)
    x = parse_operator("x")
    assert L1 == -((p @ p @ p) * F(4, 3) + (x @ p @ x) * 2)
    # flipping the sign of the x p x term breaks the second-order match
    wrong = -((p @ p @ p) * F(4, 3) - (x @ p @ x) * 2)
    assert (wrong @ wrong) / 2 != L2


def test_two_coordinate_kernel():
    delta = parse_operator("2/3*Dx^2*Dy - 1/3*x^2*Dy - 2/3*x*y*Dx - 1/3*y", arity=2)
    k = build_c("ix2y", 1)
    assert k.corrections[0] == (delta + flip(delta)) * (-I)
    # the final printed line omits the -2/3*y term of delta + delta'
    printed = kernel_from_partner_text("-i*4/3*Dx^2*Dy - 2/3*i*x*X*Dy + 4/3*i*x*y*Dx", 2)
    assert k.corrections[0] - printed == parse_operator("2/3*i*y", arity=2)


def test_three_coordinate_kernel():
    delta = parse_operator("2/3*Dx*Dy*Dz - 1/3*x*y*Dz - 1/3*x*z*Dy - 1/3*y*z*Dx", arity=3)
    k = build_c("ixyz", 1)
    assert flip(delta) == delta
    assert k.corrections[0] == delta * (-2 * I)
    assert k.to_text() == "1 - i*eps*(4/3*Dx*Dy*Dz - 2/3*y*z*Dx - 2/3*x*z*Dy - 2/3*x*y*Dz)"


def test_capability_errors():
    with pytest.raises(CapabilityError):
        build_c("ixyz", 2)
    with pytest.raises(CapabilityError):
        build_c("ix3", 3)


@pytest.mark.parametrize("model", MODELS)
def test_zero_limit_is_parity(model):
    k = build_c(model, 1).at_zero()
    assert k.corrections == ()
    assert cp_pc_relation(k)
    assert k.to_text() == "1"


def test_kernel_matrix_at_zero_is_parity():
    M = kernel_matrix(build_c("ix3", 2), 0.0, 8)
    assert np.array_equal(M, np.diag((-1.0) ** np.arange(8)))


@pytest.mark.parametrize("model,order", [("ix3", 1), ("ix3", 2), ("ix2y", 1), ("ixyz", 1)])
def test_square_is_identity(model, order):
    assert all(r.is_zero() for r in compose_c(build_c(model, order)))


@pytest.mark.parametrize("model,order", [("ix3", 1), ("ix3", 2), ("ix2y", 1), ("ixyz", 1)])
def test_cp_pc_and_real_imag_split(model, order):
    k = build_c(model, order)
    assert cp_pc_relation(k)
    assert real_imag_split_ok(k)


@pytest.mark.parametrize("model", MODELS)
def test_eigen_check_first_order(model):
    k = build_c(model, 1)
    arity = k.arity
    for level in range(7):
        for idx in level_indices(level, arity):
            assert all(r.is_zero() for r in eigen_residual(k, first_order_state(model, idx)))


@pytest.mark.parametrize("n", range(7))
def test_eigen_check_second_order(n):
    k = build_c("ix3", 2)
    assert all(r.is_zero() for r in eigen_residual(k, second_order_state_ix3(n)))


def test_apply_c_examples():
    k = build_c("ix3", 1)
    s0 = first_order_state("ix3", (0,))
    assert apply_c(k, s0) == wavefunction_orders(s0, 1)
    s1 = first_order_state("ix3", (1,))
    assert apply_c(k, s1) == [-p for p in wavefunction_orders(s1, 1)]
    kx = build_c("ixyz", 1)
    s = first_order_state("ixyz", (1, 0, 0))
    assert apply_c(kx, s) == [-p for p in wavefunction_orders(s, 1)]


def test_apply_c_rejects_model_mismatch():
    with pytest.raises(ValueError):
        apply_c(build_c("ix3", 1), first_order_state("ix2y", (0, 0)))


def test_printed_partner_kernel_fails_eigen_check():
    from ptsym.coperator import CKernel
    from ptsym.perturbation import Model

    printed = kernel_from_partner_text("-i*4/3*Dx^2*Dy - 2/3*i*x*X*Dy + 4/3*i*x*y*Dx", 2)
    bad = CKernel(Model.IX2Y, 1, (printed,))
    assert not all(r.is_zero() for r in eigen_residual(bad, first_order_state("ix2y", (0, 0))))


@pytest.mark.parametrize("n", range(10))
def test_sum_over_states_matches_kernel(n):
    state = first_order_state("ix3", (n,))
    assert sum_over_states("ix3", state, 12) == apply_c(build_c("ix3", 1), state)


@settings(max_examples=10, deadline=None)
@given(st.tuples(st.integers(0, 3), st.integers(0, 3)))
def test_sum_over_states_two_coordinates(idx):
    state = first_order_state("ix2y", idx)
    assert sum_over_states("ix2y", state, sum(idx) + 4) == apply_c(build_c("ix2y", 1), state)


def test_operator_matrix_matches_ladder():
    x = operator_matrix(parse_operator("x"), 5)
    k = np.arange(1, 5)
    assert np.allclose(np.diag(x, 1), np.sqrt(k / 2))


def test_partner_parser():
    # x X acting on the parity kernel equals -x^2
    assert kernel_from_partner_text("x*X", 1) == parse_operator("-x^2")
    with pytest.raises(ValueError):
        kernel_from_partner_text("Y", 1)


def test_kernel_orders_against_numeric_c():
    # independent oracle: C summed from eigenvectors of the truncated cubic Hamiltonian
    from ptsym import spectral as sp

    grid = np.array([0.01, 0.02, 0.04])
    slopes = {}
    for order in (1, 2):
        kernel = build_c("ix3", order)
        diffs = []
        for eps in grid:
            res = sp.solve(sp.HamiltonianFamily.cubic(eps), 120)
            Cm = sp.numeric_c_matrix(res, 12).matrix
            diffs.append(np.max(np.abs(Cm[:6, :6] - kernel_matrix(kernel, eps, 6))))
        slopes[order] = np.polyfit(np.log(grid), np.log(diffs), 1)[0]
    assert slopes[1] == pytest.approx(2, abs=0.2)
    assert slopes[2] == pytest.approx(3, abs=0.2)
