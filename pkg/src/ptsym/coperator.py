"""The C operator as a differential operator acting on the parity kernel.

For each cubic model the sum ``C(x, y) = sum_n phi_n(x) phi_n(y)`` over the
perturbed eigenstates is written as

    C = [1 + eps L1 + eps^2 L2 + ...] P

where ``P`` is the parity kernel ``delta(x + y)`` (one delta per coordinate)
and each ``L_k`` is a :class:`~ptsym.hermite.DifferentialOperator` in the
unprimed coordinates.

The construction does not use any hand-derived operator.  It starts from the
ladder decomposition of each coordinate on Gaussian-weighted Hermite products,

    x = 1/2 R + L,   R = x - d (raises),   L = (x + d)/2 (lowers),

expands the cubic monomial into ordered words of ``R`` and ``L`` and divides
each word by the level shift it produces.  That yields the operator that
generates the first-order polynomial, and a double sum over word pairs gives
the second-order one.  Operators that act on the primed coordinate are moved
onto the unprimed one with :func:`flip`.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .hermite import (
    AXES,
    ONE,
    DifferentialOperator,
    GaussianRational,
    HermiteSeries,
    I,
    apply,
    normal_order,
)
from .perturbation import (
    Model,
    PerturbedEigenstate,
    first_order_state,
    second_order_state_ix3,
    wavefunction_orders,
)

__all__ = [
    "CKernel",
    "CapabilityError",
    "generator_words",
    "first_order_generator",
    "second_order_generator",
    "number_operator",
    "flip",
    "build_c",
    "apply_c",
    "compose_c",
    "cp_pc_relation",
    "real_imag_split_ok",
    "parse_kernel_term",
    "kernel_from_partner_text",
    "kernel_matrix",
    "eigen_residual",
    "sum_over_states",
    "operator_matrix",
]


class CapabilityError(ValueError):
    """Requested (model, order) combination is not implemented."""


# ---------------------------------------------------------------------------
# ladder words
# ---------------------------------------------------------------------------


def _ladder_ops(arity: int, axis: int) -> tuple[DifferentialOperator, DifferentialOperator]:
    x = DifferentialOperator.coordinate(arity, axis)
    d = DifferentialOperator.derivative(arity, axis)
    half_raise = (x - d) * Fraction(1, 2)  # 1/2 R
    lower = (x + d) * Fraction(1, 2)  # L
    return half_raise, lower


@lru_cache(maxsize=None)
def generator_words(model: Model) -> tuple[tuple[int, DifferentialOperator], ...]:
    """Expand the model's cubic monomial into ladder words.

    Returns ``(shift, word)`` pairs where ``word`` is the normal-ordered
    product of ``1/2 R`` and ``L`` factors and ``shift`` the number of raising
    minus lowering factors.
    """
    arity = model.arity
    factors: list[tuple[int, tuple]] = []
    for axis, e in enumerate(model.exponents):
        factors.extend([(axis, _ladder_ops(arity, axis))] * e)
    out = []
    for choice in itertools.product((0, 1), repeat=len(factors)):
        word = DifferentialOperator.identity(arity)
        shift = 0
        for (axis, ops), c in zip(factors, choice):
            word = word @ ops[c]
            shift += 1 if c == 0 else -1
        out.append((shift, word))
    return tuple(out)


@lru_cache(maxsize=None)
def first_order_generator(model: Model) -> DifferentialOperator:
    """Operator ``D`` with ``iP = exp(r^2/2) D exp(-r^2/2) H`` for every index."""
    total = DifferentialOperator(model.arity)
    for shift, word in generator_words(model):
        if shift == 0:
            raise ArithmeticError("cubic monomial produced a level-preserving word")
        total = total + word / shift
    return total


@lru_cache(maxsize=None)
def second_order_generator(model: Model) -> DifferentialOperator:
    """Operator ``D2`` with ``Q = exp(r^2/2) D2 exp(-r^2/2) H`` (off-level part).

    ``Q_k = -[V iP]_k / (|k| - n)``; word pairs whose shifts cancel feed the
    energy rather than ``Q`` and are skipped.
    """
    words = generator_words(model)
    total = DifferentialOperator(model.arity)
    for s_out, w_out in words:
        for s_in, w_in in words:
            if s_in + s_out == 0:
                continue
            total = total - (w_out @ w_in) / (s_in * (s_in + s_out))
    return total


def number_operator(arity: int) -> DifferentialOperator:
    """``sum_axes (x^2 - d^2 - 1)/2``; counts quanta on Gaussian-weighted functions."""
    op = DifferentialOperator(arity)
    for a in range(arity):
        x = DifferentialOperator.coordinate(arity, a)
        d = DifferentialOperator.derivative(arity, a)
        op = op + (x @ x - d @ d - 1) * Fraction(1, 2)
    return op


def flip(op: DifferentialOperator) -> DifferentialOperator:
    """Move an operator from the primed coordinates onto the unprimed ones.

    Under the parity kernel, ``d'`` acts like ``d`` and ``x'`` like ``-x``
    placed to the right of every derivative, so ``x'^a d'^b`` becomes
    ``d^b (-x)^a``.  The map reverses the order of products.
    """
    out = DifferentialOperator(op.arity)
    for (e, d), c in op.terms.items():
        der = DifferentialOperator(op.arity, {((0,) * op.arity, d): 1})
        mult = DifferentialOperator(op.arity, {(e, (0,) * op.arity): c})
        term = der @ mult
        if sum(e) % 2:
            term = -term
        out = out + term
    return out


def _interpolate_cubic(values: Sequence[Fraction]) -> list[Fraction]:
    """Monomial coefficients (ascending) of the polynomial through (k, values[k])."""
    n = len(values)
    coeffs = [Fraction(0)] * n
    for k, yk in enumerate(values):
        # Lagrange basis polynomial for node k
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == k:
                continue
            basis = [Fraction(0)] + basis  # multiply by t
            for i in range(len(basis) - 1):
                basis[i] -= j * basis[i + 1]
            denom *= k - j
        for i, b in enumerate(basis):
            coeffs[i] += yk * b / denom
    return coeffs


@lru_cache(maxsize=None)
def normalization_polynomial() -> tuple[Fraction, ...]:
    """Ascending coefficients of the eps^2 normalization coefficient as a cubic in n.

    Obtained by interpolation at n = 0..3 and checked at n = 4..6.
    """
    vals = [second_order_state_ix3(n).a2.re for n in range(4)]
    coeffs = _interpolate_cubic(vals)
    for n in range(4, 7):
        direct = second_order_state_ix3(n).a2.re
        if sum(c * n**i for i, c in enumerate(coeffs)) != direct:
            raise ArithmeticError("normalization coefficient is not cubic in n")
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CKernel:
    """``C = [1 + sum_k eps^k corrections[k-1]] P``."""

    model: Model
    order: int
    corrections: tuple[DifferentialOperator, ...]

    @property
    def arity(self) -> int:
        return self.model.arity

    def correction(self, k: int) -> DifferentialOperator:
        """Operator multiplying ``eps^k``; ``k = 0`` gives the identity."""
        if k == 0:
            return DifferentialOperator.identity(self.arity)
        if k > self.order:
            return DifferentialOperator(self.arity)
        return self.corrections[k - 1]

    def at_zero(self) -> "CKernel":
        """The eps -> 0 limit: the bare parity kernel."""
        return CKernel(self.model, 0, ())

    def to_text(self) -> str:
        """Human-readable form, e.g. ``1 - i*eps*(4/3*Dx^3 - 2*x^2*Dx - 2*x)``.

        Each correction is printed with its highest derivative first and with
        a common factor of ``i`` or ``-i`` pulled out when possible.
        """
        out = "1"
        for k, L in enumerate(self.corrections, start=1):
            if L.is_zero():
                continue
            eps = "eps" if k == 1 else f"eps^{k}"
            coeffs = [c for _, c in L.items()]
            if all(c.is_imaginary() for c in coeffs):
                inner, unit = L / I, "i*"
            elif all(c.is_real() for c in coeffs):
                inner, unit = L, ""
            else:
                out += f" + {eps}*({L.to_text(descending=True)})"
                continue
            text = inner.to_text(descending=True)
            if text.startswith("-"):
                out += f" - {unit}{eps}*({(-inner).to_text(descending=True)})"
            else:
                out += f" + {unit}{eps}*({text})"
        return out

    def to_json(self) -> dict:
        return {
            "model": self.model.value,
            "order": self.order,
            "text": self.to_text(),
            "corrections": [L.to_json() for L in self.corrections],
        }


def build_c(model: Model | str, order: int = 1) -> CKernel:
    """Construct the C kernel of ``model`` through ``eps^order``.

    Order 2 is available for ``IX3`` only.
    """
    model = Model.parse(model)
    if order not in (1, 2):
        raise CapabilityError(f"order {order} not supported")
    if order == 2 and model is not Model.IX3:
        raise CapabilityError(f"second order is implemented for ix3 only, not {model.value}")
    D = first_order_generator(model)
    fD = flip(D)
    L1 = (D + fD) * (-I)
    corrections = [L1]
    if order == 2:
        D2 = second_order_generator(model)
        N = number_operator(model.arity)
        a2 = DifferentialOperator(model.arity)
        power = DifferentialOperator.identity(model.arity)
        for c in normalization_polynomial():
            a2 = a2 + power * c
            power = power @ N
        # products of first-order pieces pick up (-i)^2 = -1
        L2 = D2 + flip(D2) - D @ fD + a2 * 2
        corrections.append(L2)
    return CKernel(model, order, tuple(corrections))


def apply_c(kernel: CKernel, state: PerturbedEigenstate) -> list[HermiteSeries]:
    """Act with the kernel on a perturbed eigenstate, order by order.

    Returns the eps-coefficients of ``C phi`` (Gaussian stripped, the common
    ``1/sqrt(N)`` left out).  For a consistent kernel they equal ``(-1)^n``
    times :func:`~ptsym.perturbation.wavefunction_orders`.
    """
    if state.model is not kernel.model:
        raise ValueError(f"kernel for {kernel.model.value} applied to a {state.model.value} state")
    if state.order < kernel.order:
        raise ValueError("state order is lower than kernel order")
    psi = wavefunction_orders(state, kernel.order)
    reflected = [p.reflect() for p in psi]
    out = []
    for p in range(kernel.order + 1):
        acc = HermiteSeries(kernel.arity)
        for j in range(p + 1):
            L = kernel.correction(j)
            acc = acc + (reflected[p - j] if j == 0 else apply(L, reflected[p - j]))
        out.append(acc)
    return out


def eigen_residual(kernel: CKernel, state: PerturbedEigenstate) -> list[HermiteSeries]:
    """``C phi - (-1)^n phi`` per eps-power; all zero when consistent."""
    sign = -1 if state.level % 2 else 1
    got = apply_c(kernel, state)
    want = wavefunction_orders(state, kernel.order)
    return [g - w * sign for g, w in zip(got, want)]


def compose_c(kernel: CKernel) -> list[DifferentialOperator]:
    """Residual of ``C^2 = 1`` at each power eps^1 .. eps^order.

    ``P L P`` is the parity conjugate, so ``C^2 = (1 + sum eps^k L_k)
    (1 + sum eps^k P L_k P)``.
    """
    res = []
    for p in range(1, kernel.order + 1):
        acc = DifferentialOperator(kernel.arity)
        for k in range(p + 1):
            acc = acc + kernel.correction(k) @ kernel.correction(p - k).parity_conjugate()
        res.append(acc)
    return res


def cp_pc_relation(kernel: CKernel) -> bool:
    """Check ``CP = (PC)*`` and ``[C, PT] = 0`` as exact operator identities.

    Both reduce to ``L_k = conj(P L_k P)`` for every order.
    """
    return all(
        L == L.parity_conjugate().conjugate() for L in kernel.corrections
    )


def real_imag_split_ok(kernel: CKernel) -> bool:
    """``C_R`` commutes and ``C_I`` anticommutes with parity."""
    for L in kernel.corrections:
        re, im = L.real_part(), L.imag_part()
        if re.parity_conjugate() != re or im.parity_conjugate() != -im:
            return False
    return True


def sum_over_states(model: Model | str, state: PerturbedEigenstate, max_level: int) -> list[HermiteSeries]:
    """First-order part of ``sum_m phi_m (phi_m, psi)`` over states with ``|m| <= max_level``.

    Provides an independent route to ``C psi`` that never touches the kernel
    operators: only eigenstates and bilinear overlaps are used.
    """
    from .hermite import gaussian_inner_product, hermite_norm
    from .perturbation import level_indices

    model = Model.parse(model)
    psi = wavefunction_orders(state, 1)
    total0 = HermiteSeries(model.arity)
    total1 = HermiteSeries(model.arity)
    for lvl in range(max_level + 1):
        for idx in level_indices(lvl, model.arity):
            phi = wavefunction_orders(first_order_state(model, idx), 1)
            norm = hermite_norm(idx)

            def ip(a, b):
                return gaussian_inner_product(a, b).coefficient / norm

            c0 = ip(phi[0], psi[0])
            c1 = ip(phi[0], psi[1]) + ip(phi[1], psi[0])
            total0 = total0 + phi[0] * c0
            total1 = total1 + phi[1] * c0 + phi[0] * c1
    return [total0, total1]


# ---------------------------------------------------------------------------
# text forms with partner coordinates
# ---------------------------------------------------------------------------

_PARTNER = {"X": 0, "Y": 1, "Z": 2}
_FACTOR = re.compile(r"^(D?)([xyzXYZ])(?:\^(\d+))?$")


def parse_kernel_term(term: str, arity: int) -> DifferentialOperator:
    """Parse one product such as ``-8/3*x*X*Dx^4``.

    Upper-case ``X``, ``Y``, ``Z`` stand for the partner (primed) coordinates.
    Each is replaced by minus the matching unprimed coordinate acting first,
    which is how a multiplier on the partner side passes through the parity
    kernel.
    """
    coef = GaussianRational(1)
    factors: list = []
    partners = [0] * arity
    for raw in term.split("*"):
        f = raw.strip()
        if not f:
            raise ValueError(f"empty factor in {term!r}")
        if f == "i":
            coef = coef * I
            continue
        if f == "-i":
            coef = coef * (-I)
            continue
        if re.fullmatch(r"-?\d+(?:/\d+)?", f):
            coef = coef * Fraction(f)
            continue
        m = _FACTOR.match(f)
        if not m:
            raise ValueError(f"cannot parse factor {f!r}")
        power = int(m.group(3) or 1)
        if m.group(2) in _PARTNER:
            if m.group(1):
                raise ValueError("derivatives of partner coordinates are not supported")
            axis = _PARTNER[m.group(2)]
            if axis >= arity:
                raise ValueError(f"partner {f!r} outside arity {arity}")
            partners[axis] += power
        else:
            factors.append(f)
    op = normal_order([(coef, factors)], arity)
    for axis, k in enumerate(partners):
        if k:
            x = DifferentialOperator.coordinate(arity, axis)
            op = op @ (x**k) * ((-1) ** k)
    return op


def kernel_from_partner_text(text: str, arity: int) -> DifferentialOperator:
    """Sum of :func:`parse_kernel_term` over ``+``/``-`` separated terms."""
    s = text.replace(" ", "")
    terms = re.split(r"(?<=[^*^/])(?=[+-])", s)
    total = DifferentialOperator(arity)
    for t in terms:
        if not t:
            continue
        sign = 1
        if t[0] in "+-":
            sign = -1 if t[0] == "-" else 1
            t = t[1:]
        total = total + parse_kernel_term(t, arity) * sign
    return total


# ---------------------------------------------------------------------------
# matrix form in the oscillator basis
# ---------------------------------------------------------------------------


def oscillator_ladder(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``x`` and ``d/dx`` in the orthonormal unit-frequency basis."""
    k = np.arange(1, size)
    a = np.diag(np.sqrt(k), 1)  # lowering
    x = (a + a.T) / np.sqrt(2.0)
    d = (a - a.T) / np.sqrt(2.0)
    return x, d


def operator_matrix(op: DifferentialOperator, size: int, pad: int | None = None) -> np.ndarray:
    """Dense matrix of a one-coordinate operator, computed at ``size + pad`` and cropped."""
    if op.arity != 1:
        raise ValueError("matrix form is implemented for one coordinate")
    if pad is None:
        pad = max((e[0] + d[0] for (e, d) in op.terms), default=0) + 1
    big = size + pad
    x, d = oscillator_ladder(big)
    out = np.zeros((big, big), dtype=complex)
    powers_x = [np.eye(big)]
    powers_d = [np.eye(big)]
    for (e, dd), c in op.terms.items():
        while len(powers_x) <= e[0]:
            powers_x.append(powers_x[-1] @ x)
        while len(powers_d) <= dd[0]:
            powers_d.append(powers_d[-1] @ d)
        out += complex(c) * (powers_x[e[0]] @ powers_d[dd[0]])
    return out[:size, :size]


def kernel_matrix(kernel: CKernel, eps: float, size: int) -> np.ndarray:
    """Matrix of ``[1 + sum eps^k L_k] P`` in the orthonormal oscillator basis."""
    if kernel.arity != 1:
        raise ValueError("matrix form is implemented for one coordinate")
    M = np.eye(size, dtype=complex)
    for k, L in enumerate(kernel.corrections, start=1):
        M = M + eps**k * operator_matrix(L, size)
    parity = np.diag((-1.0) ** np.arange(size))
    return M @ parity
