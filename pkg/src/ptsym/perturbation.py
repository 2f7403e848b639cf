"""Rayleigh-Schroedinger perturbation theory in the Hermite basis.

Three oscillator models are covered, each a unit-frequency harmonic
oscillator in 1, 2 or 3 coordinates plus ``i*eps*V`` with a cubic monomial
``V``:

==========  =====  =========
model       arity  V
==========  =====  =========
``IX3``     1      ``x^3``
``IX2Y``    2      ``x^2 y``
``IXYZ``    3      ``x y z``
==========  =====  =========

Eigenstates are written as ``i^n a(eps) exp(-r^2/2) [H + eps P + eps^2 Q]``
with energy ``n + arity/2 + eps A + eps^2 B``.  Because the Gaussian-conjugated
unperturbed operator is diagonal on Hermite products (eigenvalue ``|k| - n``),
each order reduces to dividing Hermite coefficients by level differences.

Degenerate levels of ``IXYZ`` are handled by :func:`degenerate_block`, which
assembles the second-order effective matrix from the same coefficient
bookkeeping and returns its characteristic polynomial, roots and mixing
vectors.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .hermite import (
    ONE,
    ZERO,
    DifferentialOperator,
    GaussianRational,
    HermiteSeries,
    I,
    gaussian_inner_product,
    hermite_norm,
    multiply_by_monomial,
    multiply_by_x3,
)

__all__ = [
    "Model",
    "PerturbedEigenstate",
    "DegenerateBlock",
    "RootInfo",
    "apply_potential",
    "first_order_state",
    "second_order_state_ix3",
    "pt_normalize",
    "schrodinger_residual",
    "unperturbed_operator",
    "wavefunction_orders",
    "bilinear_overlap",
    "degenerate_block",
    "level_indices",
]


class Model(enum.Enum):
    IX3 = "ix3"
    IX2Y = "ix2y"
    IXYZ = "ixyz"

    @property
    def arity(self) -> int:
        return {"ix3": 1, "ix2y": 2, "ixyz": 3}[self.value]

    @property
    def exponents(self) -> tuple[int, ...]:
        return {"ix3": (3,), "ix2y": (2, 1), "ixyz": (1, 1, 1)}[self.value]

    @classmethod
    def parse(cls, value: "Model | str") -> "Model":
        if isinstance(value, Model):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected ix3, ix2y or ixyz") from None


def apply_potential(model: Model, s: HermiteSeries) -> HermiteSeries:
    """Multiply ``s`` by the (real) cubic monomial of ``model``."""
    if model is Model.IX3:
        return multiply_by_x3(s, 0)
    return multiply_by_monomial(s, model.exponents)


def _divide_by_level(s: HermiteSeries, n: int, factor: GaussianRational) -> HermiteSeries:
    """Solve ``sum c_k (|k|-n) H_k = factor * s`` off the level ``n``."""
    out = {}
    for idx, c in s.items():
        gap = sum(idx) - n
        if gap:
            out[idx] = c * factor / gap
    return HermiteSeries(s.arity, out)


def _level_part(s: HermiteSeries, n: int) -> HermiteSeries:
    return HermiteSeries(s.arity, {k: c for k, c in s.items() if sum(k) == n})


@dataclass(frozen=True)
class PerturbedEigenstate:
    """Order-by-order data for one perturbed oscillator eigenstate.

    ``P`` and ``Q`` are the order-eps and order-eps^2 polynomials (``Q`` is
    ``None`` when only first order was computed).  ``A`` and ``B`` are the
    energy coefficients and ``a1``/``a2`` the eps and eps^2 coefficients of the
    normalization constant, chosen so that the bilinear self-overlap equals
    ``(-1)^n`` through the computed order.
    """

    model: Model
    index: tuple[int, ...]
    P: HermiteSeries
    A: GaussianRational
    Q: HermiteSeries | None = None
    B: GaussianRational | None = None
    a1: GaussianRational = ZERO
    a2: GaussianRational | None = None

    @property
    def level(self) -> int:
        return sum(self.index)

    @property
    def order(self) -> int:
        return 1 if self.Q is None else 2

    @property
    def H(self) -> HermiteSeries:
        return HermiteSeries.basis(*self.index)

    @property
    def iP(self) -> HermiteSeries:
        return self.P * I

    def energy(self) -> list[GaussianRational]:
        """Energy coefficients ``[E0, E1, (E2)]``."""
        out = [GaussianRational(self.level) + Fraction(self.model.arity, 2), self.A]
        if self.B is not None:
            out.append(self.B)
        return out

    def replace(self, **changes) -> "PerturbedEigenstate":
        from dataclasses import replace

        return replace(self, **changes)

    def to_json(self) -> dict:
        out = {
            "model": self.model.value,
            "index": list(self.index),
            "A": _gr_json(self.A),
            "a1": _gr_json(self.a1),
            "P": self.P.to_json(),
            "iP": self.iP.to_json(),
        }
        if self.Q is not None:
            out["Q"] = self.Q.to_json()
            out["B"] = _gr_json(self.B)
            out["a2"] = _gr_json(self.a2)
        return out


def _gr_json(c: GaussianRational | None):
    if c is None:
        return None
    if c.is_real():
        return str(c.re)
    return {"re": str(c.re), "im": str(c.im)}


def _check_index(model: Model, index: Sequence[int]) -> tuple[int, ...]:
    index = tuple(int(k) for k in index)
    if len(index) != model.arity:
        raise ValueError(f"{model.value} needs an index of length {model.arity}, got {index}")
    if any(k < 0 for k in index):
        raise ValueError(f"negative quantum number in {index}")
    return index


def first_order_state(model: Model | str, index: Sequence[int]) -> PerturbedEigenstate:
    """Solve the order-eps equation for ``H_index``.

    The first-order energy is the diagonal Hermite coefficient of
    ``i V H_index``; it is computed, not assumed, and :attr:`A` records it.
    """
    model = Model.parse(model)
    index = _check_index(model, index)
    n = sum(index)
    VH = apply_potential(model, HermiteSeries.basis(*index))
    # sum p_k (|k|-n) H_k = (A - i V) H  =>  A = i [V H]_n
    A = I * VH.coefficient(index)
    P = _divide_by_level(VH, n, -I)
    H = HermiteSeries.basis(*index)
    norm = hermite_norm(index)
    a1 = -gaussian_inner_product(H, P).coefficient / norm
    return PerturbedEigenstate(model, index, P, A, a1=a1)


def second_order_state_ix3(n: int) -> PerturbedEigenstate:
    """First and second order for the one-dimensional cubic model."""
    if n < 0:
        raise ValueError("n must be non-negative")
    first = first_order_state(Model.IX3, (n,))
    if first.A:
        raise ArithmeticError("first-order energy unexpectedly non-zero")
    VP = multiply_by_x3(first.P, 0)
    # sum q_k (k-n) H_k = B H_n - i x^3 P
    B = I * VP.coefficient(n)
    Q = _divide_by_level(VP, n, -I)
    state = first.replace(Q=Q, B=B)
    return state.replace(a2=pt_normalize(state))


def pt_normalize(state: PerturbedEigenstate) -> GaussianRational:
    """Return the eps^2 coefficient of the normalization constant.

    With ``a = 1 + a1 eps + a2 eps^2`` and the bilinear products ``(.,.)``
    (no conjugation), requiring ``a^2 [N + 2 eps (H,P) + eps^2 ((P,P) + 2(H,Q))]
    = N`` to second order gives the value returned here.  ``N`` is the squared
    norm of ``H_index``.
    """
    H = state.H
    norm = hermite_norm(state.index)

    def ip(a, b):
        return gaussian_inner_product(a, b).coefficient / norm

    hp = ip(H, state.P)
    a1 = -hp
    second = ip(state.P, state.P)
    if state.Q is not None:
        second = second + 2 * ip(H, state.Q)
    return -(a1 * a1 + 4 * a1 * hp + second) / 2


def unperturbed_operator(arity: int) -> DifferentialOperator:
    """``sum_axes (-1/2 d^2 + x d)``, the conjugated oscillator minus zero-point."""
    op = DifferentialOperator(arity)
    for a in range(arity):
        d = DifferentialOperator.derivative(arity, a)
        x = DifferentialOperator.coordinate(arity, a)
        op = op + (d @ d) * Fraction(-1, 2) + x @ d
    return op


def schrodinger_residual(state: PerturbedEigenstate, order: int = 1) -> list[HermiteSeries]:
    """Residual of the Schroedinger equation at each power of eps.

    The conjugated operator is applied through :meth:`DifferentialOperator.act`
    so this check does not reuse the level-division used to build the state.
    Every entry of the returned list is zero for a correct state.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if order == 2 and state.Q is None:
        raise ValueError("state carries no second-order data")
    model = state.model
    n = state.level
    K = unperturbed_operator(model.arity) - n
    H, P = state.H, state.P

    def iV(s):
        return apply_potential(model, s) * I

    res = [K.act(H)]
    res.append(K.act(P) - H * state.A + iV(H))
    if order == 2:
        B = state.B if state.B is not None else ZERO
        res.append(K.act(state.Q) - H * B - P * state.A + iV(P))
    return res


def wavefunction_orders(state: PerturbedEigenstate, order: int | None = None) -> list[HermiteSeries]:
    """Polynomial coefficients of ``i^n a(eps) [H + eps P + eps^2 Q]`` per eps-power.

    The Gaussian factor and ``1/sqrt(N)`` are left out.
    """
    order = state.order if order is None else order
    phase = I ** state.level
    parts = [state.H, state.P]
    if order >= 2:
        if state.Q is None:
            raise ValueError("state carries no second-order data")
        parts.append(state.Q)
    a = [ONE, state.a1]
    if order >= 2:
        a.append(state.a2 if state.a2 is not None else pt_normalize(state))
    out = []
    for p in range(order + 1):
        acc = HermiteSeries(state.model.arity)
        for j in range(p + 1):
            acc = acc + parts[p - j] * a[j]
        out.append(acc * phase)
    return out


def bilinear_overlap(
    left: PerturbedEigenstate, right: PerturbedEigenstate, order: int = 1
) -> list[GaussianRational]:
    """Eps-expansion of ``int phi_left phi_right`` in units of ``pi^(arity/2)``.

    Both states are taken with the ``1/sqrt(N)`` normalization included, so a
    state overlaps with itself as ``(-1)^n`` at order zero.
    """
    import math

    L = wavefunction_orders(left, order)
    R = wavefunction_orders(right, order)
    scale_sq = hermite_norm(left.index) * hermite_norm(right.index)
    root = math.isqrt(scale_sq.numerator) if scale_sq.denominator == 1 else None
    if root is None or root * root != scale_sq:
        raise ArithmeticError("normalization product is not a perfect square")
    out = []
    for p in range(order + 1):
        acc = ZERO
        for j in range(p + 1):
            acc = acc + gaussian_inner_product(L[j], R[p - j]).coefficient
        out.append(acc / root)
    return out


# ---------------------------------------------------------------------------
# Degenerate second order for the three-coordinate model
# ---------------------------------------------------------------------------


def level_indices(n: int, arity: int = 3) -> list[tuple[int, ...]]:
    """All multi-indices of total degree ``n``, in descending lexicographic order."""
    if arity == 1:
        return [(n,)]
    out = []
    for k in range(n, -1, -1):
        for rest in level_indices(n - k, arity - 1):
            out.append((k,) + rest)
    return out


@dataclass(frozen=True)
class RootInfo:
    """One root of the characteristic polynomial.

    ``exact`` holds a ``Fraction`` when the root is rational.  Otherwise
    ``interval`` is an isolating interval with exact rational end points and
    ``value`` its midpoint refined to about 1e-12.
    """

    value: complex
    multiplicity: int
    exact: Fraction | None = None
    interval: tuple[Fraction, Fraction] | None = None
    vectors: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        out = {"value": self.value.real if self.value.imag == 0 else [self.value.real, self.value.imag],
               "multiplicity": self.multiplicity}
        if self.exact is not None:
            out["exact"] = str(self.exact)
        if self.interval is not None:
            out["interval"] = [str(self.interval[0]), str(self.interval[1])]
        out["vectors"] = [[_vec_entry(v) for v in vec] for vec in self.vectors]
        return out


def _vec_entry(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


@dataclass(frozen=True)
class DegenerateBlock:
    """Second-order mixing problem on one degenerate level of ``IXYZ``.

    ``matrix[a][b]`` is the coefficient of ``H_basis[a]`` in
    ``x y z * iP_basis[b]``, so the solvability condition for mixing
    coefficients ``v`` reads ``(B I - matrix) v = 0``.
    """

    level: int
    basis: tuple[tuple[int, int, int], ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    charpoly: tuple[Fraction, ...]  # monic, highest degree first
    roots: tuple[RootInfo, ...]
    leakage: tuple[tuple[int, int, int], ...] = ()

    def sympy_matrix(self) -> sympy.Matrix:
        return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in self.matrix])

    def charpoly_expr(self, symbol: str = "B") -> sympy.Expr:
        b = sympy.Symbol(symbol)
        deg = len(self.charpoly) - 1
        return sum(
            sympy.Rational(c.numerator, c.denominator) * b ** (deg - i) for i, c in enumerate(self.charpoly)
        )

    def values(self) -> list[complex]:
        """Roots repeated by multiplicity, sorted by real part descending."""
        out = []
        for r in self.roots:
            out.extend([r.value] * r.multiplicity)
        return sorted(out, key=lambda z: (-z.real, -z.imag))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "basis": [list(b) for b in self.basis],
            "matrix": [[str(c) for c in row] for row in self.matrix],
            "charpoly": [str(c) for c in self.charpoly],
            "roots": [r.to_json() for r in self.roots],
            "leakage": [list(b) for b in self.leakage],
        }


def _effective_matrix(basis: Sequence[tuple[int, ...]]):
    pos = {b: i for i, b in enumerate(basis)}
    n = sum(basis[0])
    dim = len(basis)
    W = [[Fraction(0)] * dim for _ in range(dim)]
    leakage = set()
    for j, b in enumerate(basis):
        state = first_order_state(Model.IXYZ, b)
        S = apply_potential(Model.IXYZ, state.iP)
        for idx, c in S.items():
            if sum(idx) != n:
                continue
            if not c.is_real():
                raise ArithmeticError("effective matrix entry is not real")
            if idx in pos:
                W[pos[idx]][j] = c.re
            else:
                leakage.add(idx)
    return W, tuple(sorted(leakage, reverse=True))


def _roots_with_vectors(M: sympy.Matrix, poly: sympy.Poly) -> list[RootInfo]:
    dim = M.shape[0]
    out: list[RootInfo] = []
    Mf = np.array(M.evalf(30).tolist(), dtype=float)
    for factor, mult in sympy.factor_list(poly)[1]:
        fp = sympy.Poly(factor, poly.gens[0])
        if fp.degree() == 1:
            c1, c0 = fp.all_coeffs()
            root = -sympy.Rational(c0) / sympy.Rational(c1)
            ns = (M - root * sympy.eye(dim)).nullspace()
            vecs = tuple(
                tuple(Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in _primitive(vec))
                for vec in ns
            )
            out.append(
                RootInfo(complex(float(root)), mult, exact=Fraction(int(root.p), int(root.q)), vectors=vecs)
            )
            continue
        real_intervals = fp.intervals(eps=sympy.Rational(1, 10**14))
        for (lo, hi), _k in real_intervals:
            lo_f = Fraction(int(sympy.Rational(lo).p), int(sympy.Rational(lo).q))
            hi_f = Fraction(int(sympy.Rational(hi).p), int(sympy.Rational(hi).q))
            value = float((lo_f + hi_f) / 2)
            out.append(
                RootInfo(complex(value), mult, interval=(lo_f, hi_f), vectors=_numeric_null(Mf, value, mult))
            )
        n_complex = fp.degree() - len(real_intervals)
        if n_complex:
            for z in fp.nroots(n=30):
                if abs(sympy.im(z)) > 0:
                    zc = complex(z)
                    out.append(RootInfo(zc, mult, vectors=_numeric_null(Mf, zc, mult)))
    out.sort(key=lambda r: (-r.value.real, -r.value.imag))
    return out


def _primitive(vec: sympy.Matrix) -> list:
    """Scale an exact vector so its first non-zero entry is 1."""
    for v in vec:
        if v != 0:
            return [sympy.nsimplify(e / v) for e in vec]
    return list(vec)


def _numeric_null(M: np.ndarray, value: complex, mult: int) -> tuple:
    dim = M.shape[0]
    A = M - value * np.eye(dim)
    _, s, vh = np.linalg.svd(A)
    k = max(1, int(np.sum(s < 1e-8 * max(1.0, s[0]))))
    vecs = []
    for row in vh[-k:]:
        row = np.conj(row)
        j = int(np.argmax(np.abs(row)))
        row = row / row[j]
        vecs.append(tuple(float(v.real) if abs(v.imag) < 1e-12 else complex(v) for v in row))
    return tuple(vecs)


def degenerate_block(level: int, symmetry_subset: Sequence[Sequence[int]] | None = None) -> DegenerateBlock:
    """Build the second-order mixing matrix on a degenerate ``IXYZ`` level.

    Parameters
    ----------
    level : int
        Total quantum number ``n = k + l + m``.
    symmetry_subset : sequence of index triples, optional
        States to mix.  Defaults to the full level.  States of the level
        that the subset couples to but does not contain are reported in
        :attr:`DegenerateBlock.leakage`.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    if symmetry_subset is None:
        basis = level_indices(level, 3)
    else:
        basis = [tuple(int(k) for k in b) for b in symmetry_subset]
        if not basis:
            raise ValueError("empty subspace")
        for b in basis:
            if len(b) != 3 or sum(b) != level or min(b) < 0:
                raise ValueError(f"index {b} is not on level {level}")
        if len(set(basis)) != len(basis):
            raise ValueError("duplicate index in subset")
    W, leakage = _effective_matrix(basis)
    M = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in W])
    b = sympy.Symbol("B")
    poly = M.charpoly(b)
    coeffs = tuple(Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in poly.all_coeffs())
    roots = _roots_with_vectors(M, poly)
    return DegenerateBlock(
        level=level,
        basis=tuple(basis),
        matrix=tuple(tuple(r) for r in W),
        charpoly=coeffs,
        roots=tuple(roots),
        leakage=leakage,
    )


def all_even_subset(level: int) -> list[tuple[int, int, int]]:
    """States of ``level`` whose three quantum numbers are all even."""
    return [b for b in level_indices(level, 3) if all(k % 2 == 0 for k in b)]


def parity_classes(level: int) -> dict[tuple[int, int, int], list[tuple[int, int, int]]]:
    """Split a level by the parity pattern of each quantum number.

    The effective matrix never couples different patterns, so every class is
    a closed mixing problem.
    """
    out: dict = {}
    for b in level_indices(level, 3):
        out.setdefault(tuple(k % 2 for k in b), []).append(b)
    return out


__all__ += ["all_even_subset", "parity_classes"]
