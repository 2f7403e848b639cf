"""Exact algebra over products of physicists' Hermite polynomials.

Everything here is exact: coefficients are Gaussian rationals (pairs of
``fractions.Fraction``) and no float ever enters.  Two containers are
provided:

* :class:`HermiteSeries` -- a polynomial in 1 to 3 coordinates written in the
  basis ``H_k(x) H_l(y) H_m(z)``.
* :class:`DifferentialOperator` -- a normal-ordered sum of
  ``x^a d^b`` terms (all multiplications to the left of all derivatives).

Operators act on series either directly (:meth:`DifferentialOperator.act`) or
on the Gaussian-weighted function ``exp(-r^2/2) * series`` (:func:`apply`),
which is how the oscillator eigenfunctions are handled throughout the package.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

__all__ = [
    "ArityError",
    "GaussianRational",
    "I",
    "HermiteSeries",
    "DifferentialOperator",
    "GaussianIntegral",
    "multiply_by_x",
    "multiply_by_x3",
    "multiply_by_monomial",
    "differentiate",
    "to_monomials",
    "from_monomials",
    "normal_order",
    "parse_operator",
    "apply",
    "gaussian_conjugate",
    "gaussian_inner_product",
    "hermite_norm",
]

AXES = "xyz"


class ArityError(ValueError):
    """Raised when an axis or the arity of two objects does not fit."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact arithmetic")
    return Fraction(value)


class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts.

    Instances are immutable and hashable.  Mixed arithmetic with ``int`` and
    ``Fraction`` is supported; floats are rejected.
    """

    __slots__ = ("_re", "_im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("cannot combine GaussianRational with extra im")
            self._re, self._im = re._re, re._im
            return
        self._re = _frac(re)
        self._im = _frac(im)

    @property
    def re(self) -> Fraction:
        return self._re

    @property
    def im(self) -> Fraction:
        return self._im

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            raise TypeError("complex floats are not accepted in exact arithmetic")
        return cls(value)

    def __bool__(self) -> bool:
        return bool(self._re) or bool(self._im)

    def is_real(self) -> bool:
        return self._im == 0

    def is_imaginary(self) -> bool:
        return self._re == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self._re, -self._im)

    def __neg__(self):
        return GaussianRational(-self._re, -self._im)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._re + o._re, self._im + o._im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._re - o._re, self._im - o._im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(
            self._re * o._re - self._im * o._im, self._re * o._im + self._im * o._re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        den = o._re * o._re + o._im * o._im
        if den == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        num = self * o.conjugate()
        return GaussianRational(num._re / den, num._im / den)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self._re == o._re and self._im == o._im

    def __hash__(self):
        if self._im == 0:
            return hash(self._re)
        return hash((self._re, self._im))

    def __complex__(self):
        return complex(float(self._re), float(self._im))

    def __repr__(self):
        return f"GaussianRational({str(self._re)!r}, {str(self._im)!r})"

    def __str__(self):
        if self._im == 0:
            return str(self._re)
        if self._re == 0:
            return _imag_str(self._im)
        sign = "+" if self._im > 0 else "-"
        return f"({self._re}{sign}{_imag_str(abs(self._im))})"


def _imag_str(q: Fraction) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{q}*i"


I = GaussianRational(0, 1)
ZERO = GaussianRational(0)
ONE = GaussianRational(1)

Index = tuple  # tuple[int, ...]


def _check_axis(arity: int, axis: int) -> None:
    if not 0 <= axis < arity:
        raise ArityError(f"axis {axis} out of range for arity {arity}")


def _check_arity(arity: int) -> None:
    if arity not in (1, 2, 3):
        raise ArityError(f"arity must be 1, 2 or 3, got {arity}")


def _add_into(acc: dict, key, value) -> None:
    new = acc.get(key, ZERO) + value
    if new:
        acc[key] = new
    else:
        acc.pop(key, None)


# ---------------------------------------------------------------------------
# Hermite series
# ---------------------------------------------------------------------------


class HermiteSeries:
    """Finite sum ``sum c_k H_k1(x) H_k2(y) ...`` with exact coefficients.

    Parameters
    ----------
    arity : int
        Number of coordinates (1, 2 or 3).
    terms : mapping, optional
        ``{index tuple: coefficient}``.  Zero coefficients are dropped.
    """

    __slots__ = ("_arity", "_terms", "_hash")

    def __init__(self, arity: int, terms: Mapping | None = None):
        _check_arity(arity)
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(k) for k in idx)
            if len(idx) != arity:
                raise ArityError(f"index {idx} does not have arity {arity}")
            if any(k < 0 for k in idx):
                raise ValueError(f"negative Hermite index {idx}")
            c = GaussianRational.coerce(c)
            if c:
                _add_into(clean, idx, c)
        self._arity = arity
        self._terms = clean
        self._hash = None

    @classmethod
    def basis(cls, *index: int) -> "HermiteSeries":
        """The single product ``H_index``."""
        return cls(len(index), {tuple(index): ONE})

    @classmethod
    def zero(cls, arity: int) -> "HermiteSeries":
        return cls(arity)

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def items(self) -> Iterator:
        return iter(sorted(self._terms.items()))

    def coefficient(self, *index: int) -> GaussianRational:
        if len(index) == 1 and isinstance(index[0], tuple):
            index = index[0]
        return self._terms.get(tuple(index), ZERO)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(k) for k in self._terms), default=-1)

    def __eq__(self, other):
        if not isinstance(other, HermiteSeries):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._arity, frozenset(self._terms.items())))
        return self._hash

    def _same(self, other: "HermiteSeries") -> None:
        if not isinstance(other, HermiteSeries):
            raise TypeError(f"expected HermiteSeries, got {type(other).__name__}")
        if other._arity != self._arity:
            raise ArityError(f"arity mismatch: {self._arity} vs {other._arity}")

    def __add__(self, other):
        if not isinstance(other, HermiteSeries):
            return NotImplemented
        self._same(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            _add_into(acc, k, c)
        return HermiteSeries(self._arity, acc)

    def __sub__(self, other):
        if not isinstance(other, HermiteSeries):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return HermiteSeries(self._arity, {k: -c for k, c in self._terms.items()})

    def __mul__(self, scalar):
        try:
            s = GaussianRational.coerce(scalar)
        except TypeError:
            return NotImplemented
        if not s:
            return HermiteSeries(self._arity)
        return HermiteSeries(self._arity, {k: c * s for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = GaussianRational.coerce(scalar)
        return self * (ONE / s)

    def conjugate(self) -> "HermiteSeries":
        """Complex-conjugate every coefficient (the basis is real)."""
        return HermiteSeries(self._arity, {k: c.conjugate() for k, c in self._terms.items()})

    def reflect(self) -> "HermiteSeries":
        """The series of ``f(-r)``; uses ``H_k(-x) = (-1)^k H_k(x)``."""
        return HermiteSeries(
            self._arity, {k: (c if sum(k) % 2 == 0 else -c) for k, c in self._terms.items()}
        )

    def pt(self) -> "HermiteSeries":
        """The series of ``conj(f(-r))``."""
        return self.reflect().conjugate()

    def __repr__(self):
        return f"HermiteSeries({self._arity}, {self.to_text()})"

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for idx, c in self.items():
            name = "*".join(f"H{k}({AXES[a]})" for a, k in enumerate(idx))
            parts.append(f"{c}*{name}")
        return " + ".join(parts)

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "arity": self._arity,
            "terms": [
                {"idx": list(k), "re": str(c.re), "im": str(c.im)} for k, c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HermiteSeries":
        arity = int(data["arity"])
        terms = {}
        for t in data["terms"]:
            terms[tuple(t["idx"])] = GaussianRational(t["re"], t["im"])
        return cls(arity, terms)


def multiply_by_x(s: HermiteSeries, axis: int = 0) -> HermiteSeries:
    """Multiply by the coordinate ``axis`` using ``x H_n = H_{n+1}/2 + n H_{n-1}``."""
    _check_axis(s.arity, axis)
    acc: dict = {}
    half = Fraction(1, 2)
    for idx, c in s._terms.items():
        n = idx[axis]
        up = idx[:axis] + (n + 1,) + idx[axis + 1 :]
        _add_into(acc, up, c * half)
        if n:
            down = idx[:axis] + (n - 1,) + idx[axis + 1 :]
            _add_into(acc, down, c * n)
    return HermiteSeries(s.arity, acc)


def _x3_coefficients(n: int) -> list[tuple[int, Fraction]]:
    out = [(n + 3, Fraction(1, 8)), (n + 1, Fraction(3 * (n + 1), 4))]
    if n >= 1:
        out.append((n - 1, Fraction(3 * n * n, 2)))
    if n >= 3:
        out.append((n - 3, Fraction(n * (n - 1) * (n - 2))))
    return out


def multiply_by_x3(s: HermiteSeries, axis: int = 0) -> HermiteSeries:
    """Multiply by the cube of coordinate ``axis`` in one step.

    Uses ``x^3 H_n = H_{n+3}/8 + 3(n+1)/4 H_{n+1} + 3n^2/2 H_{n-1}
    + n(n-1)(n-2) H_{n-3}``.
    """
    _check_axis(s.arity, axis)
    acc: dict = {}
    for idx, c in s._terms.items():
        for m, w in _x3_coefficients(idx[axis]):
            _add_into(acc, idx[:axis] + (m,) + idx[axis + 1 :], c * w)
    return HermiteSeries(s.arity, acc)


def multiply_by_monomial(s: HermiteSeries, exponents: Sequence[int]) -> HermiteSeries:
    """Multiply by ``x^a y^b z^c`` for ``exponents == (a, b, c)``."""
    if len(exponents) != s.arity:
        raise ArityError(f"monomial arity {len(exponents)} != series arity {s.arity}")
    out = s
    for axis, e in enumerate(exponents):
        q, r = divmod(int(e), 3)
        for _ in range(q):
            out = multiply_by_x3(out, axis)
        for _ in range(r):
            out = multiply_by_x(out, axis)
    return out


def differentiate(s: HermiteSeries, axis: int = 0) -> HermiteSeries:
    """Exact partial derivative, ``H_n' = 2n H_{n-1}``."""
    _check_axis(s.arity, axis)
    acc: dict = {}
    for idx, c in s._terms.items():
        n = idx[axis]
        if n:
            _add_into(acc, idx[:axis] + (n - 1,) + idx[axis + 1 :], c * (2 * n))
    return HermiteSeries(s.arity, acc)


# ---------------------------------------------------------------------------
# Monomial basis change
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _hermite_monomial_coeffs(n: int) -> tuple[int, ...]:
    """Integer coefficients of ``H_n`` in powers of x (ascending)."""
    if n == 0:
        return (1,)
    if n == 1:
        return (0, 2)
    a = _hermite_monomial_coeffs(n - 1)
    b = _hermite_monomial_coeffs(n - 2)
    out = [0] * (n + 1)
    for k, c in enumerate(a):
        out[k + 1] += 2 * c
    for k, c in enumerate(b):
        out[k] -= 2 * (n - 1) * c
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_hermite_coeffs(k: int) -> tuple[tuple[int, Fraction], ...]:
    # x^k = k!/2^k * sum_j H_{k-2j} / (j! (k-2j)!)
    pref = Fraction(factorial(k), 2**k)
    return tuple(
        (k - 2 * j, pref / (factorial(j) * factorial(k - 2 * j))) for j in range(k // 2 + 1)
    )


def to_monomials(s: HermiteSeries) -> dict:
    """Expand into powers: returns ``{exponent tuple: coefficient}``."""
    acc: dict = {}
    for idx, c in s._terms.items():
        per_axis = [list(enumerate(_hermite_monomial_coeffs(k))) for k in idx]
        for combo in itertools.product(*per_axis):
            w = 1
            for _, cc in combo:
                w *= cc
            if w:
                _add_into(acc, tuple(e for e, _ in combo), c * w)
    return acc


def from_monomials(poly: Mapping, arity: int | None = None) -> HermiteSeries:
    """Inverse of :func:`to_monomials`.

    ``poly`` maps exponent tuples to coefficients.  ``arity`` is needed only
    for the zero polynomial.
    """
    if arity is None:
        if not poly:
            raise ArityError("arity required for an empty polynomial")
        arity = len(next(iter(poly)))
    acc: dict = {}
    for exps, c in poly.items():
        c = GaussianRational.coerce(c)
        if not c:
            continue
        per_axis = [_monomial_hermite_coeffs(int(e)) for e in exps]
        for combo in itertools.product(*per_axis):
            w = Fraction(1)
            for _, cc in combo:
                w *= cc
            _add_into(acc, tuple(k for k, _ in combo), c * w)
    return HermiteSeries(arity, acc)


# ---------------------------------------------------------------------------
# Inner products
# ---------------------------------------------------------------------------


def hermite_norm(index: Sequence[int]) -> Fraction:
    """``int exp(-r^2) H_index^2`` divided by ``pi^(arity/2)``: ``prod 2^k k!``."""
    out = 1
    for k in index:
        out *= 2**k * factorial(k)
    return Fraction(out)


class GaussianIntegral(NamedTuple):
    """Exact value ``coefficient * pi**(pi_half_power / 2)``."""

    coefficient: GaussianRational
    pi_half_power: int

    def __complex__(self):
        from math import pi

        return complex(self.coefficient) * pi ** (self.pi_half_power / 2)

    def ratio(self, other: "GaussianIntegral") -> GaussianRational:
        if self.pi_half_power != other.pi_half_power:
            raise ArityError("integrals carry different powers of pi")
        return self.coefficient / other.coefficient


def gaussian_inner_product(a: HermiteSeries, b: HermiteSeries) -> GaussianIntegral:
    """Bilinear ``int exp(-r^2) a(r) b(r) dr`` over all coordinates.

    No complex conjugation is applied.  The power of pi is kept symbolic.
    """
    a._same(b)
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    total = ZERO
    for idx, c in small._terms.items():
        d = big._terms.get(idx)
        if d is not None:
            total = total + c * d * hermite_norm(idx)
    return GaussianIntegral(total, a.arity)


# ---------------------------------------------------------------------------
# Differential operators
# ---------------------------------------------------------------------------

_FallingKey = tuple  # (exponents, derivative orders)


def _falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


@lru_cache(maxsize=None)
def _reorder_1d(b: int, c: int) -> tuple[tuple[int, int, int], ...]:
    """``d^b x^c = sum_j C(b,j) c!/(c-j)! x^(c-j) d^(b-j)``; returns (coef, xpow, dpow)."""
    return tuple(
        (comb(b, j) * _falling(c, j), c - j, b - j) for j in range(min(b, c) + 1)
    )


class DifferentialOperator:
    """Normal-ordered polynomial differential operator.

    ``terms`` maps ``(exponents, orders)`` to a coefficient and stands for
    ``coef * x^exponents * d^orders`` with every derivative to the right.
    Composition with ``@`` re-normal-orders via the Leibniz rule.
    """

    __slots__ = ("_arity", "_terms", "_conj")

    def __init__(self, arity: int, terms: Mapping | None = None):
        _check_arity(arity)
        clean: dict = {}
        for key, c in (terms or {}).items():
            exps, ders = key
            exps = tuple(int(e) for e in exps)
            ders = tuple(int(d) for d in ders)
            if len(exps) != arity or len(ders) != arity:
                raise ArityError(f"term {key} does not have arity {arity}")
            if any(e < 0 for e in exps + ders):
                raise ValueError(f"negative power in {key}")
            c = GaussianRational.coerce(c)
            if c:
                _add_into(clean, (exps, ders), c)
        self._arity = arity
        self._terms = clean
        self._conj = None

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, arity: int, coefficient=1) -> "DifferentialOperator":
        z = (0,) * arity
        return cls(arity, {(z, z): coefficient})

    @classmethod
    def zero(cls, arity: int) -> "DifferentialOperator":
        return cls(arity)

    @classmethod
    def coordinate(cls, arity: int, axis: int) -> "DifferentialOperator":
        _check_axis(arity, axis)
        e = tuple(1 if a == axis else 0 for a in range(arity))
        return cls(arity, {(e, (0,) * arity): 1})

    @classmethod
    def derivative(cls, arity: int, axis: int) -> "DifferentialOperator":
        _check_axis(arity, axis)
        d = tuple(1 if a == axis else 0 for a in range(arity))
        return cls(arity, {((0,) * arity, d): 1})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coefficient=1) -> "DifferentialOperator":
        arity = len(exponents)
        return cls(arity, {(tuple(exponents), (0,) * arity): coefficient})

    # basic protocol ------------------------------------------------------------

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def items(self):
        return iter(sorted(self._terms.items(), key=lambda kv: (kv[0][1], kv[0][0])))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, DifferentialOperator):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self):
        return hash((self._arity, frozenset(self._terms.items())))

    def _same(self, other):
        if not isinstance(other, DifferentialOperator):
            raise TypeError(f"expected DifferentialOperator, got {type(other).__name__}")
        if other._arity != self._arity:
            raise ArityError(f"arity mismatch: {self._arity} vs {other._arity}")

    def __add__(self, other):
        if not isinstance(other, DifferentialOperator):
            try:
                other = DifferentialOperator.identity(self._arity, GaussianRational.coerce(other))
            except TypeError:
                return NotImplemented
        self._same(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            _add_into(acc, k, c)
        return DifferentialOperator(self._arity, acc)

    __radd__ = __add__

    def __neg__(self):
        return DifferentialOperator(self._arity, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DifferentialOperator):
            try:
                other = DifferentialOperator.identity(self._arity, GaussianRational.coerce(other))
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, DifferentialOperator):
            return self @ scalar
        try:
            s = GaussianRational.coerce(scalar)
        except TypeError:
            return NotImplemented
        return DifferentialOperator(self._arity, {k: c * s for k, c in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (ONE / GaussianRational.coerce(scalar))

    def __matmul__(self, other: "DifferentialOperator") -> "DifferentialOperator":
        """Operator product ``self * other`` (``other`` acts first)."""
        if not isinstance(other, DifferentialOperator):
            return NotImplemented
        self._same(other)
        acc: dict = {}
        for (a, b), c1 in self._terms.items():
            for (cexp, d), c2 in other._terms.items():
                per_axis = [_reorder_1d(b[i], cexp[i]) for i in range(self._arity)]
                base = c1 * c2
                for combo in itertools.product(*per_axis):
                    w = 1
                    exps = []
                    ders = []
                    for i, (cf, xp, dp) in enumerate(combo):
                        w *= cf
                        exps.append(a[i] + xp)
                        ders.append(dp + d[i])
                    _add_into(acc, (tuple(exps), tuple(ders)), base * w)
        return DifferentialOperator(self._arity, acc)

    def __pow__(self, k: int):
        out = DifferentialOperator.identity(self._arity)
        for _ in range(k):
            out = out @ self
        return out

    def commutator(self, other: "DifferentialOperator") -> "DifferentialOperator":
        return self @ other - other @ self

    # symmetries ----------------------------------------------------------------

    def conjugate(self) -> "DifferentialOperator":
        """Complex-conjugate the coefficients."""
        return DifferentialOperator(
            self._arity, {k: c.conjugate() for k, c in self._terms.items()}
        )

    def parity_conjugate(self) -> "DifferentialOperator":
        """``P O P`` with ``P f(r) = f(-r)``: each term picks up ``(-1)^(a+b)``."""
        return DifferentialOperator(
            self._arity,
            {
                (e, d): (c if (sum(e) + sum(d)) % 2 == 0 else -c)
                for (e, d), c in self._terms.items()
            },
        )

    def real_part(self) -> "DifferentialOperator":
        return DifferentialOperator(self._arity, {k: c.re for k, c in self._terms.items()})

    def imag_part(self) -> "DifferentialOperator":
        return DifferentialOperator(self._arity, {k: c.im for k, c in self._terms.items()})

    # action --------------------------------------------------------------------

    def act(self, s: HermiteSeries) -> HermiteSeries:
        """Act on the polynomial ``s`` itself (no Gaussian weight)."""
        if s.arity != self._arity:
            raise ArityError(f"operator arity {self._arity} != series arity {s.arity}")
        total = HermiteSeries(self._arity)
        by_ders: dict = {}
        for (e, d), c in self._terms.items():
            by_ders.setdefault(d, []).append((e, c))
        for d, group in by_ders.items():
            ds = s
            for axis, k in enumerate(d):
                for _ in range(k):
                    ds = differentiate(ds, axis)
            if ds.is_zero():
                continue
            for e, c in group:
                total = total + multiply_by_monomial(ds, e) * c
        return total

    def gaussian_conjugate(self) -> "DifferentialOperator":
        """``exp(r^2/2) O exp(-r^2/2)``: every ``d`` becomes ``d - x``."""
        if self._conj is None:
            out = DifferentialOperator(self._arity)
            shifted = [
                DifferentialOperator.derivative(self._arity, a)
                - DifferentialOperator.coordinate(self._arity, a)
                for a in range(self._arity)
            ]
            for (e, d), c in self._terms.items():
                term = DifferentialOperator.monomial(e, c)
                for axis, k in enumerate(d):
                    for _ in range(k):
                        term = term @ shifted[axis]
                out = out + term
            self._conj = out
        return self._conj

    # text ----------------------------------------------------------------------

    def to_text(self, descending: bool = False) -> str:
        """Canonical text, e.g. ``-2*x - 2*x^2*Dx + 4/3*Dx^3``.

        ``descending=True`` lists the highest derivative order first.
        """
        if not self._terms:
            return "0"
        pieces = []
        ordered = list(self.items())
        if descending:
            ordered.sort(key=lambda kv: (-sum(kv[0][1]), tuple(-k for k in kv[0][1]), sum(kv[0][0]), kv[0][0]))
        for (e, d), c in ordered:
            factors = []
            for axis, k in enumerate(e):
                if k:
                    factors.append(AXES[axis] + (f"^{k}" if k > 1 else ""))
            for axis, k in enumerate(d):
                if k:
                    factors.append("D" + AXES[axis] + (f"^{k}" if k > 1 else ""))
            pieces.append(_format_term(c, factors))
        text = pieces[0]
        for p in pieces[1:]:
            text += " - " + p[1:] if p.startswith("-") else " + " + p
        return text

    def __repr__(self):
        return f"DifferentialOperator({self._arity}, {self.to_text()!r})"

    def to_json(self) -> dict:
        return {
            "arity": self._arity,
            "terms": [
                {"x": list(e), "d": list(d), "re": str(c.re), "im": str(c.im)}
                for (e, d), c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "DifferentialOperator":
        arity = int(data["arity"])
        return cls(
            arity,
            {
                (tuple(t["x"]), tuple(t["d"])): GaussianRational(t["re"], t["im"])
                for t in data["terms"]
            },
        )


def _format_term(c: GaussianRational, factors: list[str]) -> str:
    body = "*".join(factors)
    if c.is_real() or c.is_imaginary():
        q = c.re if c.is_real() else c.im
        unit = "" if c.is_real() else "i"
        neg = q < 0
        q = abs(q)
        if q == 1 and unit:
            coef = unit
        elif q == 1:
            coef = ""
        else:
            coef = str(q) + ("*" + unit if unit else "")
        if coef and body:
            text = coef + "*" + body
        else:
            text = coef or body or "1"
        return "-" + text if neg else text
    coef = f"({c.re}{'+' if c.im > 0 else '-'}{abs(c.im)}*i)"
    return coef + ("*" + body if body else "")


def gaussian_conjugate(op: DifferentialOperator) -> DifferentialOperator:
    return op.gaussian_conjugate()


def apply(op: DifferentialOperator, s: HermiteSeries) -> HermiteSeries:
    """Act with ``op`` on ``exp(-r^2/2) s`` and strip the Gaussian again.

    Returns the polynomial ``exp(r^2/2) op (exp(-r^2/2) s)`` exactly.
    """
    if op.arity != s.arity:
        raise ArityError(f"operator arity {op.arity} != series arity {s.arity}")
    if op.is_zero():
        return HermiteSeries(s.arity)
    return op.gaussian_conjugate().act(s)


# ---------------------------------------------------------------------------
# Normal ordering of raw products and a small text parser
# ---------------------------------------------------------------------------

Factor = Union[str, DifferentialOperator, int, Fraction, GaussianRational]


def _factor_operator(arity: int, f: Factor) -> DifferentialOperator:
    if isinstance(f, DifferentialOperator):
        if f.arity != arity:
            raise ArityError("factor arity mismatch")
        return f
    if isinstance(f, str):
        m = re.fullmatch(r"(D?)([xyz])(?:\^(\d+))?", f.strip())
        if not m:
            raise ValueError(f"unknown factor {f!r}")
        axis = AXES.index(m.group(2))
        power = int(m.group(3) or 1)
        base = (
            DifferentialOperator.derivative(arity, axis)
            if m.group(1)
            else DifferentialOperator.coordinate(arity, axis)
        )
        return base**power
    return DifferentialOperator.identity(arity, GaussianRational.coerce(f))


def normal_order(
    raw: Iterable[tuple[object, Sequence[Factor]]], arity: int = 1
) -> DifferentialOperator:
    """Bring a sum of raw operator words into normal order.

    ``raw`` is a sequence of ``(coefficient, factors)`` pairs; each factor is
    ``"x"``, ``"Dx"``, ``"y^2"``, a scalar or a :class:`DifferentialOperator`.
    The factors of a word are multiplied left to right, so the rightmost
    factor acts first.  ``[(2, ["x", "Dx", "x"])]`` gives ``2*x + 2*x^2*Dx``.
    """
    total = DifferentialOperator(arity)
    for coef, factors in raw:
        word = DifferentialOperator.identity(arity, GaussianRational.coerce(coef))
        for f in factors:
            word = word @ _factor_operator(arity, f)
        total = total + word
    return total


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(D?[xyz](?:\^\d+)?)|(i)|([+\-*]))")


def parse_operator(text: str, arity: int = 1) -> DifferentialOperator:
    """Parse text such as ``"4/3*Dx^3 - 2*x*Dx*x"`` into normal order.

    Grammar: terms joined by ``+``/``-``; factors joined by ``*``; a factor is
    an integer or ``p/q``, ``i``, a coordinate ``x``/``y``/``z`` or a
    derivative ``Dx``/``Dy``/``Dz``, optionally with ``^k``.  Factors keep their
    written order, so non-normal-ordered input is accepted.
    """
    words: list[tuple[GaussianRational, list]] = []
    pos = 0
    sign = 1
    factors: list = []
    coef = ONE
    expect_factor = True
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse operator at {text[pos:]!r}")
        pos = m.end()
        num, fac, imag, op = m.groups()
        if op is not None and op in "+-":
            if not expect_factor or factors or coef != ONE:
                words.append((coef * sign, factors))
                factors, coef = [], ONE
                sign = 1
            sign = -sign if op == "-" else sign
            expect_factor = True
        elif op == "*":
            expect_factor = True
        else:
            if num is not None:
                coef = coef * Fraction(num)
            elif imag is not None:
                coef = coef * I
            else:
                factors.append(fac)
            expect_factor = False
    if factors or coef != ONE or not words:
        words.append((coef * sign, factors))
    return normal_order(words, arity)
