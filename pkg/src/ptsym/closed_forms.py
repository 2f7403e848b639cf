"""Closed-form results: the spectral zeta function of ``p^2 + x^2 (ix)^eps`` and
small-coupling expansions for the quartic oscillator ``p^2/2 + m^2 x^2/2 + g x^4/4``.

The zeta function comes in two variants.  ``"printed"`` evaluates the
expression exactly as it is usually quoted; ``"corrected"`` replaces the
argument of the cosine in the denominator of the trigonometric prefactor,
``eps pi / (4 + 2 eps)``, by ``eps pi / (2 eps + 8)``.  Only the corrected form
agrees with the numerically summed spectrum (to better than ``1e-6`` for
``eps`` in ``[0.02, 1.9]``); see ``notebooks/zeta_check.py``.

The Gamma function is :func:`math.gamma` (libm), which is accurate to a few
ulps on the real line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "DomainError",
    "ZETA_VARIANTS",
    "zeta_closed",
    "zeta_prefactor",
    "AnharmonicParams",
    "anharmonic_energy",
    "energy_coefficients",
    "renormalized_mass",
    "excitation_energy",
    "binding_coefficient",
    "binding_energy",
    "UNBINDING_THRESHOLDS",
    "DELTA2_MAXIMUM",
    "DELTA2_LIMIT",
]

ZETA_VARIANTS = ("printed", "corrected")


class DomainError(ValueError):
    """Argument outside the domain of a closed form."""


def zeta_prefactor(eps: float, variant: str = "printed") -> float:
    """The bracketed trigonometric factor ``1 + cos(..) sin(..) / (cos(..) sin(..))``."""
    if variant not in ZETA_VARIANTS:
        raise ValueError(f"variant must be one of {ZETA_VARIANTS}")
    d = 4.0 + eps
    if variant == "printed":
        den_angle = eps * math.pi / (4.0 + 2.0 * eps)
    else:
        den_angle = eps * math.pi / (2.0 * eps + 8.0)
    num = math.cos(3.0 * eps * math.pi / (2.0 * eps + 8.0)) * math.sin(math.pi / d)
    return 1.0 + num / (math.cos(den_angle) * math.sin(3.0 * math.pi / d))


def zeta_closed(eps: float, variant: str = "printed") -> float:
    """``sum_n 1/E_n`` for ``H = p^2 + x^2 (ix)^eps``, ``eps > 0``.

    Returns ``math.inf`` when ``eps`` is so small that the Gamma-function pole
    at zero overflows.
    """
    eps = float(eps)
    if not eps > 0 or not math.isfinite(eps):
        raise DomainError(f"the eigenvalue sum is defined for eps > 0, got {eps}")
    d = 4.0 + eps
    try:
        gammas = math.gamma(1 / d) * math.gamma(2 / d) * math.gamma(eps / d)
    except OverflowError:
        return math.inf
    denom = d ** ((4.0 + 2.0 * eps) / d) * math.gamma((1 + eps) / d) * math.gamma((2 + eps) / d)
    value = zeta_prefactor(eps, variant) * gammas / denom
    return value if math.isfinite(value) else math.inf


@dataclass(frozen=True)
class AnharmonicParams:
    """Mass ``m > 0`` and quartic coupling ``g >= 0``; ``nu = g / (4 m^3)``."""

    m: float
    g: float

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("mass must be positive")
        if not self.g >= 0:
            raise DomainError("coupling must be non-negative")

    @property
    def nu(self) -> float:
        return self.g / (4.0 * self.m**3)


def _sign(model: str) -> int:
    if model == "conventional":
        return 1
    if model == "pt":
        return -1
    raise ValueError("model must be 'pt' or 'conventional'")


def energy_coefficients(k: int) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients of ``nu^0, nu^1, nu^2`` in ``E_k / m`` for the conventional oscillator.

    The second-order coefficient is the standard Rayleigh-Schroedinger result
    ``-(34k^3 + 51k^2 + 59k + 21)/8``.
    """
    if k < 0:
        raise DomainError("level must be non-negative")
    return (
        Fraction(2 * k + 1, 2),
        Fraction(3 * (2 * k * k + 2 * k + 1), 4),
        -Fraction(34 * k**3 + 51 * k**2 + 59 * k + 21, 8),
    )


def anharmonic_energy(params: AnharmonicParams, k: int, order: int = 1, model: str = "conventional") -> float:
    """Small-coupling expansion of ``E_k`` through ``order`` (1 or 2) in ``nu``.

    ``model="pt"`` is the ``-g x^4`` oscillator, whose series follows from
    ``nu -> -nu``.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    nu = _sign(model) * params.nu
    c = energy_coefficients(k)
    total = sum(float(c[j]) * nu**j for j in range(order + 1))
    return params.m * total


def renormalized_mass(params: AnharmonicParams, model: str = "conventional") -> float:
    """``M = E_1 - E_0 = m (1 + 3 nu)`` to first order."""
    return params.m * (1.0 + 3.0 * _sign(model) * params.nu)


def excitation_energy(params: AnharmonicParams, k: int, model: str = "conventional") -> float:
    """``B_k = E_k - E_0 = m [k + 3 k (k+1) nu / 2]`` to first order."""
    if k < 0:
        raise DomainError("level must be non-negative")
    return params.m * (k + 1.5 * k * (k + 1) * _sign(model) * params.nu)


def binding_coefficient(k: int, model: str = "pt") -> Fraction:
    """Exact coefficient of ``nu`` in ``Delta_k = (B_k - k M) / M``."""
    if k < 2:
        raise DomainError("binding energies are defined for k >= 2")
    return _sign(model) * Fraction(3 * k * (k - 1), 2)


def binding_energy(params: AnharmonicParams, k: int, model: str = "pt") -> float:
    """Leading-order dimensionless binding energy ``Delta_k``; negative means bound."""
    return float(binding_coefficient(k, model)) * params.nu


# Non-perturbative values of nu for the -g x^4 oscillator, quoted for display
# only.  They need non-perturbative solves and are not asserted anywhere.
UNBINDING_THRESHOLDS = {2: 0.0465, 3: 0.039, 4: 0.034, 5: 0.030, 6: 0.027}
DELTA2_MAXIMUM = (0.13, 0.427)  # (nu, Delta_2)
DELTA2_LIMIT = 0.28
