"""Exactly solvable two-level PT-symmetric Hamiltonian.

``H = [[r e^{i theta}, s], [s, r e^{-i theta}]]`` with real ``r, s, theta``,
parity ``P = [[0, 1], [1, 0]]`` and time reversal acting as complex
conjugation.  The symmetry is unbroken when ``s^2 >= r^2 sin^2 theta``; the
mixing angle ``alpha`` is defined by ``sin alpha = (r/s) sin theta`` and taken
in ``[-pi/2, pi/2]``.

This module is numeric (double precision).  Identities are checked with
explicit relative tolerances by the test-suite.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "PARITY",
    "Phase",
    "PhaseError",
    "TwoLevelModel",
    "TwoLevelSolution",
    "solve",
    "pt_inner",
    "cpt_inner",
    "cpt_conjugate",
    "cpt_norm_closed_form",
    "cpt_transform",
    "evolve",
    "is_observable",
    "completeness_matrix",
]

PARITY = np.array([[0.0, 1.0], [1.0, 0.0]])
BOUNDARY_RTOL = 1e-12


class Phase(str, Enum):
    UNBROKEN = "unbroken"
    BROKEN = "broken"
    BOUNDARY = "boundary"


class PhaseError(ValueError):
    """The requested operation needs the unbroken phase."""


@dataclass(frozen=True)
class TwoLevelModel:
    r: float
    s: float
    theta: float

    def __post_init__(self):
        for name in ("r", "s", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def hamiltonian(self) -> np.ndarray:
        r, s, t = self.r, self.s, self.theta
        return np.array([[r * cmath.exp(1j * t), s], [s, r * cmath.exp(-1j * t)]])


@dataclass(frozen=True)
class TwoLevelSolution:
    """Spectrum and symmetry data for one parameter point.

    In the unbroken phase ``eigenvectors[0]`` is the first vector of the
    closed-form pair (the one with ``C v = +v``) and ``eigenvalues[0]`` its
    energy ``r cos theta + s cos alpha``.  Note that for ``s < 0`` this is the
    lower of the two levels.  In the broken phase the eigenvalues are the
    complex pair ordered by imaginary part, eigenvectors come from a dense
    solver and ``c_matrix`` is ``None``.
    """

    model: TwoLevelModel
    phase: Phase
    alpha: complex | float | None
    eigenvalues: tuple[complex, complex]
    eigenvectors: tuple[np.ndarray, np.ndarray]
    c_matrix: np.ndarray | None

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.model.hamiltonian()

    def require_unbroken(self) -> None:
        if self.phase is not Phase.UNBROKEN or self.c_matrix is None:
            raise PhaseError(f"operation needs the unbroken phase, got {self.phase.value}")

    def to_json(self) -> dict:
        def cx(z):
            z = complex(z)
            return [z.real, z.imag]

        out = {
            "r": self.model.r,
            "s": self.model.s,
            "theta": self.model.theta,
            "phase": self.phase.value,
            "alpha": None if self.alpha is None else cx(self.alpha),
            "eigenvalues": [cx(e) for e in self.eigenvalues],
            "eigenvectors": [[cx(v) for v in vec] for vec in self.eigenvectors],
            "pt_norms": [cx(pt_inner(v, v)) for v in self.eigenvectors],
            "c_matrix": None if self.c_matrix is None else [[cx(v) for v in row] for row in self.c_matrix],
        }
        return out


def _classify(m: TwoLevelModel) -> Phase:
    a = m.s * m.s
    b = (m.r * math.sin(m.theta)) ** 2
    scale = max(a, b)
    if scale == 0 or abs(a - b) <= BOUNDARY_RTOL * scale:
        return Phase.BOUNDARY
    return Phase.UNBROKEN if a > b else Phase.BROKEN


def _c_from_alpha(alpha: float) -> np.ndarray:
    sa, ca = math.sin(alpha), math.cos(alpha)
    return np.array([[1j * sa, 1.0], [1.0, -1j * sa]]) / ca


def solve(model: TwoLevelModel) -> TwoLevelSolution:
    """Classify the phase and return eigenpairs, ``alpha`` and ``C``."""
    phase = _classify(model)
    r, s, t = model.r, model.s, model.theta
    if phase is Phase.UNBROKEN:
        alpha = math.asin(max(-1.0, min(1.0, (r / s) * math.sin(t))))
        ca = math.cos(alpha)
        pref = 1.0 / math.sqrt(2.0 * ca)
        plus = pref * np.array([cmath.exp(0.5j * alpha), cmath.exp(-0.5j * alpha)])
        minus = 1j * pref * np.array([cmath.exp(-0.5j * alpha), -cmath.exp(0.5j * alpha)])
        e_plus = r * math.cos(t) + s * ca
        e_minus = r * math.cos(t) - s * ca
        return TwoLevelSolution(
            model, phase, alpha, (complex(e_plus), complex(e_minus)), (plus, minus), _c_from_alpha(alpha)
        )
    # broken phase or boundary: fall back to a dense solver
    vals, vecs = np.linalg.eig(model.hamiltonian())
    order = np.argsort(vals.imag)[::-1] if phase is Phase.BROKEN else np.argsort(vals.real)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    alpha = None
    if s != 0:
        alpha = cmath.asin((r / s) * math.sin(t))
    return TwoLevelSolution(
        model, phase, alpha, (complex(vals[0]), complex(vals[1])), (vecs[:, 0], vecs[:, 1]), None
    )


def pt_inner(u, v) -> complex:
    """``(PT u) . v`` without further conjugation."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return complex((PARITY @ np.conj(u)) @ v)


def cpt_conjugate(solution: TwoLevelSolution, u) -> np.ndarray:
    """The vector ``C P T u``."""
    solution.require_unbroken()
    return solution.c_matrix @ (PARITY @ np.conj(np.asarray(u, dtype=complex)))


def cpt_inner(solution: TwoLevelSolution, u, v) -> complex:
    """``(CPT u) . v``; positive definite in the unbroken phase."""
    return complex(cpt_conjugate(solution, u) @ np.asarray(v, dtype=complex))


def cpt_norm_closed_form(alpha: float, psi) -> float:
    """Self-product of ``psi = (x + i y, u + i v)`` written out in components."""
    a, b = complex(psi[0]), complex(psi[1])
    x, y, u, v = a.real, a.imag, b.real, b.imag
    sa = math.sin(alpha)
    return (x * x + v * v + 2 * x * v * sa + y * y + u * u - 2 * y * u * sa) / math.cos(alpha)


def completeness_matrix(solution: TwoLevelSolution) -> np.ndarray:
    """``sum_pm |e><e|`` with CPT bras; equals the identity."""
    solution.require_unbroken()
    out = np.zeros((2, 2), dtype=complex)
    for v in solution.eigenvectors:
        out += np.outer(v, cpt_conjugate(solution, v))
    return out


def evolve(solution: TwoLevelSolution, psi0, t: float) -> np.ndarray:
    """``exp(-i H t) psi0``.

    In the unbroken phase the propagator is assembled from the eigenpairs with
    CPT bras.  Otherwise a general eigendecomposition is used; the result is
    still ``exp(-iHt) psi0`` but no norm is conserved.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if solution.phase is Phase.UNBROKEN:
        out = np.zeros(2, dtype=complex)
        for e, v in zip(solution.eigenvalues, solution.eigenvectors):
            out += cmath.exp(-1j * e * t) * v * (cpt_conjugate(solution, v) @ psi0)
        return out
    vals, vecs = np.linalg.eig(solution.hamiltonian)
    return vecs @ (np.exp(-1j * vals * t) * np.linalg.solve(vecs, psi0))


def cpt_transform(solution: TwoLevelSolution, A) -> np.ndarray:
    """Matrix of ``CPT A CPT`` (the antilinear parts cancel)."""
    solution.require_unbroken()
    C = solution.c_matrix
    A = np.asarray(A, dtype=complex)
    return C @ PARITY @ np.conj(A) @ np.conj(C) @ PARITY


def is_observable(solution: TwoLevelSolution, A, atol: float = 1e-12) -> bool:
    """True when ``A^T == CPT A CPT`` entrywise within ``atol`` (scaled by ``|A|``)."""
    A = np.asarray(A, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(A))))
    return bool(np.max(np.abs(A.T - cpt_transform(solution, A))) <= atol * scale)
