"""Acceptance checks shared by ``ptsym verify`` and the test-suite.

Each ``criterion_N`` returns a :class:`CriterionResult`.  Tolerances are the
stated ones; nothing is loosened when a check fails.  ``EXPECTED_FAILURES``
lists the criteria that do not pass, with the reason recorded in the
decisions ledger.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import matrix_model as mm
from . import spectral as sp
from .closed_forms import zeta_closed
from .coperator import (
    build_c,
    compose_c,
    eigen_residual,
    kernel_from_partner_text,
    kernel_matrix,
)
from .hermite import HermiteSeries, I
from .perturbation import (
    Model,
    all_even_subset,
    degenerate_block,
    first_order_state,
    level_indices,
    second_order_state_ix3,
)

__all__ = [
    "CriterionResult",
    "CRITERIA",
    "EXPECTED_FAILURES",
    "PRINTED_KERNELS",
    "run_all",
    "format_line",
]

# Number of the criterion -> short reason it fails as stated.
EXPECTED_FAILURES = {
    2: "printed two-coordinate kernel lacks the -2/3*y term",
    6: "printed closed form has a wrong denominator cosine",
    8: "eigenfunction expansions do not converge at eps=1",
}


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def as_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
        }


def format_line(r: CriterionResult) -> str:
    tag = "PASS" if r.passed else "FAIL"
    return f"criterion {r.number} {tag} [{r.title}] {r.detail} ({r.seconds:.2f}s)"


def _timed(number: int, title: str, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    t0 = time.perf_counter()
    ok, detail = body()
    return CriterionResult(number, title, bool(ok), detail, time.perf_counter() - t0)


def _series(arity: int, terms) -> HermiteSeries:
    """Series from ``(index, coefficient)`` pairs, skipping negative indices."""
    out = HermiteSeries(arity)
    for idx, c in terms:
        if min(idx) >= 0 and c:
            out = out + HermiteSeries(arity, {tuple(idx): c})
    return out


# ---------------------------------------------------------------------------
# printed reference formulas, transcribed as Hermite-coefficient recipes
# ---------------------------------------------------------------------------


def printed_ip_cubic(n: int) -> HermiteSeries:
    F = Fraction
    return _series(1, [
        ((n + 3,), F(1, 24)),
        ((n + 1,), F(3, 4) * (n + 1)),
        ((n - 1,), -F(3, 2) * n * n),
        ((n - 3,), -F(1, 3) * n * (n - 1) * (n - 2)),
    ])


def printed_q_cubic(n: int) -> HermiteSeries:
    F = Fraction
    f4 = n * (n - 1) * (n - 2) * (n - 3)
    return _series(1, [
        ((n + 6,), -F(1, 1152)),
        ((n + 4,), -F(1, 128) * (4 * n + 7)),
        ((n + 2,), -F(1, 32) * (7 * n * n + 33 * n + 27)),
        ((n - 2,), -F(1, 8) * n * (n - 1) * (7 * n * n - 19 * n + 1)),
        ((n - 4,), -F(1, 8) * f4 * (4 * n - 3)),
        ((n - 6,), -F(1, 18) * f4 * (n - 4) * (n - 5)),
    ])


def printed_b_cubic(n: int) -> Fraction:
    return Fraction(30 * n * n + 30 * n + 11, 8)


def printed_a2_cubic(n: int) -> Fraction:
    return Fraction((2 * n + 1) * (82 * n * n + 82 * n + 87), 144)


def printed_ip_two(m: int, n: int) -> HermiteSeries:
    F = Fraction
    return _series(2, [
        ((m + 2, n + 1), F(1, 24)),
        ((m + 2, n - 1), F(1, 4) * n),
        ((m, n + 1), (m + F(1, 2)) * F(1, 2)),
        ((m, n - 1), -(m + F(1, 2)) * n),
        ((m - 2, n + 1), -F(1, 2) * m * (m - 1)),
        ((m - 2, n - 1), -F(1, 3) * m * (m - 1) * n),
    ])


def printed_ip_three(k: int, l: int, m: int) -> HermiteSeries:
    F = Fraction
    return _series(3, [
        ((k + 1, l + 1, m + 1), F(1, 24)),
        ((k - 1, l + 1, m + 1), F(1, 4) * k),
        ((k + 1, l - 1, m + 1), F(1, 4) * l),
        ((k + 1, l + 1, m - 1), F(1, 4) * m),
        ((k - 1, l - 1, m + 1), -F(1, 2) * k * l),
        ((k - 1, l + 1, m - 1), -F(1, 2) * k * m),
        ((k + 1, l - 1, m - 1), -F(1, 2) * l * m),
        ((k - 1, l - 1, m - 1), -F(1, 3) * k * l * m),
    ])


# Printed kernels in partner notation: upper-case letters are the primed
# coordinates, Dx = d/dx.  Each entry is (model, order, [text of eps^k term]).
PRINTED_KERNELS = {
    "cubic_first_order": ("ix3", 1, ["-i*4/3*Dx^3 + 2*i*x*Dx*x"]),
    "two_coordinate": ("ix2y", 1, ["-i*4/3*Dx^2*Dy - 2/3*i*x*X*Dy + 4/3*i*x*y*Dx"]),
    "three_coordinate": ("ixyz", 1, ["-i*4/3*Dx*Dy*Dz + 2/3*i*x*y*Dz + 2/3*i*x*z*Dy + 2/3*i*y*z*Dx"]),
    "cubic_second_order": (
        "ix3", 2,
        ["-4/3*i*Dx^3 - 2*i*x*X*Dx", "-8/9*Dx^6 - 8/3*x*X*Dx^4 - 2*x^2*X^2*Dx^2 + 12*Dx^2"],
    ),
}


def printed_kernel_corrections(name: str):
    model, order, texts = PRINTED_KERNELS[name]
    arity = Model.parse(model).arity
    return [kernel_from_partner_text(t, arity) for t in texts]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    def body():
        bad = []
        times = []
        t0 = time.perf_counter()
        for n in range(11):
            s = second_order_state_ix3(n)
            if s.iP != printed_ip_cubic(n):
                bad.append(f"iP_{n}")
            if s.Q != printed_q_cubic(n):
                bad.append(f"Q_{n}")
            if s.B != printed_b_cubic(n) or s.A:
                bad.append(f"B_{n}")
            if s.a2 != printed_a2_cubic(n) or s.a1:
                bad.append(f"a_{n}")
        times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        for m in range(5):
            for n in range(5):
                if first_order_state("ix2y", (m, n)).iP != printed_ip_two(m, n):
                    bad.append(f"iP_{m}{n}")
        times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        for k in range(5):
            for l in range(5):
                for m in range(5):
                    if first_order_state("ixyz", (k, l, m)).iP != printed_ip_three(k, l, m):
                        bad.append(f"iP_{k}{l}{m}")
        times.append(time.perf_counter() - t0)
        slow = max(times)
        ok = not bad and slow < 1.0
        detail = (
            f"mismatches={bad or 'none'}; slowest group {slow:.3f}s (limit 1s)"
        )
        return ok, detail

    return _timed(1, "exact perturbative polynomials", body)


def criterion_2() -> CriterionResult:
    def body():
        notes = []
        ok = True
        for name, (model, order, _) in PRINTED_KERNELS.items():
            built = build_c(model, order)
            printed = printed_kernel_corrections(name)
            diffs = [b - p for b, p in zip(built.corrections, printed)]
            if any(not d.is_zero() for d in diffs):
                ok = False
                notes.append(f"{name}: built-printed = {'; '.join(d.to_text() for d in diffs)}")
        for model, order in (("ix3", 2), ("ix2y", 1), ("ixyz", 1)):
            k = build_c(model, order)
            if any(not r.is_zero() for r in compose_c(k)):
                ok = False
                notes.append(f"C^2 != 1 for {model}")
            k1 = build_c(model, 1)
            arity = k1.arity
            checked = 0
            for level in range(7):
                for idx in level_indices(level, arity):
                    state = first_order_state(model, idx)
                    if any(not r.is_zero() for r in eigen_residual(k1, state)):
                        ok = False
                        notes.append(f"eigen check fails for {model}{idx}")
                    checked += 1
            notes.append(f"{model}: {checked} states pass C phi = (-1)^n phi")
        return ok, "; ".join(notes)

    return _timed(2, "C kernels", body)


def criterion_3() -> CriterionResult:
    def body():
        import sympy

        B = sympy.Symbol("B")
        b2 = degenerate_block(2, all_even_subset(2))
        want2 = sympy.expand((B - sympy.Rational(1, 8)) ** 2 * (B - sympy.Rational(7, 8)))
        ok2 = sympy.expand(b2.charpoly_expr() - want2) == 0
        b4 = degenerate_block(4, all_even_subset(4))
        f4 = (192 * B**2 - 496 * B - 33) * (192 * B**2 - 352 * B + 81) ** 2
        ok4 = sympy.expand(b4.charpoly_expr() * 192**3 - f4) == 0
        b6 = degenerate_block(6, all_even_subset(6))
        exact6 = any(r.exact == Fraction(5, 8) for r in b6.roots)
        targets = [5.473, 2.343, 0.391, 4.003, 1.981, -0.193]
        values = [r.value.real for r in b6.roots]
        misses = [t for t in targets if min(abs(v - t) for v in values) > 1e-3]
        ok = ok2 and ok4 and exact6 and not misses
        detail = f"n=2 {ok2}; n=4 {ok4}; n=6 exact 5/8 {exact6}, numeric misses {misses or 'none'}"
        return ok, detail

    return _timed(3, "degenerate mixing blocks", body)


def criterion_4() -> CriterionResult:
    def body():
        notes = []
        ok = True
        t0 = time.perf_counter()
        r0 = sp.solve(sp.HamiltonianFamily.epsilon(0.0), 200)
        dt = time.perf_counter() - t0
        E = r0.eigenvalues[:21]
        err0 = float(np.max(np.abs(E - (2 * np.arange(21) + 1)))) if len(E) >= 21 else math.inf
        ok &= err0 < 1e-8 and dt < 10.0
        notes.append(f"eps=0 max|E-(2n+1)|={err0:.1e} in {dt:.2f}s")
        for eps in (0.5, 1.0, 1.5):
            res = sp.solve(sp.HamiltonianFamily.epsilon(eps), 400)
            E = res.eigenvalues
            real = bool(np.all(np.abs(E.imag) < 1e-8 * np.maximum(1.0, np.abs(E.real))))
            positive = bool(np.all(E.real > 0))
            # the sign clause uses the 11 lowest eigenpairs of the truncated
            # matrix; each must be real so that its PT norm has a sign
            low = res.all_eigenvalues[:11]
            low_real = bool(np.all(np.abs(low.imag) < 1e-8 * np.maximum(1.0, np.abs(low.real))))
            signs = np.sign(res.all_overlaps[:11].real).astype(int)
            alt = low_real and len(signs) == 11 and bool(np.all(signs == (-1) ** np.arange(11)))
            ok &= real and positive and alt
            note = f"eps={eps}: {res.n_retained} converged, real {real}, positive {positive}, signs n<=10 {alt}"
            if res.n_retained < 11:
                note += f" (levels {res.n_retained}..10 below the convergence test)"
            notes.append(note)
        return ok, "; ".join(notes)

    return _timed(4, "spectral solver", body)


def criterion_5() -> CriterionResult:
    def body():
        fit = sp.perturbative_match(0, (0.01, 0.02, 0.04), 200)
        ok = abs(fit.linear) < 1e-6 and abs(fit.quadratic - 1.375) < 0.01 * 1.375
        return ok, f"A0={fit.linear:.2e}, B0={fit.quadratic:.8f}"

    return _timed(5, "perturbative-numeric cross-check", body)


def criterion_6() -> CriterionResult:
    def body():
        notes = []
        ok = True
        for eps in (0.5, 1.0, 1.5, 1.9):
            t0 = time.perf_counter()
            z = sp.zeta_numeric(eps, N=400)
            dt = time.perf_counter() - t0
            printed = zeta_closed(eps, "printed")
            corrected = zeta_closed(eps, "corrected")
            rel = abs(z.value - printed) / abs(printed)
            relc = abs(z.value - corrected) / abs(corrected)
            ok &= rel < 1e-3 and dt < 60.0
            notes.append(f"eps={eps}: rel(printed)={rel:.2e}, rel(corrected)={relc:.1e}, {dt:.1f}s")
        return ok, "; ".join(notes)

    return _timed(6, "spectral zeta", body)


def _unbroken_draws(rng: np.random.Generator, count: int):
    out = []
    while len(out) < count:
        r = rng.uniform(-2.0, 2.0)
        theta = rng.uniform(-math.pi, math.pi)
        s = rng.choice((-1.0, 1.0)) * rng.uniform(0.05, 3.0)
        if s * s > (r * math.sin(theta)) ** 2 * (1 + 1e-6):
            out.append(mm.TwoLevelModel(r, s, theta))
    return out


def criterion_7(seed: int = 0) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        P = mm.PARITY
        eye = np.eye(2)
        for model in _unbroken_draws(rng, 1000):
            sol = mm.solve(model)
            H = model.hamiltonian()
            C = sol.c_matrix
            scale = max(1.0, float(np.max(np.abs(H))), float(np.max(np.abs(C))) ** 2)
            vp, vm = sol.eigenvectors
            ep, em = sol.eigenvalues
            res = [
                np.max(np.abs(H @ vp - ep * vp)),
                np.max(np.abs(H @ vm - em * vm)),
                abs(mm.pt_inner(vp, vp) - 1),
                abs(mm.pt_inner(vm, vm) + 1),
                abs(mm.pt_inner(vp, vm)),
                np.max(np.abs(C @ vp - vp)),
                np.max(np.abs(C @ vm + vm)),
                np.max(np.abs(C @ C - eye)),
                np.max(np.abs(C @ H - H @ C)),
                np.max(np.abs(mm.completeness_matrix(sol) - eye)),
            ]
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            direct = mm.cpt_inner(sol, psi, psi)
            closed = mm.cpt_norm_closed_form(sol.alpha, psi)
            res.append(abs(direct - closed) / max(1.0, abs(closed)))
            worst = max(worst, max(float(x) for x in res) / scale)
        # positivity over random vectors at random unbroken points
        min_norm = math.inf
        for model in _unbroken_draws(rng, 1000):
            sol = mm.solve(model)
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            n = mm.cpt_inner(sol, psi, psi)
            min_norm = min(min_norm, n.real / np.vdot(psi, psi).real)
        # evolution keeps the CPT norm
        drift = 0.0
        for model in _unbroken_draws(rng, 100):
            sol = mm.solve(model)
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            n0 = mm.cpt_inner(sol, psi, psi).real
            for t in (0.5, 3.0, 10.0):
                nt = mm.cpt_inner(sol, mm.evolve(sol, psi, t), mm.evolve(sol, psi, t)).real
                drift = max(drift, abs(nt - n0) / n0)
        # broken phase: unit eigenvectors have vanishing PT norm
        broken = 0.0
        count = 0
        while count < 100:
            r = rng.uniform(0.5, 2.0)
            theta = rng.uniform(0.3, math.pi - 0.3)
            s = rng.uniform(0.0, 0.95) * r * math.sin(theta)
            sol = mm.solve(mm.TwoLevelModel(r, s, theta))
            if sol.phase is not mm.Phase.BROKEN:
                continue
            for v in sol.eigenvectors:
                v = v / np.linalg.norm(v)
                broken = max(broken, abs(mm.pt_inner(v, v)))
            count += 1
        ok = worst < 1e-12 and min_norm > 0 and drift < 1e-10 and broken < 1e-10
        detail = (
            f"identities {worst:.1e}; min CPT norm {min_norm:.3f}; "
            f"evolution drift {drift:.1e}; broken PT norm {broken:.1e}"
        )
        return ok, detail

    return _timed(7, "two-level model", body)


def criterion_8() -> CriterionResult:
    def body():
        res = sp.solve(sp.HamiltonianFamily.epsilon(1.0), 400)
        rep = sp.reconstruct_operators(res, 40)
        sizes = (10, 20, 30, 40)
        comp = [sp.completeness_residual(res, M) for M in sizes]
        mono = all(b < a for a, b in zip(comp, comp[1:]))
        ok = rep.parity_squared < 1e-6 and rep.green < 1e-6 and mono
        detail = (
            f"P^2 {rep.parity_squared:.1e}, H*G {rep.green:.1e} at M=40; "
            f"completeness at M={list(sizes)}: {[f'{c:.2e}' for c in comp]}"
        )
        return ok, detail

    return _timed(8, "operator reconstructions", body)


def criterion_9() -> CriterionResult:
    def body():
        grid = (0.02, 0.04, 0.08)
        kernel = build_c("ix3", 1)
        diffs = []
        for eps in grid:
            res = sp.solve(sp.HamiltonianFamily.cubic(eps), 200)
            Cm = sp.numeric_c_matrix(res, 20).matrix
            diffs.append(float(np.max(np.abs(Cm[:6, :6] - kernel_matrix(kernel, eps, 6)))))
        slope = float(np.polyfit(np.log(grid), np.log(diffs), 1)[0])
        return slope >= 1.9, f"slope {slope:.3f}; differences {[f'{d:.2e}' for d in diffs]}"

    return _timed(9, "kernel vs spectral C", body)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        out.append(fn(seed) if k == 7 else fn())
    return out
