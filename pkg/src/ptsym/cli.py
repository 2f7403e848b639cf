"""Command-line front end: ``ptsym <subcommand> [options]``.

Exit codes: 0 on success, 1 when a computation fails (or ``verify`` finds a
failing criterion), 2 for invalid arguments.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import closed_forms as cf
from . import matrix_model as mm
from . import spectral as sp
from .coperator import CapabilityError, build_c
from .perturbation import (
    Model,
    all_even_subset,
    degenerate_block,
    first_order_state,
    second_order_state_ix3,
)

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    """Arguments that parse but make no sense together."""


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_plain(obj):
    """Convert results to JSON-ready values: floats keep their shortest repr,
    fractions become ``"p/q"``, complex numbers ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(float(obj.real)), to_plain(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dump_json(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    v = to_plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def dump_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if columns is None:
        columns = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands; each returns (payload for json, rows for csv or None, exit code)
# ---------------------------------------------------------------------------

SPECTRUM_COLUMNS = ["epsilon", "n", "re_E", "im_E", "pt_sign", "converged"]


def _sweep_points(spec: str) -> list[float]:
    try:
        a, b, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"--sweep expects a:b:step, got {spec!r}") from exc
    if not step > 0 or not b > a:
        raise UsageError("--sweep needs b > a and step > 0")
    count = int(math.floor((b - a) / step + 1e-9))
    pts = [round(a + k * step, 12) for k in range(count + 1)]
    # half-open like range(): the end point itself is excluded
    return [p for p in pts if p < b - 1e-12]


def _spectrum_rows(family: str, param: float, m: float, levels: int, basis: int) -> list[dict]:
    fam = sp.HamiltonianFamily.parse(family, param, m)
    res = sp.solve(fam, basis)
    rows = []
    for n in range(min(levels, len(res.all_eigenvalues))):
        E = complex(res.all_eigenvalues[n])
        real = abs(E.imag) < sp.REAL_RTOL * max(1.0, abs(E.real))
        sign = int(np.sign(res.all_overlaps[n].real)) if real else 0
        rows.append({
            "epsilon": float(param),
            "n": n,
            "re_E": E.real,
            "im_E": E.imag if not real else 0.0,
            "pt_sign": sign,
            "converged": n < res.n_retained,
        })
    return rows


def cmd_spectrum(args):
    if args.levels < 1 or args.basis < 4:
        raise UsageError("--levels must be >= 1 and --basis >= 4")
    if args.sweep:
        points = _sweep_points(args.sweep)

        def one(p):
            return _spectrum_rows(args.family, p, args.m, args.levels, args.basis)

        with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
            chunks = list(pool.map(one, points))
        rows = [r for chunk in chunks for r in chunk if r["pt_sign"] != 0]
    else:
        if args.param is None:
            raise UsageError("spectrum needs --param or --sweep")
        rows = _spectrum_rows(args.family, args.param, args.m, args.levels, args.basis)
        if args.real_only:
            rows = [r for r in rows if r["pt_sign"] != 0]
    rows.sort(key=lambda r: (r["epsilon"], r["n"]))
    payload = {"family": args.family, "basis": args.basis, "levels": rows}
    return payload, rows, SPECTRUM_COLUMNS, EXIT_OK


def cmd_zeta(args):
    eps = args.epsilon
    out = {
        "epsilon": eps,
        "closed_printed": cf.zeta_closed(eps, "printed"),
        "closed_corrected": cf.zeta_closed(eps, "corrected"),
    }
    code = EXIT_OK
    if args.compare_numeric:
        z = sp.zeta_numeric(eps, N=args.basis)
        out.update({
            "numeric": z.value,
            "tail": z.tail,
            "tail_error": z.tail_error,
            "levels_summed": z.levels,
            "numeric_converged": z.converged,
            "rel_diff_printed": abs(z.value - out["closed_printed"]) / abs(out["closed_printed"]),
            "rel_diff_corrected": abs(z.value - out["closed_corrected"]) / abs(out["closed_corrected"]),
        })
        if not z.converged:
            code = EXIT_NUMERIC
    return out, [out], None, code


def _parse_index(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(k) for k in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--index expects comma-separated integers, got {text!r}") from exc


def cmd_perturb(args):
    model = Model.parse(args.model)
    if args.index is not None:
        index = _parse_index(args.index)
    elif args.n is not None and model is Model.IX3:
        index = (args.n,)
    else:
        raise UsageError("give --n for ix3 or --index k,l[,m] for the other models")
    if args.order == 2:
        if model is not Model.IX3:
            raise CapabilityError("second order is implemented for ix3 only")
        state = second_order_state_ix3(index[0])
    else:
        state = first_order_state(model, index)
    out = state.to_json()
    out["energy"] = [_gr(c) for c in state.energy()]
    return out, None, None, EXIT_OK


def _gr(c):
    return str(c.re) if c.is_real() else {"re": str(c.re), "im": str(c.im)}


def cmd_coperator(args):
    kernel = build_c(args.model, args.order)
    if args.format == "text":
        return kernel.to_text() + "\n", None, None, EXIT_OK
    return kernel.to_json(), None, None, EXIT_OK


def _parse_complex_pair(text: str) -> np.ndarray:
    try:
        parts = [complex(p.strip().replace("i", "j")) for p in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--psi0 expects two complex numbers 'a,b', got {text!r}") from exc
    if len(parts) != 2:
        raise UsageError("--psi0 needs exactly two components")
    return np.array(parts)


def cmd_matrix2x2(args):
    model = mm.TwoLevelModel(args.r, args.s, args.theta)
    sol = mm.solve(model)
    out = sol.to_json()
    if args.t is not None:
        psi0 = _parse_complex_pair(args.psi0) if args.psi0 else np.array([1.0 + 0j, 0.0j])
        psi_t = mm.evolve(sol, psi0, args.t)
        ev = {"t": args.t, "psi0": list(psi0), "psi_t": list(psi_t),
              "dirac_norm_0": float(np.vdot(psi0, psi0).real),
              "dirac_norm_t": float(np.vdot(psi_t, psi_t).real)}
        if sol.phase is mm.Phase.UNBROKEN:
            ev["cpt_norm_0"] = mm.cpt_inner(sol, psi0, psi0).real
            ev["cpt_norm_t"] = mm.cpt_inner(sol, psi_t, psi_t).real
        out["evolution"] = ev
    return out, None, None, EXIT_OK


def cmd_degenerate(args):
    if args.subset == "all-even":
        subset = all_even_subset(args.level)
        if not subset:
            raise UsageError(f"level {args.level} has no all-even states")
    else:
        subset = None
    block = degenerate_block(args.level, subset)
    out = block.to_json()
    out["subset"] = args.subset
    return out, None, None, EXIT_OK


def cmd_bindings(args):
    params = cf.AnharmonicParams(args.m, args.g)
    coef = cf.binding_coefficient(args.k, args.model)
    delta = cf.binding_energy(params, args.k, args.model)
    out = {
        "model": args.model,
        "m": args.m,
        "g": args.g,
        "k": args.k,
        "nu": params.nu,
        "coefficient": coef,
        "binding_energy": delta,
        "bound": delta < 0,
        "renormalized_mass": cf.renormalized_mass(params, args.model),
        "excitation_energy": cf.excitation_energy(params, args.k, args.model),
    }
    return out, [out], None, EXIT_OK


def cmd_verify(args):
    from .acceptance import format_line, run_all

    only = None
    if args.only:
        only = {int(k) for k in args.only.split(",")}
    results = run_all(seed=args.seed, only=only)
    for r in results:
        print(format_line(r), file=sys.stderr if args.out is None and args.format != "text" else sys.stdout)
    rows = [r.as_dict() for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC
    return {"criteria": rows, "all_passed": code == EXIT_OK}, rows, None, code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path; 'json' or 'csv' select the format and print to stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--seed", type=int, default=0, help="seed for random test draws")

    p = argparse.ArgumentParser(prog="ptsym", description="PT-symmetric spectra, C operators and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues from the oscillator basis")
    s.add_argument("--family", choices=("eps", "cubic", "quartic"), default="eps")
    s.add_argument("--param", type=float, help="eps for eps/cubic, g for quartic")
    s.add_argument("--m", type=float, default=1.0, help="quartic mass")
    s.add_argument("--levels", type=int, default=10)
    s.add_argument("--basis", type=int, default=200)
    s.add_argument("--sweep", help="a:b:step over the parameter (end excluded); keeps real levels")
    s.add_argument("--real-only", action="store_true")
    s.set_defaults(func=cmd_spectrum, default_format="csv")

    s = sub.add_parser("zeta", parents=[common], help="sum of inverse eigenvalues")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--compare-numeric", action="store_true")
    s.add_argument("--basis", type=int, default=400)
    s.set_defaults(func=cmd_zeta, default_format="json")

    s = sub.add_parser("perturb", parents=[common], help="exact perturbative eigenstates")
    s.add_argument("--model", choices=("ix3", "ix2y", "ixyz"), default="ix3")
    s.add_argument("--n", type=int)
    s.add_argument("--index")
    s.add_argument("--order", type=int, choices=(1, 2), default=1)
    s.set_defaults(func=cmd_perturb, default_format="json")

    s = sub.add_parser("coperator", parents=[common], help="C kernel as a differential operator")
    s.add_argument("--model", choices=("ix3", "ix2y", "ixyz"), default="ix3")
    s.add_argument("--order", type=int, choices=(1, 2), default=1)
    s.set_defaults(func=cmd_coperator, default_format="json")

    s = sub.add_parser("matrix2x2", parents=[common], help="the two-level model")
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--t", type=float)
    s.add_argument("--psi0", help="initial state 'a,b' (complex, e.g. 1+2j,0)")
    s.set_defaults(func=cmd_matrix2x2, default_format="json")

    s = sub.add_parser("degenerate", parents=[common], help="second-order mixing on an ixyz level")
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--subset", choices=("all-even", "full"), default="all-even")
    s.set_defaults(func=cmd_degenerate, default_format="json")

    s = sub.add_parser("bindings", parents=[common], help="quartic binding energies")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--g", type=float, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--model", choices=("pt", "conventional"), default="pt")
    s.set_defaults(func=cmd_bindings, default_format="json")

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_verify, default_format="text")
    return p


def _resolve_output(args) -> tuple[str, str | None]:
    out, fmt = args.out, args.format
    if out in ("json", "csv") and fmt is None:
        fmt, out = out, None
    return fmt or args.default_format, out


USAGE_ERRORS = (UsageError, CapabilityError, cf.DomainError, sp.ContourError, mm.PhaseError, ValueError)
NUMERIC_ERRORS = (sp.NumericError, sp.BrokenPhaseError, ArithmeticError, np.linalg.LinAlgError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt, out_path = _resolve_output(args)
    args.format, args.out = fmt, out_path
    try:
        payload, rows, columns, code = args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"ptsym: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except USAGE_ERRORS as exc:
        print(f"ptsym {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(payload, str):
        text = payload
    elif fmt == "csv":
        if rows is None:
            print(f"ptsym {args.command}: error: csv output is not available here", file=sys.stderr)
            return EXIT_USAGE
        text = dump_csv(rows, columns)
    elif fmt == "text" and args.command == "verify":
        text = ""
    else:
        text = dump_json(payload)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
