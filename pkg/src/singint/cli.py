"""Command-line front end: ``singint <subcommand> ...``.

Exit codes: 0 success, 1 I/O or argument error, 2 validation failure,
3 ellipticity or convergence failure.  Structured inputs (characteristics,
Besov parameters) are JSON files; fields and symbols are SIF1 files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import beltrami, besov, characteristic, equations, fields, operators, symbol
from .errors import ConvergenceError, EllipticityError, PreconditionError, SingIntError, ValidationError
from .sif import read_field, write_csv, write_field

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_SOLVE = 0, 1, 2, 3

# Which subcommand reaches which library operation.  Each operation appears once.
COMMAND_OPERATIONS = {
    "validate": ["validate_characteristic", "eval_characteristic"],
    "symbol": ["compute_symbol", "symbol_bounds", "adjoint_symbol"],
    "apply": ["apply_multiplier", "dft_forward", "dft_inverse", "circular_shift"],
    "pv-apply": ["apply_pv"],
    "besov": ["besov_seminorm", "besov_norm", "finite_difference", "lp_norm"],
    "verify-bound": ["verify_operator_bound"],
    "solve": ["check_invertible", "solve_multiplier_equation", "solve_perturbed", "neumann_solve"],
    "witness": ["zero_divisor_witness"],
    "beltrami": ["build_homeomorphism", "beltrami_residual", "beurling_apply", "cauchy_transform"],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_char(spec):
    """A JSON descriptor path, or one of the built-in names ``beurling`` / ``zero``."""
    if spec == "beurling":
        return characteristic.Characteristic.beurling()
    if spec == "zero":
        return characteristic.Characteristic.zero(2)
    return characteristic.Characteristic.from_json(_load_json(spec))


def _load_symbol(path):
    f, head = read_field(path)
    if head.get("kind") != "symbol":
        raise ValidationError(f"{path} does not hold a symbol")
    a = head.get("a", [0.0, 0.0])
    return symbol.Symbol(f.grid, complex(a[0], a[1]), f.values, {"kind": "file", "path": str(path)})


def _grid(args, n):
    return fields.GridSpec.square(n, args.size, args.period)


def _complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _shift(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"shift must be comma-separated integers: {text!r}") from exc


def _fmt(x):
    return repr(float(x))


# -- subcommands --------------------------------------------------------------

def cmd_validate(args):
    c = _load_char(args.char)
    rep = characteristic.validate_characteristic(c, args.gamma)
    out = rep.to_json()
    if args.direction:
        d = [float(v) for v in args.direction.split(",")]
        v = characteristic.eval_characteristic(c, d)
        out["value_at_direction"] = [v.real, v.imag]
    if args.out:
        _dump_json(args.out, out)
    print(f"validate: mean_residual={_fmt(rep.mean_residual)} lgamma_norm={_fmt(rep.lgamma_norm)} "
          f"passed={rep.passed}")
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_symbol(args):
    c = _load_char(args.char)
    s = symbol.compute_symbol(c, args.a, _grid(args, c.n), args.eps, args.R, method=args.method)
    if args.adjoint:
        s = symbol.adjoint_symbol(s)
    b = symbol.symbol_bounds(s)
    write_field(args.out, fields.Field(s.grid, s.values), s.header())
    if args.report:
        _dump_json(args.report, {"minmod": b.minmod, "maxmod": b.maxmod, "argmin": list(b.argmin),
                                 "warnings": list(s.warnings)})
    print(f"symbol: minmod={_fmt(b.minmod)} maxmod={_fmt(b.maxmod)} argmin={tuple(b.argmin)} -> {args.out}")
    return EXIT_OK


def cmd_apply(args):
    f, _ = read_field(args.field)
    if args.transform == "forward":
        g = fields.dft_forward(f)
    elif args.transform == "inverse":
        g = fields.dft_inverse(f)
    elif args.shift is not None:
        g = fields.circular_shift(f, args.shift)
    elif args.symbol:
        g = operators.apply_multiplier(_load_symbol(args.symbol), f)
    else:
        raise UsageError("apply needs one of --symbol, --transform or --shift")
    write_field(args.out, g)
    if args.csv:
        write_csv(args.csv, g)
    print(f"apply: l2={_fmt(fields.ell2_norm(g))} -> {args.out}")
    return EXIT_OK


def cmd_pv_apply(args):
    f, _ = read_field(args.field)
    c = _load_char(args.char)
    g = operators.apply_pv(c, f, args.eps, args.R, threads=args.threads)
    write_field(args.out, g)
    print(f"pv-apply: l2={_fmt(fields.ell2_norm(g))} -> {args.out}")
    return EXIT_OK


def cmd_besov(args):
    f, _ = read_field(args.field)
    params = fields.BesovParams.from_json(_load_json(args.params))
    if args.difference is not None:
        d = fields.finite_difference(f, args.difference, params.m)
        write_field(args.out, d)
        print(f"besov: difference order {params.m} l{params.p:g}={_fmt(fields.lp_norm(d, params.p))} -> {args.out}")
        return EXIT_OK
    q = besov.BesovQuadrature.build(f.grid, args.H)
    est = besov.besov_seminorm(f, params, q)
    lp = fields.lp_norm(f, params.p)
    norm = besov.besov_norm(f, params, q)
    out = {"lp_norm": lp, "seminorm": est.value, "tail_bound": est.tail, "seminorm_upper": est.upper,
           "norm": norm, "H": q.H, "shifts": len(q), "params": params.to_json()}
    if args.out:
        _dump_json(args.out, out)
    print(f"besov: norm={_fmt(norm)} seminorm={_fmt(est.value)} tail={_fmt(est.tail)}")
    return EXIT_OK


def cmd_verify_bound(args):
    s = _load_symbol(args.symbol)
    fs = [read_field(p)[0] for p in args.field]
    params = fields.BesovParams.from_json(_load_json(args.params))
    q = besov.BesovQuadrature.build(s.grid, args.H)
    rep = besov.verify_operator_bound(s, fs, params, q, args.delta)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rep.dumps() + "\n")
    if args.shifts_csv:
        with open(args.shifts_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["field", "shift", "diff_norm", "image_diff_norm"])
            for i, h, a, b in rep.per_shift_rows():
                w.writerow([i, ";".join(map(str, h)), _fmt(a), _fmt(b)])
    print(f"verify-bound: max_ratio={_fmt(max(rep.ratios))} proxy={_fmt(rep.proxy)} passed={rep.passed}")
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_solve(args):
    g, _ = read_field(args.rhs)
    if args.mu:
        mu_field, _ = read_field(args.mu)
        mu = equations.MuField(mu_field, args.q) if args.q is not None else equations.MuField.tight(mu_field)
        res = equations.neumann_solve(mu, g, args.tol, args.max_iter)
        f = res.solution
        if args.trace:
            equations.write_trace_csv(args.trace, res.trace)
        summary = f"iterations={res.iterations} increment={_fmt(res.trace[-1][1])}"
    else:
        c = _load_char(args.char)
        s = symbol.compute_symbol(c, args.a, g.grid)
        d = equations.check_invertible(s, args.inv_tol)
        if not d.invertible:
            raise EllipticityError(f"symbol not invertible: min|A^|={d.minmod:.3e}", d.witness, d.minmod)
        spec = equations.EquationSpec(s, g)
        if args.kernel_width:
            k = equations.CompactKernel.gaussian(g.grid, args.kernel_width, args.kernel_norm)
            f = equations.solve_perturbed(spec, k, args.tol, method=args.method, max_iter=args.max_iter)
        else:
            f = equations.solve_multiplier_equation(spec, args.inv_tol)
        summary = f"minmod={_fmt(d.minmod)}"
    write_field(args.out, f)
    print(f"solve: {summary} -> {args.out}")
    return EXIT_OK


def cmd_witness(args):
    c = _load_char(args.char)
    s = symbol.compute_symbol(c, args.a, _grid(args, c.n))
    w = equations.zero_divisor_witness(s, args.count, args.inv_tol)
    os.makedirs(args.out_dir, exist_ok=True)
    for k, y in enumerate(w.fields, 1):
        write_field(os.path.join(args.out_dir, f"witness_{k}.sif"), y)
    _dump_json(os.path.join(args.out_dir, "witness.json"), {
        "center": list(w.center), "radii": w.radii, "norms": w.norms, "images": w.images,
        "monotone": w.monotone})
    print(f"witness: center={tuple(w.center)} final_image={_fmt(w.images[-1])} monotone={w.monotone}")
    return EXIT_OK


def cmd_beltrami(args):
    if args.apply:
        if not args.field:
            raise UsageError("--apply needs --field")
        f, _ = read_field(args.field)
        g = beltrami.beurling_apply(f) if args.apply == "beurling" else beltrami.cauchy_transform(f)
        write_field(args.out, g)
        print(f"beltrami: {args.apply} l2={_fmt(fields.ell2_norm(g))} -> {args.out}")
        return EXIT_OK
    if not args.mu:
        raise UsageError("beltrami needs --mu (or --apply with --field)")
    mu_field, _ = read_field(args.mu)
    mu = equations.MuField(mu_field, args.q) if args.q is not None else equations.MuField.tight(mu_field)
    hom = beltrami.build_homeomorphism(mu, args.tol, args.max_iter)
    diag = hom.diagnostics()
    diag["beltrami_residual"] = beltrami.beltrami_residual(hom.density, hom.pi_density, mu)
    if args.out:
        hom.write_csv(args.out)
    if args.sif:
        write_field(args.sif, hom.materialize(), {"kind": "homeomorphism", "normalization": diag["normalization"]})
    if args.diagnostics:
        _dump_json(args.diagnostics, diag)
    print(f"beltrami: residual={_fmt(diag['beltrami_residual'])} jacobian_min={_fmt(diag['jacobian_min'])} "
          f"(g = mu normalization)")
    return EXIT_OK if diag["jacobian_positive"] else EXIT_VALIDATION


# -- parser -------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="singint", description="Multidimensional singular integral operators on periodic grids.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def grid_args(sp):
        sp.add_argument("--size", type=int, default=128, help="points per axis")
        sp.add_argument("--period", type=float, default=2 * math.pi)

    sp = sub.add_parser("validate", help="check a characteristic")
    sp.add_argument("--char", required=True)
    sp.add_argument("--gamma", type=float, default=2.0)
    sp.add_argument("--direction", help="comma-separated unit vector to evaluate at")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("symbol", help="compute a symbol on a grid")
    sp.add_argument("--char", required=True)
    sp.add_argument("--a", type=_complex, default=0j)
    grid_args(sp)
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--R", type=float)
    sp.add_argument("--method", choices=["continuum", "lattice"], default="continuum")
    sp.add_argument("--adjoint", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_symbol)

    sp = sub.add_parser("apply", help="apply a symbol, a DFT or a shift to a field")
    sp.add_argument("--field", required=True)
    sp.add_argument("--symbol")
    sp.add_argument("--transform", choices=["forward", "inverse"])
    sp.add_argument("--shift", type=_shift)
    sp.add_argument("--out", required=True)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("pv-apply", help="direct principal-value quadrature")
    sp.add_argument("--field", required=True)
    sp.add_argument("--char", required=True)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--R", type=float)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_pv_apply)

    sp = sub.add_parser("besov", help="Besov norm of a field")
    sp.add_argument("--field", required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--H", type=float)
    sp.add_argument("--difference", type=_shift, help="write the m-th difference along this shift instead")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_besov)

    sp = sub.add_parser("verify-bound", help="empirical Besov operator bound")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--field", action="append", required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--H", type=float)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--out")
    sp.add_argument("--shifts-csv")
    sp.set_defaults(func=cmd_verify_bound)

    sp = sub.add_parser("solve", help="solve a f + S f (+ T f) = g, or f - mu Pi f = g")
    sp.add_argument("--rhs", required=True)
    sp.add_argument("--char", default="zero")
    sp.add_argument("--a", type=_complex, default=1 + 0j)
    sp.add_argument("--inv-tol", type=float)
    sp.add_argument("--kernel-width", type=float, help="add a Gaussian smoothing perturbation of this width")
    sp.add_argument("--kernel-norm", type=float, default=0.5)
    sp.add_argument("--method", choices=["auto", "dense", "gmres", "neumann"], default="auto")
    sp.add_argument("--mu", help="dilatation field; switches to the contraction solver")
    sp.add_argument("--q", type=float)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--trace")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("witness", help="zero-divisor witness for a non-invertible symbol")
    sp.add_argument("--char", required=True)
    sp.add_argument("--a", type=_complex, default=0j)
    grid_args(sp)
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--inv-tol", type=float)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("beltrami", help="principal homeomorphism, or apply the Beurling/Cauchy transform")
    sp.add_argument("--mu")
    sp.add_argument("--q", type=float)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--out", help="CSV of grid-point images (or SIF1 output with --apply)")
    sp.add_argument("--sif")
    sp.add_argument("--diagnostics")
    sp.add_argument("--apply", choices=["beurling", "cauchy"])
    sp.add_argument("--field")
    sp.set_defaults(func=cmd_beltrami)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"singint: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, PreconditionError) as exc:
        print(f"singint: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (EllipticityError, ConvergenceError) as exc:
        print(f"singint: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except (OSError, ValueError, KeyError, SingIntError, json.JSONDecodeError) as exc:
        print(f"singint: {exc}", file=sys.stderr)
        return EXIT_IO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
