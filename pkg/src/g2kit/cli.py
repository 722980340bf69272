"""Command-line front end.

Exit status: 0 on success, 1 when a check fails, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import ccy, coupled, g2algebra as g2, generalized as gen, spin7, verify
from .exterior import BACKENDS, Form, GradeError, norm2

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    pass


def _num(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def _emit(obj, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, indent=2, sort_keys=False, default=_num) + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("G2KIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"G2KIT_THREADS must be an integer, got {env!r}")
    return 1


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}")


def _load_form(path: str, backend: str) -> Form:
    try:
        return Form.from_dict(_load_json(path)).to_backend(backend)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed form JSON: {exc}")


# ------------------------------------------------------------- commands

def cmd_verify(args) -> int:
    ctx = verify.Context(backend=args.backend, seed=args.seed, trials=args.trials,
                         rtol=args.rtol, atol=args.atol, threads=_threads(args))
    report = verify.run_suite(args.suite, ctx)
    _emit(report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def _form_summary(f: Form) -> dict:
    return {"form": f.to_dict(), "norm2": _num(norm2(f))}


def cmd_decompose(args) -> int:
    f = _load_form(args.input, args.backend)
    if f.grade != args.space:
        raise InputError(f"input has grade {f.grade}, expected {args.space}")
    if args.space == 2:
        p7, p14 = g2.decompose2(f)
        parts = {"pi7": p7, "pi14": p14}
    else:
        p1, p7, p27 = g2.decompose3(f)
        parts = {"pi1": p1, "pi7": p7, "pi27": p27}
    total = Form.zero(f.grade, f.backend)
    for p in parts.values():
        total = total + p
    out = {name: _form_summary(p) for name, p in parts.items()}
    out["resum_exact"] = total == f if f.backend == "exact" else None
    out["resum_residual"] = _num((total - f).max_abs())
    _emit(out)
    return EXIT_OK


def cmd_torsion(args) -> int:
    d = _load_json(args.input)
    try:
        if isinstance(d, dict) and "tau0" in d:
            t = g2.TorsionTriple.from_dict(d)
            if args.backend != t.backend:
                t = g2.TorsionTriple(float(t.tau0), t.tau1.to_backend("f64"),
                                     t.tau3.to_backend("f64"))
            h = g2.assemble_H(t)
            _emit({"H": h.to_dict(), "norm2": _num(norm2(h)),
                   "norm2_formula": _num(g2.h_norm2_formula(t))})
        else:
            h = Form.from_dict(d).to_backend(args.backend)
            if h.grade != 3:
                raise InputError("torsion input must be a 3-form or a torsion triple")
            _emit(g2.decompose_H(h).to_dict())
    except (KeyError, TypeError, GradeError) as exc:
        raise InputError(f"malformed torsion input: {exc}")
    except ValueError as exc:
        raise InputError(str(exc))
    return EXIT_OK


def cmd_spin(args) -> int:
    f = _load_form(args.input, args.backend)
    eta = spin7.eta0(args.backend)
    out = {"grade": f.grade, "action_on_eta0": [_num(x) for x in spin7.act(f, eta)]}
    if f.grade == 2:
        out["g2_valued"] = spin7.is_g2_2form(f)[0]
    if f.grade == 3:
        out["slashed_on_eta0"] = [_num(x) for x in spin7.slashed_act(f, eta)]
    _emit(out)
    return EXIT_OK


def cmd_residual(args) -> int:
    try:
        p = gen.PointFields.from_dict(_load_json(args.input))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed PointFields JSON: {exc}")
    sym, skew, lie1 = gen.ric_plus_residual(p)
    out = {"sym": _num(max((abs(x) for x in sym.flat), default=0)),
           "skew": _num(skew.max_abs()), "lie": _num(lie1.max_abs()),
           "splus": _num(gen.scalar_splus(p))}
    _emit(out)
    return EXIT_OK


def cmd_coupled(args) -> int:
    if args.samples < 1:
        raise InputError("--samples must be at least 1")
    rows = coupled.run_sample_suite(args.samples, args.seed, _threads(args),
                                    with_gradient=args.gradient,
                                    break_bianchi=args.break_bianchi, backend=args.backend)
    families = sorted(rows[0])
    worst = {k: max(r[k] for r in rows) for k in families}
    tol = 0.0 if args.backend == "exact" else args.atol
    nonzero = any(v > tol for v in worst.values())
    out = {"samples": args.samples, "seed": args.seed, "backend": args.backend,
           "break_bianchi": args.break_bianchi, "max_residual": worst,
           "nonzero_residual": nonzero}
    if args.json:
        _emit(out)
    else:
        for k in families:
            print(f"{k:10s} {worst[k]!r}")
        print("nonzero residual flagged" if nonzero else "all residuals zero")
    if args.break_bianchi:
        return EXIT_OK if nonzero else EXIT_FAIL
    return EXIT_FAIL if nonzero else EXIT_OK


def cmd_tower(args) -> int:
    try:
        seq = coupled.tower_rank(args.n, args.r1, args.depth)
    except ValueError as exc:
        raise InputError(str(exc))
    except OverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit({"n": args.n, "r1": args.r1, "depth": args.depth, "ranks": seq})
    return EXIT_OK


def _svg(result: ccy.SweepResult, fit: bool) -> str:
    w, h, pad = 480, 360, 48
    xs = [math.log10(r.alpha) for r in result.rows]
    ys = [math.log10(r.norm) for r in result.rows]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (w - 2 * pad)

    def py(y):
        return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'viewBox="0 0 {w} {h}">',
             f'<rect width="{w}" height="{h}" fill="white"/>',
             f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
             f'<text x="{w / 2}" y="{h - 12}" text-anchor="middle" font-size="12">'
             f'log10 alpha</text>',
             f'<text x="14" y="{h / 2}" font-size="12" transform="rotate(-90 14 {h / 2})" '
             f'text-anchor="middle">log10 norm</text>',
             f'<text x="{w / 2}" y="20" text-anchor="middle" font-size="13">'
             f'case {result.case}: slope {result.slope:.4f}</text>']
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="steelblue"/>')
    if fit:
        n = len(xs)
        mx, my = sum(xs) / n, sum(ys) / n
        b = my - result.slope * mx
        parts.append(f'<line x1="{px(x0):.2f}" y1="{py(result.slope * x0 + b):.2f}" '
                     f'x2="{px(x1):.2f}" y2="{py(result.slope * x1 + b):.2f}" '
                     f'stroke="firebrick" stroke-dasharray="4 3"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_ccy_sweep(args) -> int:
    if args.points < 4:
        raise InputError("the sweep grid needs at least 4 points")
    if not 0 < args.alpha_min < args.alpha_max:
        raise InputError("need 0 < alpha-min < alpha-max")
    grid = ccy.log_grid(args.alpha_max, args.alpha_min, args.points)
    try:
        res = ccy.scaling_sweep(args.case, args.delta, args.m, grid, args.normalization,
                                threads=_threads(args))
    except ccy.RegimeError as exc:
        raise InputError(str(exc))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["alpha", "norm", "norm_over_alpha2"])
            for r in res.rows:
                wr.writerow([repr(r.alpha), repr(r.norm), repr(r.norm_over_alpha2)])
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(_svg(res, args.fit))
    if args.json:
        _emit({"case": res.case, "delta": res.delta, "m": res.m,
               "normalization": res.normalization, "slope": res.slope,
               "ym_rhs_slope": res.ym_slope, "limit_const": res.limit_const,
               "rows": [{"alpha": r.alpha, "norm": r.norm,
                         "norm_over_alpha2": r.norm_over_alpha2,
                         "ym_rhs_norm": r.ym_rhs_norm} for r in res.rows]})
    print(f"case={res.case} slope={res.slope:.6f} limit_const={res.limit_const:.6f}")
    return EXIT_OK


# --------------------------------------------------------------- parser

def _check_ids() -> str:
    lines = [f"  {c.id:34s} [{c.suite}] {c.anchor}" for c in verify.REGISTRY.values()]
    return "checks:\n" + "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=BACKENDS, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker count (default: $G2KIT_THREADS or 1)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--rtol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--atol", type=float, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="g2kit", parents=[common],
                                description="Pointwise G2-structure algebra toolkit.")
    p.set_defaults(backend="exact", seed=0, threads=None, json=False, rtol=1e-12,
                   atol=1e-14)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run invariant suites",
                       epilog=_check_ids(), formatter_class=argparse.RawDescriptionHelpFormatter)
    v.add_argument("--suite", required=True, choices=verify.SUITES + ("all",))
    v.add_argument("--trials", type=int, default=20)
    v.set_defaults(fn=cmd_verify)

    d = sub.add_parser("decompose", parents=[common], help="split a form into G2 types")
    d.add_argument("input")
    d.add_argument("--space", type=int, choices=(2, 3), required=True)
    d.set_defaults(fn=cmd_decompose)

    t = sub.add_parser("torsion", parents=[common],
                       help="3-form to torsion triple, or triple to H")
    t.add_argument("input")
    t.set_defaults(fn=cmd_torsion)

    s = sub.add_parser("spin", parents=[common], help="Clifford action of a form on eta0")
    s.add_argument("input")
    s.set_defaults(fn=cmd_spin)

    r = sub.add_parser("residual", parents=[common],
                       help="generalized Ricci residuals of a PointFields bundle")
    r.add_argument("input")
    r.set_defaults(fn=cmd_residual)

    c = sub.add_parser("coupled", parents=[common], help="gravitino sample verification")
    c.add_argument("--samples", type=int, default=10)
    c.add_argument("--break-bianchi", action="store_true")
    c.add_argument("--gradient", action="store_true",
                   help="use the sample family with a g2-valued plus-derivative of F")
    c.set_defaults(fn=cmd_coupled)

    tw = sub.add_parser("tower", parents=[common], help="instanton tower ranks")
    tw.add_argument("--n", type=int, default=7)
    tw.add_argument("--r1", type=int, required=True)
    tw.add_argument("--depth", type=int, default=2)
    tw.set_defaults(fn=cmd_tower)

    cc = sub.add_parser("ccy", parents=[common], help="contact Calabi-Yau family")
    ccsub = cc.add_subparsers(dest="ccy_command", required=True)
    sw = ccsub.add_parser("sweep", parents=[common], help="alpha scaling sweep")
    sw.add_argument("--case", type=int, choices=(1, 2, 3), required=True)
    sw.add_argument("--delta", type=float, default=None)
    sw.add_argument("--m", type=float, default=None)
    sw.add_argument("--alpha-min", type=float, default=1e-3)
    sw.add_argument("--alpha-max", type=float, default=1e-1)
    sw.add_argument("--points", type=int, default=9)
    sw.add_argument("--normalization", choices=ccy.NORMALIZATIONS, default="e0")
    sw.add_argument("--out", help="CSV output path")
    sw.add_argument("--svg", help="SVG plot path")
    sw.add_argument("--fit", action="store_true", help="draw the fitted line in the SVG")
    sw.set_defaults(fn=cmd_ccy_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
