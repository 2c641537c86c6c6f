"""Command line front end.

Input documents are JSON objects ``{"complex": <complex>, "sheaf": <sheaf>}``
or ``{"complex": ..., "sheaf_complex": ...}``; a bare complex (an object
with a ``"group"`` key) stands for the constant sheaf of rank one on it.

Exit codes: 0 success, 1 domain violation or failed equality, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from .chain import build_cochain
from .complex import ComplexError, GammaComplex, NonFreeAction, NotSeparated
from .duality import duality_check, verdier_dual
from .group_algebra import GroupError, Mode, ModeError
from .l2 import L2Report, atiyah_check, hyper_l2, l2_betti, ns_for_degree
from .scalars import format_rational
from .sheaf import ConstructibleSheaf, SheafComplex, SheafError, constant_sheaf, subdivision_pullback

__all__ = ["main", "load_document", "InputError"]

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


class Violation(Exception):
    pass


def load_document(path: str):
    """Return ``(complex, sheaf-or-None, sheaf_complex-or-None)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    try:
        if "complex" in doc:
            c = GammaComplex.from_json(doc["complex"])
        elif "group" in doc:
            c = GammaComplex.from_json(doc)
        else:
            raise InputError(f"{path}: no complex found (expected a 'complex' or 'group' key)")
        F = ConstructibleSheaf.from_json(c, doc["sheaf"]) if "sheaf" in doc else None
        Fc = SheafComplex.from_json(c, doc["sheaf_complex"]) if "sheaf_complex" in doc else None
    except (ComplexError, SheafError, GroupError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: {exc}") from exc
    return c, F, Fc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _document(c: GammaComplex, F: ConstructibleSheaf | None = None, Fc: SheafComplex | None = None) -> dict:
    doc = {"complex": c.to_json()}
    if F is not None:
        doc["sheaf"] = F.to_json()
    if Fc is not None:
        doc["sheaf_complex"] = Fc.to_json()
    return doc


def _write(path: str | None, obj) -> None:
    text = _dump(obj) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _seed(args) -> int:
    env = os.environ.get("L2SHEAF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"L2SHEAF_SEED must be an integer, got {env!r}") from exc
    return args.seed


def _mode_kwargs(args, c: GammaComplex) -> tuple[Mode, dict]:
    mode = Mode(args.mode)
    if mode is Mode.EXACT_FINITE and not c.group.is_finite:
        raise InputError("--mode exact needs a finite group")
    if mode in (Mode.GENERIC_RANK, Mode.QUOTIENT_APPROX) and c.group.is_finite:
        raise InputError(f"--mode {mode.value} needs a free abelian group")
    kw = {"seed": _seed(args)}
    if mode is Mode.QUOTIENT_APPROX:
        if not args.quotient_n:
            raise InputError("--mode quotient needs --quotient-n")
        if any(n <= 0 for n in args.quotient_n):
            raise InputError("--quotient-n values must be positive")
        kw["n"] = list(args.quotient_n)
    elif args.quotient_n:
        raise InputError("--quotient-n only applies to --mode quotient")
    return mode, kw


def _sheaf(c: GammaComplex, F, args) -> ConstructibleSheaf:
    F = F if F is not None else constant_sheaf(c, 1)
    problems = F.violations()
    if problems:
        raise Violation("\n".join(problems))
    if getattr(args, "real", False) and not all(m.is_real() for m in F.maps.values()):
        raise Violation("real: --real given but the sheaf has non-real corestrictions")
    return F


def _report(args, c, F, Fc) -> L2Report:
    mode, kw = _mode_kwargs(args, c)
    if Fc is not None:
        problems = Fc.violations()
        if problems:
            raise Violation("\n".join(problems))
        return hyper_l2(Fc, mode, **kw)
    F = _sheaf(c, F, args)
    return l2_betti(build_cochain(c, F), c.group, mode, **kw)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    c, F, Fc = load_document(args.path)
    problems = list(c.validate())
    if not problems:
        if not c.is_free():
            problems.append("properness: the action is not free (some simplex has a non-trivial stabiliser)")
        if F is not None:
            problems.extend(F.violations())
        if Fc is not None:
            problems.extend(Fc.violations())
    if args.output == "json":
        print(_dump({"valid": not problems, "violations": problems, "separated": not problems and c.separated()}))
    else:
        for p in problems:
            print(p)
        if not problems:
            print("valid")
    return EXIT_VIOLATION if problems else EXIT_OK


def cmd_betti(args) -> int:
    c, F, Fc = load_document(args.path)
    rep = _report(args, c, F, Fc)
    print(_dump(rep.to_json()) if args.output == "json" else rep.text())
    return EXIT_OK


def cmd_euler(args) -> int:
    c, F, Fc = load_document(args.path)
    rep = _report(args, c, F, Fc)
    if args.output == "json":
        print(_dump({"euler_l2": format_rational(rep.euler_l2), "euler_ranks": rep.euler_ranks}))
    else:
        print(f"chi_l2 = {format_rational(rep.euler_l2)}")
    return EXIT_OK


def cmd_atiyah(args) -> int:
    c, F, _ = load_document(args.path)
    mode, kw = _mode_kwargs(args, c)
    res = atiyah_check(c, _sheaf(c, F, args), mode, seed=kw["seed"])
    print(_dump(res.to_json()) if args.output == "json" else res.text())
    return EXIT_OK if res.equal else EXIT_VIOLATION


def cmd_dual(args) -> int:
    c, F, _ = load_document(args.path)
    D = verdier_dual(_sheaf(c, F, args))
    _write(args.out, _document(D.base, Fc=D.complex))
    return EXIT_OK


def cmd_duality_check(args) -> int:
    c, F, _ = load_document(args.path)
    mode, kw = _mode_kwargs(args, c)
    res = duality_check(c, _sheaf(c, F, args), mode, seed=kw["seed"])
    print(_dump(res.to_json()) if args.output == "json" else res.text())
    return EXIT_OK if res.all_equal else EXIT_VIOLATION


def cmd_ns(args) -> int:
    c, F, _ = load_document(args.path)
    if len(args.sizes) < 2 and not c.group.is_finite:
        raise InputError("ns needs at least two quotient sizes")
    if any(n <= 0 for n in args.sizes):
        raise InputError("quotient sizes must be positive")
    K = build_cochain(c, _sheaf(c, F, args))
    degrees = [args.degree] if args.degree is not None else K.degrees
    results = {}
    for k in degrees:
        if k not in K.ranks:
            raise InputError(f"degree {k} outside {K.degrees}")
        results[k] = ns_for_degree(K, k, args.sizes)
    if args.output == "json":
        print(_dump({"schema": "l2sheaf.ns/1", "degrees": {str(k): p.to_json() for k, p in results.items()}}))
    else:
        print("degree  slope  window  points  kernel_fraction")
        for k, p in results.items():
            if p.gap:
                print(f"{k}  gap  -  {p.points}  {p.kernel_fraction:.6g}")
            else:
                lo, hi = p.window
                print(f"{k}  {p.slope:.4f}  [{lo:.4g}, {hi:.4g}]  {p.points}  {p.kernel_fraction:.6g}")
    return EXIT_OK


def cmd_subdivide(args) -> int:
    c, F, Fc = load_document(args.path)
    sub = c.barycentric_subdivision()
    F2 = subdivision_pullback(F, sub)[1] if F is not None else None
    Fc2 = Fc.pullback(sub) if Fc is not None else None
    _write(args.out, _document(sub.complex, F2, Fc2))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l2sheaf", description="L² cohomology of equivariant constructible sheaves")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, modes=True):
        p.add_argument("path", help="input JSON document")
        p.add_argument("--output", choices=["json", "table"], default="table")
        p.add_argument("--seed", type=int, default=0, help="seed for random evaluation points (L2SHEAF_SEED overrides)")
        p.add_argument("--real", action="store_true", help="require real coefficients")
        if modes:
            p.add_argument("--mode", choices=[m.value for m in Mode], default="auto")
            p.add_argument("--quotient-n", type=int, nargs="+", default=None, metavar="N")

    common(sub.add_parser("validate", help="check complex and sheaf axioms"), modes=False)
    common(sub.add_parser("betti", help="L² Betti numbers"))
    common(sub.add_parser("euler", help="L² Euler characteristic"))
    common(sub.add_parser("atiyah", help="compare with the Euler characteristic of the quotient"))
    p = sub.add_parser("dual", help="write the Verdier dual complex of sheaves")
    common(p, modes=False)
    p.add_argument("-o", "--out", default=None, help="output file (default stdout)")
    common(sub.add_parser("duality-check", help="compare b_i(F) with b_-i of its dual"))
    p = sub.add_parser("ns", help="Novikov–Shubin density probe of the Laplacians")
    common(p, modes=False)
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    p.add_argument("--degree", type=int, default=None)
    p = sub.add_parser("subdivide", help="write the barycentric subdivision with pulled-back sheaf")
    common(p, modes=False)
    p.add_argument("-o", "--out", default=None, help="output file (default stdout)")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "betti": cmd_betti,
    "euler": cmd_euler,
    "atiyah": cmd_atiyah,
    "dual": cmd_dual,
    "duality-check": cmd_duality_check,
    "ns": cmd_ns,
    "subdivide": cmd_subdivide,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Violation as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VIOLATION
    except (NonFreeAction, NotSeparated, ComplexError, SheafError, GroupError) as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
